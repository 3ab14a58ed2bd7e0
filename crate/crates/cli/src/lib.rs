//! Command-line front end: reads `W` and `M` as CSV, solves for a sparse
//! nonnegative `H`, and writes `H`, a JSON report and optional abundance
//! maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shamans::{Mode, SolveConfig};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "shamans",
    version,
    about = "Sparse nonnegative unmixing with a global sparsity budget"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve min ‖M − WH‖ over sparse H ≥ 0.
    Solve(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Global budget of --budget nonzeros in H.
    Shamans,
    /// At most --k nonzeros per column.
    Ksparse,
    /// No sparsity constraint.
    Unconstrained,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Dictionary W (m x r), CSV.
    #[arg(long = "dict")]
    pub dict_path: PathBuf,
    /// Data matrix M (m x n), CSV.
    #[arg(long = "data")]
    pub data_path: PathBuf,
    /// Output path for H (r x n), CSV.
    #[arg(long = "out")]
    pub out_path: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Shamans)]
    pub mode: ModeArg,
    /// Total nonzero budget q (shamans mode).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Per-column sparsity k (ksparse mode).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Entries above this count as nonzero in the report.
    #[arg(long = "zero-thresh", default_value_t = 1e-3)]
    pub zero_threshold: f64,
    /// Never exceed the budget (shamans mode).
    #[arg(long)]
    pub strict_budget: bool,
    /// Write a JSON report here.
    #[arg(long = "report")]
    pub report_path: Option<PathBuf>,
    /// Directory for one PGM abundance map per row of H.
    #[arg(long)]
    pub maps_dir: Option<PathBuf>,
    #[arg(long)]
    pub map_width: Option<usize>,
    #[arg(long)]
    pub map_height: Option<usize>,
    /// Worker threads for the per-column paths.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl SolveArgs {
    /// Checks flag combinations and builds the solver configuration.
    pub fn config(&self) -> Result<SolveConfig, CliError> {
        let mode = match (self.mode, self.budget, self.k) {
            (ModeArg::Shamans, Some(q), None) => Mode::Shamans { q },
            (ModeArg::Shamans, None, _) => {
                return Err(CliError::Usage("--mode shamans requires --budget".into()))
            }
            (ModeArg::Ksparse, None, Some(k)) => Mode::KSparse { k },
            (ModeArg::Ksparse, _, None) => {
                return Err(CliError::Usage("--mode ksparse requires --k".into()))
            }
            (ModeArg::Unconstrained, None, None) => Mode::Unconstrained,
            _ => {
                return Err(CliError::Usage(
                    "give exactly the budget flag that matches --mode".into(),
                ))
            }
        };
        let maps = [
            self.maps_dir.is_some(),
            self.map_width.is_some(),
            self.map_height.is_some(),
        ];
        if maps.iter().any(|&b| b) && !maps.iter().all(|&b| b) {
            return Err(CliError::Usage(
                "--maps-dir, --map-width and --map-height go together".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        let mut cfg = SolveConfig::new(mode);
        cfg.tol = self.tol;
        cfg.zero_threshold = self.zero_threshold;
        cfg.strict_budget = self.strict_budget;
        cfg.parallel = self.threads != Some(1);
        Ok(cfg)
    }
}

pub fn run_solve(args: &SolveArgs) -> Result<shamans::UnmixReport, CliError> {
    let cfg = args.config()?;
    let w = io::read_csv_matrix(&args.dict_path)?;
    let m = io::read_csv_matrix(&args.data_path)?;
    if let (Some(width), Some(height)) = (args.map_width, args.map_height) {
        if width * height != m.cols() {
            return Err(CliError::ShapeMismatch(format!(
                "{width} x {height} maps need {} data columns, found {}",
                width * height,
                m.cols()
            )));
        }
    }

    let (h, report) = match args.threads {
        Some(t) if t > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?;
            pool.install(|| shamans::solve(&m, &w, &cfg))?
        }
        _ => shamans::solve(&m, &w, &cfg)?,
    };

    io::write_csv_matrix(&h, &args.out_path)?;
    if let Some(path) = &args.report_path {
        io::write_report_json(&report, &cfg.mode, path)?;
    }
    if let (Some(dir), Some(width), Some(height)) =
        (&args.maps_dir, args.map_width, args.map_height)
    {
        io::export_abundance_maps(&h, width, height, dir)?;
    }
    Ok(report)
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match cli.command {
        Command::Solve(args) => match run_solve(&args) {
            Ok(report) => {
                println!(
                    "rel_error={:.6} avg_sparsity={:.4} nnz={} path_ms={:.2} select_ms={:.2}",
                    report.rel_error,
                    report.avg_sparsity,
                    report.nnz,
                    report.elapsed_path_ms,
                    report.elapsed_select_ms
                );
                if !report.fallback_columns.is_empty() {
                    eprintln!(
                        "warning: {} column(s) fell back to plain NNLS: {:?}",
                        report.fallback_columns.len(),
                        report.fallback_columns
                    );
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    }
}
