//! End-to-end solve of `min_{H ≥ 0} ‖M − WH‖²_F` under one of three sparsity
//! regimes, all served from the same per-column regularization paths.

use std::time::Instant;

use rayon::prelude::*;

use crate::densela::{frob_norm, gram, norm_sq, DenseMatrix};
use crate::error::{Error, Result};
use crate::homotopy::{regularization_path_with_gram, PathOptions, RegularizationPath};
use crate::nnls::{nnls_gram, DEFAULT_TOL};
use crate::selector::{assemble, build_cost_tables, init_gain, select, CostTables};

/// Default reporting threshold for counting an entry as nonzero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Global budget of `q` nonzeros across all of `H`.
    Shamans { q: usize },
    /// At most `k` nonzeros in every column.
    KSparse { k: usize },
    /// Plain NNLS per column.
    Unconstrained,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Shamans { .. } => "shamans",
            Mode::KSparse { .. } => "ksparse",
            Mode::Unconstrained => "unconstrained",
        }
    }

    pub fn budget(&self) -> Option<usize> {
        match *self {
            Mode::Shamans { q } => Some(q),
            Mode::KSparse { k } => Some(k),
            Mode::Unconstrained => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub mode: Mode,
    pub tol: f64,
    pub zero_threshold: f64,
    pub strict_budget: bool,
    /// Per-column cap on path length; `None` means `50 r`.
    pub max_breakpoints: Option<usize>,
    pub parallel: bool,
}

impl SolveConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            tol: DEFAULT_TOL,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            strict_budget: false,
            max_breakpoints: None,
            parallel: true,
        }
    }

    pub fn shamans(q: usize) -> Self {
        Self::new(Mode::Shamans { q })
    }

    pub fn ksparse(k: usize) -> Self {
        Self::new(Mode::KSparse { k })
    }

    pub fn unconstrained() -> Self {
        Self::new(Mode::Unconstrained)
    }

    fn validate(&self, r: usize, n: usize) -> Result<()> {
        match self.mode {
            Mode::Shamans { q } if q > r * n => Err(Error::InvalidConfig(format!(
                "budget q = {q} exceeds r * n = {}",
                r * n
            ))),
            Mode::KSparse { k } if k > r => Err(Error::InvalidConfig(format!(
                "k = {k} exceeds dictionary size r = {r}"
            ))),
            _ if !(self.tol > 0.0) => Err(Error::InvalidConfig(format!(
                "tolerance must be > 0, got {}",
                self.tol
            ))),
            _ if !(self.zero_threshold >= 0.0) => Err(Error::InvalidConfig(format!(
                "zero threshold must be >= 0, got {}",
                self.zero_threshold
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnmixReport {
    /// `‖M − WH‖_F / ‖M‖_F`.
    pub rel_error: f64,
    /// Entries above the zero threshold, divided by the number of columns.
    pub avg_sparsity: f64,
    /// Exact nonzero count of `H`.
    pub nnz: usize,
    /// `per_column_sparsity[k]` counts columns with `k` entries above the
    /// zero threshold.
    pub per_column_sparsity: Vec<usize>,
    pub elapsed_path_ms: f64,
    pub elapsed_select_ms: f64,
    /// Columns whose homotopy hit the breakpoint cap and were solved by
    /// plain NNLS instead.
    pub fallback_columns: Vec<usize>,
}

/// Reconstruction error and sparsity statistics of `H`. Timing fields are
/// left at zero.
pub fn metrics(
    m: &DenseMatrix,
    w: &DenseMatrix,
    h: &DenseMatrix,
    zero_threshold: f64,
) -> Result<UnmixReport> {
    let denom = frob_norm(m);
    if denom == 0.0 {
        return Err(Error::ZeroDataMatrix);
    }
    let wh = w.matmul(h)?;
    let rel_error = frob_norm(&m.sub(&wh)?) / denom;
    let (r, n) = h.shape();
    let mut per_column_sparsity = vec![0usize; r + 1];
    let mut above = 0usize;
    for col in h.columns() {
        let c = col.iter().filter(|&&v| v > zero_threshold).count();
        per_column_sparsity[c] += 1;
        above += c;
    }
    let nnz = h.as_slice().iter().filter(|&&v| v != 0.0).count();
    Ok(UnmixReport {
        rel_error,
        avg_sparsity: if n == 0 { 0.0 } else { above as f64 / n as f64 },
        nnz,
        per_column_sparsity,
        elapsed_path_ms: 0.0,
        elapsed_select_ms: 0.0,
        fallback_columns: Vec::new(),
    })
}

/// Regularization paths of every column of `M`, in column order.
#[derive(Clone, Debug)]
pub struct ColumnPaths {
    pub paths: Vec<RegularizationPath>,
    pub fallback_columns: Vec<usize>,
}

fn check_inputs(m: &DenseMatrix, w: &DenseMatrix) -> Result<()> {
    if m.rows() != w.rows() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} rows but dictionary has {}",
            m.rows(),
            w.rows()
        )));
    }
    if w.cols() == 0 {
        return Err(Error::DimensionMismatch("dictionary has no columns".into()));
    }
    if let Some(j) = w.columns().position(|c| c.iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroColumnInDictionary(j));
    }
    Ok(())
}

/// Runs the homotopy on every column of `M` against `W`, sharing `WᵀW`.
pub fn compute_paths(m: &DenseMatrix, w: &DenseMatrix, cfg: &SolveConfig) -> Result<ColumnPaths> {
    check_inputs(m, w)?;
    let p = gram(w);
    let opts = PathOptions {
        tol: cfg.tol,
        max_breakpoints: cfg.max_breakpoints,
    };
    let one = |j: usize| -> Result<(RegularizationPath, bool)> {
        let b = m.col(j);
        match regularization_path_with_gram(w, &p, b, &opts) {
            Ok(path) => Ok((path, false)),
            Err(Error::IterationLimit { .. }) => {
                let ell = w.tr_mul_vec(b);
                let b_norm_sq = norm_sq(b);
                let sol = nnls_gram(&p, &ell, b_norm_sq, cfg.tol).map_err(|e| Error::Column {
                    column: j,
                    source: Box::new(e),
                })?;
                let err = crate::densela::residual_sq(w, &sol.x, b);
                Ok((
                    RegularizationPath::from_terminal(b_norm_sq, sol.x, err),
                    true,
                ))
            }
            Err(e) => Err(Error::Column {
                column: j,
                source: Box::new(e),
            }),
        }
    };
    let results: Vec<Result<(RegularizationPath, bool)>> = if cfg.parallel {
        (0..m.cols()).into_par_iter().map(one).collect()
    } else {
        (0..m.cols()).map(one).collect()
    };
    let mut paths = Vec::with_capacity(m.cols());
    let mut fallback_columns = Vec::new();
    for (j, res) in results.into_iter().enumerate() {
        let (path, fell_back) = res?;
        if fell_back {
            fallback_columns.push(j);
        }
        paths.push(path);
    }
    Ok(ColumnPaths {
        paths,
        fallback_columns,
    })
}

/// Result of [`solve_detailed`]: the abundance matrix, its report and the
/// intermediate tables.
#[derive(Clone, Debug)]
pub struct Solution {
    pub h: DenseMatrix,
    pub report: UnmixReport,
    pub tables: CostTables,
    /// Final cursors (sparsity level per column) for table-driven modes.
    pub cursors: Option<Vec<usize>>,
    pub paths: ColumnPaths,
}

pub fn solve(
    m: &DenseMatrix,
    w: &DenseMatrix,
    cfg: &SolveConfig,
) -> Result<(DenseMatrix, UnmixReport)> {
    let sol = solve_detailed(m, w, cfg)?;
    Ok((sol.h, sol.report))
}

pub fn solve_detailed(m: &DenseMatrix, w: &DenseMatrix, cfg: &SolveConfig) -> Result<Solution> {
    check_inputs(m, w)?;
    let (r, n) = (w.cols(), m.cols());
    cfg.validate(r, n)?;

    let t0 = Instant::now();
    let paths = compute_paths(m, w, cfg)?;
    let elapsed_path_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let tables = build_cost_tables(&paths.paths, r, n)?;
    let (h, cursors) = match cfg.mode {
        Mode::Shamans { q } => {
            let out = select(init_gain(&tables), q, cfg.strict_budget);
            (assemble(&tables, &out.cursors)?, Some(out.cursors))
        }
        Mode::KSparse { k } => {
            let cursors = vec![k; n];
            (assemble(&tables, &cursors)?, Some(cursors))
        }
        Mode::Unconstrained => {
            let mut h = DenseMatrix::zeros(r, n);
            for (j, path) in paths.paths.iter().enumerate() {
                h.col_mut(j).copy_from_slice(&path.terminal().solution);
            }
            (h, None)
        }
    };
    let elapsed_select_ms = t1.elapsed().as_secs_f64() * 1e3;

    let mut report = metrics(m, w, &h, cfg.zero_threshold)?;
    report.elapsed_path_ms = elapsed_path_ms;
    report.elapsed_select_ms = elapsed_select_ms;
    report.fallback_columns = paths.fallback_columns.clone();
    Ok(Solution {
        h,
        report,
        tables,
        cursors,
        paths,
    })
}
