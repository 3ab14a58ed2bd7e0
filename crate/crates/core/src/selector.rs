//! Global sparsity-budget selection over per-column regularization paths.
//!
//! `C(k, j)` holds the best squared error reachable in column `j` with at
//! most `k` nonzeros, `ΔC(k, j) = C(k−1, j) − C(k, j)` the gain of the k-th
//! nonzero, and `G(i, j)` the average gain per nonzero of moving column
//! `j`'s cursor from its current level up to `i`. Selection repeatedly
//! takes the largest entry of `G` until the budget is spent.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::densela::DenseMatrix;
use crate::error::{Error, Result};
use crate::homotopy::RegularizationPath;

#[derive(Clone, Debug, PartialEq)]
pub struct CostTables {
    r: usize,
    n: usize,
    /// `(r+1) × n`, row `k` is sparsity level `k`.
    cost: DenseMatrix,
    /// `solutions[k]` is the `r × n` matrix whose column `j` is `Sol(k, j)`.
    solutions: Vec<DenseMatrix>,
    /// `r × n`, row `k−1` holds `ΔC(k, ·)`.
    delta: DenseMatrix,
    /// `(r+1) × n` column-major mask of cells written by an entry of exactly
    /// that cardinality.
    present: Vec<bool>,
}

impl CostTables {
    /// Empty tables with every cost at +∞.
    pub fn new(r: usize, n: usize) -> Self {
        let mut cost = DenseMatrix::zeros(r + 1, n);
        for j in 0..n {
            cost.col_mut(j).fill(f64::INFINITY);
        }
        Self {
            r,
            n,
            cost,
            solutions: vec![DenseMatrix::zeros(r, n); r + 1],
            delta: DenseMatrix::zeros(r, n),
            present: vec![false; (r + 1) * n],
        }
    }

    /// Tables from an explicit cost matrix with zero solutions. Columns must
    /// be nonincreasing.
    pub fn from_costs(cost: DenseMatrix) -> Result<Self> {
        let (rows, n) = cost.shape();
        if rows == 0 {
            return Err(Error::DimensionMismatch(
                "cost matrix needs a k = 0 row".into(),
            ));
        }
        let r = rows - 1;
        for j in 0..n {
            if cost.col(j).windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidConfig(format!(
                    "cost column {j} is not nonincreasing"
                )));
            }
        }
        let delta = delta_cost(&cost);
        Ok(Self {
            r,
            n,
            cost,
            solutions: vec![DenseMatrix::zeros(r, n); r + 1],
            delta,
            present: vec![true; (r + 1) * n],
        })
    }

    /// Folds one column's path into the tables: each entry of cardinality
    /// `k` lowers rows `k..=r` wherever its error improves on them.
    pub fn insert_path(&mut self, j: usize, path: &RegularizationPath) -> Result<()> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: self.n,
            });
        }
        if !path.entries.iter().any(|e| e.cardinality() == 0) {
            return Err(Error::MissingZeroEntry(j));
        }
        let rows = self.r + 1;
        for entry in &path.entries {
            if entry.solution.len() != self.r {
                return Err(Error::DimensionMismatch(format!(
                    "path solution of length {} for r = {}",
                    entry.solution.len(),
                    self.r
                )));
            }
            let k = entry.cardinality();
            for i in k..=self.r {
                if entry.error_sq < self.cost.get(i, j) {
                    self.cost.set(i, j, entry.error_sq);
                    self.solutions[i]
                        .col_mut(j)
                        .copy_from_slice(&entry.solution);
                    if i == k {
                        self.present[j * rows + k] = true;
                    }
                }
            }
        }
        let c = self.cost.col(j);
        for k in 1..=self.r {
            self.delta.set(k - 1, j, c[k - 1] - c[k]);
        }
        Ok(())
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `C(k, j)`.
    pub fn cost(&self, k: usize, j: usize) -> f64 {
        self.cost.get(k, j)
    }

    pub fn cost_matrix(&self) -> &DenseMatrix {
        &self.cost
    }

    /// `ΔC(k, j)` for `k ≥ 1`.
    pub fn delta(&self, k: usize, j: usize) -> f64 {
        self.delta.get(k - 1, j)
    }

    pub fn delta_matrix(&self) -> &DenseMatrix {
        &self.delta
    }

    /// `Sol(k, j)`.
    pub fn solution(&self, k: usize, j: usize) -> &[f64] {
        self.solutions[k].col(j)
    }

    pub fn is_present(&self, k: usize, j: usize) -> bool {
        self.present[j * (self.r + 1) + k]
    }

    /// `Σ_j C(cursors[j], j)`.
    pub fn total_error(&self, cursors: &[usize]) -> f64 {
        cursors
            .iter()
            .enumerate()
            .map(|(j, &k)| self.cost(k, j))
            .sum()
    }

    /// Largest `k` with `ΔC(k, j) > 0`: the deepest level the selector can
    /// ever move column `j` to.
    pub fn useful_depth(&self, j: usize) -> usize {
        (1..=self.r)
            .rev()
            .find(|&k| self.delta(k, j) > 0.0)
            .unwrap_or(0)
    }
}

/// Builds `C`, `Sol` and `ΔC` from one path per column.
pub fn build_cost_tables(paths: &[RegularizationPath], r: usize, n: usize) -> Result<CostTables> {
    if paths.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} paths for {n} columns",
            paths.len()
        )));
    }
    let mut tables = CostTables::new(r, n);
    for (j, path) in paths.iter().enumerate() {
        tables.insert_path(j, path)?;
    }
    Ok(tables)
}

/// `ΔC(k, j) = C(k−1, j) − C(k, j)` for `k = 1..=r`, stored at row `k−1`.
pub fn delta_cost(cost: &DenseMatrix) -> DenseMatrix {
    let (rows, n) = cost.shape();
    let r = rows.saturating_sub(1);
    let mut delta = DenseMatrix::zeros(r, n);
    for j in 0..n {
        let c = cost.col(j);
        for k in 1..=r {
            delta.set(k - 1, j, c[k - 1] - c[k]);
        }
    }
    delta
}

/// Average gain per nonzero for each level above `cursor`, written into
/// `out` (row `i−1` is level `i`); levels at or below the cursor are zero.
fn fill_gain_column(delta: &[f64], cursor: usize, out: &mut [f64]) {
    out[..cursor].fill(0.0);
    let mut acc = 0.0;
    for i in cursor + 1..=delta.len() {
        acc += delta[i - 1];
        out[i - 1] = acc / (i - cursor) as f64;
    }
}

/// One candidate move: advance column `col`'s cursor to level `row`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pick {
    pub gain: f64,
    pub col: usize,
    pub row: usize,
}

impl Eq for Pick {}

// Best first: larger gain, then smaller column, then smaller row.
impl Ord for Pick {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .gain
            .total_cmp(&self.gain)
            .then(self.col.cmp(&other.col))
            .then(self.row.cmp(&other.row))
    }
}

impl PartialOrd for Pick {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
pub struct SelectionState {
    delta: DenseMatrix,
    cursors: Vec<usize>,
    gain: DenseMatrix,
    nnz_total: usize,
    column_best: BTreeSet<Pick>,
    best_of: Vec<Option<Pick>>,
}

impl SelectionState {
    /// Cursors at zero, `G` as prefix means of `ΔC`.
    pub fn new(delta: &DenseMatrix) -> Self {
        let (r, n) = delta.shape();
        let mut state = Self {
            delta: delta.clone(),
            cursors: vec![0; n],
            gain: DenseMatrix::zeros(r, n),
            nnz_total: 0,
            column_best: BTreeSet::new(),
            best_of: vec![None; n],
        };
        for j in 0..n {
            state.refresh_column(j);
        }
        state
    }

    pub fn cursors(&self) -> &[usize] {
        &self.cursors
    }

    pub fn nnz_total(&self) -> usize {
        self.nnz_total
    }

    /// `G`, with row `i−1` holding level `i`.
    pub fn gain(&self) -> &DenseMatrix {
        &self.gain
    }

    /// Global argmax of `G` among positive entries.
    pub fn best(&self) -> Option<Pick> {
        self.column_best.first().copied()
    }

    /// Best positive move whose nonzero increment is at most `room`.
    pub fn best_within(&self, room: usize) -> Option<Pick> {
        if let Some(top) = self.best() {
            if top.row - self.cursors[top.col] <= room {
                return Some(top);
            }
        }
        let mut best: Option<Pick> = None;
        for (j, &cur) in self.cursors.iter().enumerate() {
            let g = self.gain.col(j);
            for row in cur + 1..=(cur + room).min(g.len()) {
                let cand = Pick {
                    gain: g[row - 1],
                    col: j,
                    row,
                };
                if cand.gain > 0.0 && best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    /// Moves `pick.col`'s cursor to `pick.row` and rescans that column.
    pub fn apply(&mut self, pick: Pick) {
        let j = pick.col;
        assert!(pick.row > self.cursors[j], "cursor moves must be forward");
        self.nnz_total += pick.row - self.cursors[j];
        self.cursors[j] = pick.row;
        self.refresh_column(j);
    }

    /// One unconstrained greedy iteration.
    pub fn step(&mut self) -> Option<Pick> {
        let pick = self.best()?;
        self.apply(pick);
        Some(pick)
    }

    fn refresh_column(&mut self, j: usize) {
        fill_gain_column(self.delta.col(j), self.cursors[j], self.gain.col_mut(j));
        if let Some(old) = self.best_of[j].take() {
            self.column_best.remove(&old);
        }
        let cur = self.cursors[j];
        let mut best: Option<Pick> = None;
        for (idx, &g) in self.gain.col(j).iter().enumerate().skip(cur) {
            if g > 0.0 && best.is_none_or(|b| g > b.gain) {
                best = Some(Pick {
                    gain: g,
                    col: j,
                    row: idx + 1,
                });
            }
        }
        if let Some(b) = best {
            self.column_best.insert(b);
        }
        self.best_of[j] = best;
    }
}

pub fn init_gain(tables: &CostTables) -> SelectionState {
    SelectionState::new(tables.delta_matrix())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionOutcome {
    pub cursors: Vec<usize>,
    pub nnz_total: usize,
    /// Moves in the order they were taken.
    pub picks: Vec<Pick>,
    /// True when selection stopped because no positive gain remained.
    pub exhausted: bool,
}

/// Greedy budget allocation. In default mode the last move may overshoot `q`
/// by up to `r − 1`; in strict mode no move may exceed the budget.
pub fn select(mut state: SelectionState, q: usize, strict: bool) -> SelectionOutcome {
    let mut picks = Vec::new();
    let mut exhausted = false;
    while state.nnz_total < q {
        if state.best().is_none() {
            exhausted = true;
            break;
        }
        let pick = if strict {
            match state.best_within(q - state.nnz_total) {
                Some(p) => p,
                None => break,
            }
        } else {
            state.best().unwrap()
        };
        state.apply(pick);
        picks.push(pick);
    }
    SelectionOutcome {
        nnz_total: state.nnz_total,
        cursors: state.cursors,
        picks,
        exhausted,
    }
}

/// `H(:, j) = Sol(cursors[j], j)`.
pub fn assemble(tables: &CostTables, cursors: &[usize]) -> Result<DenseMatrix> {
    if cursors.len() != tables.n {
        return Err(Error::DimensionMismatch(format!(
            "{} cursors for {} columns",
            cursors.len(),
            tables.n
        )));
    }
    let mut h = DenseMatrix::zeros(tables.r, tables.n);
    for (j, &k) in cursors.iter().enumerate() {
        if k > tables.r {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: tables.r + 1,
            });
        }
        h.col_mut(j).copy_from_slice(tables.solution(k, j));
    }
    Ok(h)
}
