//! Homotopy (regularization path) for the ℓ1-penalized NNLS problem
//!
//! ```text
//! min_{x ≥ 0}  ½‖Ax − b‖² + λ eᵀx
//! ```
//!
//! For a fixed active set `K` the optimal biased solution is affine in λ,
//! `x(K) = a_K − λ b_K`, and the gradient on the complement is
//! `c_K − λ d_K`. Walking λ down from `λ_max = max ℓ`, the path changes
//! whenever one of these affine pieces crosses zero: a positive entry
//! drops out (`a_K(k) − λ b_K(k) = 0` with `b_K(k) < 0`) or a zero entry's
//! gradient turns negative (`c_K(k) − λ d_K(k) = 0` with `d_K(k) < 0`).
//!
//! Every path entry stores the unbiased refit on its active set. Entry `t`
//! is the optimal active set on `[entries[t].lambda, entries[t-1].lambda]`;
//! the first entry is the empty set, optimal for every `λ ≥ λ_max`.

use crate::densela::{gram, norm_sq, residual_sq, submatrix, Cholesky, DenseMatrix, IndexSet};
use crate::error::{Error, Result};
use crate::nnls::nnls_gram;

#[derive(Clone, Debug, PartialEq)]
pub struct PathEntry {
    /// Lower end of the λ-interval on which `active_set` is optimal.
    pub lambda: f64,
    /// Homotopy active set `K`.
    pub active_set: IndexSet,
    /// Strictly positive entries of `solution`; equals `active_set` unless
    /// the unbiased refit had to clip.
    pub support: IndexSet,
    /// Unbiased solution, zero outside `active_set`.
    pub solution: Vec<f64>,
    /// `‖A x* − b‖²`.
    pub error_sq: f64,
}

impl PathEntry {
    /// Number of nonzeros of the unbiased solution.
    pub fn cardinality(&self) -> usize {
        self.support.len()
    }
}

/// Affine biased solution `a − λ b` on an entry's active set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiasedSegment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathEvent {
    Enter {
        index: usize,
        lambda: f64,
    },
    Leave {
        index: usize,
        lambda: f64,
    },
    /// `P(K, K)` was singular after `index` entered; the path stops at the
    /// previous active set, which is extended down to λ = 0.
    SingularSupport {
        index: usize,
        lambda: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularizationPath {
    pub entries: Vec<PathEntry>,
    /// Aligned with `entries`; the first (empty) entry has empty vectors.
    pub biased_coeffs: Vec<BiasedSegment>,
    pub events: Vec<PathEvent>,
}

impl RegularizationPath {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn terminal(&self) -> &PathEntry {
        self.entries.last().expect("paths are never empty")
    }

    /// `(lo, hi)` λ-interval of entry `t`; `hi` is infinite for the first.
    pub fn interval(&self, t: usize) -> (f64, f64) {
        let lo = self.entries[t].lambda;
        let hi = if t == 0 {
            f64::INFINITY
        } else {
            self.entries[t - 1].lambda
        };
        (lo, hi)
    }

    /// Full-length biased solution of entry `t` at penalty `lambda`.
    pub fn biased_solution(&self, t: usize, lambda: f64) -> Vec<f64> {
        let entry = &self.entries[t];
        let seg = &self.biased_coeffs[t];
        let vals: Vec<f64> = seg
            .a
            .iter()
            .zip(&seg.b)
            .map(|(a, b)| a - lambda * b)
            .collect();
        entry.active_set.scatter(&vals, entry.solution.len())
    }

    pub fn enter_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, PathEvent::Enter { .. }))
            .count()
    }

    pub fn leave_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, PathEvent::Leave { .. }))
            .count()
    }

    /// True when a singular active set cut the path short.
    pub fn is_truncated(&self) -> bool {
        self.events
            .iter()
            .any(|e| matches!(e, PathEvent::SingularSupport { .. }))
    }

    /// Single-entry-plus-zero path wrapping a plain NNLS solution, used as a
    /// fallback when the homotopy cannot finish.
    pub fn from_terminal(b_norm_sq: f64, solution: Vec<f64>, error_sq: f64) -> Self {
        let r = solution.len();
        let support = IndexSet::positive_entries(&solution);
        let zero = PathEntry {
            lambda: 0.0,
            active_set: IndexSet::empty(),
            support: IndexSet::empty(),
            solution: vec![0.0; r],
            error_sq: b_norm_sq,
        };
        let mut entries = vec![zero];
        let mut biased_coeffs = vec![BiasedSegment::default()];
        if !support.is_empty() {
            let a = support.gather(&solution);
            entries.push(PathEntry {
                lambda: 0.0,
                active_set: support.clone(),
                support,
                solution,
                error_sq,
            });
            biased_coeffs.push(BiasedSegment {
                b: vec![0.0; a.len()],
                a,
            });
        }
        Self {
            entries,
            biased_coeffs,
            events: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathOptions {
    pub tol: f64,
    /// Defaults to `50 r` when `None`.
    pub max_breakpoints: Option<usize>,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            tol: crate::nnls::DEFAULT_TOL,
            max_breakpoints: None,
        }
    }
}

/// `(max ℓ, argmax)` with the smallest maximizing index; `(0, None)` when no
/// correlation is positive.
pub fn lambda_max(ell: &[f64]) -> (f64, Option<usize>) {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in ell.iter().enumerate() {
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    match best {
        Some((i, v)) => (v, Some(i)),
        None => (0.0, None),
    }
}

/// `a_K`, `b_K` (over `K`) and `c_K`, `d_K` (over the complement).
#[derive(Clone, Debug, PartialEq)]
pub struct PathCoefficients {
    pub support: IndexSet,
    pub complement: IndexSet,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn path_coefficients(p: &DenseMatrix, ell: &[f64], k: &IndexSet) -> Result<PathCoefficients> {
    let r = p.rows();
    k.check_bounds(r)?;
    let kb = k.complement(r);
    let (a, b) = if k.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let chol = Cholesky::factor(&submatrix(p, k, k)?)?;
        (chol.solve(&k.gather(ell)), chol.solve(&vec![1.0; k.len()]))
    };
    let cross = submatrix(p, &kb, k)?;
    let pa = cross.mul_vec(&a);
    let pb = cross.mul_vec(&b);
    let c = kb.iter().zip(&pa).map(|(i, v)| v - ell[i]).collect();
    let d = pb.iter().map(|v| v - 1.0).collect();
    Ok(PathCoefficients {
        support: k.clone(),
        complement: kb,
        a,
        b,
        c,
        d,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Change {
    Leave(usize),
    Enter(usize),
    Terminate,
}

/// Next breakpoint below `lambda_current`.
///
/// Denominators must be below `-tol` to count. `exclude` drops one index
/// (the one that changed at the current breakpoint) from both candidate
/// sets; its ratio equals `lambda_current` and would otherwise re-trigger
/// through roundoff.
pub fn next_breakpoint(
    coeffs: &PathCoefficients,
    lambda_current: f64,
    tol: f64,
    exclude: Option<usize>,
) -> (f64, Change) {
    let best_ratio = |idx: &IndexSet, num: &[f64], den: &[f64]| {
        let mut best: Option<(f64, usize)> = None;
        for ((i, &n), &d) in idx.iter().zip(num).zip(den) {
            if Some(i) == exclude || !(d < -tol) {
                continue;
            }
            let ratio = n / d;
            // strict comparison keeps the smallest index on ties
            if best.is_none_or(|(b, _)| ratio > b) {
                best = Some((ratio, i));
            }
        }
        best
    };
    let leave = best_ratio(&coeffs.support, &coeffs.a, &coeffs.b);
    let enter = best_ratio(&coeffs.complement, &coeffs.c, &coeffs.d);
    let l1 = leave.map_or(f64::NEG_INFINITY, |(v, _)| v);
    let l2 = enter.map_or(f64::NEG_INFINITY, |(v, _)| v);
    if l1.max(l2) <= 0.0 {
        return (0.0, Change::Terminate);
    }
    let clamp = |v: f64| v.min(lambda_current);
    if l1 >= l2 {
        (clamp(l1), Change::Leave(leave.unwrap().1))
    } else {
        (clamp(l2), Change::Enter(enter.unwrap().1))
    }
}

/// Unbiased refit on `K`: `a_K` when it is nonnegative, otherwise NNLS
/// restricted to the columns in `K`. The error is measured on `A`, `b`.
pub fn unbias(
    p: &DenseMatrix,
    ell: &[f64],
    k: &IndexSet,
    a: &DenseMatrix,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let r = p.rows();
    if k.is_empty() {
        return Ok((vec![0.0; r], norm_sq(b)));
    }
    let a_k = Cholesky::factor(&submatrix(p, k, k)?)?.solve(&k.gather(ell));
    unbias_from(p, ell, k, &a_k, a, b, tol)
}

fn unbias_from(
    p: &DenseMatrix,
    ell: &[f64],
    k: &IndexSet,
    a_k: &[f64],
    a: &DenseMatrix,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let r = p.rows();
    let x = if a_k.iter().all(|&v| v >= 0.0) {
        k.scatter(a_k, r)
    } else {
        let sub = submatrix(p, k, k)?;
        let restricted = nnls_gram(&sub, &k.gather(ell), 0.0, tol)?;
        k.scatter(&restricted.x, r)
    };
    let err = residual_sq(a, &x, b);
    Ok((x, err))
}

/// Computes the full regularization path for `b` against dictionary `A`.
pub fn regularization_path(
    a: &DenseMatrix,
    b: &[f64],
    opts: &PathOptions,
) -> Result<RegularizationPath> {
    let p = gram(a);
    regularization_path_with_gram(a, &p, b, opts)
}

/// Same as [`regularization_path`] with `P = AᵀA` supplied by the caller.
pub fn regularization_path_with_gram(
    a: &DenseMatrix,
    p: &DenseMatrix,
    b: &[f64],
    opts: &PathOptions,
) -> Result<RegularizationPath> {
    let r = a.cols();
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} dictionary",
            b.len(),
            a.rows(),
            r
        )));
    }
    if p.shape() != (r, r) {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix is {}x{}, expected {r}x{r}",
            p.rows(),
            p.cols()
        )));
    }
    let max_breakpoints = opts.max_breakpoints.unwrap_or(50 * r.max(1));
    let ell = a.tr_mul_vec(b);
    let b_norm_sq = norm_sq(b);
    let thresh = opts.tol * (1.0 + p.norm_inf());

    let (lmax, first) = lambda_max(&ell);
    let mut path = RegularizationPath {
        entries: vec![PathEntry {
            lambda: lmax,
            active_set: IndexSet::empty(),
            support: IndexSet::empty(),
            solution: vec![0.0; r],
            error_sq: b_norm_sq,
        }],
        biased_coeffs: vec![BiasedSegment::default()],
        events: Vec::new(),
    };
    let Some(i1) = first else {
        return Ok(path);
    };
    path.events.push(PathEvent::Enter {
        index: i1,
        lambda: lmax,
    });

    let mut k = IndexSet::empty();
    k.insert(i1);
    let mut lambda = lmax;
    let mut last_changed = Some(i1);

    loop {
        if path.entries.len() > max_breakpoints {
            return Err(Error::IterationLimit {
                limit: max_breakpoints,
            });
        }
        let coeffs = match path_coefficients(p, &ell, &k) {
            Ok(c) => c,
            Err(Error::SingularSystem { .. }) => {
                let index = last_changed.unwrap_or(i1);
                path.events
                    .push(PathEvent::SingularSupport { index, lambda });
                path.entries.last_mut().unwrap().lambda = 0.0;
                break;
            }
            Err(e) => return Err(e),
        };
        let (next, change) = next_breakpoint(&coeffs, lambda, thresh, last_changed);
        let (solution, error_sq) = unbias_from(p, &ell, &k, &coeffs.a, a, b, opts.tol)?;
        path.entries.push(PathEntry {
            lambda: next,
            active_set: k.clone(),
            support: IndexSet::positive_entries(&solution),
            solution,
            error_sq,
        });
        path.biased_coeffs.push(BiasedSegment {
            a: coeffs.a,
            b: coeffs.b,
        });
        match change {
            Change::Terminate => break,
            Change::Leave(i) => {
                k.remove(i);
                path.events.push(PathEvent::Leave {
                    index: i,
                    lambda: next,
                });
                last_changed = Some(i);
            }
            Change::Enter(i) => {
                k.insert(i);
                path.events.push(PathEvent::Enter {
                    index: i,
                    lambda: next,
                });
                last_changed = Some(i);
            }
        }
        lambda = next;
    }
    Ok(path)
}
