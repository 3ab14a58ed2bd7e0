//! Lawson–Hanson active-set solver for `min ‖Ax − b‖²  s.t.  x ≥ 0`.
//!
//! Works on the normal-equation data `P = AᵀA`, `ℓ = Aᵀb` so the homotopy
//! layer can share the Gram matrix across many right-hand sides.

use crate::densela::{residual_sq, submatrix, Cholesky, DenseMatrix, IndexSet};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    pub support: IndexSet,
    /// `‖Ax − b‖²`.
    pub residual_sq: f64,
    /// Pivots performed (variables added plus variables removed).
    pub pivots: usize,
}

/// Solves the NNLS problem for `A`, `b`. The residual is recomputed against
/// the original data.
pub fn nnls_active_set(a: &DenseMatrix, b: &[f64], tol: f64) -> Result<NnlsSolution> {
    if a.cols() == 0 {
        return Err(Error::DimensionMismatch(
            "NNLS needs at least one column".into(),
        ));
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs of length {} for a {}x{} matrix",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    let p = crate::densela::gram(a);
    let ell = a.tr_mul_vec(b);
    let mut sol = nnls_gram(&p, &ell, 0.0, tol)?;
    sol.residual_sq = residual_sq(a, &sol.x, b);
    Ok(sol)
}

/// Solves `min ½xᵀPx − ℓᵀx` over `x ≥ 0`, which is the NNLS problem in Gram
/// form. `b_norm_sq` is `‖b‖²`, used only to report the residual.
pub fn nnls_gram(p: &DenseMatrix, ell: &[f64], b_norm_sq: f64, tol: f64) -> Result<NnlsSolution> {
    solve(p, ell, b_norm_sq, tol, None)
}

fn objective(p: &DenseMatrix, ell: &[f64], b_norm_sq: f64, x: &[f64]) -> f64 {
    let px = p.mul_vec(x);
    let quad: f64 = x.iter().zip(&px).map(|(a, b)| a * b).sum();
    let lin: f64 = x.iter().zip(ell).map(|(a, b)| a * b).sum();
    (b_norm_sq - 2.0 * lin + quad).max(0.0)
}

fn solve(
    p: &DenseMatrix,
    ell: &[f64],
    b_norm_sq: f64,
    tol: f64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<NnlsSolution> {
    let r = p.rows();
    if p.cols() != r || ell.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix {}x{} with correlation vector of length {}",
            p.rows(),
            p.cols(),
            ell.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let limit = (10 * r * (r + 1)).max(1);
    let ell_scale = 1.0 + ell.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let grad_tol = tol * ell_scale;

    let mut x = vec![0.0; r];
    let mut passive = IndexSet::empty();
    // Variables whose trial entry failed; re-admitted after the next
    // successful entry.
    let mut blocked = vec![false; r];
    let mut pivots = 0usize;

    if let Some(t) = trace.as_deref_mut() {
        t.push(objective(p, ell, b_norm_sq, &x));
    }

    loop {
        let px = p.mul_vec(&x);
        let mut enter: Option<(usize, f64)> = None;
        for j in 0..r {
            if blocked[j] || passive.contains(j) {
                continue;
            }
            let w = ell[j] - px[j];
            if w > grad_tol && enter.is_none_or(|(_, best)| w > best) {
                enter = Some((j, w));
            }
        }
        let Some((j, _)) = enter else { break };

        pivots += 1;
        if pivots > limit {
            return Err(Error::IterationLimit { limit });
        }
        passive.insert(j);

        let mut first = true;
        loop {
            let sub = submatrix(p, &passive, &passive)?;
            let z = Cholesky::factor(&sub)?.solve(&passive.gather(ell));

            if z.iter().all(|&v| v > tol) {
                for (&i, &v) in passive.as_slice().iter().zip(&z) {
                    x[i] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }

            let pos_j = passive.as_slice().binary_search(&j).ok();
            if first && pos_j.is_some_and(|pj| z[pj] <= tol) {
                passive.remove(j);
                blocked[j] = true;
                break;
            }
            first = false;

            // Step toward z until the first passive variable reaches zero.
            let mut alpha = f64::INFINITY;
            let mut hit = usize::MAX;
            for (&i, &zi) in passive.as_slice().iter().zip(&z) {
                if zi <= tol {
                    let a = x[i] / (x[i] - zi);
                    if a < alpha {
                        alpha = a;
                        hit = i;
                    }
                }
            }
            for (&i, &zi) in passive.as_slice().iter().zip(&z) {
                x[i] += alpha * (zi - x[i]);
            }
            x[hit] = 0.0;
            let leaving: Vec<usize> = passive.iter().filter(|&i| x[i] <= tol).collect();
            for i in leaving {
                x[i] = 0.0;
                passive.remove(i);
                pivots += 1;
            }
            if pivots > limit {
                return Err(Error::IterationLimit { limit });
            }
            if passive.is_empty() {
                break;
            }
        }

        if let Some(t) = trace.as_deref_mut() {
            t.push(objective(p, ell, b_norm_sq, &x));
        }
    }

    for v in x.iter_mut() {
        if *v < tol {
            *v = 0.0;
        }
    }
    let support = IndexSet::positive_entries(&x);
    let residual_sq = objective(p, ell, b_norm_sq, &x);
    Ok(NnlsSolution {
        x,
        support,
        residual_sq,
        pivots,
    })
}
