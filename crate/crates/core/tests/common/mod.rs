#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use shamans::{CostTables, DenseMatrix};

pub const M_ROWS: [[f64; 6]; 5] = [
    [0.89, 1.21, 0.73, 0.8, 0.06, 0.02],
    [0.65, 0.97, 1.17, 0.23, 0.36, 0.27],
    [1.06, 1.63, 1.27, 0.76, 0.49, 0.15],
    [0.98, 1.41, 1.32, 0.59, 0.51, 0.2],
    [1.01, 1.66, 1.57, 0.57, 0.56, 0.29],
];

pub const W_ROWS: [[f64; 4]; 5] = [
    [0.8, 0.07, 0.1, 0.81],
    [0.07, 0.51, 0.78, 0.4],
    [0.77, 0.92, 0.4, 0.76],
    [0.47, 0.9, 0.51, 0.7],
    [0.58, 0.9, 0.87, 0.59],
];

pub fn running_m() -> DenseMatrix {
    DenseMatrix::from_rows(&M_ROWS).unwrap()
}

pub fn running_w() -> DenseMatrix {
    DenseMatrix::from_rows(&W_ROWS).unwrap()
}

/// Gaussian matrix made nonnegative by taking absolute values.
pub fn abs_gaussian(rng: &mut StdRng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            v.abs()
        })
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn abs_gaussian_vec(rng: &mut StdRng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let v: f64 = StandardNormal.sample(rng);
            v.abs()
        })
        .collect()
}

pub fn gaussian(rng: &mut StdRng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

/// NNLS by enumerating every support: least squares (via SVD) on each
/// column subset, keeping the best strictly feasible fit. Returns
/// `(x, residual_sq)`.
pub fn nnls_brute_force(a: &DenseMatrix, b: &[f64]) -> (Vec<f64>, f64) {
    let (m, r) = a.shape();
    let na = to_na(a);
    let nb = DVector::from_column_slice(b);
    let mut best_x = vec![0.0; r];
    let mut best = nb.norm_squared();
    for mask in 1u32..(1 << r) {
        let cols: Vec<usize> = (0..r).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(m, cols.len(), |i, k| na[(i, cols[k])]);
        let svd = sub.clone().svd(true, true);
        let Ok(z) = svd.solve(&nb, 1e-12) else {
            continue;
        };
        if z.iter().any(|&v| v < 0.0) {
            continue;
        }
        let res = (&sub * &z - &nb).norm_squared();
        if res < best {
            best = res;
            best_x = vec![0.0; r];
            for (k, &c) in cols.iter().enumerate() {
                best_x[c] = z[k];
            }
        }
    }
    (best_x, best)
}

/// Minimum of `Σ_j C(t_j, j)` over all cursor tuples with `Σ t_j = budget`.
pub fn enumerate_best(tables: &CostTables, budget: usize) -> Option<f64> {
    let (r, n) = (tables.r(), tables.n());
    let mut best: Option<f64> = None;
    let mut tuple = vec![0usize; n];
    loop {
        if tuple.iter().sum::<usize>() == budget {
            let e = tables.total_error(&tuple);
            best = Some(best.map_or(e, |b: f64| b.min(e)));
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            tuple[pos] += 1;
            if tuple[pos] <= r {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Random `(r+1) × n` cost matrix with nonincreasing columns, mixing flat
/// steps, partial drops and full drops so non-concave columns show up.
pub fn random_cost_matrix(rng: &mut StdRng, r: usize, n: usize) -> DenseMatrix {
    let mut data = Vec::with_capacity((r + 1) * n);
    for _ in 0..n {
        let mut v = rng.random_range(0.0..10.0);
        data.push(v);
        for _ in 0..r {
            let kind = rng.random_range(0..4);
            v -= match kind {
                0 => 0.0,
                1 | 2 => v * rng.random_range(0.0..1.0),
                _ => v,
            };
            data.push(v);
        }
    }
    DenseMatrix::new(r + 1, n, data).unwrap()
}

/// `∇f = Px − ℓ + λe` with `P`, `ℓ` recomputed from `A`, `b` via nalgebra.
pub fn penalized_gradient(a: &DenseMatrix, b: &[f64], x: &[f64], lambda: f64) -> Vec<f64> {
    let na = to_na(a);
    let nb = DVector::from_column_slice(b);
    let nx = DVector::from_column_slice(x);
    let g = na.transpose() * (&na * nx - nb);
    g.iter().map(|v| v + lambda).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
