//! 5 × 6 worked example, checked at full precision against values from an
//! independent least-squares computation.

#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use shamans::homotopy::PathOptions;
use shamans::{
    gram, init_gain, regularization_path, solve, solve_detailed, PathEvent, SolveConfig,
};

const COST: [[f64; 6]; 5] = [
    [4.3187, 9.8056, 7.722, 1.9435, 0.947, 0.2199],
    [
        0.662845859266,
        1.22210289229,
        0.578536633228,
        0.029316108074,
        0.00787626858,
        0.031107582192,
    ],
    [
        0.016884485717,
        0.090624774768,
        0.24015920198,
        0.000205653188,
        0.00020894542,
        0.00055259818,
    ],
    [
        0.003399411473,
        0.046129195703,
        0.000470508125,
        0.000205653188,
        0.000090300291,
        0.00055259818,
    ],
    [
        0.000027915092,
        0.000121656187,
        0.000221704446,
        0.000205653188,
        0.000090300291,
        0.00055259818,
    ],
];

const H_SH: [[f64; 6]; 4] = [
    [
        0.210789952148,
        0.778669314061,
        0.0572620583,
        0.488607799043,
        0.0,
        0.0,
    ],
    [
        0.162930680018,
        0.322989373687,
        0.373727001775,
        0.0,
        0.470207209038,
        0.031021299114,
    ],
    [
        0.279171771016,
        0.639158528142,
        0.899579766062,
        0.0,
        0.157472716514,
        0.314357962874,
    ],
    [
        0.841457075233,
        0.619149607357,
        0.699703303669,
        0.503053270512,
        0.0,
        0.0,
    ],
];

const H_KS: [[f64; 6]; 4] = [
    [0.0, 0.0, 0.0, 0.488607799043, 0.0, 0.0],
    [
        0.187667805091,
        0.414369631692,
        0.380446955377,
        0.0,
        0.45924452494,
        0.031021299114,
    ],
    [
        0.208842908172,
        0.379359961695,
        0.88047460757,
        0.0,
        0.157342292734,
        0.314357962874,
    ],
    [
        1.049850283271,
        1.388965220978,
        0.756314275427,
        0.503053270512,
        0.014242186421,
        0.0,
    ],
];

fn assert_matrix_close<const C: usize>(got: &shamans::DenseMatrix, want: &[[f64; C]], tol: f64) {
    assert_eq!(got.shape(), (want.len(), C));
    for (i, row) in want.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            let g = got.get(i, j);
            assert!((g - w).abs() <= tol, "({i},{j}): {g} vs {w}");
        }
    }
}

/// Least squares restricted to `support`, through nalgebra's SVD.
fn restricted_lsq(support: &[usize], b: &[f64]) -> Vec<f64> {
    let w = to_na(&running_w());
    let mut x = vec![0.0; 4];
    if support.is_empty() {
        return x;
    }
    let sub = DMatrix::from_fn(5, support.len(), |i, k| w[(i, support[k])]);
    let z = sub
        .svd(true, true)
        .solve(&DVector::from_column_slice(b), 1e-14)
        .unwrap();
    for (k, &s) in support.iter().enumerate() {
        x[s] = z[k];
    }
    x
}

#[test]
fn gram_entry_two_two() {
    let p = gram(&running_w());
    assert!((p.get(1, 1) - 2.7314).abs() < 1e-12);
}

#[test]
fn column_one_path() {
    let m = running_m();
    let path = regularization_path(&running_w(), m.col(0), &PathOptions::default()).unwrap();
    let lambdas: Vec<f64> = path.entries.iter().map(|e| e.lambda).collect();
    let want = [
        3.16,
        2.7501781490581485,
        0.2471364440032099,
        0.07025636669950866,
        0.0,
    ];
    assert_eq!(lambdas.len(), want.len());
    assert!(max_abs_diff(&lambdas, &want) < 1e-10, "{lambdas:?}");
    let cards: Vec<usize> = path.entries.iter().map(|e| e.cardinality()).collect();
    assert_eq!(cards, vec![0, 1, 2, 3, 4]);
    let supports: Vec<Vec<usize>> = path
        .entries
        .iter()
        .map(|e| e.active_set.as_slice().to_vec())
        .collect();
    assert_eq!(
        supports,
        vec![vec![], vec![1], vec![1, 3], vec![1, 2, 3], vec![0, 1, 2, 3]]
    );
    assert_eq!(path.enter_count(), 4);
    assert_eq!(path.leave_count(), 0);
    for (k, e) in path.entries.iter().enumerate() {
        assert!((e.error_sq - COST[k][0]).abs() < 1e-10, "entry {k}");
    }
}

#[test]
fn column_six_path() {
    let m = running_m();
    let path = regularization_path(&running_w(), m.col(5), &PathOptions::default()).unwrap();
    let lambdas: Vec<f64> = path.entries.iter().map(|e| e.lambda).collect();
    assert!(max_abs_diff(&lambdas, &[0.7181, 0.3704811331286635, 0.0]) < 1e-10);
    let e = &path.entries[2];
    assert!(max_abs_diff(&e.solution, &[0.0, 0.031021299114, 0.314357962874, 0.0]) < 1e-10);
    assert!((e.error_sq - 0.00055259818).abs() < 1e-10);
}

#[test]
fn every_path_solution_is_the_restricted_least_squares_fit() {
    let m = running_m();
    let w = running_w();
    for j in 0..6 {
        let path = regularization_path(&w, m.col(j), &PathOptions::default()).unwrap();
        for e in &path.entries {
            let want = restricted_lsq(e.support.as_slice(), m.col(j));
            assert!(max_abs_diff(&e.solution, &want) < 1e-10, "column {j}");
        }
    }
}

#[test]
fn entry_lambda_bounds_its_optimality_interval() {
    let m = running_m();
    let w = running_w();
    let path = regularization_path(&w, m.col(0), &PathOptions::default()).unwrap();
    for t in 0..path.len() {
        let (lo, hi) = path.interval(t);
        assert_eq!(lo, path.entries[t].lambda);
        let mid = if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            lo + 1.0
        };
        let x = path.biased_solution(t, mid);
        let g = penalized_gradient(&w, m.col(0), &x, mid);
        for i in 0..4 {
            if path.entries[t].active_set.contains(i) {
                assert!(x[i] > 0.0 && g[i].abs() < 1e-10);
            } else {
                assert!(x[i] == 0.0 && g[i] >= -1e-10);
            }
        }
    }
}

#[test]
fn cost_and_delta_tables() {
    let sol = solve_detailed(&running_m(), &running_w(), &SolveConfig::shamans(18)).unwrap();
    assert_matrix_close(sol.tables.cost_matrix(), &COST, 1e-10);
    let delta = sol.tables.delta_matrix();
    for k in 1..=4 {
        for (j, (prev, cur)) in COST[k - 1].iter().zip(&COST[k]).enumerate() {
            let want = prev - cur;
            assert!((delta.get(k - 1, j) - want).abs() < 1e-10);
        }
    }
}

#[test]
fn gain_snapshots_and_picks() {
    let sol = solve_detailed(&running_m(), &running_w(), &SolveConfig::shamans(18)).unwrap();
    let mut state = init_gain(&sol.tables);
    let g0 = state.gain().clone();
    for j in 0..6 {
        for k in 1..=4 {
            assert!((g0.get(k - 1, j) - (COST[0][j] - COST[k][j]) / k as f64).abs() < 1e-10);
        }
    }
    let first = state.step().unwrap();
    assert_eq!((first.row, first.col), (1, 1));
    // column 2 now measured from level 1
    let g1 = state.gain();
    assert_eq!(g1.get(0, 1), 0.0);
    assert!((g1.get(2, 1) - (COST[1][1] - COST[3][1]) / 2.0).abs() < 1e-10);
    let second = state.step().unwrap();
    assert_eq!((second.row, second.col), (1, 2));
    let third = state.step().unwrap();
    assert_eq!((third.row, third.col), (1, 0));
}

#[test]
fn budget_solution() {
    let sol = solve_detailed(&running_m(), &running_w(), &SolveConfig::shamans(18)).unwrap();
    assert_eq!(sol.cursors.as_deref(), Some(&[4, 4, 4, 2, 2, 2][..]));
    assert_matrix_close(&sol.h, &H_SH, 1e-9);
    assert!((sol.report.rel_error - 0.007323372913900583).abs() < 1e-12);
    assert_eq!(sol.report.nnz, 18);
    assert!(sol.paths.fallback_columns.is_empty());
}

#[test]
fn three_sparse_solution() {
    let (h, report) = solve(&running_m(), &running_w(), &SolveConfig::ksparse(3)).unwrap();
    assert_matrix_close(&h, &H_KS, 1e-9);
    assert!((report.rel_error - 0.04513796092767086).abs() < 1e-12);
    assert_eq!(report.nnz, 16);
}

#[test]
fn unconstrained_takes_terminal_solutions() {
    let m = running_m();
    let w = running_w();
    let (h, _) = solve(&m, &w, &SolveConfig::unconstrained()).unwrap();
    for j in 0..6 {
        let (x, _) = nnls_brute_force(&w, m.col(j));
        assert!(max_abs_diff(h.col(j), &x) < 1e-9, "column {j}");
    }
}

#[test]
fn no_singular_events() {
    let m = running_m();
    for j in 0..6 {
        let path = regularization_path(&running_w(), m.col(j), &PathOptions::default()).unwrap();
        assert!(!path
            .events
            .iter()
            .any(|e| matches!(e, PathEvent::SingularSupport { .. })));
        assert_eq!(path.terminal().lambda, 0.0);
    }
}
