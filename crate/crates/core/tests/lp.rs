use pmvb_core::instgen::gen_knapsack_uniform;
use pmvb_core::lp::{self, fractional_knapsack, IpmOptions, LpBackend, LpProblem, LpStatus, SimplexOptions};
use pmvb_core::model::{MipInstance, ObjectiveSense, Row, RowSense};
use pmvb_core::predict::lp_root_predict;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Feasible LP with finite bounds: rows are built around a random interior
/// point so the feasible set is non-empty.
fn random_lp(seed: u64, max_vars: usize, max_rows: usize) -> MipInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.random_range(1..=max_vars);
    let nc = rng.random_range(0..=(max_vars - nb).min(3));
    let n = nb + nc;
    let bounds: Vec<(f64, f64)> = (0..nc)
        .map(|_| {
            let lo = rng.random_range(-3.0..1.0);
            (lo, lo + rng.random_range(0.5..4.0))
        })
        .collect();
    let x0: Vec<f64> = (0..n)
        .map(|j| if j < nb { rng.random_range(0.1..0.9) } else { let (lo, hi) = bounds[j - nb]; lo + (hi - lo) * rng.random_range(0.1..0.9) })
        .collect();
    let m = rng.random_range(1..=max_rows);
    let mut rows = Vec::new();
    for _ in 0..m {
        let mut coefficients: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coefficients.push((j, rng.random_range(-5.0..5.0)));
            }
        }
        if coefficients.is_empty() {
            continue;
        }
        let act: f64 = coefficients.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.random_range(0..5) {
            0 | 1 => (RowSense::Le, act + rng.random_range(0.0..2.0)),
            2 | 3 => (RowSense::Ge, act - rng.random_range(0.0..2.0)),
            _ => (RowSense::Eq, act),
        };
        rows.push(Row::new(coefficients, sense, rhs));
    }
    let objective = (0..n).map(|j| (j, rng.random_range(-10.0..10.0))).collect();
    let sense = if rng.random_bool(0.5) { ObjectiveSense::Minimize } else { ObjectiveSense::Maximize };
    let mut inst = MipInstance::binary(format!("lp{seed}"), sense, nb, objective, rows);
    inst.num_continuous = nc;
    inst.continuous_bounds = bounds;
    inst
}

/// Solves the square system `M x = r` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            let (top, bottom) = m.split_at_mut(row);
            for (a, b) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *a -= f * b;
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Best objective (minimization form) over all basic feasible points of
/// `{Ax ≤ b, lo ≤ x ≤ hi}`: every choice of `n` constraints held at
/// equality whose intersection is a single feasible point.
fn vertex_oracle(lp: &LpProblem) -> Option<f64> {
    let n = lp.num_cols();
    // each constraint as (coefficients, rhs); rows are all `≤` here
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coefficients {
            a[j] += v;
        }
        cons.push((a, row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cons.push((e.clone(), lp.upper[j]));
        cons.push((e.iter().map(|v| -v).collect(), -lp.lower[j]));
    }
    let k = cons.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let chosen: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let m = chosen.iter().map(|&i| cons[i].0.clone()).collect();
        let r = chosen.iter().map(|&i| cons[i].1).collect();
        let Some(x) = solve_dense(m, r) else { continue };
        if lp.max_violation(&x) > 1e-9 {
            continue;
        }
        let v = lp.min_objective(&x);
        best = Some(best.map_or(v, |b: f64| b.min(v)));
    }
    best
}

#[test]
fn simplex_matches_vertex_enumeration_on_5x8() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..8 {
        let n = 8;
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let rows: Vec<Row> = (0..5)
            .map(|_| {
                let coefficients: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.random_range(-3.0..5.0))).collect();
                let act: f64 = coefficients.iter().map(|&(j, a)| a * x0[j]).sum();
                Row::new(coefficients, RowSense::Le, act + rng.random_range(0.0..0.5))
            })
            .collect();
        let objective = (0..n).map(|j| (j, rng.random_range(-4.0..4.0))).collect();
        let inst = MipInstance::binary(format!("v{case}"), ObjectiveSense::Minimize, n, objective, rows);
        let lp = LpProblem::relaxation(&inst, &[]).unwrap();
        let oracle = vertex_oracle(&lp).expect("feasible by construction");
        let sol = lp::solve_simplex(&inst, &[]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - oracle).abs() <= 1e-7 * (1.0 + oracle.abs()), "case {case}: {} vs {oracle}", sol.objective);
    }
}

#[test]
fn tight_bound_example() {
    let inst = MipInstance::binary("t", ObjectiveSense::Maximize, 2, vec![(0, 1.0), (1, 1.0)], vec![Row::new(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 1.0)]);
    let s = lp::solve_simplex(&inst, &[]).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 1.0).abs() < 1e-12);
    // the optimal face is an edge; the interior-point path lands at its centre
    let i = lp::solve_ipm(&inst, &[]).unwrap();
    assert_eq!(i.status, LpStatus::Optimal);
    assert!((i.objective - 1.0).abs() < 1e-6);
    assert!((i.primal[0] - 0.5).abs() < 1e-4 && (i.primal[1] - 0.5).abs() < 1e-4, "{:?}", i.primal);
    let p = lp_root_predict(&inst, LpBackend::Ipm).unwrap();
    assert!(p.probabilities.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn contradictory_rows_are_infeasible_for_both_backends() {
    let rows = vec![Row::new(vec![(0, 1.0)], RowSense::Ge, 1.0), Row::new(vec![(0, 1.0)], RowSense::Le, 0.0)];
    let inst = MipInstance::binary("inf", ObjectiveSense::Minimize, 1, vec![(0, 1.0)], rows);
    assert_eq!(lp::solve_simplex(&inst, &[]).unwrap().status, LpStatus::Infeasible);
    assert_eq!(lp::solve_ipm(&inst, &[]).unwrap().status, LpStatus::Infeasible);
    assert!(lp_root_predict(&inst, LpBackend::Simplex).is_err());
}

#[test]
fn ipm_detects_infeasibility_with_several_rows() {
    let rows = vec![
        Row::new(vec![(0, 1.0), (1, 1.0), (2, 1.0)], RowSense::Ge, 2.5),
        Row::new(vec![(0, 1.0), (1, 1.0)], RowSense::Le, 0.5),
        Row::new(vec![(2, 1.0), (1, -1.0)], RowSense::Le, 0.5),
    ];
    let inst = MipInstance::binary("inf3", ObjectiveSense::Maximize, 3, vec![(0, 1.0), (2, 2.0)], rows);
    assert_eq!(lp::solve_simplex(&inst, &[]).unwrap().status, LpStatus::Infeasible);
    assert_eq!(lp::solve_ipm(&inst, &[]).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn unbounded_continuous_column() {
    let mut inst = MipInstance::binary("unb", ObjectiveSense::Maximize, 1, vec![(1, 1.0)], vec![Row::new(vec![(0, 1.0), (1, -1.0)], RowSense::Le, 1.0)]);
    inst.num_continuous = 1;
    inst.continuous_bounds = vec![(0.0, f64::INFINITY)];
    assert_eq!(lp::solve_simplex(&inst, &[]).unwrap().status, LpStatus::Unbounded);
    assert_eq!(lp::solve_ipm(&inst, &[]).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn free_and_mirrored_columns_agree() {
    // min |shifted| structure: x free, z <= 3 only, y binary
    let mut inst = MipInstance::binary(
        "free",
        ObjectiveSense::Minimize,
        1,
        vec![(0, 1.0), (1, 1.0), (2, -1.0)],
        vec![
            Row::new(vec![(1, 1.0), (0, 1.0)], RowSense::Ge, -2.0),
            Row::new(vec![(1, 1.0), (2, -1.0)], RowSense::Ge, -1.0),
            Row::new(vec![(2, 1.0), (1, -2.0)], RowSense::Le, 4.0),
        ],
    );
    inst.num_continuous = 2;
    inst.continuous_bounds = vec![(f64::NEG_INFINITY, f64::INFINITY), (f64::NEG_INFINITY, 3.0)];
    let s = lp::solve_simplex(&inst, &[]).unwrap();
    let i = lp::solve_ipm(&inst, &[]).unwrap();
    assert_eq!((s.status, i.status), (LpStatus::Optimal, LpStatus::Optimal));
    assert!((s.objective - i.objective).abs() <= 1e-6 * (1.0 + s.objective.abs()), "{} vs {}", s.objective, i.objective);
}

#[test]
fn phase_two_iterates_never_beat_the_optimum() {
    let opts = SimplexOptions { trace: true, ..SimplexOptions::default() };
    for seed in 0..30 {
        let inst = random_lp(seed, 10, 6);
        let lp = LpProblem::relaxation(&inst, &[]).unwrap();
        let sol = lp::simplex_problem(&lp, &opts).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let opt = lp.sense_factor * sol.objective;
        assert!(!sol.trace.is_empty() || sol.iterations == 0);
        for it in sol.trace.iter().filter(|it| it.phase == 2) {
            assert!(it.objective >= opt - 1e-7 * (1.0 + opt.abs()), "seed {seed}: iterate {} below optimum {opt}", it.objective);
        }
    }
}

#[test]
fn simplex_solution_is_feasible_and_consistent() {
    for seed in 100..160 {
        let inst = random_lp(seed, 12, 8);
        let lp = LpProblem::relaxation(&inst, &[]).unwrap();
        let sol = lp::simplex_problem(&lp, &SimplexOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(lp.max_violation(&sol.primal) <= 1e-7, "seed {seed}");
        assert!((lp.sense_factor * lp.min_objective(&sol.primal) - sol.objective).abs() <= 1e-9 * (1.0 + sol.objective.abs()));
        assert_eq!(sol.dual.len(), lp.rows.len());
    }
}

#[test]
fn fractional_knapsack_matches_simplex() {
    for seed in 0..20 {
        let k = gen_knapsack_uniform(40, 0.3, seed).unwrap();
        let closed = fractional_knapsack(&k.weights, &k.ratios, k.capacity).unwrap();
        let sol = lp::solve_simplex(&k.instance, &[]).unwrap();
        assert!((closed.objective - sol.objective).abs() <= 1e-8, "seed {seed}");
        assert!(closed.values.iter().filter(|&&v| v > 0.0 && v < 1.0).count() <= 1);
        let used: f64 = closed.values.iter().zip(&k.weights).map(|(y, a)| y * a).sum();
        assert!((used - k.capacity).abs() <= 1e-9);
        // the simplex vertex has the same single fractional coordinate
        let p = lp_root_predict(&k.instance, LpBackend::Simplex).unwrap();
        let frac: Vec<usize> = (0..40).filter(|&j| p.probabilities[j] > 1e-9 && p.probabilities[j] < 1.0 - 1e-9).collect();
        assert_eq!(frac, closed.split.into_iter().collect::<Vec<_>>(), "seed {seed}");
    }
}

#[test]
fn integral_relaxation_predicts_the_optimum() {
    // assignment-like structure: totally unimodular rows
    let rows = vec![
        Row::new(vec![(0, 1.0), (1, 1.0)], RowSense::Eq, 1.0),
        Row::new(vec![(2, 1.0), (3, 1.0)], RowSense::Eq, 1.0),
        Row::new(vec![(0, 1.0), (2, 1.0)], RowSense::Le, 1.0),
        Row::new(vec![(1, 1.0), (3, 1.0)], RowSense::Le, 1.0),
    ];
    let inst = MipInstance::binary("tu", ObjectiveSense::Maximize, 4, vec![(0, 3.0), (1, 1.0), (2, 1.0), (3, 2.0)], rows);
    let p = lp_root_predict(&inst, LpBackend::Simplex).unwrap();
    assert_eq!(p.probabilities, vec![1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn iteration_cap_is_a_status() {
    let inst = random_lp(7, 12, 8);
    let lp = LpProblem::relaxation(&inst, &[]).unwrap();
    let sol = lp::simplex_problem(&lp, &SimplexOptions { max_iterations: 1, ..SimplexOptions::default() }).unwrap();
    assert!(matches!(sol.status, LpStatus::IterationLimit | LpStatus::Optimal));
    let sol = lp::ipm_problem(&lp, &IpmOptions { max_iterations: 1, ..IpmOptions::default() }).unwrap();
    assert_eq!(sol.status, LpStatus::IterationLimit);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn backends_agree(seed in any::<u64>()) {
        let inst = random_lp(seed, 12, 8);
        let s = lp::solve_simplex(&inst, &[]).unwrap();
        let i = lp::solve_ipm(&inst, &[]).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert_eq!(i.status, LpStatus::Optimal);
        prop_assert!((s.objective - i.objective).abs() <= 1e-5 * (1.0 + s.objective.abs()), "simplex {} ipm {}", s.objective, i.objective);
    }
}
