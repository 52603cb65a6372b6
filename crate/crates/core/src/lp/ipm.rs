//! Mehrotra predictor-corrector interior point method.
//!
//! The problem is rewritten in standard form `min c·x, A x = b, 0 ≤ x ≤ u`
//! (upper bounds only where finite): columns are shifted to their lower
//! bound, mirrored when only an upper bound exists, split when free, and
//! substituted out when fixed; inequality rows get slack columns. The Newton
//! system is reduced to normal equations `A Θ Aᵀ Δy = r` solved by dense
//! Cholesky.

use alloc::vec;
use alloc::vec::Vec;

use super::{LpBackend, LpError, LpProblem, LpSolution, LpStatus};
use crate::linalg::{Cholesky, Dense};
use crate::math;
use crate::model::RowSense;

#[derive(Debug, Clone, PartialEq)]
pub struct IpmOptions {
    pub max_iterations: usize,
    /// Relative duality gap and residual tolerance.
    pub tolerance: f64,
    /// Fraction of the step to the boundary.
    pub step_factor: f64,
    /// Norm beyond which dual (primal) iterates are declared divergent.
    pub divergence: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { max_iterations: 100, tolerance: 1e-8, step_factor: 0.995, divergence: 1e10 }
    }
}

/// How an original column maps into standard-form columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    Fixed(f64),
    /// `x = shift + scale · x_std[k]`
    Single { k: usize, shift: f64, scale: f64 },
    /// `x = x_std[pos] − x_std[neg]`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    m: usize,
    n: usize,
    /// Row-major `m × n`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// `INFINITY` where unbounded above.
    u: Vec<f64>,
    map: Vec<ColumnMap>,
}

impl StandardForm {
    fn build(lp: &LpProblem) -> Self {
        let m = lp.rows.len();
        let mut map = Vec::with_capacity(lp.num_cols());
        let mut c = Vec::new();
        let mut u = Vec::new();
        for j in 0..lp.num_cols() {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            if lo == hi {
                map.push(ColumnMap::Fixed(lo));
            } else if lo.is_finite() {
                map.push(ColumnMap::Single { k: c.len(), shift: lo, scale: 1.0 });
                c.push(lp.cost[j]);
                u.push(hi - lo);
            } else if hi.is_finite() {
                map.push(ColumnMap::Single { k: c.len(), shift: hi, scale: -1.0 });
                c.push(-lp.cost[j]);
                u.push(f64::INFINITY);
            } else {
                map.push(ColumnMap::Split { pos: c.len(), neg: c.len() + 1 });
                c.push(lp.cost[j]);
                c.push(-lp.cost[j]);
                u.push(f64::INFINITY);
                u.push(f64::INFINITY);
            }
        }
        let structural = c.len();
        let slack_rows: Vec<usize> = (0..m).filter(|&i| lp.rows[i].sense != RowSense::Eq).collect();
        let n = structural + slack_rows.len();
        c.resize(n, 0.0);
        u.resize(n, f64::INFINITY);
        let mut a = vec![0.0; m * n];
        let mut b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, v) in &row.coefficients {
                match map[j] {
                    ColumnMap::Fixed(val) => b[i] -= v * val,
                    ColumnMap::Single { k, shift, scale } => {
                        a[i * n + k] += v * scale;
                        b[i] -= v * shift;
                    }
                    ColumnMap::Split { pos, neg } => {
                        a[i * n + pos] += v;
                        a[i * n + neg] -= v;
                    }
                }
            }
        }
        for (s, &i) in slack_rows.iter().enumerate() {
            a[i * n + structural + s] = if lp.rows[i].sense == RowSense::Le { 1.0 } else { -1.0 };
        }
        Self { m, n, a, b, c, u, map }
    }

    fn ax(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m).map(|i| self.a[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, v)| a * v).sum()).collect()
    }

    fn aty(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.m {
            if y[i] != 0.0 {
                for (o, a) in out.iter_mut().zip(&self.a[i * self.n..(i + 1) * self.n]) {
                    *o += a * y[i];
                }
            }
        }
        out
    }

    /// `A diag(d) Aᵀ + reg I` factorized.
    fn normal_matrix(&self, d: &[f64], reg: f64) -> Cholesky {
        let m = self.m;
        let mut mat = Dense::zeros(m);
        for i in 0..m {
            let ri = &self.a[i * self.n..(i + 1) * self.n];
            for k in 0..=i {
                let rk = &self.a[k * self.n..(k + 1) * self.n];
                let s: f64 = ri.iter().zip(rk).zip(d).map(|((p, q), w)| p * q * w).sum();
                *mat.at_mut(i, k) = s;
                *mat.at_mut(k, i) = s;
            }
            *mat.at_mut(i, i) += reg;
        }
        Cholesky::factor(mat, 1e-30)
    }

    fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|cm| match *cm {
                ColumnMap::Fixed(v) => v,
                ColumnMap::Single { k, shift, scale } => shift + scale * x[k],
                ColumnMap::Split { pos, neg } => x[pos] - x[neg],
            })
            .collect()
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(math::abs(b)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Largest `α ∈ (0, 1]` keeping `v + α dv ≥ 0`.
fn max_step(v: &[f64], dv: &[f64], mask: &[bool]) -> f64 {
    let mut alpha: f64 = 1.0;
    for ((&vi, &di), &on) in v.iter().zip(dv).zip(mask) {
        if on && di < 0.0 {
            alpha = alpha.min(-vi / di);
        }
    }
    alpha
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ds: Vec<f64>,
    dw: Vec<f64>,
}

pub(super) fn solve(lp: &LpProblem, opts: &IpmOptions) -> Result<LpSolution, LpError> {
    let sf = StandardForm::build(lp);
    let (m, n) = (sf.m, sf.n);
    let bounded: Vec<bool> = sf.u.iter().map(|u| u.is_finite()).collect();
    let all = vec![true; n];
    let n_bounded = bounded.iter().filter(|&&b| b).count();
    let u_fin: Vec<f64> = sf.u.iter().map(|&u| if u.is_finite() { u } else { 0.0 }).collect();

    if n == 0 {
        let feasible = sf.b.iter().all(|&b| math::abs(b) <= opts.tolerance * 10.0);
        if !feasible {
            return Ok(LpSolution::empty(LpStatus::Infeasible, LpBackend::Ipm, 0));
        }
        let primal = sf.recover(&[]);
        let mut sol = LpSolution::empty(LpStatus::Optimal, LpBackend::Ipm, 0);
        sol.objective = lp.sense_factor * lp.min_objective(&primal);
        sol.dual = vec![0.0; m];
        sol.primal = primal;
        return Ok(sol);
    }

    let reg = 1e-10;

    // Shifted least-squares starting point.
    let unit = vec![1.0; n];
    let chol = sf.normal_matrix(&unit, 1e-8);
    let mut tmp = sf.b.clone();
    chol.solve(&mut tmp);
    let mut x = sf.aty(&tmp);
    let mut y = sf.ax(&sf.c);
    chol.solve(&mut y);
    let zt: Vec<f64> = sf.c.iter().zip(sf.aty(&y)).map(|(c, a)| c - a).collect();
    for (j, xj) in x.iter_mut().enumerate() {
        if bounded[j] {
            *xj = xj.clamp(0.05 * sf.u[j], 0.95 * sf.u[j]);
        }
    }
    let dx0 = (-1.5 * x.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    let mut z: Vec<f64> = zt.iter().map(|&v| v.max(0.0)).collect();
    let mut w: Vec<f64> = (0..n).map(|j| if bounded[j] { (-zt[j]).max(0.0) } else { 0.0 }).collect();
    for v in x.iter_mut() {
        *v += dx0;
    }
    let xz = dot(&x, &z) + 1.0;
    let shift_x = 0.5 * xz / (z.iter().sum::<f64>() + 1.0);
    let shift_z = 0.5 * xz / (x.iter().sum::<f64>() + 1.0);
    for j in 0..n {
        x[j] += shift_x;
        z[j] += shift_z;
        if bounded[j] {
            w[j] += shift_z;
        }
    }
    let mut s: Vec<f64> = (0..n).map(|j| if bounded[j] { (sf.u[j] - x[j]).max(shift_x) } else { 0.0 }).collect();

    let b_scale = 1.0 + norm_inf(&sf.b).max(norm_inf(&u_fin));
    let c_scale = 1.0 + norm_inf(&sf.c);
    let pairs = (n + n_bounded) as f64;

    for iter in 0..opts.max_iterations {
        let ax = sf.ax(&x);
        let r_p: Vec<f64> = sf.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let r_u: Vec<f64> = (0..n).map(|j| if bounded[j] { sf.u[j] - x[j] - s[j] } else { 0.0 }).collect();
        let aty = sf.aty(&y);
        let r_d: Vec<f64> = (0..n).map(|j| sf.c[j] - aty[j] - z[j] + w[j]).collect();
        let mu = (dot(&x, &z) + dot(&s, &w)) / pairs;
        let pobj = dot(&sf.c, &x);
        let dobj = dot(&sf.b, &y) - dot(&u_fin, &w);
        let p_res = norm_inf(&r_p).max(norm_inf(&r_u)) / b_scale;
        let d_res = norm_inf(&r_d) / c_scale;
        let gap = math::abs(pobj - dobj) / (1.0 + math::abs(pobj));

        if p_res <= opts.tolerance && d_res <= opts.tolerance && gap <= opts.tolerance {
            let primal = sf.recover(&x);
            let mut sol = LpSolution::empty(LpStatus::Optimal, LpBackend::Ipm, iter);
            sol.objective = lp.sense_factor * lp.min_objective(&primal);
            sol.dual = y.iter().map(|v| lp.sense_factor * v).collect();
            sol.primal = primal;
            return Ok(sol);
        }
        let dual_norm = norm_inf(&y).max(norm_inf(&z)).max(norm_inf(&w));
        let primal_norm = norm_inf(&x);
        if dual_norm > opts.divergence * c_scale && p_res > 1e-6 {
            return Ok(LpSolution::empty(LpStatus::Infeasible, LpBackend::Ipm, iter));
        }
        if primal_norm > opts.divergence * b_scale && d_res > 1e-6 {
            return Ok(LpSolution::empty(LpStatus::Unbounded, LpBackend::Ipm, iter));
        }

        let theta: Vec<f64> = (0..n)
            .map(|j| {
                let mut inv = z[j] / x[j];
                if bounded[j] {
                    inv += w[j] / s[j];
                }
                1.0 / inv
            })
            .collect();
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(LpError::Numerical("interior point scaling broke down"));
        }
        let chol = sf.normal_matrix(&theta, reg);
        let direction = |r_xz: &[f64], r_sw: &[f64]| -> Direction {
            let rho: Vec<f64> = (0..n)
                .map(|j| {
                    let mut v = r_d[j] - r_xz[j] / x[j];
                    if bounded[j] {
                        v += (r_sw[j] - w[j] * r_u[j]) / s[j];
                    }
                    v
                })
                .collect();
            let trho: Vec<f64> = theta.iter().zip(&rho).map(|(t, r)| t * r).collect();
            let atr = sf.ax(&trho);
            let mut dy: Vec<f64> = r_p.iter().zip(&atr).map(|(a, b)| a + b).collect();
            chol.solve(&mut dy);
            let atdy = sf.aty(&dy);
            let dx: Vec<f64> = (0..n).map(|j| theta[j] * (atdy[j] - rho[j])).collect();
            let dz: Vec<f64> = (0..n).map(|j| (r_xz[j] - z[j] * dx[j]) / x[j]).collect();
            let ds: Vec<f64> = (0..n).map(|j| if bounded[j] { r_u[j] - dx[j] } else { 0.0 }).collect();
            let dw: Vec<f64> = (0..n).map(|j| if bounded[j] { (r_sw[j] - w[j] * ds[j]) / s[j] } else { 0.0 }).collect();
            Direction { dx, dy, dz, ds, dw }
        };

        // Predictor.
        let r_xz: Vec<f64> = (0..n).map(|j| -x[j] * z[j]).collect();
        let r_sw: Vec<f64> = (0..n).map(|j| -s[j] * w[j]).collect();
        let aff = direction(&r_xz, &r_sw);
        let ap = max_step(&x, &aff.dx, &all).min(max_step(&s, &aff.ds, &bounded));
        let ad = max_step(&z, &aff.dz, &all).min(max_step(&w, &aff.dw, &bounded));
        let mut mu_aff = 0.0;
        for j in 0..n {
            mu_aff += (x[j] + ap * aff.dx[j]) * (z[j] + ad * aff.dz[j]);
            if bounded[j] {
                mu_aff += (s[j] + ap * aff.ds[j]) * (w[j] + ad * aff.dw[j]);
            }
        }
        mu_aff /= pairs;
        let ratio = mu_aff / mu;
        let sigma = ratio * ratio * ratio;

        // Corrector.
        let r_xz: Vec<f64> = (0..n).map(|j| sigma * mu - x[j] * z[j] - aff.dx[j] * aff.dz[j]).collect();
        let r_sw: Vec<f64> = (0..n)
            .map(|j| if bounded[j] { sigma * mu - s[j] * w[j] - aff.ds[j] * aff.dw[j] } else { 0.0 })
            .collect();
        let dir = direction(&r_xz, &r_sw);
        let ap = (opts.step_factor * max_step(&x, &dir.dx, &all).min(max_step(&s, &dir.ds, &bounded))).min(1.0);
        let ad = (opts.step_factor * max_step(&z, &dir.dz, &all).min(max_step(&w, &dir.dw, &bounded))).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || (ap < 1e-14 && ad < 1e-14) {
            return Err(LpError::Numerical("interior point step collapsed"));
        }
        for j in 0..n {
            x[j] += ap * dir.dx[j];
            z[j] += ad * dir.dz[j];
            if bounded[j] {
                s[j] += ap * dir.ds[j];
                w[j] += ad * dir.dw[j];
            }
        }
        for i in 0..m {
            y[i] += ad * dir.dy[i];
        }
    }
    Ok(LpSolution::empty(LpStatus::IterationLimit, LpBackend::Ipm, opts.max_iterations))
}
