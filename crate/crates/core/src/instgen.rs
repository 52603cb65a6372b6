//! Seeded instance families.
//!
//! Every family draws its fixed structure from ChaCha8 stream 0 of the seed
//! and instance `k` from stream `k + 1`, so any single instance can be
//! regenerated without the others and results are identical across
//! platforms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{MipInstance, ObjectiveSense, Row, RowSense, FEASIBILITY_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstGenError {
    #[error("invalid generator parameter: {0}")]
    BadParameter(&'static str),
    #[error("generated instance {0} failed its feasibility check")]
    Infeasible(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VaryingField {
    RhsB,
    CostC,
}

impl VaryingField {
    pub fn as_str(self) -> &'static str {
        match self {
            VaryingField::RhsB => "rhs_b",
            VaryingField::CostC => "cost_c",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFamily {
    pub name: alloc::string::String,
    /// Fixed structure; its varying field holds the first instance's data.
    pub template: MipInstance,
    pub varying_field: VaryingField,
    /// Each instance records its varying data in `param_tag`.
    pub instances: Vec<MipInstance>,
    pub seed: u64,
}

impl InstanceFamily {
    pub fn xi(&self, k: usize) -> &[f64] {
        &self.instances[k].param_tag
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_point(inst: &MipInstance, point: &[f64], k: usize) -> Result<(), InstGenError> {
    inst.validate().map_err(|_| InstGenError::Infeasible(k))?;
    match inst.check_feasible(point, FEASIBILITY_TOL) {
        Ok(r) if r.is_feasible() => Ok(()),
        _ => Err(InstGenError::Infeasible(k)),
    }
}

/// How multi-knapsack capacities scale with the row sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MkpCapacity {
    /// `b_i` centred on `Σ_j a_ij / (4n)`, about a quarter of one item.
    PerItem,
    /// `b_i` centred on `t · Σ_j a_ij` (tightness ratio `t`).
    Tightness(f64),
}

impl MkpCapacity {
    fn centre(self, row_sum: f64, n: usize) -> f64 {
        match self {
            MkpCapacity::PerItem => row_sum / (4.0 * n as f64),
            MkpCapacity::Tightness(t) => t * row_sum,
        }
    }
}

/// Multi-knapsack `max c·y, Ay ≤ b` with `A`, `c` fixed and `b` varying.
pub fn gen_mkp(m: usize, n: usize, num_instances: usize, seed: u64) -> Result<InstanceFamily, InstGenError> {
    gen_mkp_with(m, n, num_instances, seed, MkpCapacity::PerItem)
}

pub fn gen_mkp_with(m: usize, n: usize, num_instances: usize, seed: u64, capacity: MkpCapacity) -> Result<InstanceFamily, InstGenError> {
    if m == 0 || n == 0 {
        return Err(InstGenError::BadParameter("m and n must be at least 1"));
    }
    if let MkpCapacity::Tightness(t) = capacity {
        if !(t > 0.0 && t <= 1.0) {
            return Err(InstGenError::BadParameter("tightness must lie in (0, 1]"));
        }
    }
    let mut rng = stream_rng(seed, 0);
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(1..=1000u32) as f64).collect()).collect();
    let c: Vec<f64> = (0..n)
        .map(|j| {
            let col_mean = (0..m).map(|i| a[i][j]).sum::<f64>() / m as f64;
            col_mean + rng.random_range(1..=500u32) as f64
        })
        .collect();
    let centres: Vec<f64> = a.iter().map(|row| capacity.centre(row.iter().sum(), n)).collect();
    let objective: Vec<(usize, f64)> = c.iter().copied().enumerate().collect();
    let build = |b: &[f64], name: alloc::string::String| {
        let rows = a.iter().zip(b).map(|(row, &bi)| Row::new(row.iter().copied().enumerate().collect(), RowSense::Le, bi)).collect();
        MipInstance::binary(name, ObjectiveSense::Maximize, n, objective.clone(), rows).with_param_tag(b.to_vec())
    };
    let mut instances = Vec::with_capacity(num_instances);
    for k in 0..num_instances {
        let mut r = stream_rng(seed, k as u64 + 1);
        let b: Vec<f64> = centres.iter().map(|&s| r.random_range(0.8 * s..=1.2 * s)).collect();
        let inst = build(&b, format!("mkp_{m}_{n}_s{seed}_{k}"));
        check_point(&inst, &vec![0.0; n], k)?;
        instances.push(inst);
    }
    let template = build(&centres, format!("mkp_{m}_{n}_s{seed}"));
    Ok(InstanceFamily { name: format!("mkp_{m}_{n}"), template, varying_field: VaryingField::RhsB, instances, seed })
}

/// Set cover `min c·y, Ay ≥ 1` with a fixed 0/1 matrix and varying costs.
pub fn gen_scp(m: usize, n: usize, density: f64, num_instances: usize, seed: u64) -> Result<InstanceFamily, InstGenError> {
    if m == 0 || n == 0 {
        return Err(InstGenError::BadParameter("m and n must be at least 1"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(InstGenError::BadParameter("density must lie in (0, 1]"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut pattern: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.random_bool(density)).collect()).collect();
    for row in &mut pattern {
        if row.is_empty() {
            row.push(rng.random_range(0..n));
        }
    }
    let c_bar: Vec<f64> = (0..n).map(|_| rng.random_range(1..=100u32) as f64).collect();
    let rows: Vec<Row> = pattern.iter().map(|cols| Row::new(cols.iter().map(|&j| (j, 1.0)).collect(), RowSense::Ge, 1.0)).collect();
    let build = |c: &[f64], name: alloc::string::String| {
        MipInstance::binary(name, ObjectiveSense::Minimize, n, c.iter().copied().enumerate().collect(), rows.clone()).with_param_tag(c.to_vec())
    };
    let mut instances = Vec::with_capacity(num_instances);
    for k in 0..num_instances {
        let mut r = stream_rng(seed, k as u64 + 1);
        let c: Vec<f64> = c_bar.iter().map(|&cb| r.random_range(0.8 * cb..=1.2 * cb)).collect();
        let inst = build(&c, format!("scp_{m}_{n}_s{seed}_{k}"));
        check_point(&inst, &vec![1.0; n], k)?;
        instances.push(inst);
    }
    let template = build(&c_bar, format!("scp_{m}_{n}_s{seed}"));
    Ok(InstanceFamily { name: format!("scp_{m}_{n}"), template, varying_field: VaryingField::CostC, instances, seed })
}

/// Combinatorial auction as set packing: each item goes to at most one
/// accepted bid. Bundles are fixed; bid values vary.
pub fn gen_ca(num_items: usize, num_bids: usize, num_instances: usize, seed: u64) -> Result<InstanceFamily, InstGenError> {
    if num_items == 0 || num_bids == 0 {
        return Err(InstGenError::BadParameter("items and bids must be at least 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let max_size = num_items.min(5);
    let min_size = max_size.min(2);
    let mut bundles = Vec::with_capacity(num_bids);
    let mut base = Vec::with_capacity(num_bids);
    for _ in 0..num_bids {
        let size = rng.random_range(min_size..=max_size);
        let mut items = index::sample(&mut rng, num_items, size).into_vec();
        items.sort_unstable();
        bundles.push(items);
        base.push(rng.random_range(10.0..=100.0));
    }
    let mut by_item: Vec<Vec<usize>> = vec![Vec::new(); num_items];
    for (k, items) in bundles.iter().enumerate() {
        for &i in items {
            by_item[i].push(k);
        }
    }
    let rows: Vec<Row> = by_item
        .iter()
        .filter(|bids| !bids.is_empty())
        .map(|bids| Row::new(bids.iter().map(|&k| (k, 1.0)).collect(), RowSense::Le, 1.0))
        .collect();
    let reference: Vec<f64> = bundles.iter().zip(&base).map(|(b, p)| b.len() as f64 * p).collect();
    let build = |v: &[f64], name: alloc::string::String| {
        MipInstance::binary(name, ObjectiveSense::Maximize, num_bids, v.iter().copied().enumerate().collect(), rows.clone()).with_param_tag(v.to_vec())
    };
    let mut instances = Vec::with_capacity(num_instances);
    for k in 0..num_instances {
        let mut r = stream_rng(seed, k as u64 + 1);
        let v: Vec<f64> = reference.iter().map(|&p| p * r.random_range(0.8..=1.2)).collect();
        let inst = build(&v, format!("ca_{num_items}_{num_bids}_s{seed}_{k}"));
        check_point(&inst, &vec![0.0; num_bids], k)?;
        instances.push(inst);
    }
    let template = build(&reference, format!("ca_{num_items}_{num_bids}_s{seed}"));
    Ok(InstanceFamily { name: format!("ca_{num_items}_{num_bids}"), template, varying_field: VaryingField::CostC, instances, seed })
}

/// Bid bundles of a combinatorial-auction instance, recovered from its rows.
pub fn ca_bundles(instance: &MipInstance) -> Vec<Vec<usize>> {
    let mut bundles = vec![Vec::new(); instance.num_binary];
    for (i, row) in instance.rows.iter().enumerate() {
        for &(k, _) in &row.coefficients {
            bundles[k].push(i);
        }
    }
    bundles
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformKnapsack {
    pub instance: MipInstance,
    pub weights: Vec<f64>,
    /// Profit-to-weight ratios; profits are `f_i a_i`.
    pub ratios: Vec<f64>,
    pub capacity: f64,
}

/// `max Σ f_i a_i y_i, Σ a_i y_i ≤ γn` with `a_i ~ U(0,1)`, `f_i ~ U[0,1]`.
pub fn gen_knapsack_uniform(n: usize, gamma: f64, seed: u64) -> Result<UniformKnapsack, InstGenError> {
    if n == 0 {
        return Err(InstGenError::BadParameter("n must be at least 1"));
    }
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(InstGenError::BadParameter("gamma must lie in (0, 1/2)"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut weights = Vec::with_capacity(n);
    let mut ratios = Vec::with_capacity(n);
    for _ in 0..n {
        let mut a: f64 = rng.random();
        while a == 0.0 {
            a = rng.random();
        }
        weights.push(a);
        ratios.push(rng.random::<f64>());
    }
    let capacity = gamma * n as f64;
    let objective = weights.iter().zip(&ratios).map(|(a, f)| f * a).enumerate().collect();
    let row = Row::new(weights.iter().copied().enumerate().collect(), RowSense::Le, capacity);
    let instance = MipInstance::binary(format!("knap_{n}_s{seed}"), ObjectiveSense::Maximize, n, objective, vec![row]).with_param_tag(weights.clone());
    check_point(&instance, &vec![0.0; n], 0)?;
    Ok(UniformKnapsack { instance, weights, ratios, capacity })
}
