use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use pmvb_core::instgen::{gen_ca, gen_mkp, gen_scp, InstanceFamily, VaryingField};
use pmvb_core::lp::{self, LpStatus};
use pmvb_core::model::MipInstance;
use proptest::prelude::*;

/// Hash of everything except the declared varying field and the name.
fn fixed_part_hash(inst: &MipInstance, varying: VaryingField) -> u64 {
    let mut h = DefaultHasher::new();
    inst.num_binary.hash(&mut h);
    inst.num_continuous.hash(&mut h);
    format!("{:?}", inst.sense).hash(&mut h);
    for row in &inst.rows {
        for &(j, a) in &row.coefficients {
            j.hash(&mut h);
            a.to_bits().hash(&mut h);
        }
        format!("{:?}", row.sense).hash(&mut h);
        if varying != VaryingField::RhsB {
            row.rhs.to_bits().hash(&mut h);
        }
    }
    if varying != VaryingField::CostC {
        for &(j, c) in &inst.objective {
            j.hash(&mut h);
            c.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

fn check_family(fam: &InstanceFamily) -> Result<(), TestCaseError> {
    let reference = fixed_part_hash(&fam.template, fam.varying_field);
    for inst in &fam.instances {
        prop_assert_eq!(fixed_part_hash(inst, fam.varying_field), reference);
        prop_assert!(inst.validate().is_ok());
        let varying: Vec<f64> = match fam.varying_field {
            VaryingField::RhsB => inst.rows.iter().map(|r| r.rhs).collect(),
            VaryingField::CostC => inst.objective.iter().map(|c| c.1).collect(),
        };
        prop_assert_eq!(&inst.param_tag, &varying);
        prop_assert_eq!(lp::solve_simplex(inst, &[]).unwrap().status, LpStatus::Optimal);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 30, ..ProptestConfig::default() })]

    #[test]
    fn only_the_declared_field_varies(seed in any::<u64>(), m in 1usize..6, n in 1usize..15) {
        check_family(&gen_mkp(m, n, 4, seed).unwrap())?;
        check_family(&gen_scp(m * 3, n, 0.3, 4, seed).unwrap())?;
        check_family(&gen_ca(n.max(2), m * 3, 4, seed).unwrap())?;
    }
}

#[test]
fn scp_density_is_close_to_requested() {
    let fam = gen_scp(200, 300, 0.05, 1, 17).unwrap();
    let nnz: usize = fam.template.rows.iter().map(|r| r.coefficients.len()).sum();
    let density = nnz as f64 / (200.0 * 300.0);
    assert!((density - 0.05).abs() <= 0.2 * 0.05, "density {density}");
}

#[test]
fn packing_rows_allow_one_bid_per_item() {
    let fam = gen_ca(10, 24, 1, 3).unwrap();
    let inst = &fam.instances[0];
    for row in &inst.rows {
        if row.coefficients.len() >= 2 {
            let mut y = vec![0.0; inst.num_binary];
            y[row.coefficients[0].0] = 1.0;
            y[row.coefficients[1].0] = 1.0;
            assert!(!inst.check_feasible(&y, 1e-6).unwrap().is_feasible());
        }
    }
}
