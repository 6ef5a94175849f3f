//! The numeric stack instantiates at both f64 and f32. Default tolerances
//! are calibrated for f64; single precision is exercised at loose targets.

use std::sync::Arc;

use fwsdp::fwcone::{barrier_value, BlockCollection, SupportIndex};
use fwsdp::ipm::{solve, SolveConfig};
use fwsdp::problem::generate_instance;
use fwsdp::symmat::psd_sqrt;
use fwsdp::{SdpProblem32, SolveConfig32, SymMat32};

#[test]
fn cone_algebra_at_single_precision() {
    let idx = SupportIndex::enumerate(4, 2).unwrap();
    let y0 = BlockCollection::<f32>::canonical_interior(Arc::clone(&idx));
    assert_eq!(y0.embed_sum(), SymMat32::identity(4));
    let want = 12.0 * 3f32.ln();
    assert!((barrier_value(&y0).unwrap() - want).abs() <= 1e-5);
    assert_eq!(
        psd_sqrt(&SymMat32::identity(3)).unwrap(),
        SymMat32::identity(3)
    );
}

#[test]
fn solve_at_single_precision_with_loose_target() {
    let p: SdpProblem32 = generate_instance(4, 2, 1.0f32, 1);
    let mut config: SolveConfig32 = SolveConfig::new(2);
    config.epsilon = 1e-2;
    let res = solve(&p, &config).unwrap();
    assert_eq!(res.report.status, fwsdp::SolveStatus::Optimal);
    assert!(res.report.gap <= 1e-2);
    // the f64 run on the same data reaches a consistent optimum
    let p64 = generate_instance::<f64>(4, 2, 1.0, 1);
    let res64 = solve(&p64, &SolveConfig::new(2)).unwrap();
    assert!((res.report.objective as f64 - res64.report.objective).abs() <= 1e-2);
}
