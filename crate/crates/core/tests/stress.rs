//! Larger desk-scale instances. Ignored by default; run with
//! `cargo test --test stress -- --ignored --nocapture`.

use fwsdp::ipm::{solve, SolveConfig};
use fwsdp::problem::generate_instance;

#[test]
#[ignore = "several seconds; documents the desk-scale envelope"]
fn larger_instances_converge() {
    for (n, k, m) in [(16usize, 2usize, 8usize), (16, 4, 8), (20, 2, 10)] {
        let p = generate_instance::<f64>(n, m, 1.0, 1);
        let config = SolveConfig::new(k);
        let res = solve(&p, &config).unwrap();
        assert_eq!(
            res.report.status,
            fwsdp::SolveStatus::Optimal,
            "(n={n},k={k},m={m})"
        );
        assert!(res.report.gap_valid && res.report.gap <= 1e-6);
        assert!(p.feasibility_error(&res.report.x_final) <= 1e-8);
    }
}
