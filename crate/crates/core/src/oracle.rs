//! Independent verification oracles: the SDP-side restricted decrement at the
//! identity, full-cone reference solves, finite-difference calculus checks,
//! and batch validators for the barrier/decrement/norm relations the method
//! relies on.
//!
//! Trials are independent and run on any number of workers; failure counts
//! aggregate by order-independent integer sums and the worst margin is
//! reduced in trial order, so reports are deterministic.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::fwcone::{
    barrier_gradient, barrier_value, hess_inv_apply, BlockCollection, SupportIndex,
};
use crate::ipm::{restricted_newton, solve, SolveConfig};
use crate::problem::{fmt_float, SdpProblem};
use crate::rng::{random_interior_block, random_sym, trial_rng};
use crate::scalar::{real, real_usize, Scalar};
use crate::symmat::{frob_inner, logdet_spd, spd_solve, SymMat};

/// Outcome of one batch validator. A suite passes iff `failures == 0`;
/// `worst_slack` is the most-violated margin (negative on failures).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport<F> {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_slack: F,
}

impl<F: Scalar> CheckReport<F> {
    /// One structured-text line in the trace style.
    pub fn to_line(&self) -> String {
        format!(
            "check {} trials {} failures {} worst_slack {}",
            self.name,
            self.trials,
            self.failures,
            fmt_float(self.worst_slack)
        )
    }
}

/// Runs independent trials in parallel and folds margins in trial order.
fn run_trials<F: Scalar>(
    name: String,
    trials: usize,
    margin: impl Fn(u64) -> Result<F> + Sync + Send,
) -> Result<CheckReport<F>> {
    let margins = (0..trials as u64)
        .into_par_iter()
        .map(&margin)
        .collect::<Vec<Result<F>>>();
    let mut failures = 0;
    let mut worst = F::infinity();
    for m in margins {
        let m = m?;
        if m < F::zero() {
            failures += 1;
        }
        worst = worst.min(m);
    }
    Ok(CheckReport {
        name,
        trials,
        failures,
        worst_slack: worst,
    })
}

/// Restricted Newton decrement of the log-det barrier at the identity over
/// the nullspace of the given rows: `min_y || I - sum y_i A_i ||_F`, by least
/// squares on the Gram matrix of the rows.
pub fn sdp_decrement_at_identity<F: Scalar>(rows: &[SymMat<F>]) -> Result<F> {
    assert!(!rows.is_empty(), "at least one row required");
    let n = rows[0].dim();
    assert!(rows.iter().all(|r| r.dim() == n), "dimension mismatch");
    let m = rows.len();
    let mut gram = SymMat::zeros(m);
    let mut rhs = vec![F::zero(); m];
    for i in 0..m {
        for j in i..m {
            gram.set(i, j, frob_inner(&rows[i], &rows[j]));
        }
        rhs[i] = rows[i].trace();
    }
    let y = spd_solve(&gram, &rhs)?;
    let mut resid = SymMat::identity(n);
    for (&c, row) in y.iter().zip(rows.iter()) {
        resid.add_scaled(-c, row);
    }
    Ok(resid.frob_norm())
}

/// Reference optimum from the full-cone run (`k = n`), where the block cone
/// coincides with the psd cone.
pub fn full_cone_reference<F: Scalar>(problem: &SdpProblem<F>, epsilon: F) -> Result<F> {
    let mut config = SolveConfig::new(problem.n);
    config.epsilon = epsilon;
    let res = solve(problem, &config)?;
    Ok(res.report.objective)
}

fn random_interior_collection<F: Scalar>(
    rng: &mut rand_chacha::ChaCha8Rng,
    index: &Arc<SupportIndex>,
) -> BlockCollection<F> {
    let blocks = (0..index.count())
        .map(|_| random_interior_block(rng, index.block_dim()))
        .collect();
    BlockCollection::from_blocks(Arc::clone(index), blocks)
}

fn random_direction<F: Scalar>(
    rng: &mut rand_chacha::ChaCha8Rng,
    index: &Arc<SupportIndex>,
) -> BlockCollection<F> {
    let blocks = (0..index.count())
        .map(|_| random_sym(rng, index.block_dim()))
        .collect();
    let d = BlockCollection::from_blocks(Arc::clone(index), blocks);
    let n = d.norm();
    d.scaled(F::one() / n)
}

/// Barrier comparison: on random interior collections `Y` with `X` their
/// embedded sum, `barrier(Y) >= C * (-log det X) + n C log C - 1e-9` where
/// `C = C(n-1,k-1)`.
pub fn check_barrier_inequality<F: Scalar>(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport<F>> {
    let index = SupportIndex::enumerate(n, k)?;
    let c = real_usize::<F>(index.constants().c_diag);
    let shift = real_usize::<F>(n) * c * c.ln();
    run_trials(
        format!("barrier_inequality(n={n},k={k})"),
        trials,
        move |t| {
            let mut rng = trial_rng(seed, t);
            let y = random_interior_collection::<F>(&mut rng, &index);
            let lhs = barrier_value(&y)?;
            let rhs = -c * logdet_spd(&y.embed_sum())? + shift;
            Ok(lhs - rhs + real(1e-9))
        },
    )
}

/// Norm bound of the weighted splitting: `||distribute(X)|| <= ||X||_F + 1e-12`
/// on random symmetric `X`.
pub fn check_norm_bound<F: Scalar>(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport<F>> {
    let index = SupportIndex::enumerate(n, k)?;
    run_trials(format!("norm_bound(n={n},k={k})"), trials, move |t| {
        let mut rng = trial_rng(seed, t);
        let x = random_sym::<F>(&mut rng, n);
        let split = BlockCollection::distribute(&x, &index)?;
        Ok(x.frob_norm() + real(1e-12) - split.norm())
    })
}

/// Decrement comparison at the canonical interior point: on random constraint
/// rows with `b = A(I)`, the block-space decrement dominates the SDP-side
/// decrement at the identity, `dec_fw >= dec_sdp - 1e-8`.
///
/// This is the inequality the path-following analysis actually consumes (the
/// guard transfer needs exactly `dec_fw small => dec_sdp small`); it holds
/// with equality when `k = n`. The splitting norm bound is validated on every
/// sampled row as part of the setup.
pub fn check_decrement_relation<F: Scalar>(
    n: usize,
    k: usize,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport<F>> {
    let index = SupportIndex::enumerate(n, k)?;
    run_trials(
        format!("decrement_relation(n={n},k={k},m={m})"),
        trials,
        move |t| {
            let mut rng = trial_rng(seed, t);
            let rows: Vec<SymMat<F>> = (0..m).map(|_| random_sym(&mut rng, n)).collect();
            let norm_tol = real::<F>(1e-12);
            for row in &rows {
                let split = BlockCollection::distribute(row, &index)?;
                if split.norm() > row.frob_norm() + norm_tol {
                    return Ok(row.frob_norm() + norm_tol - split.norm());
                }
            }
            let rhs: Vec<F> = rows.iter().map(|r| r.trace()).collect();
            let abar = rows
                .iter()
                .map(|r| BlockCollection::restrict(r, &index))
                .collect::<Result<Vec<_>>>()?;
            let y0 = BlockCollection::canonical_interior(Arc::clone(&index));
            let dec_fw = restricted_newton(&abar, &rhs, &y0)?.decrement;
            let dec_sdp = sdp_decrement_at_identity(&rows)?;
            Ok(dec_fw - (dec_sdp - real(1e-8)))
        },
    )
}

/// Directional finite-difference checks of the barrier calculus: gradient
/// against central differences of the value (rel. error <= 1e-6 at h = 1e-5)
/// and the inverse-Hessian action against a difference of gradients
/// (rel. error <= 1e-5).
pub fn finite_difference_suite<F: Scalar>(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport<F>> {
    let index = SupportIndex::enumerate(n, k)?;
    let h = real::<F>(1e-5);
    run_trials(
        format!("finite_difference(n={n},k={k})"),
        trials,
        move |t| {
            let mut rng = trial_rng(seed, t);
            let y = random_interior_collection::<F>(&mut rng, &index);
            let d = random_direction::<F>(&mut rng, &index);

            // gradient vs central difference of the value
            let g = barrier_gradient(&y)?;
            let ip = g.dot(&d);
            let fp = barrier_value(&y.plus_scaled(h, &d))?;
            let fm = barrier_value(&y.plus_scaled(-h, &d))?;
            let fd = (fp - fm) / (h + h);
            let grad_err = (fd - ip).abs() / (F::one() + ip.abs());
            let grad_margin = real::<F>(1e-6) - grad_err;

            // inverse Hessian: a gradient difference along hess_inv_apply(Y, D)
            // must recover D (up to the normalization of the probe direction)
            let e = hess_inv_apply(&y, &d)?;
            let scale = e.norm();
            let probe = e.scaled(F::one() / scale);
            let gp = barrier_gradient(&y.plus_scaled(h, &probe))?;
            let gm = barrier_gradient(&y.plus_scaled(-h, &probe))?;
            let fd_h = gp.minus(&gm).scaled(F::one() / (h + h));
            let want = d.scaled(F::one() / scale);
            let hess_err = fd_h.minus(&want).norm() / (F::one() + want.norm());
            let hess_margin = real::<F>(1e-5) - hess_err;

            Ok(grad_margin.min(hess_margin))
        },
    )
}

/// Worst relative error of the directional gradient check at step size `h`,
/// used by the truncation/rounding tradeoff scan.
pub fn gradient_fd_max_error<F: Scalar>(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    h: F,
) -> Result<F> {
    let index = SupportIndex::enumerate(n, k)?;
    let errs = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<F> {
            let mut rng = trial_rng(seed, t);
            let y = random_interior_collection::<F>(&mut rng, &index);
            let d = random_direction::<F>(&mut rng, &index);
            let g = barrier_gradient(&y)?;
            let ip = g.dot(&d);
            let fp = barrier_value(&y.plus_scaled(h, &d))?;
            let fm = barrier_value(&y.plus_scaled(-h, &d))?;
            let fd = (fp - fm) / (h + h);
            Ok((fd - ip).abs() / (F::one() + ip.abs()))
        })
        .collect::<Vec<_>>();
    let mut worst = F::zero();
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(worst)
}
