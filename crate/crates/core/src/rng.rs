//! Seeded random helpers. Entries are produced from raw ChaCha output with a
//! fixed bit mapping so streams are reproducible independent of any sampling
//! library internals.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::scalar::{real, Scalar};
use crate::symmat::SymMat;

/// Uniform draw from `[-1, 1)` using the top 53 bits of one `u64`.
pub(crate) fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    2.0 * u - 1.0
}

/// RNG for trial `t` of a suite: same seed, per-trial stream.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random symmetric matrix with entries uniform in `[-1, 1)`, filled over the
/// upper triangle in row-major order.
pub(crate) fn random_sym<F: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> SymMat<F> {
    SymMat::from_fn(n, |_, _| real(uniform_pm1(rng)))
}

/// Random interior block `B^T B + 0.1 I` with `B` uniform in `[-1, 1)`.
pub(crate) fn random_interior_block<F: Scalar>(rng: &mut ChaCha8Rng, k: usize) -> SymMat<F> {
    let b: Vec<f64> = (0..k * k).map(|_| uniform_pm1(rng)).collect();
    SymMat::from_fn(k, |i, j| {
        let mut acc = 0.0;
        for r in 0..k {
            acc += b[r * k + i] * b[r * k + j];
        }
        if i == j {
            acc += 0.1;
        }
        real(acc)
    })
}
