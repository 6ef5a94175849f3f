//! Factor-width cone algebra: block collections indexed by the k-subsets of
//! `{0..n-1}`, the embed/distribute/restrict operators between block space and
//! ambient symmetric matrices, the block log-det barrier with its gradient and
//! Hessian actions, boundary steps and dual-cone membership.
//!
//! Block order is lexicographic over subsets and fixed forever; every
//! reduction over blocks is combined in that order, so results are identical
//! for any number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{real, real_usize, Scalar};
use crate::symmat::{cholesky, frob_inner, lambda_max_sym, lambda_min_sym, mul_dense, SymMat};

/// Binomial coefficient with overflow check.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

/// Derived combinatorial quantities of a support index.
///
/// `theta_fw = k * C(n,k)` is the natural complexity value of the product of
/// `C(n,k)` log-det barriers; it is recorded as a derived constant with no
/// further guarantee attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CombinatorialConstants {
    /// Number of blocks, `C(n,k)`.
    pub c_blocks: usize,
    /// Blocks through a fixed diagonal index, `C(n-1,k-1)`.
    pub c_diag: usize,
    /// Blocks through a fixed off-diagonal pair, `C(n-2,k-2)`.
    pub c_offdiag: usize,
    /// Barrier complexity of the block product, `k * C(n,k) = n * C(n-1,k-1)`.
    pub theta_fw: usize,
}

/// All k-subsets of `{0..n-1}` in lexicographic order.
#[derive(Debug, PartialEq, Eq)]
pub struct SupportIndex {
    n: usize,
    k: usize,
    flat: Vec<usize>,
}

impl SupportIndex {
    /// Enumerates the supports. Requires `2 <= k <= n` and `k | n`.
    pub fn enumerate(n: usize, k: usize) -> Result<Arc<SupportIndex>> {
        if k < 2 {
            return Err(Error::BadDims(format!("block size k={k} must be >= 2")));
        }
        if k > n {
            return Err(Error::BadDims(format!(
                "block size k={k} exceeds dimension n={n}"
            )));
        }
        if n % k != 0 {
            return Err(Error::BadDims(format!("k={k} does not divide n={n}")));
        }
        let count = binomial(n, k);
        let mut flat = Vec::with_capacity(count * k);
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            flat.extend_from_slice(&cur);
            // advance to the next combination in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(Arc::new(SupportIndex { n, k, flat }));
                }
                i -= 1;
                if cur[i] != i + n - k {
                    break;
                }
            }
            cur[i] += 1;
            for j in (i + 1)..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn block_dim(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.flat.len() / self.k
    }

    /// The `t`-th subset, strictly increasing.
    pub fn subset(&self, t: usize) -> &[usize] {
        &self.flat[t * self.k..(t + 1) * self.k]
    }

    pub fn constants(&self) -> CombinatorialConstants {
        let c_blocks = binomial(self.n, self.k);
        let c_diag = binomial(self.n - 1, self.k - 1);
        let c_offdiag = binomial(self.n - 2, self.k - 2);
        debug_assert_eq!(self.k * c_blocks, self.n * c_diag);
        CombinatorialConstants {
            c_blocks,
            c_diag,
            c_offdiag,
            theta_fw: self.k * c_blocks,
        }
    }
}

/// Element of the block space: one symmetric `k x k` matrix per support.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCollection<F> {
    index: Arc<SupportIndex>,
    blocks: Vec<SymMat<F>>,
}

impl<F: Scalar> BlockCollection<F> {
    pub fn zeros(index: Arc<SupportIndex>) -> Self {
        let blocks = vec![SymMat::zeros(index.block_dim()); index.count()];
        BlockCollection { index, blocks }
    }

    pub fn from_blocks(index: Arc<SupportIndex>, blocks: Vec<SymMat<F>>) -> Self {
        assert_eq!(blocks.len(), index.count(), "block count mismatch");
        assert!(blocks.iter().all(|b| b.dim() == index.block_dim()));
        BlockCollection { index, blocks }
    }

    /// The canonical interior point: every block `(1 / C(n-1,k-1)) * I`, so
    /// that the embedded sum is exactly the identity.
    pub fn canonical_interior(index: Arc<SupportIndex>) -> Self {
        let w = F::one() / real_usize::<F>(index.constants().c_diag);
        let block = SymMat::identity(index.block_dim()).scaled(w);
        let blocks = vec![block; index.count()];
        BlockCollection { index, blocks }
    }

    pub fn index(&self) -> &Arc<SupportIndex> {
        &self.index
    }

    pub fn blocks(&self) -> &[SymMat<F>] {
        &self.blocks
    }

    pub fn block(&self, t: usize) -> &SymMat<F> {
        &self.blocks[t]
    }

    pub fn block_mut(&mut self, t: usize) -> &mut SymMat<F> {
        &mut self.blocks[t]
    }

    pub fn scaled(&self, c: F) -> Self {
        BlockCollection {
            index: Arc::clone(&self.index),
            blocks: self.blocks.iter().map(|b| b.scaled(c)).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: F, other: &Self) {
        assert_eq!(self.index.count(), other.index.count());
        for (b, o) in self.blocks.iter_mut().zip(other.blocks.iter()) {
            b.add_scaled(c, o);
        }
    }

    pub fn plus_scaled(&self, c: F, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(c, other);
        r
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus_scaled(-F::one(), other)
    }

    /// Flat inner product: `sum_J tr(U_J V_J)`.
    pub fn dot(&self, other: &Self) -> F {
        assert_eq!(self.index.count(), other.index.count());
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .fold(F::zero(), |acc, (u, v)| acc + frob_inner(u, v))
    }

    /// Flat norm induced by [`Self::dot`].
    pub fn norm(&self) -> F {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.packed().iter().all(|&v| v == F::zero()))
    }

    /// True when every block is strictly positive definite (Cholesky with
    /// pivot tolerance `1e-14 * max diagonal`).
    pub fn is_interior(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| cholesky(b, interior_pivot_floor(b)).is_ok())
    }

    /// Sum of the embedded blocks: the ambient symmetric matrix this
    /// collection represents.
    ///
    /// Entries are accumulated with Neumaier compensation in lexicographic
    /// block order; the distribute/embed round trip must hold entrywise at
    /// machine precision.
    pub fn embed_sum(&self) -> SymMat<F> {
        let n = self.index.ambient_dim();
        let k = self.index.block_dim();
        let len = n * (n + 1) / 2;
        let mut sum = vec![F::zero(); len];
        let mut comp = vec![F::zero(); len];
        let at = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j; // i <= j
        for (t, block) in self.blocks.iter().enumerate() {
            let sup = self.index.subset(t);
            for a in 0..k {
                for b in a..k {
                    let (i, j) = (sup[a], sup[b]);
                    let slot = at(i, j);
                    neumaier_add(&mut sum[slot], &mut comp[slot], block.get(a, b));
                }
            }
        }
        SymMat::from_fn(n, |i, j| sum[at(i, j)] + comp[at(i, j)])
    }

    /// Weighted splitting of an ambient matrix across the blocks: block `J`
    /// is the principal submatrix on `J` with diagonal entries divided by
    /// `C(n-1,k-1)` and off-diagonal entries by `C(n-2,k-2)`. Right inverse
    /// of [`Self::embed_sum`].
    pub fn distribute(x: &SymMat<F>, index: &Arc<SupportIndex>) -> Result<Self> {
        if x.dim() != index.ambient_dim() {
            return Err(Error::BadDims(format!(
                "matrix dimension {} does not match ambient dimension {}",
                x.dim(),
                index.ambient_dim()
            )));
        }
        let consts = index.constants();
        let w_diag = F::one() / real_usize::<F>(consts.c_diag);
        let w_off = F::one() / real_usize::<F>(consts.c_offdiag);
        let k = index.block_dim();
        let blocks = (0..index.count())
            .map(|t| {
                let sup = index.subset(t);
                SymMat::from_fn(k, |a, b| {
                    let w = if a == b { w_diag } else { w_off };
                    x.get(sup[a], sup[b]) * w
                })
            })
            .collect();
        Ok(BlockCollection {
            index: Arc::clone(index),
            blocks,
        })
    }

    /// Principal-submatrix restriction of an ambient matrix: the adjoint of
    /// [`Self::embed_sum`] under the flat inner product.
    pub fn restrict(s: &SymMat<F>, index: &Arc<SupportIndex>) -> Result<Self> {
        if s.dim() != index.ambient_dim() {
            return Err(Error::BadDims(format!(
                "matrix dimension {} does not match ambient dimension {}",
                s.dim(),
                index.ambient_dim()
            )));
        }
        let blocks = (0..index.count())
            .map(|t| s.principal(index.subset(t)))
            .collect();
        Ok(BlockCollection {
            index: Arc::clone(index),
            blocks,
        })
    }
}

#[inline]
fn neumaier_add<F: Scalar>(sum: &mut F, comp: &mut F, v: F) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *comp += (*sum - t) + v;
    } else {
        *comp += (v - t) + *sum;
    }
    *sum = t;
}

fn interior_pivot_floor<F: Scalar>(b: &SymMat<F>) -> F {
    let mut maxdiag = F::zero();
    for i in 0..b.dim() {
        maxdiag = maxdiag.max(b.get(i, i));
    }
    real::<F>(1e-14) * maxdiag.max(F::zero())
}

/// Maps every block index in parallel, preserving lexicographic order.
pub(crate) fn map_blocks<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).into_par_iter().map(f).collect()
}

/// Like [`map_blocks`] but failing on the lexicographically first error.
fn try_map_blocks<T: Send>(
    count: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    map_blocks(count, f).into_iter().collect()
}

/// Block log-det barrier `-sum_J log det(Y_J)`.
pub fn barrier_value<F: Scalar>(y: &BlockCollection<F>) -> Result<F> {
    let parts = try_map_blocks(y.index().count(), |t| {
        let b = y.block(t);
        cholesky(b, interior_pivot_floor(b))
            .map(|f| f.logdet())
            .map_err(|_| Error::NotInterior { block: t })
    })?;
    Ok(-parts.into_iter().fold(F::zero(), |acc, v| acc + v))
}

/// Gradient of the barrier: block `J` of the result is `-(Y_J)^{-1}`.
pub fn barrier_gradient<F: Scalar>(y: &BlockCollection<F>) -> Result<BlockCollection<F>> {
    let blocks = try_map_blocks(y.index().count(), |t| {
        let b = y.block(t);
        cholesky(b, interior_pivot_floor(b))
            .map(|f| f.inverse().scaled(-F::one()))
            .map_err(|_| Error::NotInterior { block: t })
    })?;
    Ok(BlockCollection::from_blocks(Arc::clone(y.index()), blocks))
}

/// Inverse Hessian action of the barrier at `Y`: block `J` is `Y_J D_J Y_J`.
pub fn hess_inv_apply<F: Scalar>(
    y: &BlockCollection<F>,
    d: &BlockCollection<F>,
) -> Result<BlockCollection<F>> {
    assert_eq!(y.index().count(), d.index().count(), "index mismatch");
    let k = y.index().block_dim();
    let blocks = try_map_blocks(y.index().count(), |t| {
        let yb = y.block(t);
        cholesky(yb, interior_pivot_floor(yb)).map_err(|_| Error::NotInterior { block: t })?;
        let yd = yb.to_dense();
        let dd = d.block(t).to_dense();
        let tmp = mul_dense(&yd, &dd, k);
        let out = mul_dense(&tmp, &yd, k);
        Ok(SymMat::from_dense(k, &out))
    })?;
    Ok(BlockCollection::from_blocks(Arc::clone(y.index()), blocks))
}

/// Local inner product at `Y`: `sum_J tr(Y_J^{-1} U_J Y_J^{-1} V_J)`.
pub fn local_inner<F: Scalar>(
    y: &BlockCollection<F>,
    u: &BlockCollection<F>,
    v: &BlockCollection<F>,
) -> Result<F> {
    assert_eq!(y.index().count(), u.index().count(), "index mismatch");
    assert_eq!(y.index().count(), v.index().count(), "index mismatch");
    let k = y.index().block_dim();
    let parts = try_map_blocks(y.index().count(), |t| {
        let yb = y.block(t);
        let f =
            cholesky(yb, interior_pivot_floor(yb)).map_err(|_| Error::NotInterior { block: t })?;
        let a = f.solve_mat(u.block(t));
        let b = f.solve_mat(v.block(t));
        let mut acc = F::zero();
        for i in 0..k {
            for j in 0..k {
                acc += a[i * k + j] * b[j * k + i];
            }
        }
        Ok(acc)
    })?;
    Ok(parts.into_iter().fold(F::zero(), |acc, v| acc + v))
}

/// Distance to the cone boundary from interior `Y` in the `-Z` direction:
/// `min_J sup { s >= 0 : Y_J - s Z_J psd }`, computed per block as
/// `1 / lambda_max(L_J^{-1} Z_J L_J^{-T})`. Blocks whose largest generalized
/// eigenvalue is nonpositive contribute infinity.
pub fn step_to_boundary<F: Scalar>(y: &BlockCollection<F>, z: &BlockCollection<F>) -> Result<F> {
    assert_eq!(y.index().count(), z.index().count(), "index mismatch");
    let parts = try_map_blocks(y.index().count(), |t| {
        let yb = y.block(t);
        let f =
            cholesky(yb, interior_pivot_floor(yb)).map_err(|_| Error::NotInterior { block: t })?;
        let w = f.inv_congruence(z.block(t));
        let lam = lambda_max_sym(&w);
        Ok(if lam > F::zero() {
            F::one() / lam
        } else {
            F::infinity()
        })
    })?;
    Ok(parts
        .into_iter()
        .fold(F::infinity(), |acc: F, v| acc.min(v)))
}

/// Membership in the dual of the factor-width-k cone: every `k x k`
/// principal submatrix must be psd up to `1e-10 * (1 + ||S||_F)`.
pub fn dual_membership<F: Scalar>(s: &SymMat<F>, k: usize) -> Result<bool> {
    let index = SupportIndex::enumerate(s.dim(), k)?;
    let tol = real::<F>(1e-10) * (F::one() + s.frob_norm());
    for t in 0..index.count() {
        if lambda_min_sym(&s.principal(index.subset(t))) < -tol {
            return Ok(false);
        }
    }
    Ok(true)
}
