//! Dense symmetric matrix kernel: storage, Cholesky, eigendecomposition,
//! square roots and SPD solves.
//!
//! Symmetry is a storage invariant, not a runtime check: only the upper
//! triangle is kept (row-major), so `get(i, j) == get(j, i)` always holds.
//! Tolerances are relative to the Frobenius scale of the input.

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

/// Dense symmetric matrix, packed upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat<F> {
    dim: usize,
    data: Vec<F>,
}

#[inline]
fn packed_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

impl<F: Scalar> SymMat<F> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMat {
            dim,
            data: vec![F::zero(); packed_len(dim)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, F::one());
        }
        m
    }

    /// Builds from a function of the upper-triangle index pair `(i, j)`, `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a row-major dense buffer, averaging the two triangles.
    pub fn from_dense(dim: usize, dense: &[F]) -> Self {
        assert_eq!(dense.len(), dim * dim, "dense buffer size mismatch");
        let half = real::<F>(0.5);
        Self::from_fn(dim, |i, j| {
            if i == j {
                dense[i * dim + j]
            } else {
                (dense[i * dim + j] + dense[j * dim + i]) * half
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.dim);
        i * self.dim - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        if i <= j {
            self.data[self.idx(i, j)]
        } else {
            self.data[self.idx(j, i)]
        }
    }

    /// Sets entry `(i, j)` and, by storage, `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        let at = if i <= j {
            self.idx(i, j)
        } else {
            self.idx(j, i)
        };
        self.data[at] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: F) {
        let at = if i <= j {
            self.idx(i, j)
        } else {
            self.idx(j, i)
        };
        self.data[at] += v;
    }

    /// Packed upper-triangle entries, row-major.
    pub fn packed(&self) -> &[F] {
        &self.data
    }

    pub fn trace(&self) -> F {
        (0..self.dim).fold(F::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frob_norm(&self) -> F {
        frob_inner(self, self).sqrt()
    }

    pub fn scaled(&self, c: F) -> Self {
        SymMat {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: F, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (x, &y) in self.data.iter_mut().zip(other.data.iter()) {
            *x += c * y;
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(F::one(), other);
        r
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_scaled(-F::one(), other);
        r
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<F> {
        let n = self.dim;
        let mut d = vec![F::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.data[self.idx(i, j)];
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    /// Principal submatrix on the given (strictly increasing) index set.
    pub fn principal(&self, support: &[usize]) -> SymMat<F> {
        let k = support.len();
        assert!(k >= 1 && *support.last().unwrap() < self.dim);
        SymMat::from_fn(k, |a, b| self.get(support[a], support[b]))
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        let mut y = vec![F::zero(); self.dim];
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.data[self.idx(i, j)];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    pub fn iter_upper(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        let dim = self.dim;
        (0..dim).flat_map(move |i| (i..dim).map(move |j| (i, j, self.get(i, j))))
    }
}

/// Trace inner product `tr(XY) = sum_ij X_ij Y_ij`.
pub fn frob_inner<F: Scalar>(x: &SymMat<F>, y: &SymMat<F>) -> F {
    assert_eq!(x.dim, y.dim, "dimension mismatch");
    let two = real::<F>(2.0);
    let mut acc = F::zero();
    for i in 0..x.dim {
        let di = x.idx(i, i);
        acc += x.data[di] * y.data[di];
        for j in (i + 1)..x.dim {
            let at = x.idx(i, j);
            acc += two * x.data[at] * y.data[at];
        }
    }
    acc
}

/// Dense row-major product `a * b` of `n x n` buffers.
pub(crate) fn mul_dense<F: Scalar>(a: &[F], b: &[F], n: usize) -> Vec<F> {
    let mut c = vec![F::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == F::zero() {
                continue;
            }
            let (brow, crow) = (&b[k * n..(k + 1) * n], &mut c[i * n..(i + 1) * n]);
            for j in 0..n {
                crow[j] += aik * brow[j];
            }
        }
    }
    c
}

/// Congruence `R * A * R` of symmetric matrices, symmetrized on repack.
pub(crate) fn congruence<F: Scalar>(r: &SymMat<F>, a: &SymMat<F>) -> SymMat<F> {
    assert_eq!(r.dim, a.dim, "dimension mismatch");
    let n = r.dim;
    let rd = r.to_dense();
    let ad = a.to_dense();
    let t = mul_dense(&rd, &ad, n);
    let out = mul_dense(&t, &rd, n);
    SymMat::from_dense(n, &out)
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor, dense row-major.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky<F> {
    n: usize,
    l: Vec<F>,
}

/// Factors `m = L L^T`. Fails with `(column, pivot)` when a pivot is not
/// strictly above `pivot_floor`.
pub(crate) fn cholesky<F: Scalar>(
    m: &SymMat<F>,
    pivot_floor: F,
) -> std::result::Result<Cholesky<F>, (usize, F)> {
    let n = m.dim();
    let mut l = vec![F::zero(); n * n];
    for j in 0..n {
        let mut diag = m.get(j, j);
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if !(diag > pivot_floor) {
            return Err((j, diag));
        }
        let ljj = diag.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / ljj;
        }
    }
    Ok(Cholesky { n, l })
}

impl<F: Scalar> Cholesky<F> {
    pub fn logdet(&self) -> F {
        let two = real::<F>(2.0);
        (0..self.n).fold(F::zero(), |acc, j| acc + self.l[j * self.n + j].ln()) * two
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [F]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[i * n + k] * x[k];
            }
            x[i] = v / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.l[k * n + i] * x[k];
            }
            x[i] = v / self.l[i * n + i];
        }
    }

    /// Forward substitution only: solves `L y = b` in place.
    fn forward_in_place(&self, x: &mut [F]) {
        let n = self.n;
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[i * n + k] * x[k];
            }
            x[i] = v / self.l[i * n + i];
        }
    }

    /// Symmetric inverse `(L L^T)^{-1}`.
    pub fn inverse(&self) -> SymMat<F> {
        let n = self.n;
        let mut col = vec![F::zero(); n];
        let mut out = SymMat::zeros(n);
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = F::zero());
            col[j] = F::one();
            self.solve_in_place(&mut col);
            for i in 0..=j {
                out.set(i, j, col[i]);
            }
        }
        out
    }

    /// `L^{-1} Z L^{-T}` for symmetric `Z`, symmetrized on repack.
    pub fn inv_congruence(&self, z: &SymMat<F>) -> SymMat<F> {
        let n = self.n;
        debug_assert_eq!(z.dim(), n);
        let mut d = z.to_dense();
        // columns: B = L^{-1} Z
        for j in 0..n {
            for i in 0..n {
                let mut v = d[i * n + j];
                for k in 0..i {
                    v -= self.l[i * n + k] * d[k * n + j];
                }
                d[i * n + j] = v / self.l[i * n + i];
            }
        }
        // rows: W = B L^{-T}  (forward substitution on each row)
        let mut row = vec![F::zero(); n];
        for i in 0..n {
            row.copy_from_slice(&d[i * n..(i + 1) * n]);
            self.forward_in_place(&mut row);
            d[i * n..(i + 1) * n].copy_from_slice(&row);
        }
        SymMat::from_dense(n, &d)
    }

    /// Dense `(L L^T)^{-1} Z` for symmetric `Z` (result is not symmetric).
    pub fn solve_mat(&self, z: &SymMat<F>) -> Vec<F> {
        let n = self.n;
        debug_assert_eq!(z.dim(), n);
        let mut d = z.to_dense();
        let mut col = vec![F::zero(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = d[i * n + j];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                d[i * n + j] = col[i];
            }
        }
        d
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (Householder tridiagonalization + implicit QL)
// ---------------------------------------------------------------------------

pub(crate) struct SymEigen<F> {
    /// Eigenvalues in ascending order.
    pub values: Vec<F>,
    /// Eigenvectors, column-major: column `c` is `vectors[c * n .. (c + 1) * n]`.
    pub vectors: Vec<F>,
}

pub(crate) fn sym_eigen<F: Scalar>(m: &SymMat<F>) -> SymEigen<F> {
    let n = m.dim();
    let mut a = m.to_dense();
    let mut d = vec![F::zero(); n];
    let mut e = vec![F::zero(); n];
    tred2(&mut a, &mut d, &mut e, n);
    tql2(&mut a, &mut d, &mut e, n);

    // sort ascending, carrying eigenvector columns along
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
    let mut values = Vec::with_capacity(n);
    let mut vectors = vec![F::zero(); n * n];
    for (c, &src) in order.iter().enumerate() {
        values.push(d[src]);
        for r in 0..n {
            vectors[c * n + r] = a[r * n + src];
        }
    }
    SymEigen { values, vectors }
}

fn tred2<F: Scalar>(a: &mut [F], d: &mut [F], e: &mut [F], n: usize) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = F::zero();
        if l > 0 {
            let mut scale = F::zero();
            for k in 0..=l {
                scale += a[i * n + k].abs();
            }
            if scale == F::zero() {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let mut f = a[i * n + l];
                let g = if f >= F::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = F::zero();
                for j in 0..=l {
                    a[j * n + i] = a[i * n + j] / h;
                    let mut g = F::zero();
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] = a[j * n + k] - f * e[k] - g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = F::zero();
    e[0] = F::zero();
    for i in 0..n {
        if d[i] != F::zero() {
            for j in 0..i {
                let mut g = F::zero();
                for k in 0..i {
                    g += a[i * n + k] * a[k * n + j];
                }
                for k in 0..i {
                    a[k * n + j] -= g * a[k * n + i];
                }
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = F::one();
        for j in 0..i {
            a[j * n + i] = F::zero();
            a[i * n + j] = F::zero();
        }
    }
}

fn tql2<F: Scalar>(z: &mut [F], d: &mut [F], e: &mut [F], n: usize) {
    if n == 1 {
        return;
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = F::zero();
    let eps = F::epsilon();
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd || e[m] == F::zero() {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "symmetric QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (e[l] + e[l]);
            let mut r = g.hypot(F::one());
            g = d[m] - d[l] + e[l] / (g + r.abs().copysign(g));
            let mut s = F::one();
            let mut c = F::one();
            let mut p = F::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == F::zero() {
                    d[i + 1] -= p;
                    e[m] = F::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + (c + c) * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = F::zero();
        }
    }
}

// ---------------------------------------------------------------------------
// Spectral operations
// ---------------------------------------------------------------------------

/// Symmetric psd square root. Eigenvalues in `[-tol, 0)` with
/// `tol = 1e-10 * ||X||_F` are clamped to zero; anything lower is rejected.
pub fn psd_sqrt<F: Scalar>(x: &SymMat<F>) -> Result<SymMat<F>> {
    let n = x.dim();
    let tol = real::<F>(1e-10) * x.frob_norm();
    let eig = sym_eigen(x);
    if eig.values[0] < -tol {
        return Err(Error::NotPsd {
            min_eig: eig.values[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let roots: Vec<F> = eig
        .values
        .iter()
        .map(|&v| if v > F::zero() { v.sqrt() } else { F::zero() })
        .collect();
    let mut r = SymMat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = F::zero();
            for (c, &root) in roots.iter().enumerate() {
                acc += eig.vectors[c * n + i] * root * eig.vectors[c * n + j];
            }
            r.set(i, j, acc);
        }
    }
    Ok(r)
}

/// `log det X` of a positive definite matrix, via its Cholesky factor.
pub fn logdet_spd<F: Scalar>(x: &SymMat<F>) -> Result<F> {
    match cholesky(x, F::zero()) {
        Ok(f) => Ok(f.logdet()),
        Err((column, pivot)) => Err(Error::NotPd {
            column,
            pivot: pivot.to_f64().unwrap_or(f64::NAN),
        }),
    }
}

/// Solves the SPD system `M y = r` by Cholesky on the Jacobi-equilibrated
/// matrix with two refinement passes.
///
/// Equilibration (`M -> D M D` with unit diagonal) removes the conditioning
/// caused by disparate row scales, which normal systems with an objective row
/// develop near optimality.
pub fn spd_solve<F: Scalar>(m: &SymMat<F>, r: &[F]) -> Result<Vec<F>> {
    let n = m.dim();
    assert_eq!(r.len(), n, "dimension mismatch");
    let mut scale = vec![F::zero(); n];
    for (i, s) in scale.iter_mut().enumerate() {
        let d = m.get(i, i);
        if !(d > F::zero()) {
            return Err(Error::Singular { column: i });
        }
        *s = F::one() / d.sqrt();
    }
    let eq = SymMat::from_fn(n, |i, j| m.get(i, j) * scale[i] * scale[j]);
    let factor =
        cholesky(&eq, real::<F>(1e-14)).map_err(|(column, _)| Error::Singular { column })?;
    let eq_solve = |v: &[F]| -> Vec<F> {
        let mut t: Vec<F> = v.iter().zip(scale.iter()).map(|(&a, &s)| a * s).collect();
        factor.solve_in_place(&mut t);
        for (ti, &s) in t.iter_mut().zip(scale.iter()) {
            *ti *= s;
        }
        t
    };
    let mut y = eq_solve(r);
    for _ in 0..2 {
        let my = m.matvec(&y);
        let resid: Vec<F> = r.iter().zip(my.iter()).map(|(&a, &b)| a - b).collect();
        let dy = eq_solve(&resid);
        for (yi, di) in y.iter_mut().zip(dy.iter()) {
            *yi += *di;
        }
    }
    Ok(y)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max_sym<F: Scalar>(x: &SymMat<F>) -> F {
    *sym_eigen(x).values.last().expect("dim >= 1")
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min_sym<F: Scalar>(x: &SymMat<F>) -> F {
    sym_eigen(x).values[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    use crate::rng::uniform_pm1;

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMat<f64> {
        SymMat::from_fn(n, |_, _| uniform_pm1(rng))
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMat<f64> {
        // B^T B + I keeps condition numbers moderate
        let b: Vec<f64> = (0..n * n).map(|_| uniform_pm1(rng)).collect();
        let mut m = SymMat::identity(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b[k * n + i] * b[k * n + j];
                }
                m.add_to(i, j, acc);
            }
        }
        m
    }

    /// Cyclic Jacobi eigenvalues; independent oracle for the QL path.
    fn jacobi_eigenvalues(m: &SymMat<f64>) -> Vec<f64> {
        let n = m.dim();
        let mut a = m.to_dense();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p * n + q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * a[p * n + q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        vals
    }

    #[test]
    fn psd_sqrt_diagonal() {
        let x = SymMat::from_fn(2, |i, j| if i == j { [4.0, 9.0][i] } else { 0.0 });
        let r = psd_sqrt(&x).unwrap();
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(1, 1), 3.0);
        assert_eq!(r.get(0, 1), 0.0);
    }

    #[test]
    fn psd_sqrt_identity() {
        let x = SymMat::<f64>::identity(5);
        let r = psd_sqrt(&x).unwrap();
        assert_eq!(r, SymMat::identity(5));
    }

    #[test]
    fn psd_sqrt_two_by_two_closed_form() {
        // eigenvalues 1 and 3; closed-form root has (sqrt(3)+1)/2 on the
        // diagonal and (sqrt(3)-1)/2 off it
        let mut x = SymMat::zeros(2);
        x.set(0, 0, 2.0);
        x.set(1, 1, 2.0);
        x.set(0, 1, 1.0);
        let r = psd_sqrt(&x).unwrap();
        let s3 = 3f64.sqrt();
        assert!((r.get(0, 0) - (s3 + 1.0) / 2.0).abs() < 1e-14);
        assert!((r.get(1, 1) - (s3 + 1.0) / 2.0).abs() < 1e-14);
        assert!((r.get(0, 1) - (s3 - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let mut x = SymMat::zeros(2);
        x.set(0, 0, 1.0);
        x.set(1, 1, -1.0);
        assert!(matches!(psd_sqrt(&x), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn psd_sqrt_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 5, 8, 12] {
            for _ in 0..20 {
                let x = random_spd(&mut rng, n);
                let r = psd_sqrt(&x).unwrap();
                let rr = congruence(&r, &SymMat::identity(n));
                let err = rr.minus(&x).frob_norm();
                assert!(err <= 1e-10 * (1.0 + x.frob_norm()), "n={n} err={err:e}");
            }
        }
    }

    #[test]
    fn logdet_examples() {
        assert_eq!(logdet_spd(&SymMat::<f64>::identity(4)).unwrap(), 0.0);
        let d = SymMat::from_fn(2, |i, j| if i == j { [2.0, 8.0][i] } else { 0.0 });
        assert!((logdet_spd(&d).unwrap() - 16f64.ln()).abs() < 1e-14);
        let mut bad = SymMat::zeros(2);
        bad.set(0, 0, 1.0);
        bad.set(1, 1, 1.0);
        bad.set(0, 1, 2.0);
        assert!(matches!(logdet_spd(&bad), Err(Error::NotPd { .. })));
    }

    #[test]
    fn logdet_matches_eigenvalue_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2usize, 4, 7, 12] {
            for _ in 0..25 {
                let x = random_spd(&mut rng, n);
                let ld = logdet_spd(&x).unwrap();
                let oracle: f64 = jacobi_eigenvalues(&x).iter().map(|v| v.ln()).sum();
                assert!((ld - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
            }
        }
    }

    #[test]
    fn spd_solve_examples() {
        let y = spd_solve(&SymMat::<f64>::identity(2), &[3.0, 4.0]).unwrap();
        assert_eq!(y, vec![3.0, 4.0]);
        let d = SymMat::from_fn(2, |i, j| if i == j { [2.0, 4.0][i] } else { 0.0 });
        let y = spd_solve(&d, &[2.0, 4.0]).unwrap();
        assert_eq!(y, vec![1.0, 1.0]);
    }

    #[test]
    fn spd_solve_residual_bound_many_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..1000 {
            let n = 2 + (trial % 19);
            let m = random_spd(&mut rng, n);
            let r: Vec<f64> = (0..n).map(|_| uniform_pm1(&mut rng)).collect();
            let y = spd_solve(&m, &r).unwrap();
            let my = m.matvec(&y);
            let resid: f64 = r
                .iter()
                .zip(my.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let rnorm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(resid <= 1e-10 * (1.0 + rnorm), "trial {trial}: {resid:e}");
        }
    }

    #[test]
    fn spd_solve_rejects_singular() {
        // rank-1 matrix
        let m = SymMat::from_fn(2, |_, _| 1.0);
        assert!(matches!(
            spd_solve(&m, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn lambda_max_examples() {
        let d = SymMat::from_fn(2, |i, j| if i == j { [1.0, 5.0][i] } else { 0.0 });
        assert_eq!(lambda_max_sym(&d), 5.0);
        let mut swap = SymMat::<f64>::zeros(2);
        swap.set(0, 1, 1.0);
        assert!((lambda_max_sym(&swap) - 1.0).abs() < 1e-14);
        assert!((lambda_min_sym(&swap) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_max_matches_jacobi_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let x = random_sym(&mut rng, 6);
            let got = lambda_max_sym(&x);
            let want = *jacobi_eigenvalues(&x).last().unwrap();
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for n in [1usize, 2, 3, 6, 9] {
            let x = random_sym(&mut rng, n);
            let eig = sym_eigen(&x);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for c in 0..n {
                        acc += eig.vectors[c * n + i] * eig.values[c] * eig.vectors[c * n + j];
                    }
                    assert!((acc - x.get(i, j)).abs() < 1e-12 * (1.0 + x.frob_norm()));
                }
            }
        }
    }

    #[test]
    fn frob_inner_examples() {
        let i5 = SymMat::<f64>::identity(5);
        assert_eq!(frob_inner(&i5, &i5), 5.0);
        assert_eq!(frob_inner(&i5, &SymMat::zeros(5)), 0.0);
    }

    #[test]
    fn frob_inner_symmetric_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let x = random_sym(&mut rng, 4);
            let y = random_sym(&mut rng, 4);
            let z = random_sym(&mut rng, 4);
            // elementwise-sum oracle over the dense representation
            let (xd, yd) = (x.to_dense(), y.to_dense());
            let oracle: f64 = xd.iter().zip(yd.iter()).map(|(a, b)| a * b).sum();
            assert!((frob_inner(&x, &y) - oracle).abs() <= 1e-12);
            assert!((frob_inner(&x, &y) - frob_inner(&y, &x)).abs() <= 1e-12);
            let lin = frob_inner(&x.plus(&z), &y);
            assert!((lin - frob_inner(&x, &y) - frob_inner(&z, &y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn inv_congruence_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let y = random_spd(&mut rng, 4);
        let z = random_sym(&mut rng, 4);
        let f = cholesky(&y, 0.0).unwrap();
        let w = f.inv_congruence(&z);
        // oracle: lambda of W equals generalized eigenvalues of (Z, Y); check
        // via re-congruence L W L^T = Z
        let mut l = SymMat::zeros(4);
        for i in 0..4 {
            for j in 0..=i {
                l.set(i, j, f.l[i * 4 + j]);
            }
        }
        // compute L W L^T densely (L not symmetric, do it by hand)
        let n = 4;
        let wd = w.to_dense();
        let mut lw = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..=i {
                    acc += f.l[i * n + k] * wd[k * n + j];
                }
                lw[i * n + j] = acc;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..=j {
                    acc += lw[i * n + k] * f.l[j * n + k];
                }
                assert!((acc - z.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
