//! Dense complex Hermitian linear algebra for the small (`n <= 8`) matrices
//! that appear in covariance estimation: trace, Frobenius norm, Cholesky,
//! positive-definite inversion, extremal eigenvalues and triangular solves.

use std::ops::{Add, Index};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_JACOBI_SWEEPS: usize = 64;

fn finite<T: Scalar>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A complex column vector of dimension at least one.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexVector<T> {
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !entries.iter().all(finite) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    /// Builds a vector from real components.
    pub fn from_real(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Self {
            entries: vec![Complex::new(T::zero(), T::zero()); dim],
        }
    }

    /// Unit vector along axis `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = Complex::new(T::one(), T::zero());
        v
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex<T>>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex<T>> {
        self.entries.iter()
    }

    pub fn norm_sq(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: Complex<T>, other: &Self) {
        assert_eq!(self.dim(), other.dim());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += c * b;
        }
    }
}

impl<T: Scalar> Index<usize> for ComplexVector<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        &self.entries[i]
    }
}

impl<T: Scalar> Add for &ComplexVector<T> {
    type Output = ComplexVector<T>;
    fn add(self, rhs: Self) -> ComplexVector<T> {
        assert_eq!(self.dim(), rhs.dim());
        ComplexVector {
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Square complex Hermitian matrix, stored dense and row-major.
///
/// Construction symmetrizes the input as `(A + A^H) / 2` and forces the
/// diagonal to be exactly real, after rejecting inputs whose asymmetry exceeds
/// [`Scalar::hermitian_tol`].
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Builds a Hermitian matrix from `dim * dim` row-major entries.
    pub fn from_entries(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if !data.iter().all(finite) {
            return Err(Error::NonFinite);
        }
        let scale = T::one() + data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        let mut worst = T::zero();
        for i in 0..dim {
            for j in i..dim {
                let d = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        if worst > T::hermitian_tol() * scale {
            return Err(Error::NotHermitian(to_f64(worst)));
        }
        Ok(Self::symmetrize(dim, data))
    }

    /// Builds from nested rows; convenient for literals in tests and examples.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_entries(dim, data)
    }

    /// Builds from real symmetric rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let complex: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, T::zero())).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        if !diag.iter().all(|d| d.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = Complex::new(d, T::zero());
        }
        Ok(m)
    }

    /// Rank-one outer product `u u^H`.
    pub fn outer(u: &ComplexVector<T>) -> Self {
        let dim = u.dim();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(u[i] * u[j].conj());
            }
        }
        Self::symmetrize(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        scaled_identity(T::one(), dim)
    }

    fn symmetrize(dim: usize, mut data: Vec<Complex<T>>) -> Self {
        let half = T::lit(0.5);
        for i in 0..dim {
            data[i * dim + i] = Complex::new(data[i * dim + i].re, T::zero());
            for j in (i + 1)..dim {
                let avg = (data[i * dim + j] + data[j * dim + i].conj()).scale(half);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg.conj();
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn trace(&self) -> T {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `a * self + b * I`. Real affine maps preserve the Hermitian structure.
    pub fn affine(&self, a: T, b: T) -> Self {
        let mut data: Vec<Complex<T>> = self.data.iter().map(|z| z.scale(a)).collect();
        for i in 0..self.dim {
            data[i * self.dim + i] = Complex::new(data[i * self.dim + i].re + b, T::zero());
        }
        Self { dim: self.dim, data }
    }

    pub fn scaled(&self, c: T) -> Self {
        self.affine(c, T::zero())
    }

    /// Entrywise sum. Panics on dimension mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// In-place rank-one update `self += c * u u^H`.
    pub fn rank_one_update(&mut self, c: T, u: &ComplexVector<T>) {
        assert_eq!(self.dim, u.dim());
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].re += c * u[i].norm_sqr();
            for j in (i + 1)..n {
                let v = (u[i] * u[j].conj()).scale(c);
                self.data[i * n + j] += v;
                self.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
    }

    pub fn mul_vec(&self, x: &ComplexVector<T>) -> ComplexVector<T> {
        assert_eq!(self.dim, x.dim());
        let n = self.dim;
        let entries = (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(x.iter())
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect();
        ComplexVector::from_vec_unchecked(entries)
    }

    /// Plain matrix product as row-major entries. The product of two
    /// Hermitian matrices is not Hermitian in general.
    pub fn mul_dense(&self, other: &Self) -> Vec<Complex<T>> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Quadratic form `x^H A x`, real for Hermitian `A`.
    pub fn quadratic_form(&self, x: &ComplexVector<T>) -> T {
        x.dot(&self.mul_vec(x)).re
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Cholesky factorization `A = L L^H`.
    ///
    /// Fails with [`Error::NotPositiveDefinite`] when a pivot falls to or below
    /// `dim * pivot_tol * trace(A)`.
    pub fn cholesky(&self) -> Result<LowerTriangular<T>> {
        let n = self.dim;
        let threshold = T::from_usize_lossy(n) * T::pivot_tol() * self.trace().max(T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        let mut l = vec![zero; n * n];
        for j in 0..n {
            let mut pivot = self.data[j * n + j].re;
            for k in 0..j {
                pivot -= l[j * n + k].norm_sqr();
            }
            if pivot.is_nan() || pivot <= threshold {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: to_f64(pivot),
                });
            }
            let d = pivot.sqrt();
            l[j * n + j] = Complex::new(d, T::zero());
            for i in (j + 1)..n {
                let mut s = self.data[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s.unscale(d);
            }
        }
        Ok(LowerTriangular { dim: n, data: l })
    }

    /// Inverse of a positive-definite matrix via its Cholesky factor:
    /// `A^{-1} = L^{-H} L^{-1}`.
    pub fn invert_pd(&self) -> Result<Self> {
        let l = self.cholesky()?;
        let n = self.dim;
        let linv = l.inverse();
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for j in i..n {
                // (L^{-H} L^{-1})_{ij} = sum_k conj(Linv_{ki}) Linv_{kj}
                let mut s = Complex::new(T::zero(), T::zero());
                for k in j..n {
                    s += linv.get(k, i).conj() * linv.get(k, j);
                }
                data[i * n + j] = s;
                data[j * n + i] = s.conj();
            }
        }
        Ok(Self::symmetrize(n, data))
    }

    /// Full spectrum in ascending order, by cyclic complex Jacobi rotations.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let n = self.dim;
        let mut a = self.data.clone();
        let total: T = a.iter().map(|z| z.norm_sqr()).sum();
        let tol = T::jacobi_tol() * T::jacobi_tol() * total;
        let off = |a: &[Complex<T>]| -> T {
            let mut s = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    s += a[i * n + j].norm_sqr();
                }
            }
            s
        };

        let mut converged = n == 1 || off(&a) <= tol;
        let mut sweeps = 0;
        while !converged && sweeps < MAX_JACOBI_SWEEPS {
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, n, p, q);
                }
            }
            sweeps += 1;
            converged = off(&a) <= tol;
        }
        if !converged {
            return Err(Error::NoConvergence { sweeps });
        }
        let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        Ok(eig)
    }

    /// Smallest and largest eigenvalue. The pair always brackets
    /// `trace / dim`.
    pub fn eig_extremes(&self) -> Result<(T, T)> {
        let eig = self.eigenvalues()?;
        let mean = self.trace() / T::from_usize_lossy(self.dim);
        let lo = eig[0].min(mean);
        let hi = eig[self.dim - 1].max(mean);
        Ok((lo, hi))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        self.eig_extremes().map(|(lo, _)| lo)
    }

    pub fn max_eigenvalue(&self) -> Result<T> {
        self.eig_extremes().map(|(_, hi)| hi)
    }
}

/// One Jacobi step on the `(p, q)` plane: a diagonal phase makes `a_pq` real,
/// then a real Givens rotation annihilates it.
fn jacobi_rotate<T: Scalar>(a: &mut [Complex<T>], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let phase = apq.unscale(mag);
    for r in 0..n {
        a[r * n + q] *= phase.conj();
        a[q * n + r] *= phase;
    }
    a[q * n + q] = Complex::new(a[q * n + q].re, T::zero());

    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
    let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = arp.scale(c) - arq.scale(s);
        let new_rq = arp.scale(s) + arq.scale(c);
        a[r * n + p] = new_rp;
        a[p * n + r] = new_rp.conj();
        a[r * n + q] = new_rq;
        a[q * n + r] = new_rq.conj();
    }
    let zero = Complex::new(T::zero(), T::zero());
    a[p * n + p] = Complex::new(app - t * mag, T::zero());
    a[q * n + q] = Complex::new(aqq + t * mag, T::zero());
    a[p * n + q] = zero;
    a[q * n + p] = zero;
}

/// `c * I` of dimension `n`.
pub fn scaled_identity<T: Scalar>(c: T, n: usize) -> HermitianMatrix<T> {
    let mut m = HermitianMatrix::zeros(n);
    for i in 0..n {
        m.data[i * n + i] = Complex::new(c, T::zero());
    }
    m
}

/// Lower-triangular factor with a real, strictly positive diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangular<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> LowerTriangular<T> {
    /// Validates a row-major lower-triangular matrix.
    pub fn new(dim: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if !data.iter().all(finite) {
            return Err(Error::NonFinite);
        }
        for i in 0..dim {
            let d = data[i * dim + i];
            if d.im != T::zero() || d.re <= T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {i} must be real and positive"
                )));
            }
            for j in (i + 1)..dim {
                if data[i * dim + j] != Complex::new(T::zero(), T::zero()) {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) above the diagonal is non-zero"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex::new(x, T::zero())))
            .collect();
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim + j]
    }

    /// Solves `L x = y` by forward substitution.
    pub fn forward_solve(&self, y: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        let n = self.dim;
        if y.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.dim(),
            });
        }
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = y[i];
            for (k, xk) in x.iter().enumerate() {
                s -= self.data[i * n + k] * xk;
            }
            x.push(s.unscale(self.data[i * n + i].re));
        }
        Ok(ComplexVector::from_vec_unchecked(x))
    }

    /// `L^{-1}`, itself lower triangular.
    pub fn inverse(&self) -> LowerTriangular<T> {
        let n = self.dim;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for j in 0..n {
            let col = self
                .forward_solve(&ComplexVector::basis(n, j))
                .expect("dimension matches by construction");
            for i in j..n {
                data[i * n + j] = col[i];
            }
        }
        LowerTriangular { dim: n, data }
    }

    pub fn mul_vec(&self, x: &ComplexVector<T>) -> ComplexVector<T> {
        assert_eq!(self.dim, x.dim());
        let n = self.dim;
        let entries = (0..n)
            .map(|i| {
                (0..=i).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                    acc + self.data[i * n + k] * x[k]
                })
            })
            .collect();
        ComplexVector::from_vec_unchecked(entries)
    }

    /// Reconstructs `L L^H`.
    pub fn gram(&self) -> HermitianMatrix<T> {
        let n = self.dim;
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in 0..=i.min(j) {
                    s += self.data[i * n + k] * self.data[j * n + k].conj();
                }
                data[i * n + j] = s;
            }
        }
        HermitianMatrix::symmetrize(n, data)
    }
}
