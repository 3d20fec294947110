//! Small dense complex linear algebra for Hermitian covariance work.
//!
//! Everything here is sized for radar pulse trains (N in the tens), so the
//! routines are plain row-major loops without blocking. Inverses are never
//! formed: every `Σ⁻¹·v` goes through a Cholesky factor.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Absolute tolerance for Hermitian symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Pivots at or below this value are treated as a loss of positive definiteness.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NonPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Fixed-length complex vector with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(Vec<ComplexScalar>);

impl ComplexVector {
    pub fn new(entries: Vec<ComplexScalar>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self(entries))
    }

    /// Builds a vector without the finiteness scan. Callers guarantee finite input.
    pub(crate) fn from_vec_unchecked(entries: Vec<ComplexScalar>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![ComplexScalar::new(0.0, 0.0); n])
    }

    /// Unit basis vector `e_k` of length `n`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = ComplexScalar::new(1.0, 0.0);
        v
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(LinalgError::DimensionMismatch { expected: re.len(), found: im.len() });
        }
        Self::new(re.iter().zip(im).map(|(&a, &b)| ComplexScalar::new(a, b)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<ComplexScalar> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexScalar> {
        self.0.iter()
    }

    /// Squared Euclidean norm.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self^H · other`.
    pub fn dot_conj(&self, other: &Self) -> Result<ComplexScalar> {
        check_dim(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scale(&self, c: ComplexScalar) -> Self {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: ComplexScalar, other: &Self) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect()))
    }
}

impl Index<usize> for ComplexVector {
    type Output = ComplexScalar;

    fn index(&self, i: usize) -> &ComplexScalar {
        &self.0[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(LinalgError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dense `n × n` Hermitian matrix, stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<ComplexScalar>,
}

impl HermitianMatrix {
    /// Validates symmetry and finiteness, then snaps the diagonal to real and
    /// the lower triangle to the exact conjugate of the upper one.
    pub fn new(n: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        for i in 0..n {
            if data[i * n + i].im.abs() > HERMITIAN_TOL {
                return Err(LinalgError::NotHermitian { row: i, col: i });
            }
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i].conj()).norm() > HERMITIAN_TOL {
                    return Err(LinalgError::NotHermitian { row: i, col: j });
                }
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        Ok(m)
    }

    /// Builds from an arbitrary generator and forces exact Hermitian structure
    /// from the upper triangle. For accumulations that are Hermitian up to rounding.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> ComplexScalar) -> Self {
        let mut data = vec![ComplexScalar::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                data[i * n + j] = f(i, j);
            }
        }
        let mut m = Self { n, data };
        m.symmetrize();
        m
    }

    pub(crate) fn from_raw_unchecked(n: usize, data: Vec<ComplexScalar>) -> Self {
        let mut m = Self { n, data };
        m.symmetrize();
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in 0..i {
                self.data[i * n + j] = self.data[j * n + i].conj();
            }
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut data = vec![ComplexScalar::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = ComplexScalar::new(s, 0.0);
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> ComplexScalar {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self − other`.
    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        Ok(Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, v.len())?;
        let n = self.n;
        let out = (0..n)
            .map(|i| self.data[i * n..(i + 1) * n].iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector(out))
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[ComplexScalar]> = self.data.chunks(self.n.max(1)).collect();
        f.debug_struct("HermitianMatrix").field("n", &self.n).field("rows", &rows).finish()
    }
}

/// Cholesky factor `L` with `L·Lᴴ = A`: zero above the diagonal, real positive diagonal.
#[derive(Clone, PartialEq)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<ComplexScalar>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> ComplexScalar {
        self.data[i * self.n + j]
    }

    /// `L·Lᴴ`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.n;
        HermitianMatrix::from_upper_fn(n, |i, j| {
            (0..=i.min(j)).map(|k| self.data[i * n + k] * self.data[j * n + k].conj()).sum()
        })
    }

    /// `L·u`, used to colour white samples.
    pub fn mul_vec(&self, u: &[ComplexScalar]) -> Result<ComplexVector> {
        check_dim(self.n, u.len())?;
        let n = self.n;
        let out = (0..n)
            .map(|i| self.data[i * n..i * n + i + 1].iter().zip(u).map(|(a, b)| a * b).sum())
            .collect();
        Ok(ComplexVector(out))
    }

    /// Forward substitution: solves `L·w = b`.
    pub fn forward_solve(&self, b: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, b.len())?;
        let n = self.n;
        let mut w = b.0.clone();
        for i in 0..n {
            let row = &self.data[i * n..i * n + i];
            let s: ComplexScalar = row.iter().zip(&w[..i]).map(|(a, x)| a * x).sum();
            w[i] = (w[i] - s) / self.data[i * n + i].re;
        }
        Ok(ComplexVector(w))
    }

    /// Back substitution: solves `Lᴴ·x = w`.
    pub fn backward_solve(&self, w: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.n, w.len())?;
        let n = self.n;
        let mut x = w.0.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.data[k * n + i].conj() * x[k];
            }
            x[i] = s / self.data[i * n + i].re;
        }
        Ok(ComplexVector(x))
    }

    /// Solves `(L·Lᴴ)·x = b`.
    pub fn solve(&self, b: &ComplexVector) -> Result<ComplexVector> {
        self.backward_solve(&self.forward_solve(b)?)
    }

    /// `bᴴ (L·Lᴴ)⁻¹ b = ‖L⁻¹ b‖²`.
    pub fn inverse_quadratic_form(&self, b: &ComplexVector) -> Result<f64> {
        Ok(self.forward_solve(b)?.norm_sqr())
    }
}

impl fmt::Debug for LowerTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[ComplexScalar]> = self.data.chunks(self.n.max(1)).collect();
        f.debug_struct("LowerTriangular").field("n", &self.n).field("rows", &rows).finish()
    }
}

/// Real exponential-correlation Toeplitz matrix with entries `rho^|i-j|`.
pub fn toeplitz_covariance(rho: f64, n: usize) -> Result<HermitianMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(LinalgError::Domain(format!("correlation coefficient {rho} outside [0, 1)")));
    }
    if n == 0 {
        return Err(LinalgError::Domain("dimension must be at least 1".into()));
    }
    let data = (0..n * n)
        .map(|idx| {
            let lag = (idx / n).abs_diff(idx % n) as i32;
            ComplexScalar::new(rho.powi(lag), 0.0)
        })
        .collect();
    Ok(HermitianMatrix { n, data })
}

/// Cholesky–Banachiewicz factorization of a Hermitian positive definite matrix.
pub fn cholesky(m: &HermitianMatrix) -> Result<LowerTriangular> {
    let n = m.n;
    let mut l = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.data[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                let pivot = s.re;
                if !(pivot > PIVOT_THRESHOLD) {
                    return Err(LinalgError::NonPositiveDefinite { pivot: i, value: pivot });
                }
                l[i * n + i] = ComplexScalar::new(pivot.sqrt(), 0.0);
            } else {
                l[i * n + j] = s / l[j * n + j].re;
            }
        }
    }
    Ok(LowerTriangular { n, data: l })
}

/// Solves `m·x = b` for Hermitian positive definite `m`.
pub fn solve_hermitian(m: &HermitianMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    check_dim(m.n, b.len())?;
    cholesky(m)?.solve(b)
}

/// `aᴴ · m · b`.
pub fn sesquilinear(a: &ComplexVector, m: &HermitianMatrix, b: &ComplexVector) -> Result<ComplexScalar> {
    check_dim(m.n, a.len())?;
    a.dot_conj(&m.mul_vec(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn rel_frob(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        a.frobenius_distance(b).unwrap() / b.frobenius_norm()
    }

    /// Random Hermitian PD matrix `B·Bᴴ + shift·I` from a flat list of parts.
    fn pd_from(parts: &[f64], n: usize, shift: f64) -> HermitianMatrix {
        let b: Vec<ComplexScalar> = (0..n * n).map(|k| c(parts[2 * k], parts[2 * k + 1])).collect();
        HermitianMatrix::from_upper_fn(n, |i, j| {
            let s: ComplexScalar = (0..n).map(|k| b[i * n + k] * b[j * n + k].conj()).sum();
            if i == j {
                s + shift
            } else {
                s
            }
        })
    }

    /// Jacobi eigenvalue sweep on the real symmetric matrix; test-only oracle.
    fn symmetric_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
        let n = m.dim();
        let mut a: Vec<f64> = m.as_slice().iter().map(|z| z.re).collect();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[i * n + j].powi(2)).sum();
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = cs * akp - sn * akq;
                        a[k * n + q] = sn * akp + cs * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = cs * apk - sn * aqk;
                        a[q * n + k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i * n + i]).collect()
    }

    #[test]
    fn toeplitz_zero_rho_is_identity() {
        assert_eq!(toeplitz_covariance(0.0, 4).unwrap(), HermitianMatrix::identity(4));
    }

    #[test]
    fn toeplitz_two_by_two() {
        let t = toeplitz_covariance(0.5, 2).unwrap();
        assert_eq!(t.get(0, 1), c(0.5, 0.0));
        assert_eq!(t.get(1, 0), c(0.5, 0.0));
        assert_eq!(t.get(1, 1), c(1.0, 0.0));
    }

    #[test]
    fn toeplitz_sixteen_is_positive_definite() {
        let t = toeplitz_covariance(0.5, 16).unwrap();
        assert!(cholesky(&t).is_ok());
        let eig = symmetric_eigenvalues(&t);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        // AR(1) spectrum bounds: (1-ρ)/(1+ρ) ≤ λ ≤ (1+ρ)/(1-ρ)
        assert!(min > 1.0 / 3.0 - 1e-9, "min eigenvalue {min}");
        assert!((eig.iter().sum::<f64>() - 16.0).abs() < 1e-9);
        assert_eq!(t.trace(), 16.0);
    }

    #[test]
    fn toeplitz_rejects_bad_rho() {
        assert!(matches!(toeplitz_covariance(1.0, 3), Err(LinalgError::Domain(_))));
        assert!(matches!(toeplitz_covariance(-0.1, 3), Err(LinalgError::Domain(_))));
    }

    #[test]
    fn cholesky_of_identity() {
        let l = cholesky(&HermitianMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), c(if i == j { 1.0 } else { 0.0 }, 0.0));
            }
        }
    }

    #[test]
    fn cholesky_two_by_two_by_hand() {
        let m = toeplitz_covariance(0.5, 2).unwrap();
        let l = cholesky(&m).unwrap();
        assert_eq!(l.get(0, 0), c(1.0, 0.0));
        assert_eq!(l.get(0, 1), c(0.0, 0.0));
        assert!((l.get(1, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((l.get(1, 1).re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(cholesky(&m), Err(LinalgError::NonPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetry() {
        let bad = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)];
        assert!(matches!(HermitianMatrix::new(2, bad), Err(LinalgError::NotHermitian { .. })));
        let imag_diag = vec![c(1.0, 0.1), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(HermitianMatrix::new(2, imag_diag).is_err());
    }

    #[test]
    fn solve_identity_and_scaled() {
        let b = ComplexVector::new((0..5).map(|k| c(k as f64, -(k as f64))).collect()).unwrap();
        assert_eq!(solve_hermitian(&HermitianMatrix::identity(5), &b).unwrap(), b);
        let four = ComplexVector::new(vec![c(4.0, 0.0); 5]).unwrap();
        let x = solve_hermitian(&HermitianMatrix::scaled_identity(5, 2.0), &four).unwrap();
        assert!(x.iter().all(|z| (z - c(2.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn solve_toeplitz_residual() {
        let m = toeplitz_covariance(0.5, 8).unwrap();
        let b = ComplexVector::new((0..8).map(|k| c((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect()).unwrap();
        let x = solve_hermitian(&m, &b).unwrap();
        let r = m.mul_vec(&x).unwrap().add_scaled(c(-1.0, 0.0), &b).unwrap();
        assert!(r.norm_sqr().sqrt() / b.norm_sqr().sqrt() < 1e-10);
    }

    #[test]
    fn sesquilinear_basis_vectors() {
        let i3 = HermitianMatrix::identity(3);
        let e1 = ComplexVector::basis(3, 0);
        let e2 = ComplexVector::basis(3, 1);
        assert_eq!(sesquilinear(&e1, &i3, &e1).unwrap(), c(1.0, 0.0));
        assert_eq!(sesquilinear(&e1, &i3, &e2).unwrap(), c(0.0, 0.0));
        assert!(matches!(
            sesquilinear(&ComplexVector::zeros(2), &i3, &e1),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert_eq!(ComplexVector::new(vec![c(f64::NAN, 0.0)]), Err(LinalgError::NonFinite));
    }

    proptest! {
        #[test]
        fn cholesky_reconstructs(parts in prop::collection::vec(-1.0f64..1.0, 2 * 36), shift in 0.01f64..2.0) {
            let m = pd_from(&parts, 6, shift);
            let l = cholesky(&m).unwrap();
            prop_assert!(rel_frob(&l.reconstruct(), &m) < 1e-10);
            for i in 0..6 {
                prop_assert!(l.get(i, i).im == 0.0 && l.get(i, i).re > 0.0);
                for j in i + 1..6 {
                    prop_assert_eq!(l.get(i, j), c(0.0, 0.0));
                }
            }
        }

        #[test]
        fn solve_recovers_x(parts in prop::collection::vec(-1.0f64..1.0, 2 * 25 + 10), shift in 0.1f64..2.0) {
            let m = pd_from(&parts, 5, shift);
            let x = ComplexVector::new((0..5).map(|k| c(parts[2 * 25 + 2 * k], parts[2 * 25 + 2 * k + 1] + 0.5)).collect()).unwrap();
            let b = m.mul_vec(&x).unwrap();
            let got = solve_hermitian(&m, &b).unwrap();
            let err = got.add_scaled(c(-1.0, 0.0), &x).unwrap().norm_sqr().sqrt();
            prop_assert!(err / x.norm_sqr().sqrt() < 1e-9);
        }

        #[test]
        fn hermitian_quadratic_form_is_real(parts in prop::collection::vec(-1.0f64..1.0, 2 * 16 + 8)) {
            let m = pd_from(&parts, 4, 0.0);
            let a = ComplexVector::new((0..4).map(|k| c(parts[32 + 2 * k], parts[33 + 2 * k])).collect()).unwrap();
            let q = sesquilinear(&a, &m, &a).unwrap();
            prop_assert!(q.im.abs() <= 1e-12 * a.norm_sqr() * m.frobenius_norm() + 1e-300);
        }

        #[test]
        fn sesquilinear_conjugate_linear_in_first(parts in prop::collection::vec(-1.0f64..1.0, 2 * 9 + 12)) {
            let m = pd_from(&parts, 3, 0.5);
            let a = ComplexVector::new((0..3).map(|k| c(parts[18 + 2 * k], parts[19 + 2 * k])).collect()).unwrap();
            let b = ComplexVector::new((0..3).map(|k| c(parts[24 + 2 * k], parts[25 + 2 * k])).collect()).unwrap();
            let s = c(parts[0] + 0.3, parts[1] - 0.2);
            let lhs = sesquilinear(&a.scale(s), &m, &b.scale(s)).unwrap();
            let rhs = s.conj() * s * sesquilinear(&a, &m, &b).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn toeplitz_structure(rho in 0.0f64..0.99, n in 1usize..20) {
            let t = toeplitz_covariance(rho, n).unwrap();
            prop_assert_eq!(t.trace(), n as f64);
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(t.get(i, j).im, 0.0);
                    prop_assert_eq!(t.get(i, j), t.get(j, i));
                }
            }
        }
    }
}
