//! Dense complex matrices backed by `faer`.

use std::sync::Once;

use faer::{Mat, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

static SEQUENTIAL: Once = Once::new();

/// Matrix kernels run single-threaded so results do not depend on the
/// thread count. Parallelism lives one level up, across trials.
fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Square `n × n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { inner: Mat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut f = f;
        Self { inner: Mat::from_fn(n, n, |i, j| f(i, j)) }
    }

    /// Builds from a row-major entry list of length `n²`.
    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Self::from_fn(n, |i, j| entries[i * n + j]))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub(crate) fn as_faer(&self) -> &Mat<Complex64> {
        &self.inner
    }

    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.inner[(i, j)] = v;
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        let n = self.n();
        (0..n).all(|j| (0..n).all(|i| {
            let v = self.inner[(i, j)];
            v.re.is_finite() && v.im.is_finite()
        }))
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        ensure_sequential();
        Self { inner: &self.inner * &rhs.inner }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { inner: &self.inner + &rhs.inner }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self { inner: &self.inner - &rhs.inner }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let n = self.n();
        Self::from_fn(n, |i, j| self.inner[(i, j)] * c)
    }

    /// `self - z·I`.
    pub fn shift(&self, z: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n() {
            out.inner[(i, i)] -= z;
        }
        out
    }

    /// `self · (I + c·a)`, computed as `self + c·(self·a)`.
    pub fn right_step(&self, a: &Self, c: f64) -> Self {
        ensure_sequential();
        let prod = &self.inner * &a.inner;
        let n = self.n();
        Self::from_fn(n, |i, j| self.inner[(i, j)] + prod[(i, j)] * c)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n()).map(|i| self.inner[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.inner[(i, j)] - rhs.inner[(i, j)]).norm());
            }
        }
        m
    }
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric("matrix has non-finite entries".into()))
    }
}

/// All `n` eigenvalues, with multiplicity.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_finite(m)?;
    ensure_sequential();
    m.inner
        .eigenvalues()
        .map_err(|e| Error::SolverFailure(format!("eigensolver on {}x{} matrix: {e:?}", m.n(), m.n())))
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    ensure_sequential();
    m.inner
        .singular_values()
        .map_err(|e| Error::SolverFailure(format!("svd on {}x{} matrix: {e:?}", m.n(), m.n())))
}

pub fn sigma_min(m: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(s.into_iter().fold(f64::INFINITY, f64::min).max(0.0))
}

/// Normalized Hilbert–Schmidt norm `√((1/n) Tr(m* m))`.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    let n = m.n();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            acc += m.inner[(i, j)].norm_sqr();
        }
    }
    (acc / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum_and_norms() {
        let id = ComplexMatrix::identity(5);
        let ev = eigenvalues(&id).unwrap();
        assert_eq!(ev.len(), 5);
        assert!(ev.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-14));
        assert!((sigma_min(&id).unwrap() - 1.0).abs() < 1e-14);
        assert!((hs_norm(&id) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_cases() {
        let d = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(0.0, 3.0)]);
        let mut ev = eigenvalues(&d).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(0.0, 3.0)).norm() < 1e-14);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-14);

        let z = ComplexMatrix::diagonal(&[c(0.0, 0.0), c(5.0, 0.0)]);
        assert!(sigma_min(&z).unwrap() < 1e-14);

        let h = ComplexMatrix::diagonal(&[c(3.0, 0.0), c(4.0, 0.0)]);
        assert!((hs_norm(&h) - (25.0f64 / 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn companion_of_z2_minus_1() {
        let m = ComplexMatrix::from_row_major(2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((ev[1] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, c(f64::NAN, 0.0));
        assert!(eigenvalues(&m).is_err());
        assert!(sigma_min(&m).is_err());
    }

    #[test]
    fn right_step_matches_explicit_product() {
        let a = ComplexMatrix::from_fn(3, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.5));
        let b = ComplexMatrix::from_fn(3, |i, j| c((i + 2 * j) as f64, 1.0));
        let explicit = b.matmul(&ComplexMatrix::identity(3).add(&a.scale(c(0.3, 0.0))));
        assert!(b.right_step(&a, 0.3).max_abs_diff(&explicit) < 1e-12);
    }
}
