//! Random-matrix samplers: GUE, Ginibre, Haar unitary and bi-invariant ensembles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laws::{SingularLaw, StepLaw};
use crate::matrix::ComplexMatrix;
use crate::rng::RngStream;

/// How the singular-value law is turned into `n` diagonal entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Discretization {
    /// Entry `i` is the quantile at `(i − ½)/n`.
    #[default]
    MidpointQuantile,
    /// Entries drawn i.i.d. from the law.
    Iid,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidDimension(0))
    } else {
        Ok(())
    }
}

/// I.i.d. complex Gaussian entries of variance `1/n`.
pub fn sample_ginibre(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let s = (0.5 / n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re = rng.normal();
        let im = rng.normal();
        entries.push(Complex64::new(re * s, im * s));
    }
    ComplexMatrix::from_row_major(n, &entries)
}

/// Hermitian with entry variance `1/n`.
pub fn sample_gue(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let d = (1.0 / n as f64).sqrt();
    let s = (0.5 / n as f64).sqrt();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, Complex64::new(rng.normal() * d, 0.0));
        for j in i + 1..n {
            let re = rng.normal();
            let im = rng.normal();
            let v = Complex64::new(re * s, im * s);
            m.set(i, j, v);
            m.set(j, i, v.conj());
        }
    }
    Ok(m)
}

/// Haar unitary via QR of a Ginibre draw with the phases of `R`'s diagonal divided out.
pub fn sample_haar_unitary(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    let g = sample_ginibre(n, rng)?;
    let qr = g.as_faer().qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            let m = d.norm();
            if m > 0.0 { d / m } else { Complex64::new(1.0, 0.0) }
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, |i, j| q[(i, j)] * phases[j]))
}

/// Diagonal of `T` for a given law.
pub fn singular_diagonal(n: usize, law: &SingularLaw, mode: Discretization, rng: &mut RngStream) -> Vec<f64> {
    match mode {
        Discretization::MidpointQuantile => {
            (0..n).map(|i| law.quantile((i as f64 + 0.5) / n as f64)).collect()
        }
        Discretization::Iid => (0..n).map(|_| law.quantile(rng.uniform().max(f64::MIN_POSITIVE))).collect(),
    }
}

/// `U·T·V*` with independent Haar `U`, `V` and `T` discretizing `law`.
pub fn sample_bi_invariant(
    n: usize,
    law: &SingularLaw,
    mode: Discretization,
    rng: &mut RngStream,
) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let t = singular_diagonal(n, law, mode, rng);
    let u = sample_haar_unitary(n, rng)?;
    let v = sample_haar_unitary(n, rng)?;
    let ut = ComplexMatrix::from_fn(n, |i, j| u.get(i, j) * t[j]);
    Ok(ut.matmul(&v.adjoint()))
}

/// One step `A` drawn from the step law. Circular steps are Ginibre draws.
pub fn sample_step(step: &StepLaw, n: usize, mode: Discretization, rng: &mut RngStream) -> Result<ComplexMatrix> {
    match step {
        StepLaw::Haar => sample_haar_unitary(n, rng),
        StepLaw::Circular => sample_ginibre(n, rng),
        StepLaw::Atomic(law) => sample_bi_invariant(n, law, mode, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::singular_values;

    #[test]
    fn zero_dimension_rejected() {
        let mut r = RngStream::new(0, 0);
        assert!(matches!(sample_ginibre(0, &mut r), Err(Error::InvalidDimension(0))));
        assert!(sample_gue(0, &mut r).is_err());
        assert!(sample_haar_unitary(0, &mut r).is_err());
    }

    #[test]
    fn gue_is_exactly_hermitian() {
        let mut r = RngStream::new(3, 1);
        let x = sample_gue(9, &mut r).unwrap();
        assert_eq!(x.max_abs_diff(&x.adjoint()), 0.0);
    }

    #[test]
    fn haar_is_unitary() {
        let mut r = RngStream::new(11, 0);
        for n in [1, 2, 7, 40] {
            let u = sample_haar_unitary(n, &mut r).unwrap();
            let g = u.adjoint().matmul(&u);
            assert!(g.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-10);
        }
    }

    #[test]
    fn bi_invariant_singular_values() {
        let mut r = RngStream::new(5, 2);
        let l = SingularLaw::new(vec![(0.0, 0.5), (2f64.sqrt(), 0.5)]).unwrap();
        let a = sample_bi_invariant(4, &l, Discretization::MidpointQuantile, &mut r).unwrap();
        let mut s = singular_values(&a).unwrap();
        s.sort_by(f64::total_cmp);
        let want = [0.0, 0.0, 2f64.sqrt(), 2f64.sqrt()];
        for (x, y) in s.iter().zip(want) {
            assert!((x - y).abs() <= 1e-9, "{s:?}");
        }

        let one = SingularLaw::new(vec![(1.0, 1.0)]).unwrap();
        let u = sample_bi_invariant(6, &one, Discretization::MidpointQuantile, &mut r).unwrap();
        assert!(u.adjoint().matmul(&u).max_abs_diff(&ComplexMatrix::identity(6)) <= 1e-9);
    }

    #[test]
    fn iid_discretization_uses_atoms_only() {
        let mut r = RngStream::new(5, 9);
        let l = SingularLaw::new(vec![(0.5, 0.5), (1.5, 0.5)]).unwrap();
        let d = singular_diagonal(200, &l, Discretization::Iid, &mut r);
        assert!(d.iter().all(|&x| x == 0.5 || x == 1.5));
        let hi = d.iter().filter(|&&x| x == 1.5).count();
        assert!((60..140).contains(&hi));
    }
}
