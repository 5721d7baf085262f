//! Cauchy and `H` transforms of symmetric measures and the subordination
//! fixed points `η_k`, `η_∞`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laws::{InitialLaw, SingularLaw, StepLaw};
use crate::lifetime::{d_k_disk, principal_root};

const MAX_BISECTIONS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-11;

/// Symmetrization of an atomic law on `[0, ∞)`: each `(x, w)` puts `w/2` at `±x`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricAtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SymmetricAtomicMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("symmetric measure has no atoms".into()));
        }
        if atoms.iter().any(|&(x, w)| !(x >= 0.0 && x.is_finite() && w > 0.0)) {
            return Err(Error::InvalidLaw("atoms need x >= 0 and positive weight".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Same measure with every atom multiplied by `c > 0`.
    pub fn dilate(&self, c: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|&(x, w)| (x * c, w)).collect() }
    }

    /// `G(ζ) = Σ w ζ/(ζ² − x²)` anywhere in the upper half-plane.
    pub fn cauchy_at(&self, zeta: Complex64) -> Complex64 {
        self.atoms.iter().map(|&(x, w)| w * zeta / (zeta * zeta - x * x)).sum()
    }

    /// `H(ζ) = 1/G(ζ) − ζ`.
    pub fn h_at(&self, zeta: Complex64) -> Complex64 {
        self.cauchy_at(zeta).inv() - zeta
    }

    /// `Im H(iu)` for `u > 0`, in a cancellation-free form.
    fn h_imag(&self, u: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(x, w) in &self.atoms {
            let q = u * u + x * x;
            num += w * x * x / q;
            den += w * u / q;
        }
        num / den
    }

    /// `Σ w/x²`, infinite with an atom at 0.
    fn inverse_second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|&(x, w)| if x == 0.0 { f64::INFINITY } else { w / (x * x) })
            .sum()
    }
}

fn check_y(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("y = {y} must be positive")))
    }
}

/// `G(iy) = −i Σ w y/(y² + x²)`.
pub fn cauchy_symmetric(m: &SymmetricAtomicMeasure, y: f64) -> Result<Complex64> {
    check_y(y)?;
    let g: f64 = m.atoms.iter().map(|&(x, w)| w * y / (y * y + x * x)).sum();
    Ok(Complex64::new(0.0, -g))
}

/// `H(iy) = 1/G(iy) − iy`, on the nonnegative imaginary axis.
pub fn h_transform(m: &SymmetricAtomicMeasure, y: f64) -> Result<Complex64> {
    check_y(y)?;
    Ok(Complex64::new(0.0, m.h_imag(y)))
}

/// Symmetrized law of `|Z − λ|`: atoms `|λ − e^{i(2πj+θᵢ)/k}|` with weight `wᵢ/k`.
pub fn shifted_z_measure(law: &InitialLaw, k: u32, lambda: Complex64) -> SymmetricAtomicMeasure {
    let kf = k as f64;
    let mut atoms = Vec::with_capacity(k as usize * law.atoms().len());
    for &(th, w) in law.atoms() {
        for j in 1..=k {
            let root = Complex64::from_polar(1.0, (2.0 * PI * j as f64 + th) / kf);
            atoms.push(((lambda - root).norm(), w / kf));
        }
    }
    SymmetricAtomicMeasure { atoms }
}

/// `H` of the semicircle law of variance `v` (the symmetrized `|√v·c|`, `c` circular):
/// `H(iy) = i(√(y² + 4v) − y)/2`.
pub fn semicircle_h(v: f64, y: f64) -> Result<Complex64> {
    check_y(y)?;
    if v < 0.0 {
        return Err(Error::InvalidInput(format!("variance {v} is negative")));
    }
    Ok(Complex64::new(0.0, semicircle_h_imag(v, y)))
}

fn semicircle_h_imag(v: f64, u: f64) -> f64 {
    2.0 * v / ((u * u + 4.0 * v).sqrt() + u)
}

/// `H(ζ) = (−ζ + √(ζ² − 4v))/2` on the upper half-plane.
pub fn semicircle_h_at(v: f64, zeta: Complex64) -> Complex64 {
    let s = 2.0 * v.sqrt();
    let root = (zeta - s).sqrt() * (zeta + s).sqrt();
    (root - zeta) / 2.0
}

/// `H` of the symmetrized `√v·|a|` anywhere in the upper half-plane.
pub fn step_h_at(step: &StepLaw, v: f64, zeta: Complex64) -> Complex64 {
    match step {
        StepLaw::Haar => -v / zeta,
        StepLaw::Circular => semicircle_h_at(v, zeta),
        StepLaw::Atomic(l) => step_measure(l).dilate(v.sqrt()).h_at(zeta),
    }
}

fn step_measure(l: &SingularLaw) -> SymmetricAtomicMeasure {
    SymmetricAtomicMeasure { atoms: l.atoms().to_vec() }
}

/// `Im H(iu)` of the symmetrized `√v·|a|`.
fn step_h_imag(step: &StepLaw, v: f64, u: f64) -> f64 {
    match step {
        StepLaw::Haar => v / u,
        StepLaw::Circular => semicircle_h_imag(v, u),
        StepLaw::Atomic(l) => step_measure(l).dilate(v.sqrt()).h_imag(u),
    }
}

/// Which side of the support a point falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaState {
    Interior,
    ExteriorZero,
    DiskInfinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaResult {
    pub state: EtaState,
    /// `η`, meaningful for `Interior`; 0 outside, infinite in the disk.
    pub eta: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl EtaResult {
    fn exterior() -> Self {
        Self { state: EtaState::ExteriorZero, eta: 0.0, iterations: 0, residual: 0.0 }
    }

    fn disk() -> Self {
        Self { state: EtaState::DiskInfinite, eta: f64::INFINITY, iterations: 0, residual: 0.0 }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time {t} must be positive")))
    }
}

fn in_disk(step: &StepLaw, k: u32, t: f64, z: Complex64) -> bool {
    matches!(d_k_disk(k, t, &step.summary()), Some(r) if z.norm() < r)
}

/// Root of a decreasing `f` on `(0, ∞)` with `f(0⁺) > 0`; `None` if `f` never turns negative
/// before overflowing.
fn decreasing_root(f: impl Fn(f64) -> f64, start: f64) -> Option<(f64, usize)> {
    let mut hi = start;
    let mut grown = 0;
    loop {
        let v = f(hi);
        if v.is_nan() {
            return None;
        }
        if v < 0.0 {
            break;
        }
        hi *= 2.0;
        grown += 1;
        if grown > 1100 || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = 0.0;
    let mut steps = 0;
    while steps < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((0.5 * (lo + hi), steps))
}

/// `η_k(t, z)`: the squared height of the Denjoy–Wolff point of `H_step ∘ H_{|Z−λ|}`
/// on the positive imaginary axis.
pub fn solve_eta_k(step: &StepLaw, law: &InitialLaw, k: u32, t: f64, z: Complex64) -> Result<EtaResult> {
    check_time(t)?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if in_disk(step, k, t, z) {
        return Ok(EtaResult::disk());
    }
    let v = t / k as f64;
    let m1 = shifted_z_measure(law, k, principal_root(z, k));
    // The defect g(y) = Im H₂(H₁(iy)) − y is y·ratio(y); ratio(0⁺) = t/T_k(z) − 1.
    let ratio = |y: f64| step_h_imag(step, v, m1.h_imag(y)) / y - 1.0;
    if v * m1.inverse_second_moment() - 1.0 <= 0.0 {
        return Ok(EtaResult::exterior());
    }
    let Some((y, iterations)) = decreasing_root(ratio, 1.0) else {
        return Ok(EtaResult::disk());
    };
    let residual = (y * ratio(y)).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::Numeric(format!("eta_k residual {residual:e} at z = {z} (k = {k}, t = {t})")));
    }
    Ok(EtaResult { state: EtaState::Interior, eta: y * y, iterations, residual })
}

fn scalar_equation(
    law: &InitialLaw,
    k: u32,
    t: f64,
    z: Complex64,
    rhs: impl Fn(f64) -> f64,
) -> Result<EtaResult> {
    let m1 = shifted_z_measure(law, k, principal_root(z, k));
    let f = |eta: f64| m1.atoms.iter().map(|&(x, w)| w / (x * x + eta)).sum::<f64>() - rhs(eta);
    if f(0.0) <= 0.0 {
        return Ok(EtaResult::exterior());
    }
    let Some((eta, iterations)) = decreasing_root(&f, 1.0) else {
        return Ok(EtaResult::disk());
    };
    let residual = f(eta).abs() * eta.max(1e-300).min(1.0);
    if !eta.is_finite() {
        return Err(Error::Numeric(format!("scalar eta diverged at z = {z} (k = {k}, t = {t})")));
    }
    Ok(EtaResult { state: EtaState::Interior, eta, iterations, residual })
}

/// Haar steps: `Σ wⱼ/(dⱼ² + η) = 1/(η + t/k)`.
pub fn eta_haar_scalar_equation(law: &InitialLaw, k: u32, t: f64, z: Complex64) -> Result<EtaResult> {
    check_time(t)?;
    if in_disk(&StepLaw::Haar, k, t, z) {
        return Ok(EtaResult::disk());
    }
    let v = t / k as f64;
    scalar_equation(law, k, t, z, |eta| 1.0 / (eta + v))
}

/// Circular steps: `Σ wⱼ/(dⱼ² + η) = k/t`.
pub fn eta_circular_scalar_equation(law: &InitialLaw, k: u32, t: f64, z: Complex64) -> Result<EtaResult> {
    check_time(t)?;
    let c = k as f64 / t;
    scalar_equation(law, k, t, z, |_| c)
}

/// Raw Denjoy–Wolff iteration `ζ ← H₂(H₁(ζ))` from `ζ₀ = i`. Slow near the boundary;
/// kept as a cross-check for the bisection solver.
pub fn denjoy_wolff_iterate(
    step: &StepLaw,
    law: &InitialLaw,
    k: u32,
    t: f64,
    z: Complex64,
    max_iter: usize,
    tol: f64,
) -> (Complex64, usize) {
    let v = t / k as f64;
    let m1 = shifted_z_measure(law, k, principal_root(z, k));
    let mut zeta = Complex64::new(0.0, 1.0);
    for it in 0..max_iter {
        let next = step_h_at(step, v, m1.h_at(zeta));
        if (next - zeta).norm() <= tol * zeta.norm().max(1.0) {
            return (next, it + 1);
        }
        zeta = next;
    }
    (zeta, max_iter)
}

/// `Σ_{j∈ℤ} 1/(c² + (2πj + φ)²) = sinh c / (2c (cosh c − cos φ))`.
pub fn periodic_kernel(c2: f64, phi: f64) -> f64 {
    let c = c2.max(0.0).sqrt();
    let s2 = (phi / 2.0).sin().powi(2);
    if c > 20.0 {
        let e1 = (-c).exp();
        let e2 = e1 * e1;
        return (1.0 - e2) / (2.0 * c * (1.0 + e2 - 2.0 * phi.cos() * e1));
    }
    let sinhc_over_c = if c == 0.0 { 1.0 } else { c.sinh() / c };
    let den = 4.0 * ((c / 2.0).sinh().powi(2) + s2);
    if den == 0.0 {
        f64::INFINITY
    } else {
        sinhc_over_c / den
    }
}

/// `η_∞(t, z)` from `Σᵢ wᵢ S(ρ² + η; θ − θᵢ) = 1/t` with `z = e^{ρ + iθ}`.
pub fn solve_eta_infinity(law: &InitialLaw, t: f64, z: Complex64) -> Result<EtaResult> {
    check_time(t)?;
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("z = 0 has no logarithm".into()));
    }
    let rho = z.norm().ln();
    let theta = z.arg();
    let f = |eta: f64| {
        law.atoms()
            .iter()
            .map(|&(th, w)| w * periodic_kernel(rho * rho + eta, theta - th))
            .sum::<f64>()
            - 1.0 / t
    };
    if f(0.0) <= 0.0 {
        return Ok(EtaResult::exterior());
    }
    let (eta, iterations) = decreasing_root(&f, 1.0)
        .ok_or_else(|| Error::Numeric(format!("eta_inf bracket failed at z = {z}")))?;
    Ok(EtaResult { state: EtaState::Interior, eta, iterations, residual: f(eta).abs() })
}

/// Midpoint-quantile discretization of the quarter-circle law of `|c|`, `c` circular
/// with `φ(c*c) = 1`, renormalized to unit second moment.
pub fn quarter_circle_law(atoms: usize) -> Result<SingularLaw> {
    let cdf = |phi: f64| (2.0 / PI) * (phi + phi.sin() * phi.cos());
    let w = 1.0 / atoms as f64;
    let pts: Vec<(f64, f64)> = (0..atoms)
        .map(|i| {
            let p = (i as f64 + 0.5) * w;
            let (mut lo, mut hi) = (0.0, PI / 2.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (2.0 * (0.5 * (lo + hi)).sin(), w)
        })
        .collect();
    SingularLaw::new(pts)?.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifetime::lifetime_k;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cauchy_examples() {
        let pm1 = SymmetricAtomicMeasure::new(vec![(1.0, 1.0)]).unwrap();
        assert!((cauchy_symmetric(&pm1, 1.0).unwrap() - c(0.0, -0.5)).norm() < 1e-16);
        assert!((pm1.cauchy_at(c(0.0, 1.0)) - c(0.0, -0.5)).norm() < 1e-16);
        let zero = SymmetricAtomicMeasure::new(vec![(0.0, 1.0)]).unwrap();
        assert!((cauchy_symmetric(&zero, 3.0).unwrap() - c(0.0, -1.0 / 3.0)).norm() < 1e-16);
        assert_eq!(h_transform(&zero, 3.0).unwrap(), c(0.0, 0.0));
        assert!(cauchy_symmetric(&zero, 0.0).is_err());
        assert!(h_transform(&zero, -1.0).is_err());
    }

    #[test]
    fn cauchy_dilation() {
        let m = SymmetricAtomicMeasure::new(vec![(0.3, 0.25), (1.7, 0.75)]).unwrap();
        let cst = 2.5;
        for y in [0.1, 1.0, 4.0] {
            let lhs = cauchy_symmetric(&m.dilate(cst), y).unwrap();
            let rhs = cauchy_symmetric(&m, y / cst).unwrap() / cst;
            assert!((lhs - rhs).norm() < 1e-15);
        }
    }

    #[test]
    fn h_of_two_point_law() {
        let v: f64 = 0.7;
        let m = SymmetricAtomicMeasure::new(vec![(v.sqrt(), 1.0)]).unwrap();
        for y in [0.2, 1.0, 3.0] {
            let h = h_transform(&m, y).unwrap();
            assert!((h - c(0.0, v / y)).norm() < 1e-14);
            assert!((m.h_at(c(0.0, y)) - h).norm() < 1e-14);
        }
    }

    #[test]
    fn shifted_measure_geometry() {
        let m = shifted_z_measure(&InitialLaw::trivial(), 2, c(0.0, 1.0));
        assert_eq!(m.atoms().len(), 2);
        for &(x, w) in m.atoms() {
            assert!((x - 2f64.sqrt()).abs() < 1e-15);
            assert_eq!(w, 0.5);
        }
        let m = shifted_z_measure(&InitialLaw::trivial(), 1, c(0.0, 0.0));
        assert!((m.atoms()[0].0 - 1.0).abs() < 1e-15);
        let two = InitialLaw::new(vec![(0.5, 0.5), (-1.0, 0.5)]).unwrap();
        assert_eq!(shifted_z_measure(&two, 5, c(0.2, 0.1)).atoms().len(), 10);
    }

    #[test]
    fn semicircle_examples() {
        let t = 1.3;
        for y in [0.1, 1.0, 10.0] {
            let h = semicircle_h(t / 2.0, y).unwrap();
            let zeta = c(0.0, y);
            let closed = (-zeta + (zeta * zeta - 2.0 * t).sqrt()) / 2.0;
            let closed = if closed.im < 0.0 { (-zeta - (zeta * zeta - 2.0 * t).sqrt()) / 2.0 } else { closed };
            assert!((h - closed).norm() < 1e-14);
            assert!((semicircle_h_at(t / 2.0, zeta) - h).norm() < 1e-14);
        }
        assert_eq!(semicircle_h(0.0, 2.0).unwrap(), c(0.0, 0.0));
        let far = semicircle_h(0.4, 1e6).unwrap();
        assert!((far.im - 0.4 / 1e6).abs() < 1e-15);
    }

    #[test]
    fn k2_haar_quadratic() {
        // 1/(d1+η) + 1/(d2+η) = 2/(η + t/2) is linear in η.
        let law = InitialLaw::trivial();
        let t = 3.0;
        let z = c(1.2, 0.9);
        let lam = principal_root(z, 2);
        let d1 = (lam - 1.0).norm_sqr();
        let d2 = (lam + 1.0).norm_sqr();
        let v = t / 2.0;
        let s = d1 + d2;
        let p = d1 * d2;
        let eta = (2.0 * p - s * v) / (2.0 * v - s);
        let r = solve_eta_k(&StepLaw::Haar, &law, 2, t, z).unwrap();
        assert_eq!(r.state, EtaState::Interior);
        assert!((r.eta - eta).abs() < 1e-10 * eta.max(1.0));
        let q = eta_haar_scalar_equation(&law, 2, t, z).unwrap();
        assert!((q.eta - eta).abs() < 1e-10 * eta.max(1.0));
    }

    #[test]
    fn k2_circular_quadratic() {
        // 4η² + (4S − 2t)η + 4P − tS = 0.
        let law = InitialLaw::trivial();
        let t = 2.0;
        let z = c(0.9, -0.4);
        let lam = principal_root(z, 2);
        let d1 = (lam - 1.0).norm_sqr();
        let d2 = (lam + 1.0).norm_sqr();
        let (s, p) = (d1 + d2, d1 * d2);
        let b = 4.0 * s - 2.0 * t;
        let cc = 4.0 * p - t * s;
        let eta = (-b + (b * b - 16.0 * cc).sqrt()) / 8.0;
        let r = solve_eta_k(&StepLaw::Circular, &law, 2, t, z).unwrap();
        assert_eq!(r.state, EtaState::Interior);
        assert!((r.eta - eta).abs() < 1e-10 * eta.max(1.0));
        assert!(r.residual <= 1e-11);
    }

    #[test]
    fn z_minus_one_states() {
        let law = InitialLaw::trivial();
        let z = c(-1.0, 0.0);
        // T₂(−1) = 4, so z = −1 is exterior for t < 4 with either step.
        assert_eq!(solve_eta_k(&StepLaw::Circular, &law, 2, 2.0, z).unwrap().state, EtaState::ExteriorZero);
        assert_eq!(solve_eta_k(&StepLaw::Haar, &law, 2, 3.0, z).unwrap().state, EtaState::ExteriorZero);
        assert_eq!(solve_eta_k(&StepLaw::Haar, &law, 2, 4.5, z).unwrap().state, EtaState::DiskInfinite);
    }

    #[test]
    fn far_points_are_exterior() {
        let law = InitialLaw::trivial();
        for step in [StepLaw::Haar, StepLaw::Circular] {
            for z in [c(3.0, 0.0), c(-0.5, 1.5), c(0.0, -2.0)] {
                let r = solve_eta_k(&step, &law, 4, 1.0, z).unwrap();
                assert_eq!(r.state, EtaState::ExteriorZero);
                assert_eq!(r.eta, 0.0);
            }
        }
    }

    #[test]
    fn imaginary_axis_closure() {
        let law = InitialLaw::new(vec![(0.4, 0.3), (-2.0, 0.7)]).unwrap();
        let m1 = shifted_z_measure(&law, 3, c(0.8, 0.4));
        let atomic = StepLaw::atomic(SingularLaw::new(vec![(0.5, 0.5), (1.5, 0.5)]).unwrap().normalize().unwrap()).unwrap();
        for step in [StepLaw::Haar, StepLaw::Circular, atomic] {
            for y in [1e-3, 0.1, 1.0, 7.0] {
                let w = step_h_at(&step, 0.4, m1.h_at(c(0.0, y)));
                assert!(w.re.abs() <= 1e-13, "{w}");
                assert!(w.im >= 0.0);
            }
        }
    }

    #[test]
    fn raw_iteration_agrees() {
        let law = InitialLaw::trivial();
        let z = c(1.0, 0.2);
        for step in [StepLaw::Haar, StepLaw::Circular] {
            let r = solve_eta_k(&step, &law, 3, 1.5, z).unwrap();
            let (zeta, _) = denjoy_wolff_iterate(&step, &law, 3, 1.5, z, 100_000, 1e-15);
            assert!(zeta.re.abs() < 1e-12);
            assert!((zeta.im * zeta.im - r.eta).abs() < 1e-8, "{} vs {}", zeta.im * zeta.im, r.eta);
        }
    }

    #[test]
    fn tri_state_matches_lifetime() {
        let law = InitialLaw::trivial();
        let t = 1.0;
        for i in 0..30 {
            for j in 0..30 {
                let z = c(-0.5 + 2.5 * i as f64 / 29.0, -1.2 + 2.4 * j as f64 / 29.0);
                let tk = lifetime_k(&law, 6, z);
                if (tk - t).abs() < 1e-6 {
                    continue;
                }
                let r = solve_eta_k(&StepLaw::Circular, &law, 6, t, z).unwrap();
                assert_eq!(r.state == EtaState::Interior, tk < t, "z = {z}");
            }
        }
    }

    #[test]
    fn periodic_kernel_truncation() {
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let cc = 0.05 + 2.0 * next();
            let phi = -PI + 2.0 * PI * next();
            let m = 1_000_000i64;
            let head: f64 = (-m..=m).map(|j| 1.0 / (cc * cc + (2.0 * PI * j as f64 + phi).powi(2))).sum();
            // Tail |j| > m by the midpoint rule; its error is O(m⁻³).
            let a = phi / (2.0 * PI);
            let tail = (1.0 / (m as f64 + 0.5 + a) + 1.0 / (m as f64 + 0.5 - a)) / (4.0 * PI * PI);
            assert!((head + tail - periodic_kernel(cc * cc, phi)).abs() <= 1e-10);
        }
    }

    #[test]
    fn eta_infinity_basic() {
        let law = InitialLaw::trivial();
        assert!(solve_eta_infinity(&law, 1.0, c(0.0, 0.0)).is_err());
        let out = solve_eta_infinity(&law, 1.0, c(3.0, 0.0)).unwrap();
        assert_eq!(out.state, EtaState::ExteriorZero);
        let r = crate::lifetime::sigma_infinity_boundary(&law, 1.0, 0.2).unwrap();
        let on = solve_eta_infinity(&law, 1.0, Complex64::from_polar(r, 0.2)).unwrap();
        assert!(on.eta <= 1e-8);
    }
}
