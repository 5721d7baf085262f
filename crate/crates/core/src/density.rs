//! Brown-measure densities: the generic `ρ_k` through the subordination
//! solver, the `k = 2` closed forms, the limit `ρ_∞`, and polar density grids.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws::{InitialLaw, StepLaw};
use crate::lifetime::{
    boundary_curve_infinity, boundary_curve_k, boundary_radii, d_k_disk, diameter, infinity_halfwidth,
    lifetime_infinity, principal_root, sigma_infinity_boundary, sigma_k_contains,
};
use crate::subordination::{solve_eta_k, EtaState};

/// Relative differentiation step, as a fraction of the domain diameter.
pub const STEP_FRACTION: f64 = 1e-4;
/// Angular step for the `θ`-derivative in `ρ_∞`.
pub const ANGLE_STEP: f64 = 1e-4;
const BOUNDARY_SAMPLES: usize = 256;
const IMAG_TOL: f64 = 1e-6;

/// Number of steps: finite `k` or the `k → ∞` limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KSteps {
    Finite(u32),
    Infinity,
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time {t} must be positive")))
    }
}

fn stencil_error(z: Complex64) -> Error {
    Error::SolverFailure(format!("difference stencil around {z} leaves the domain"))
}

fn is_stencil_error(e: &Error) -> bool {
    matches!(e, Error::SolverFailure(m) if m.contains("stencil"))
}

/// Generic evaluator of `ρ_k(t, ·)` with a fixed differentiation step.
#[derive(Clone, Debug)]
pub struct KDensity {
    step: StepLaw,
    law: InitialLaw,
    k: u32,
    t: f64,
    h: f64,
}

impl KDensity {
    /// Uses `h = 1e-4 × diameter(Σ_k)`.
    pub fn new(step: &StepLaw, law: &InitialLaw, k: u32, t: f64) -> Result<Self> {
        check_time(t)?;
        if k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        let pts = boundary_curve_k(law, k, t, BOUNDARY_SAMPLES)?;
        let d = diameter(&pts).max(1e-3);
        Ok(Self::with_step(step, law, k, t, STEP_FRACTION * d))
    }

    pub fn with_step(step: &StepLaw, law: &InitialLaw, k: u32, t: f64, h: f64) -> Self {
        Self { step: step.clone(), law: law.clone(), k, t, h }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The bracketed field `Σ_{i,j} wᵢ (λ̄ − ζ̄ᵢⱼ)/(|λ − ζᵢⱼ|² + η)` on the branch of
    /// `z^{1/k}` nearest `anchor`.
    fn field(&self, z: Complex64, anchor: Complex64) -> Result<Complex64> {
        let eta = solve_eta_k(&self.step, &self.law, self.k, self.t, z)?;
        if eta.state != EtaState::Interior {
            return Err(stencil_error(z));
        }
        let kf = self.k as f64;
        let p = principal_root(z, self.k);
        let lam = (0..self.k)
            .map(|m| p * Complex64::from_polar(1.0, 2.0 * PI * m as f64 / kf))
            .min_by(|a, b| (a - anchor).norm().total_cmp(&(b - anchor).norm()))
            .expect("k ≥ 1");
        let mut acc = Complex64::new(0.0, 0.0);
        for &(alpha, w) in self.law.atoms() {
            for j in 0..self.k {
                let zeta = Complex64::from_polar(1.0, (2.0 * PI * j as f64 + alpha) / kf);
                acc += w * (lam - zeta).conj() / ((lam - zeta).norm_sqr() + eta.eta);
            }
        }
        Ok(acc)
    }

    /// `∂/∂z̄` of the field by central differences, Richardson-extrapolated once.
    fn dbar(&self, z: Complex64, anchor: Complex64, h: f64) -> Result<Complex64> {
        let central = |h: f64| -> Result<Complex64> {
            let dx = (self.field(z + h, anchor)? - self.field(z - h, anchor)?) / (2.0 * h);
            let ih = Complex64::new(0.0, h);
            let dy = (self.field(z + ih, anchor)? - self.field(z - ih, anchor)?) / (2.0 * h);
            Ok(0.5 * (dx + Complex64::new(0.0, 1.0) * dy))
        };
        let coarse = central(h)?;
        let fine = central(0.5 * h)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let eta = solve_eta_k(&self.step, &self.law, self.k, self.t, z)?;
        if eta.state != EtaState::Interior {
            return Ok(0.0);
        }
        if z.norm() == 0.0 {
            return Err(Error::Pole("density at z = 0".into()));
        }
        let lam = principal_root(z, self.k);
        let d = match self.dbar(z, lam, self.h) {
            Err(e) if is_stencil_error(&e) => self.dbar(z, lam, 0.5 * self.h)?,
            other => other?,
        };
        let kf = self.k as f64;
        let pref = z.conj() / lam.conj() / (z.norm().powf(2.0 - 2.0 / kf) * kf * PI);
        let rho = pref * d;
        if rho.im.abs() > IMAG_TOL * (1.0 + rho.re.abs()) {
            return Err(Error::Numeric(format!("density at {z} has imaginary part {:e}", rho.im)));
        }
        Ok(rho.re)
    }
}

/// `ρ_k(t, z)` through the subordination solver.
pub fn density_k(step: &StepLaw, law: &InitialLaw, k: u32, t: f64, z: Complex64) -> Result<f64> {
    KDensity::new(step, law, k, t)?.eval(z)
}

fn half_plane_gap(z: Complex64) -> Result<f64> {
    let s = z.norm() + z.re;
    if s <= 0.0 {
        Err(Error::Pole(format!("|z| + Re z = 0 at {z}")))
    } else {
        Ok(s)
    }
}

/// Closed form of `ρ₂` for Haar steps and `u₀ = 1`.
pub fn density_k2_haar(t: f64, z: Complex64) -> Result<f64> {
    check_time(t)?;
    let s = half_plane_gap(z)?;
    let a = z.norm();
    let num = 4.0 * t * ((2.0 * (a + 1.0) - t).powi(2) + 8.0 * s);
    let den = (4.0 * (z - 1.0).norm_sqr() + t * t - 4.0 * t * (a + 1.0)).powi(2);
    Ok((num / den - 1.0 / s) / (4.0 * PI * a))
}

/// Closed form of `ρ₂` for circular steps and `u₀ = 1`.
pub fn density_k2_circular(t: f64, z: Complex64) -> Result<f64> {
    check_time(t)?;
    let s = half_plane_gap(z)?;
    let a = z.norm();
    Ok((2.0 / t - 1.0 / (4.0 * s) + t / (4.0 * s * (t * t + 32.0 * s).sqrt())) / (2.0 * PI * a))
}

/// `g(θ) = 2r sin θ/(r² + 1 − 2r cos θ)` with `r = r(t, θ)`.
fn infinity_g(t: f64, theta: f64) -> Result<f64> {
    let r = sigma_infinity_boundary(&InitialLaw::trivial(), t, theta)?;
    Ok(2.0 * r * theta.sin() / (r * r + 1.0 - 2.0 * r * theta.cos()))
}

/// Angular profile `w_t(θ)` of `ρ_∞(t, re^{iθ}) = w_t(θ)/r²`.
pub fn infinity_profile(t: f64, theta: f64) -> Result<f64> {
    check_time(t)?;
    let hw = infinity_halfwidth(t);
    if theta.abs() + ANGLE_STEP >= hw && hw < PI {
        return Err(Error::InvalidInput(format!("angle {theta} is not inside I_inf({t})")));
    }
    let central = |h: f64| -> Result<f64> { Ok((infinity_g(t, theta + h)? - infinity_g(t, theta - h)?) / (2.0 * h)) };
    let coarse = central(ANGLE_STEP)?;
    let fine = central(0.5 * ANGLE_STEP)?;
    let dg = (4.0 * fine - coarse) / 3.0;
    Ok((2.0 / t + dg) / (4.0 * PI))
}

/// `ρ_∞(t, z)` for `u₀ = 1`.
pub fn density_infinity(law: &InitialLaw, t: f64, z: Complex64) -> Result<f64> {
    if !law.is_trivial() {
        return Err(Error::InvalidInput("the limiting density is implemented for u0 = 1 only".into()));
    }
    check_time(t)?;
    if z.norm() == 0.0 || lifetime_infinity(law, z) >= t {
        return Ok(0.0);
    }
    Ok(infinity_profile(t, z.arg())? / z.norm_sqr())
}

/// Density of the linearized element at `λ`: `k|λ|^{2k−2} ρ_k(t, λ^k)`.
pub fn density_linearized(step: &StepLaw, law: &InitialLaw, k: u32, t: f64, lambda: Complex64) -> Result<f64> {
    let rho = density_k(step, law, k, t, lambda.powu(k))?;
    Ok(k as f64 * lambda.norm().powi(2 * k as i32 - 2) * rho)
}

/// Why a grid cell carries no density value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum CellMask {
    Evaluated = 0,
    Outside = 1,
    BoundaryBand = 2,
    Pole = 3,
    SolverFailure = 4,
}

impl CellMask {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => CellMask::Evaluated,
            1 => CellMask::Outside,
            2 => CellMask::BoundaryBand,
            3 => CellMask::Pole,
            4 => CellMask::SolverFailure,
            _ => return None,
        })
    }
}

/// Midpoint polar grid over an annulus enclosing the support.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub dr: f64,
    pub dtheta: f64,
    /// Row-major: radius index outer, angle index inner.
    pub values: Vec<f64>,
    pub mask: Vec<CellMask>,
    pub mass: f64,
    /// Area of cells masked as boundary band, pole disk, or failed.
    pub masked_area: f64,
    /// Number of interior values below `-1e-9` that were clipped to 0.
    pub clipped: usize,
}

impl DensityGrid {
    pub fn index(&self, ir: usize, ith: usize) -> usize {
        ir * self.angles.len() + ith
    }

    pub fn point(&self, ir: usize, ith: usize) -> Complex64 {
        Complex64::from_polar(self.radii[ir], self.angles[ith])
    }

    pub fn cell_area(&self, ir: usize) -> f64 {
        self.radii[ir] * self.dr * self.dtheta
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m != CellMask::Evaluated && m != CellMask::Outside).count()
    }
}

/// Inner and outer radii of an annulus containing `Σ \ D̄`.
fn enclosing_annulus(step: &StepLaw, law: &InitialLaw, ks: KSteps, t: f64) -> Result<(f64, f64)> {
    let m = 1024;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..m {
        let th = -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64;
        match ks {
            KSteps::Finite(k) => {
                let s = boundary_radii(law, k, t, th)?;
                if s.is_open_at(t) {
                    let disk = d_k_disk(k, t, &step.summary()).unwrap_or(0.0);
                    lo = lo.min(s.r_minus.max(disk));
                    hi = hi.max(s.r_plus);
                }
            }
            KSteps::Infinity => {
                if th.abs() < infinity_halfwidth(t) {
                    let r = sigma_infinity_boundary(law, t, th)?;
                    lo = lo.min(r.recip());
                    hi = hi.max(r);
                }
            }
        }
    }
    if !(hi > 0.0) {
        return Err(Error::Numeric(format!("empty support at t = {t}")));
    }
    // Rays between samples can reach slightly further.
    Ok(((lo * 0.98).max(0.0), hi * 1.02))
}

/// Evaluates the density on a `resolution × resolution` polar grid.
pub fn build_density_grid(
    step: &StepLaw,
    law: &InitialLaw,
    ks: KSteps,
    t: f64,
    resolution: usize,
) -> Result<DensityGrid> {
    check_time(t)?;
    if resolution < 16 {
        return Err(Error::InvalidInput(format!("resolution {resolution} is below 16")));
    }
    if ks == KSteps::Infinity && !law.is_trivial() {
        return Err(Error::InvalidInput("the limiting density is implemented for u0 = 1 only".into()));
    }
    let (r_lo, r_hi) = enclosing_annulus(step, law, ks, t)?;
    let n = resolution;
    let dr = (r_hi - r_lo) / n as f64;
    let dtheta = 2.0 * PI / n as f64;
    let radii: Vec<f64> = (0..n).map(|i| r_lo + (i as f64 + 0.5) * dr).collect();
    let angles: Vec<f64> = (0..n).map(|j| -PI + (j as f64 + 0.5) * dtheta).collect();

    let cells: Vec<(f64, CellMask)> = match ks {
        KSteps::Finite(k) => {
            let eval = KDensity::new(step, law, k, t)?;
            let pole = (2.0 * eval.h()).max(1e-3);
            let disk = d_k_disk(k, t, &step.summary());
            (0..n * n)
                .into_par_iter()
                .map(|c| {
                    let z = Complex64::from_polar(radii[c / n], angles[c % n]);
                    if !sigma_k_contains(law, k, t, z) || matches!(disk, Some(d) if z.norm() <= d) {
                        return (0.0, CellMask::Outside);
                    }
                    if z.norm() < pole {
                        return (0.0, CellMask::Pole);
                    }
                    match eval.eval(z) {
                        Ok(v) => (v, CellMask::Evaluated),
                        Err(e) if is_stencil_error(&e) => (0.0, CellMask::BoundaryBand),
                        Err(Error::Pole(_)) => (0.0, CellMask::Pole),
                        Err(_) => (0.0, CellMask::SolverFailure),
                    }
                })
                .collect()
        }
        KSteps::Infinity => {
            let profile: Vec<Option<f64>> = angles.par_iter().map(|&th| infinity_profile(t, th).ok()).collect();
            (0..n * n)
                .map(|c| {
                    let z = Complex64::from_polar(radii[c / n], angles[c % n]);
                    if lifetime_infinity(law, z) >= t {
                        return (0.0, CellMask::Outside);
                    }
                    match profile[c % n] {
                        Some(w) => (w / z.norm_sqr(), CellMask::Evaluated),
                        None => (0.0, CellMask::BoundaryBand),
                    }
                })
                .collect()
        }
    };

    let mut values = Vec::with_capacity(n * n);
    let mut mask = Vec::with_capacity(n * n);
    let mut mass = 0.0;
    let mut masked_area = 0.0;
    let mut clipped = 0;
    for (c, (v, m)) in cells.into_iter().enumerate() {
        let area = radii[c / n] * dr * dtheta;
        let v = if m == CellMask::Evaluated && v < 0.0 {
            if v < -1e-9 {
                clipped += 1;
            }
            0.0
        } else {
            v
        };
        match m {
            CellMask::Evaluated => mass += v * area,
            CellMask::Outside => {}
            _ => masked_area += area,
        }
        values.push(v);
        mask.push(m);
    }
    if !mass.is_finite() {
        return Err(Error::Numeric("grid mass is not finite".into()));
    }
    Ok(DensityGrid { radii, angles, dr, dtheta, values, mask, mass, masked_area, clipped })
}

/// Points of `∂Σ` for either regime, `u₀ = 1` in the limit.
pub fn boundary_curve(law: &InitialLaw, ks: KSteps, t: f64, m: usize) -> Result<Vec<Complex64>> {
    match ks {
        KSteps::Finite(k) => boundary_curve_k(law, k, t, m),
        KSteps::Infinity => boundary_curve_infinity(t, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_forms_at_z_one() {
        // s = 2: (1/2π)(2/t − 1/8 + t/(8√(t² + 64))).
        let want = (1.0 - 0.125 + 2.0 / (8.0 * 68f64.sqrt())) / (2.0 * PI);
        assert!((density_k2_circular(2.0, c(1.0, 0.0)).unwrap() - want).abs() < 1e-15);
        assert!(matches!(density_k2_circular(1.0, c(-1.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(density_k2_haar(1.0, c(-2.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn closed_forms_are_conjugation_symmetric() {
        for z in [c(0.7, 0.4), c(1.3, -0.2), c(-0.3, 0.8)] {
            assert_eq!(density_k2_haar(1.5, z).unwrap(), density_k2_haar(1.5, z.conj()).unwrap());
            assert_eq!(density_k2_circular(1.5, z).unwrap(), density_k2_circular(1.5, z.conj()).unwrap());
        }
    }

    #[test]
    fn generic_matches_closed_forms_pointwise() {
        let law = InitialLaw::trivial();
        for z in [c(1.0, 0.1), c(0.8, -0.2), c(1.3, 0.3)] {
            let g = density_k(&StepLaw::Circular, &law, 2, 1.0, z).unwrap();
            assert!((g - density_k2_circular(1.0, z).unwrap()).abs() < 1e-7, "{z}");
        }
        for z in [c(1.0, 0.1), c(0.8, -0.9), c(1.3, 1.3)] {
            let g = density_k(&StepLaw::Haar, &law, 2, 3.0, z).unwrap();
            assert!((g - density_k2_haar(3.0, z).unwrap()).abs() < 1e-7, "{z}");
        }
    }

    #[test]
    fn zero_outside() {
        let law = InitialLaw::trivial();
        assert_eq!(density_k(&StepLaw::Circular, &law, 2, 1.0, c(5.0, 0.0)).unwrap(), 0.0);
        assert_eq!(density_infinity(&law, 1.0, c(5.0, 0.0)).unwrap(), 0.0);
        let two = InitialLaw::new(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        assert!(density_infinity(&two, 1.0, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn infinity_radial_form() {
        let law = InitialLaw::trivial();
        let r_out = sigma_infinity_boundary(&law, 1.0, 0.2).unwrap();
        let a = density_infinity(&law, 1.0, Complex64::from_polar(r_out.powf(-0.5), 0.2)).unwrap();
        let b = density_infinity(&law, 1.0, Complex64::from_polar(r_out.sqrt(), 0.2)).unwrap();
        assert!((a / b - r_out * r_out).abs() < 1e-8 * r_out * r_out);
    }

    #[test]
    fn grid_rejects_low_resolution() {
        let law = InitialLaw::trivial();
        assert!(build_density_grid(&StepLaw::Circular, &law, KSteps::Finite(2), 1.0, 8).is_err());
        assert!(build_density_grid(&StepLaw::Circular, &law, KSteps::Finite(2), 0.0, 32).is_err());
    }

    #[test]
    fn mask_codes_round_trip() {
        for c in 0..5u8 {
            assert_eq!(CellMask::from_code(c).unwrap().code(), c);
        }
        assert!(CellMask::from_code(5).is_none());
    }
}
