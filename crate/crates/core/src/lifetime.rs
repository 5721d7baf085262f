//! Lifetime functions `T_k`, `T_∞` and the geometry of their sublevel sets.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laws::{InitialLaw, StepLawSummary};

/// Half-width of the band around `|z| = 1` where prefactors switch to their series.
const UNIT_BAND: f64 = 1e-8;
const SCAN_POINTS: usize = 512;

/// Principal `k`-th root with argument in `(−π/k, π/k]`.
pub fn principal_root(z: Complex64, k: u32) -> Complex64 {
    let mut arg = z.im.atan2(z.re);
    if arg <= -PI {
        arg = PI;
    }
    Complex64::from_polar(z.norm().powf(1.0 / k as f64), arg / k as f64)
}

/// `Σᵢ wᵢ/|e^{iθᵢ} − z|²`, or `None` when `z` sits on an atom.
fn spectral_sum(law: &InitialLaw, z: Complex64) -> Option<f64> {
    let mut s = 0.0;
    for &(th, w) in law.atoms() {
        let d = (Complex64::from_polar(1.0, th) - z).norm_sqr();
        if d == 0.0 {
            return None;
        }
        s += w / d;
    }
    Some(s)
}

/// `k(r^{2/k} − 1)/(r² − 1)`, continued at `r = 1`.
pub fn prefactor_k(k: u32, r: f64) -> f64 {
    let kf = k as f64;
    if r == 0.0 {
        return kf;
    }
    if (r - 1.0).abs() < UNIT_BAND {
        let s = r * r - 1.0;
        let a = (1.0 / kf - 1.0) / 2.0;
        return 1.0 + a * s;
    }
    let l = r.ln();
    kf * (2.0 * l / kf).exp_m1() / (2.0 * l).exp_m1()
}

/// `log(r²)/(r² − 1)`, continued at `r = 1`; infinite at 0.
pub fn prefactor_infinity(r: f64) -> f64 {
    if r == 0.0 {
        return f64::INFINITY;
    }
    if (r - 1.0).abs() < UNIT_BAND {
        return 1.0 - (r * r - 1.0) / 2.0;
    }
    let l = r.ln();
    2.0 * l / (2.0 * l).exp_m1()
}

/// `T_k(u₀, z)`.
pub fn lifetime_k(law: &InitialLaw, k: u32, z: Complex64) -> f64 {
    match spectral_sum(law, z) {
        None => 0.0,
        Some(s) => prefactor_k(k, z.norm()) / s,
    }
}

/// `T_∞(u₀, z)`.
pub fn lifetime_infinity(law: &InitialLaw, z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        return f64::INFINITY;
    }
    match spectral_sum(law, z) {
        None => 0.0,
        Some(s) => prefactor_infinity(z.norm()) / s,
    }
}

/// `(1/k²) Σⱼ 1/|zⱼ − λ|²` over the `k`-th roots of unity, in closed form.
pub fn roots_sum_closed_form(k: u32, lambda: Complex64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let kf = k as f64;
    let r = lambda.norm();
    if (r - 1.0).abs() < 1e-14 {
        let j = (kf * lambda.arg() / (2.0 * PI)).round();
        let root = Complex64::from_polar(1.0, 2.0 * PI * j / kf);
        if (lambda - root).norm() < 1e-14 {
            return Err(Error::Pole(format!("{lambda} is a {k}-th root of unity")));
        }
    }
    let ratio = if (r - 1.0).abs() < UNIT_BAND {
        kf * (1.0 + (kf - 1.0) * (r * r - 1.0) / 2.0)
    } else {
        let l = r.ln();
        (2.0 * kf * l).exp_m1() / (2.0 * l).exp_m1()
    };
    let denom = (lambda.powu(k) - 1.0).norm_sqr();
    if denom == 0.0 {
        return Err(Error::Pole(format!("{lambda}^{k} = 1")));
    }
    Ok(ratio / (kf * denom))
}

/// One angular slice of `Σ_k(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainSlice {
    pub theta: f64,
    pub r_min: f64,
    pub t_star: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    /// False when a general initial law produced a multi-well profile along the ray.
    pub unimodal: bool,
}

impl DomainSlice {
    /// Whether the ray meets the domain at level `t`.
    pub fn is_open_at(&self, t: f64) -> bool {
        self.t_star < t
    }
}

fn ray_point(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// `∂T_k/∂r` along the ray at angle `θ` for `u₀ = 1`.
fn dt_dr_trivial(k: u32, r: f64, theta: f64) -> f64 {
    let kf = k as f64;
    let sin2 = (theta / 2.0).sin().powi(2);
    let q = (r - 1.0).powi(2) + 4.0 * r * sin2;
    let dq = 2.0 * (r - 1.0) + 4.0 * sin2;
    let p = prefactor_k(k, r);
    let dp = if (r - 1.0).abs() < 1e-6 {
        let s = r * r - 1.0;
        let a = (1.0 / kf - 1.0) / 2.0;
        let b = (1.0 / kf - 1.0) * (1.0 / kf - 2.0) / 6.0;
        (a + 2.0 * b * s) * 2.0 * r
    } else {
        let l = r.ln();
        let e = (2.0 * l).exp_m1();
        let ek = (2.0 * l / kf).exp_m1();
        let dl = (2.0 * (2.0 * l / kf).exp() * e - 2.0 * kf * (2.0 * l).exp() * ek) / (e * e);
        dl / r
    };
    dp * q + p * dq
}

fn trivial_r_min(k: u32, theta: f64) -> f64 {
    if theta.cos() == 1.0 {
        return 1.0;
    }
    if dt_dr_trivial(k, 1e-12, theta) >= 0.0 {
        return 0.0;
    }
    if dt_dr_trivial(k, 1.0, theta) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dt_dr_trivial(k, mid, theta) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Minimizer of `r ↦ T_k(r e^{iθ})`; `r_minus`, `r_plus` are set to `r_min`.
pub fn r_min(law: &InitialLaw, k: u32, theta: f64) -> DomainSlice {
    let t_at = |r: f64| lifetime_k(law, k, ray_point(r, theta));
    let (r0, unimodal) = if law.is_trivial() {
        (trivial_r_min(k, theta), true)
    } else {
        let vals: Vec<f64> = (0..=SCAN_POINTS).map(|i| t_at(i as f64 / SCAN_POINTS as f64)).collect();
        let mut g = 0;
        for i in 1..vals.len() {
            if vals[i] < vals[g] {
                g = i;
            }
        }
        let minima = (0..vals.len())
            .filter(|&i| {
                let left = i == 0 || vals[i] < vals[i - 1];
                let right = i + 1 == vals.len() || vals[i] <= vals[i + 1];
                left && right
            })
            .count();
        let h = 1.0 / SCAN_POINTS as f64;
        let a = (g as f64 * h - h).max(0.0);
        let b = (g as f64 * h + h).min(1.0);
        let r = golden_section(&t_at, a, b, 1e-12);
        let r = if t_at(r) <= vals[g] { r } else { g as f64 * h };
        (r, minima == 1)
    };
    let t_star = t_at(r0);
    DomainSlice { theta, r_min: r0, t_star, r_minus: r0, r_plus: r0, unimodal }
}

/// Bisection for `f(lo) < 0 < f(hi)` or the reverse.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary radii of `Σ_k(u₀, t)` along the ray at angle `θ`.
pub fn boundary_radii(law: &InitialLaw, k: u32, t: f64, theta: f64) -> Result<DomainSlice> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time {t} must be positive")));
    }
    let mut s = r_min(law, k, theta);
    if s.t_star >= t {
        return Ok(s);
    }
    let g = |r: f64| lifetime_k(law, k, ray_point(r, theta)) - t;
    let mut hi = s.r_min.max(0.5) * 2.0;
    let mut grown = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(Error::Numeric(format!(
                "no outer bracket for T_{k} = {t} at theta = {theta} (r up to {hi})"
            )));
        }
    }
    s.r_plus = bisect(g, s.r_min, hi);
    s.r_minus = if (k as f64) > t && s.r_min > 0.0 { bisect(g, 0.0, s.r_min) } else { 0.0 };
    let res = g(s.r_plus).abs();
    if res > 1e-10 * t.max(1.0) {
        return Err(Error::Numeric(format!("outer radius residual {res:e} at theta = {theta}")));
    }
    Ok(s)
}

/// `z ∈ Σ_k(u₀, t)`.
pub fn sigma_k_contains(law: &InitialLaw, k: u32, t: f64, z: Complex64) -> bool {
    lifetime_k(law, k, z) < t
}

/// `z ∈ Σ_∞(u₀, t)`.
pub fn sigma_infinity_contains(law: &InitialLaw, t: f64, z: Complex64) -> bool {
    lifetime_infinity(law, z) < t
}

/// Radius of the exclusion disk `D_k(a, t)`, if it exists.
pub fn d_k_disk(k: u32, t: f64, summary: &StepLawSummary) -> Option<f64> {
    let kinv = k as f64 * summary.inv_l2_sq;
    if !kinv.is_finite() || t < kinv {
        None
    } else {
        Some((t / kinv - 1.0).powf(k as f64 / 2.0))
    }
}

/// Table of topological regimes of the support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Disk,
    DiskWithAnnularClosure,
    Annulus,
    PuncturedDisk,
    DiskPost,
    AnnulusPostInverse,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Disk => "disk",
            Regime::DiskWithAnnularClosure => "disk-with-annular-closure",
            Regime::Annulus => "annulus",
            Regime::PuncturedDisk => "punctured-disk",
            Regime::DiskPost => "disk-post",
            Regime::AnnulusPostInverse => "annulus-post-inverse",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseClassification {
    pub regime: Regime,
    pub t_k_c: f64,
    pub k: f64,
    pub k_inv_l2_sq: f64,
}

/// Collision threshold `t_k^c = t_star(π)` for `u₀ = 1`.
pub fn critical_time(k: u32) -> f64 {
    r_min(&InitialLaw::trivial(), k, PI).t_star
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Regime of `Σ_k(t) \ D̄_k` for `u₀ = 1`.
pub fn classify_phase(k: u32, t: f64, summary: &StepLawSummary) -> PhaseClassification {
    let t_k_c = critical_time(k);
    let kf = k as f64;
    let k_inv_l2_sq = kf * summary.inv_l2_sq;
    let regime = if same_time(t, kf) {
        Regime::PuncturedDisk
    } else if same_time(t, t_k_c) {
        Regime::DiskWithAnnularClosure
    } else if t < t_k_c {
        Regime::Disk
    } else if t < kf {
        Regime::Annulus
    } else if t > k_inv_l2_sq {
        Regime::AnnulusPostInverse
    } else {
        Regime::DiskPost
    };
    PhaseClassification { regime, t_k_c, k: kf, k_inv_l2_sq }
}

/// Possible atom locations `S_k^k` in the `z`-plane.
pub fn s_k_atoms(law: &InitialLaw, k: u32, summary: &StepLawSummary) -> Vec<Complex64> {
    law.atoms()
        .iter()
        .filter(|&&(_, w)| w / k as f64 + summary.kernel_mass >= 1.0)
        .map(|&(th, _)| Complex64::from_polar(1.0, th))
        .collect()
}

/// Half-width of `I_∞(t)` for `u₀ = 1`.
pub fn infinity_halfwidth(t: f64) -> f64 {
    if t >= 4.0 {
        PI
    } else {
        (1.0 - t / 2.0).acos()
    }
}

/// Half-width of `I_k(t)` for `u₀ = 1`: the angle where `t_star(θ) = t`.
pub fn k_halfwidth(k: u32, t: f64) -> f64 {
    let law = InitialLaw::trivial();
    if r_min(&law, k, PI).t_star < t {
        return PI;
    }
    // `t_star` can equal `t` on a whole arc, so bisect on the predicate.
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if r_min(&law, k, mid).t_star < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Outer boundary radius `r(t, θ) ≥ 1` of `Σ_∞(u₀, t)`; 1 off the domain.
pub fn sigma_infinity_boundary(law: &InitialLaw, t: f64, theta: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time {t} must be positive")));
    }
    let g = |r: f64| lifetime_infinity(law, ray_point(r, theta)) - t;
    if g(1.0) >= 0.0 {
        return Ok(1.0);
    }
    let mut hi = 2.0;
    let mut grown = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(Error::Numeric(format!("no bracket for T_inf = {t} at theta = {theta}")));
        }
    }
    let r = bisect(g, 1.0, hi);
    let res = g(r).abs();
    if res > 1e-10 * t.max(1.0) {
        return Err(Error::Numeric(format!("boundary residual {res:e} at theta = {theta}")));
    }
    Ok(r)
}

fn sample_angle(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64
}

/// Points of `∂Σ_k(u₀, t)` along `m` rays, plus the two tips for `u₀ = 1`.
pub fn boundary_curve_k(law: &InitialLaw, k: u32, t: f64, m: usize) -> Result<Vec<Complex64>> {
    let mut pts = Vec::with_capacity(2 * m + 2);
    for j in 0..m {
        let s = boundary_radii(law, k, t, sample_angle(j, m))?;
        if s.is_open_at(t) {
            pts.push(ray_point(s.r_plus, s.theta));
            if s.r_minus > 0.0 {
                pts.push(ray_point(s.r_minus, s.theta));
            }
        }
    }
    if law.is_trivial() {
        let hw = k_halfwidth(k, t);
        if hw < PI {
            let r = r_min(law, k, hw).r_min;
            pts.push(ray_point(r, hw));
            pts.push(ray_point(r, -hw));
        }
    }
    Ok(pts)
}

/// Points of `∂Σ_∞(1, t)` along `m` rays, using the symmetry `z ↦ 1/z̄`, plus the tips.
pub fn boundary_curve_infinity(t: f64, m: usize) -> Result<Vec<Complex64>> {
    let law = InitialLaw::trivial();
    let hw = infinity_halfwidth(t);
    let mut pts = Vec::with_capacity(2 * m + 2);
    for j in 0..m {
        let th = sample_angle(j, m);
        if th.abs() < hw {
            let r = sigma_infinity_boundary(&law, t, th)?;
            pts.push(ray_point(r, th));
            pts.push(ray_point(r.recip(), th));
        }
    }
    if hw < PI {
        pts.push(ray_point(1.0, hw));
        pts.push(ray_point(1.0, -hw));
    }
    Ok(pts)
}

/// Largest distance between two points of a cloud.
pub fn diameter(points: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}
