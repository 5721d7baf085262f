//! The walk `U₀·Π_{j=1..k}(I + √(t/k)·A_j)`, its pooled spectrum and
//! smallest-singular-value statistics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{sample_haar_unitary, sample_step, Discretization};
use crate::error::{Error, Result};
use crate::laws::{InitialLaw, StepLaw};
use crate::matrix::{eigenvalues, sigma_min, ComplexMatrix};
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig {
    pub n: usize,
    pub k: u32,
    pub t: f64,
    pub step: StepLaw,
    pub initial: InitialLaw,
    pub seed: u64,
    pub trials: usize,
    pub discretization: Discretization,
}

impl WalkConfig {
    pub fn new(n: usize, k: u32, t: f64, step: StepLaw) -> Self {
        Self {
            n,
            k,
            t,
            step,
            initial: InitialLaw::trivial(),
            seed: 0,
            trials: 1,
            discretization: Discretization::MidpointQuantile,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidInput(format!("time {} must be finite and nonnegative", self.t)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `n` slots; ties go to the lower index.
pub fn slot_counts(weights: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// `Q·D·Q*` with `D` carrying the atoms of `law` and `Q` Haar.
pub fn sample_initial_unitary(law: &InitialLaw, n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    let weights: Vec<f64> = law.atoms().iter().map(|a| a.1).collect();
    let counts = slot_counts(&weights, n);
    let mut diag = Vec::with_capacity(n);
    for (&(th, _), &c) in law.atoms().iter().zip(&counts) {
        diag.extend(std::iter::repeat(Complex64::from_polar(1.0, th)).take(c));
    }
    if diag.iter().all(|&d| d == diag[0]) {
        let mut m = ComplexMatrix::identity(n);
        for i in 0..n {
            m.set(i, i, diag[0]);
        }
        return Ok(m);
    }
    let q = sample_haar_unitary(n, rng)?;
    let qd = ComplexMatrix::from_fn(n, |i, j| q.get(i, j) * diag[j]);
    Ok(qd.matmul(&q.adjoint()))
}

/// One realization of `U₀ B_k(t)`.
pub fn simulate_walk(cfg: &WalkConfig, rng: &mut RngStream) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let mut b = sample_initial_unitary(&cfg.initial, cfg.n, rng)?;
    if cfg.t == 0.0 {
        return Ok(b);
    }
    let c = (cfg.t / cfg.k as f64).sqrt();
    for _ in 0..cfg.k {
        let a = sample_step(&cfg.step, cfg.n, cfg.discretization, rng)?;
        b = b.right_step(&a, c);
    }
    if !b.is_finite() {
        return Err(Error::Numeric("walk product overflowed".into()));
    }
    Ok(b)
}

/// Eigenvalues pooled over independent trials.
#[derive(Clone, Debug, PartialEq)]
pub struct Esd {
    pub eigenvalues: Vec<Complex64>,
    pub n: usize,
    pub trials: usize,
}

impl Esd {
    /// Eigenvalues of trial `i`.
    pub fn trial(&self, i: usize) -> &[Complex64] {
        &self.eigenvalues[i * self.n..(i + 1) * self.n]
    }
}

/// Runs `f` on trial streams `0..trials` in parallel, preserving order.
pub(crate) fn map_trials<T: Send>(
    seed: u64,
    trials: usize,
    f: impl Fn(usize, &mut RngStream) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

pub fn pooled_esd(cfg: &WalkConfig) -> Result<Esd> {
    cfg.validate()?;
    let per_trial = map_trials(cfg.seed, cfg.trials, |i, rng| {
        let b = simulate_walk(cfg, rng)?;
        eigenvalues(&b).map_err(|e| Error::SolverFailure(format!("trial {i} (seed {}): {e}", cfg.seed)))
    })?;
    Ok(Esd { eigenvalues: per_trial.into_iter().flatten().collect(), n: cfg.n, trials: cfg.trials })
}

/// Fraction of trials with `σ_min(U₀B − zI) ≤ ε`, per `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exceedance {
    pub epsilons: Vec<f64>,
    pub fractions: Vec<f64>,
    pub samples: Vec<f64>,
}

pub fn sigma_min_samples(cfg: &WalkConfig, z: Complex64) -> Result<Vec<f64>> {
    cfg.validate()?;
    map_trials(cfg.seed, cfg.trials, |_, rng| sigma_min(&simulate_walk(cfg, rng)?.shift(z)))
}

pub fn sigma_min_shifted_experiment(cfg: &WalkConfig, z: Complex64, epsilons: &[f64]) -> Result<Exceedance> {
    let samples = sigma_min_samples(cfg, z)?;
    let fractions = epsilons
        .iter()
        .map(|&e| samples.iter().filter(|&&s| s <= e).count() as f64 / samples.len() as f64)
        .collect();
    Ok(Exceedance { epsilons: epsilons.to_vec(), fractions, samples })
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let i = h.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (h - i as f64) * (sorted[j] - sorted[i])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMinRow {
    pub n: usize,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMinSweep {
    pub rows: Vec<SigmaMinRow>,
    /// `γ` in `median ∝ N^{−γ}`, by least squares on logs.
    pub gamma: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn sigma_min_sweep(cfg: &WalkConfig, z: Complex64, ns: &[usize]) -> Result<SigmaMinSweep> {
    if ns.len() < 2 {
        return Err(Error::InvalidInput("need at least two dimensions to fit an exponent".into()));
    }
    if !cfg.step.is_invertible() {
        return Err(Error::InvalidInput("sigma-min experiment needs an invertible step law".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let c = WalkConfig { n, ..cfg.clone() };
        let mut s = sigma_min_samples(&c, z)?;
        s.sort_by(f64::total_cmp);
        rows.push(SigmaMinRow {
            n,
            q10: quantile(&s, 0.10),
            q25: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q75: quantile(&s, 0.75),
            q90: quantile(&s, 0.90),
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.median.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(SigmaMinSweep { gamma: -ls_slope(&lx, &ly), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn apportionment() {
        assert_eq!(slot_counts(&[0.3, 0.7], 10), vec![3, 7]);
        assert_eq!(slot_counts(&[0.5, 0.5], 3), vec![2, 1]);
        assert_eq!(slot_counts(&[1.0 / 3.0; 3], 4), vec![2, 1, 1]);
        assert_eq!(slot_counts(&[0.2, 0.2, 0.6], 7).iter().sum::<usize>(), 7);
    }

    #[test]
    fn trivial_initial_is_identity() {
        let mut r = RngStream::new(1, 0);
        let u = sample_initial_unitary(&InitialLaw::trivial(), 6, &mut r).unwrap();
        assert_eq!(u, ComplexMatrix::identity(6));
    }

    #[test]
    fn two_atom_initial_spectrum() {
        let law = InitialLaw::new(vec![(PI / 3.0, 0.5), (-PI / 3.0, 0.5)]).unwrap();
        let mut r = RngStream::new(2, 0);
        let u = sample_initial_unitary(&law, 4, &mut r).unwrap();
        let ev = eigenvalues(&u).unwrap();
        let up = ev.iter().filter(|z| (**z - Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-9).count();
        let down = ev.iter().filter(|z| (**z - Complex64::from_polar(1.0, -PI / 3.0)).norm() < 1e-9).count();
        assert_eq!((up, down), (2, 2));
    }

    #[test]
    fn zero_time_returns_initial() {
        let law = InitialLaw::new(vec![(1.0, 0.25), (-2.0, 0.75)]).unwrap();
        let mut cfg = WalkConfig::new(8, 3, 0.0, StepLaw::Circular);
        cfg.initial = law.clone();
        let b = simulate_walk(&cfg, &mut RngStream::new(4, 0)).unwrap();
        let u0 = sample_initial_unitary(&law, 8, &mut RngStream::new(4, 0)).unwrap();
        assert_eq!(b, u0);
    }

    #[test]
    fn single_haar_step_spectrum() {
        let t: f64 = 0.7;
        let cfg = WalkConfig::new(64, 1, t, StepLaw::Haar);
        let b = simulate_walk(&cfg, &mut RngStream::new(9, 0)).unwrap();
        for z in eigenvalues(&b).unwrap() {
            assert!(((z - 1.0).norm() - t.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn pooled_sizes_and_determinism() {
        let mut cfg = WalkConfig::new(3, 2, 0.5, StepLaw::Circular);
        cfg.trials = 2;
        cfg.seed = 17;
        let a = pooled_esd(&cfg).unwrap();
        assert_eq!(a.eigenvalues.len(), 6);
        assert_eq!(a, pooled_esd(&cfg).unwrap());
        cfg.t = 0.0;
        assert!(pooled_esd(&cfg).unwrap().eigenvalues.iter().all(|&z| z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn config_validation() {
        let mut cfg = WalkConfig::new(3, 2, 0.5, StepLaw::Haar);
        cfg.trials = 0;
        assert!(pooled_esd(&cfg).is_err());
        cfg.trials = 1;
        cfg.t = -1.0;
        assert!(cfg.validate().is_err());
        cfg.t = 1.0;
        cfg.k = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exceedance_edges() {
        let mut cfg = WalkConfig::new(8, 3, 1.0, StepLaw::Haar);
        cfg.trials = 20;
        let z = Complex64::new(0.5, 0.0);
        let e = sigma_min_shifted_experiment(&cfg, z, &[0.0]).unwrap();
        assert_eq!(e.fractions, vec![0.0]);
        let big = e.samples.iter().cloned().fold(0.0, f64::max) + 1.0;
        let e = sigma_min_shifted_experiment(&cfg, z, &[big]).unwrap();
        assert_eq!(e.fractions, vec![1.0]);
    }

    #[test]
    fn quantiles_and_slope() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&s, 0.5), 3.0);
        assert_eq!(quantile(&s, 0.25), 2.0);
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }
}
