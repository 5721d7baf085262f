//! Wong–Zakai partition products `Π (I + ΔW)` on `GL(n, ℂ)` and their
//! convergence to the Brownian motion as the mesh shrinks.

use num_complex::Complex64;

use crate::ensembles::sample_ginibre;
use crate::error::{Error, Result};
use crate::matrix::{hs_norm, ComplexMatrix};
use crate::rng::RngStream;
use crate::walk::{ls_slope, map_trials, quantile};

const BOOTSTRAP_RESAMPLES: usize = 200;
const REFERENCE_RATIO: usize = 8;

/// Times `0 = t₀ < t₁ < … < t_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    times: Vec<f64>,
}

impl Partition {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::InvalidInput("partition must start at 0 and have a positive length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidInput("partition times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    /// `m` equal steps on `[0, T]`.
    pub fn uniform(horizon: f64, m: usize) -> Result<Self> {
        if m == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput("uniform partition needs m ≥ 1 and T > 0".into()));
        }
        let mut times: Vec<f64> = (0..=m).map(|i| horizon * i as f64 / m as f64).collect();
        times[m] = horizon;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Draws the Brownian increments over `partition`, each `√Δs` times a Ginibre draw.
pub fn brownian_increments(n: usize, partition: &Partition, rng: &mut RngStream) -> Result<Vec<ComplexMatrix>> {
    partition
        .times()
        .windows(2)
        .map(|w| Ok(sample_ginibre(n, rng)?.scale(Complex64::new((w[1] - w[0]).sqrt(), 0.0))))
        .collect()
}

/// Sums consecutive groups of `stride` increments.
pub fn coarsen(increments: &[ComplexMatrix], stride: usize) -> Result<Vec<ComplexMatrix>> {
    if stride == 0 || increments.len() % stride != 0 {
        return Err(Error::InvalidInput(format!(
            "{} increments do not split into groups of {stride}",
            increments.len()
        )));
    }
    Ok(increments
        .chunks(stride)
        .map(|c| c[1..].iter().fold(c[0].clone(), |acc, m| acc.add(m)))
        .collect())
}

/// `B_Π` at every partition point: `B(t₀) = I`, `B(tᵢ) = B(tᵢ₋₁)(I + ΔWᵢ)`.
pub fn wong_zakai_path(n: usize, partition: &Partition, increments: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    if increments.len() != partition.steps() {
        return Err(Error::InvalidInput(format!(
            "{} increments for a partition of {} steps",
            increments.len(),
            partition.steps()
        )));
    }
    if increments.iter().any(|w| w.n() != n) {
        return Err(Error::InvalidInput("increment dimension mismatch".into()));
    }
    let mut path = Vec::with_capacity(increments.len() + 1);
    path.push(ComplexMatrix::identity(n));
    for w in increments {
        let last = &path[path.len() - 1];
        let next = last.add(&last.matmul(w));
        path.push(next);
    }
    Ok(path)
}

/// `Π_{s∈Π}(I + ΔW_s)` at the terminal time.
pub fn wong_zakai_product(n: usize, partition: &Partition, increments: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    Ok(wong_zakai_path(n, partition, increments)?.pop().expect("path is nonempty"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WzReport {
    pub meshes: Vec<f64>,
    pub lp_errors: Vec<f64>,
    pub fitted_slope: f64,
    /// 95% percentile-bootstrap interval for the slope.
    pub slope_ci: (f64, f64),
    pub p: f64,
    pub reference_mesh: f64,
    pub trials: usize,
}

fn fit(meshes: &[f64], errors: &[f64]) -> f64 {
    let lx: Vec<f64> = meshes.iter().map(|m| m.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    ls_slope(&lx, &ly)
}

fn step_count(horizon: f64, mesh: f64) -> Result<usize> {
    let m = horizon / mesh;
    let r = m.round();
    if !(mesh > 0.0) || r < 1.0 || (m - r).abs() > 1e-9 * r {
        return Err(Error::InvalidInput(format!("mesh {mesh} does not divide T = {horizon}")));
    }
    Ok(r as usize)
}

/// Estimates `E max_{t∈Π} ‖B_Π(t) − B_ref(t)‖ᵖ` per mesh, with `‖·‖` the
/// normalized Hilbert–Schmidt norm and the reference built on the same path
/// at one eighth of the finest mesh.
pub fn wz_convergence_experiment(
    n: usize,
    horizon: f64,
    p: f64,
    meshes: &[f64],
    trials: usize,
    seed: u64,
) -> Result<WzReport> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if meshes.len() < 3 {
        return Err(Error::InvalidInput("at least three meshes are needed to fit a slope".into()));
    }
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("moment order {p} must be at least 2")));
    }
    if meshes.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("meshes must be strictly decreasing".into()));
    }
    let counts = meshes.iter().map(|&m| step_count(horizon, m)).collect::<Result<Vec<_>>>()?;
    let fine = counts[counts.len() - 1] * REFERENCE_RATIO;
    if counts.iter().any(|c| fine % c != 0) {
        return Err(Error::InvalidInput("meshes must nest inside the reference partition".into()));
    }
    let reference = Partition::uniform(horizon, fine)?;
    let coarse: Vec<Partition> = counts.iter().map(|&c| Partition::uniform(horizon, c)).collect::<Result<_>>()?;

    // errors[trial][mesh]
    let errors = map_trials(seed, trials, |_, rng| {
        let dw = brownian_increments(n, &reference, rng)?;
        let exact = wong_zakai_path(n, &reference, &dw)?;
        coarse
            .iter()
            .map(|part| {
                let stride = fine / part.steps();
                let path = wong_zakai_path(n, part, &coarsen(&dw, stride)?)?;
                let worst = path
                    .iter()
                    .enumerate()
                    .map(|(j, b)| hs_norm(&b.sub(&exact[j * stride])).powf(p))
                    .fold(0.0, f64::max);
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()
    })?;

    let mean = |rows: &mut dyn Iterator<Item = &Vec<f64>>| -> Vec<f64> {
        let mut acc = vec![0.0; meshes.len()];
        let mut count = 0usize;
        for r in rows {
            for (a, e) in acc.iter_mut().zip(r) {
                *a += e;
            }
            count += 1;
        }
        acc.iter().map(|a| a / count as f64).collect()
    };
    let lp_errors = mean(&mut errors.iter());
    if lp_errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::Numeric(format!("degenerate error estimates {lp_errors:?}")));
    }
    let fitted_slope = fit(meshes, &lp_errors);

    let mut rng = RngStream::new(seed, u64::MAX);
    let mut slopes: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let idx: Vec<usize> = (0..trials).map(|_| rng.index(trials)).collect();
            fit(meshes, &mean(&mut idx.iter().map(|&i| &errors[i])))
        })
        .filter(|s| s.is_finite())
        .collect();
    slopes.sort_by(f64::total_cmp);
    let slope_ci = if slopes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (quantile(&slopes, 0.025), quantile(&slopes, 0.975))
    };

    Ok(WzReport {
        meshes: meshes.to_vec(),
        lp_errors,
        fitted_slope,
        slope_ci,
        p,
        reference_mesh: horizon / fine as f64,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions() {
        assert!(Partition::new(vec![0.0]).is_err());
        assert!(Partition::new(vec![0.1, 1.0]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 0.5]).is_err());
        let p = Partition::new(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert!((p.mesh() - 0.5).abs() < 1e-15);
        assert_eq!(Partition::uniform(1.0, 4).unwrap().steps(), 4);
    }

    #[test]
    fn single_step_is_identity_plus_increment() {
        let part = Partition::uniform(1.0, 1).unwrap();
        let dw = brownian_increments(4, &part, &mut RngStream::new(1, 0)).unwrap();
        let b = wong_zakai_product(4, &part, &dw).unwrap();
        assert_eq!(b, ComplexMatrix::identity(4).add(&dw[0]));
    }

    #[test]
    fn coarsening_sums_groups() {
        let part = Partition::uniform(1.0, 4).unwrap();
        let dw = brownian_increments(3, &part, &mut RngStream::new(2, 0)).unwrap();
        let c = coarsen(&dw, 2).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[1].max_abs_diff(&dw[2].add(&dw[3])) == 0.0);
        assert!(coarsen(&dw, 3).is_err());
    }

    #[test]
    fn increment_count_checked() {
        let part = Partition::uniform(1.0, 3).unwrap();
        let dw = brownian_increments(2, &Partition::uniform(1.0, 2).unwrap(), &mut RngStream::new(3, 0)).unwrap();
        assert!(wong_zakai_product(2, &part, &dw).is_err());
    }

    #[test]
    fn experiment_errors() {
        let m = [0.25, 0.125, 0.0625];
        assert!(wz_convergence_experiment(4, 1.0, 2.0, &m, 0, 1).is_err());
        assert!(wz_convergence_experiment(4, 1.0, 2.0, &m[..2], 5, 1).is_err());
        assert!(wz_convergence_experiment(4, 1.0, 1.0, &m, 5, 1).is_err());
        assert!(wz_convergence_experiment(4, 1.0, 2.0, &[0.25, 0.3, 0.1], 5, 1).is_err());
        assert!(wz_convergence_experiment(4, 1.0, 2.0, &[0.3, 0.2, 0.1], 5, 1).is_err());
    }

    #[test]
    fn small_experiment_is_ordered() {
        let r = wz_convergence_experiment(4, 1.0, 2.0, &[0.5, 0.25, 0.125], 20, 7).unwrap();
        assert_eq!(r.reference_mesh, 1.0 / 64.0);
        assert!(r.lp_errors[2] < r.lp_errors[0]);
        assert!(r.slope_ci.0 <= r.fitted_slope && r.fitted_slope <= r.slope_ci.1);
    }
}
