//! Theory-vs-simulation metrics: radial Wasserstein-1, polar sector counts,
//! support containment and Hausdorff distance between boundary clouds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::density::{CellMask, DensityGrid};
use crate::error::{Error, Result};

/// `∫|F_a − F_b|` for two empirical samples on the line.
pub fn w1_empirical(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut all: Vec<f64> = a.iter().chain(&b).copied().collect();
    all.sort_by(f64::total_cmp);
    let (mut ia, mut ib) = (0, 0);
    let mut acc = 0.0;
    for w in all.windows(2) {
        while ia < a.len() && a[ia] <= w[0] {
            ia += 1;
        }
        while ib < b.len() && b[ib] <= w[0] {
            ib += 1;
        }
        let fa = ia as f64 / a.len() as f64;
        let fb = ib as f64 / b.len() as f64;
        acc += (fa - fb).abs() * (w[1] - w[0]);
    }
    Ok(acc)
}

/// Radial marginal of a grid: bin edges and normalized bin masses.
pub fn radial_marginal(grid: &DensityGrid) -> (Vec<f64>, Vec<f64>) {
    let n_th = grid.angles.len();
    let lo = grid.radii[0] - 0.5 * grid.dr;
    let edges: Vec<f64> = (0..=grid.radii.len()).map(|i| lo + i as f64 * grid.dr).collect();
    let mut mass: Vec<f64> = (0..grid.radii.len())
        .map(|ir| {
            let area = grid.cell_area(ir);
            (0..n_th)
                .filter(|&j| grid.mask[grid.index(ir, j)] == CellMask::Evaluated)
                .map(|j| grid.values[grid.index(ir, j)] * area)
                .sum()
        })
        .collect();
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    (edges, mass)
}

/// `∫|F_emp − F_grid| dr` between the moduli of `points` and the grid's radial
/// marginal, with the grid CDF linear inside each radial bin.
pub fn radial_w1(points: &[Complex64], grid: &DensityGrid) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no eigenvalues to compare".into()));
    }
    let (edges, mass) = radial_marginal(grid);
    if !mass.iter().all(|m| m.is_finite()) {
        return Err(Error::Numeric("grid carries no mass".into()));
    }
    let mut cdf = vec![0.0; edges.len()];
    for i in 0..mass.len() {
        cdf[i + 1] = cdf[i] + mass[i];
    }
    let grid_cdf = |r: f64| -> f64 {
        if r <= edges[0] {
            return 0.0;
        }
        if r >= edges[edges.len() - 1] {
            return 1.0;
        }
        let i = (((r - edges[0]) / grid.dr) as usize).min(mass.len() - 1);
        cdf[i] + mass[i] * (r - edges[i]) / grid.dr
    };
    let mut r: Vec<f64> = points.iter().map(|z| z.norm()).collect();
    r.sort_by(f64::total_cmp);
    let mut knots: Vec<f64> = r.iter().chain(&edges).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let m = r.len() as f64;
    let mut below = 0;
    let mut acc = 0.0;
    for w in knots.windows(2) {
        while below < r.len() && r[below] <= w[0] {
            below += 1;
        }
        // Empirical CDF is constant and the grid CDF linear on [w0, w1].
        let fe = below as f64 / m;
        let d0 = grid_cdf(w[0]) - fe;
        let d1 = grid_cdf(w[1]) - fe;
        let len = w[1] - w[0];
        acc += if d0 * d1 >= 0.0 {
            0.5 * (d0.abs() + d1.abs()) * len
        } else {
            0.5 * (d0 * d0 + d1 * d1) / (d0 - d1).abs() * len
        };
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorReport {
    pub radial_bins: usize,
    pub angular_bins: usize,
    pub radial_edges: Vec<f64>,
    pub observed: Vec<usize>,
    pub expected: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
}

fn angular_bin(theta: f64, bins: usize) -> usize {
    (((theta + PI) / (2.0 * PI) * bins as f64) as usize).min(bins - 1)
}

/// Polar sector counts against grid mass, scored as `(O − Mp)/√max(Mp(1−p), 1)`.
pub fn sector_test(points: &[Complex64], grid: &DensityGrid, radial_bins: usize, angular_bins: usize) -> Result<SectorReport> {
    if radial_bins == 0 || angular_bins == 0 || points.is_empty() {
        return Err(Error::InvalidInput("sector test needs bins and points".into()));
    }
    let lo = grid.radii[0] - 0.5 * grid.dr;
    let hi = grid.radii[grid.radii.len() - 1] + 0.5 * grid.dr;
    let width = (hi - lo) / radial_bins as f64;
    let radial_bin = |r: f64| (((r - lo) / width).max(0.0) as usize).min(radial_bins - 1);
    let cells = radial_bins * angular_bins;

    let mut mass = vec![0.0; cells];
    for (ir, &r) in grid.radii.iter().enumerate() {
        let area = grid.cell_area(ir);
        for (j, &th) in grid.angles.iter().enumerate() {
            let c = grid.index(ir, j);
            if grid.mask[c] == CellMask::Evaluated {
                mass[radial_bin(r) * angular_bins + angular_bin(th, angular_bins)] += grid.values[c] * area;
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric("grid carries no mass".into()));
    }

    let mut observed = vec![0usize; cells];
    for z in points {
        observed[radial_bin(z.norm()) * angular_bins + angular_bin(z.arg(), angular_bins)] += 1;
    }
    let m = points.len() as f64;
    let expected: Vec<f64> = mass.iter().map(|x| m * x / total).collect();
    let z_scores: Vec<f64> = observed
        .iter()
        .zip(&mass)
        .map(|(&o, &x)| {
            let p = x / total;
            (o as f64 - m * p) / (m * p * (1.0 - p)).max(1.0).sqrt()
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    Ok(SectorReport {
        radial_bins,
        angular_bins,
        radial_edges: (0..=radial_bins).map(|i| lo + i as f64 * width).collect(),
        observed,
        expected,
        z_scores,
        max_abs_z,
    })
}

/// Distance from `z` to the nearest point of `cloud`.
pub fn distance_to_cloud(z: Complex64, cloud: &[Complex64]) -> f64 {
    cloud.iter().map(|b| (z - b).norm()).fold(f64::INFINITY, f64::min)
}

/// Fraction of `points` farther than `eps` from the closed support, where
/// `inside` decides membership and `boundary` samples the boundary.
pub fn outside_fraction(
    points: &[Complex64],
    inside: impl Fn(Complex64) -> bool,
    boundary: &[Complex64],
    eps: f64,
) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let out = points
        .iter()
        .filter(|&&z| !inside(z) && distance_to_cloud(z, boundary) > eps)
        .count();
    out as f64 / points.len() as f64
}

/// Hausdorff distance between two finite point clouds.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("Hausdorff distance of an empty cloud".into()));
    }
    let directed = |x: &[Complex64], y: &[Complex64]| x.iter().map(|&p| distance_to_cloud(p, y)).fold(0.0, f64::max);
    Ok(directed(a, b).max(directed(b, a)))
}

/// Sup of `|f − g|` over a fixed point set.
pub fn sup_gap(points: &[Complex64], f: impl Fn(Complex64) -> Result<f64>, g: impl Fn(Complex64) -> Result<f64>) -> Result<f64> {
    let mut m = 0.0f64;
    for &z in points {
        m = m.max((f(z)? - g(z)?).abs());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Uniform density `1/(π(b² − a²))` on an annulus, as a grid.
    fn annulus_grid(a: f64, b: f64, n: usize) -> DensityGrid {
        let dr = (b - a) / n as f64;
        let dtheta = 2.0 * PI / n as f64;
        let radii: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * dr).collect();
        let angles: Vec<f64> = (0..n).map(|j| -PI + (j as f64 + 0.5) * dtheta).collect();
        let v = 1.0 / (PI * (b * b - a * a));
        DensityGrid {
            mass: 1.0,
            radii,
            angles,
            dr,
            dtheta,
            values: vec![v; n * n],
            mask: vec![CellMask::Evaluated; n * n],
            masked_area: 0.0,
            clipped: 0,
        }
    }

    #[test]
    fn empirical_w1() {
        let x = [0.3, 1.0, 2.5, 0.7];
        assert_eq!(w1_empirical(&x, &x).unwrap(), 0.0);
        assert!((w1_empirical(&[0.0], &[2.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((w1_empirical(&[0.0, 1.0], &[0.5, 1.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!(w1_empirical(&[], &x).is_err());
    }

    #[test]
    fn radial_w1_against_exact_quantiles() {
        // Radii with CDF (r² − a²)/(b² − a²), sampled at midpoint quantiles.
        let (a, b) = (0.5, 1.5);
        let g = annulus_grid(a, b, 64);
        let m = 20000;
        let pts: Vec<Complex64> = (0..m)
            .map(|i| {
                let p = (i as f64 + 0.5) / m as f64;
                Complex64::from_polar((a * a + p * (b * b - a * a)).sqrt(), 0.3)
            })
            .collect();
        let w = radial_w1(&pts, &g).unwrap();
        assert!(w < 1e-3, "{w}");
        let shifted: Vec<Complex64> = pts.iter().map(|z| z * 1.1).collect();
        assert!(radial_w1(&shifted, &g).unwrap() > 0.05);
    }

    #[test]
    fn sectors_of_uniform_annulus() {
        let g = annulus_grid(1.0, 2.0, 64);
        let pts: Vec<Complex64> = (0..64 * 100)
            .map(|i| {
                let (ri, ti) = (i / 800, i % 800);
                let r = (1.0 + 3.0 * (ri as f64 + 0.5) / 8.0).sqrt();
                Complex64::from_polar(r, -PI + 2.0 * PI * (ti as f64 + 0.5) / 800.0)
            })
            .collect();
        let s = sector_test(&pts, &g, 8, 8).unwrap();
        assert_eq!(s.observed.len(), 64);
        assert!((s.expected.iter().sum::<f64>() - pts.len() as f64).abs() < 1e-6);
        let far: Vec<Complex64> = vec![c(1.01, 0.0); 400];
        assert!(sector_test(&far, &g, 8, 8).unwrap().max_abs_z > 10.0);
    }

    #[test]
    fn outside_and_hausdorff() {
        let circle: Vec<Complex64> = (0..4096).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 4096.0)).collect();
        let inside = |z: Complex64| z.norm() < 1.0;
        let pts = [c(0.0, 0.0), c(1.04, 0.0), c(0.0, -1.2), c(3.0, 0.0)];
        assert_eq!(outside_fraction(&pts, inside, &circle, 0.05), 0.5);
        let big: Vec<Complex64> = circle.iter().map(|z| z * 1.5).collect();
        assert!((hausdorff(&circle, &big).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(hausdorff(&circle, &circle).unwrap(), 0.0);
        assert!(hausdorff(&[], &circle).is_err());
    }
}
