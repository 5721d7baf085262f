//! One function per subcommand. Each writes its data files and reports whether
//! the run stayed within its tolerances.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use limabean::compare::{hausdorff, outside_fraction, radial_w1, sector_test, sup_gap};
use limabean::density::{
    build_density_grid, boundary_curve, density_infinity, density_k2_circular, density_k2_haar, CellMask,
    DensityGrid, KDensity, KSteps,
};
use limabean::lifetime::{
    boundary_curve_infinity, boundary_curve_k, boundary_radii, classify_phase, d_k_disk, infinity_halfwidth,
    k_halfwidth, sigma_infinity_boundary, sigma_infinity_contains, sigma_k_contains,
};
use limabean::walk::{pooled_esd, sigma_min_sweep};
use limabean::wz::wz_convergence_experiment;
use limabean::{Complex64, InitialLaw, StepLaw};
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{csv_bytes, fmt_f64, sha256_hex, OutputDir, RunManifest};
use crate::spec::{Command, ExperimentSpec};

pub const DOMAIN_SLICES: usize = 1024;
pub const ORACLE_TOLERANCE: f64 = 1e-5;
const DEFAULT_RESOLUTION: usize = 200;
const ORACLE_RESOLUTION: usize = 40;
const BOUNDARY_POINTS: usize = 4096;
const HAUSDORFF_ANGLES: usize = 1024;
const SECTORS: usize = 8;

/// Runs `spec.command`; `Ok(false)` means a tolerance breach.
pub fn execute(spec: &ExperimentSpec, spec_dir: &Path, out: &mut OutputDir) -> Result<bool, CliError> {
    match spec.command {
        Command::SampleEsd => sample_esd(spec, out),
        Command::DensityGrid => density_grid(spec, out),
        Command::Domain => domain(spec, out),
        Command::Compare => compare(spec, spec_dir, out),
        Command::WzConvergence => wz(spec, out),
        Command::SigmaMin => sigma_min(spec, out),
        Command::K2Oracle => k2_oracle(spec, out),
        Command::Limabean => limabean_convergence(spec, out),
    }
}

fn sample_esd(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let esd = pooled_esd(&spec.walk_config()?)?;
    let rows = (0..esd.trials).flat_map(|trial| {
        esd.trial(trial)
            .iter()
            .enumerate()
            .map(move |(i, z)| vec![trial.to_string(), i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])
            .collect::<Vec<_>>()
    });
    out.write("esd.csv", &csv_bytes(&["trial", "index", "re", "im"], rows)?)?;
    Ok(true)
}

fn density_grid(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let grid = build_density_grid(
        &spec.step_law()?,
        &spec.initial_law()?,
        spec.walk.k.steps(),
        spec.walk.t,
        spec.resolution(DEFAULT_RESOLUTION),
    )?;
    let n = grid.angles.len();
    let rows = (0..grid.radii.len()).flat_map(|ir| {
        let grid = &grid;
        (0..n).map(move |ith| {
            let c = grid.index(ir, ith);
            let z = grid.point(ir, ith);
            vec![
                fmt_f64(grid.radii[ir]),
                fmt_f64(grid.angles[ith]),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(grid.values[c]),
                grid.mask[c].code().to_string(),
            ]
        })
    });
    let mut bytes = csv_bytes(&["r", "theta", "re", "im", "density", "masked"], rows)?;
    bytes.extend_from_slice(
        format!(
            "# mass={},dr={},dtheta={},masked={}\n",
            fmt_f64(grid.mass),
            fmt_f64(grid.dr),
            fmt_f64(grid.dtheta),
            grid.masked_count()
        )
        .as_bytes(),
    );
    out.write("density.csv", &bytes)?;
    Ok(true)
}

/// Slice angles `−π + 2π(j+1)/m`: they include `0` and `π` and pair up as `θ ↔ −θ`.
pub fn domain_angle(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * (j + 1) as f64 / m as f64
}

#[derive(Serialize)]
struct Phase {
    /// Only classified for `u₀ = 1`.
    regime: Option<&'static str>,
    k: u32,
    t: f64,
    t_k_c: f64,
    /// `None` when infinite.
    k_inv_l2_sq: Option<f64>,
    disk_radius: Option<f64>,
}

fn domain(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let k = spec.finite_k()?;
    let (t, law, step) = (spec.walk.t, spec.initial_law()?, spec.step_law()?);
    let mut rows = Vec::with_capacity(DOMAIN_SLICES);
    for j in 0..DOMAIN_SLICES {
        let s = boundary_radii(&law, k, t, domain_angle(j, DOMAIN_SLICES))?;
        rows.push([s.theta, s.r_minus, s.r_min, s.r_plus, s.t_star].map(fmt_f64).to_vec());
    }
    out.write("domain.csv", &csv_bytes(&["theta", "r_minus", "r_min", "r_plus", "t_star"], rows)?)?;

    let summary = step.summary();
    let p = classify_phase(k, t, &summary);
    let phase = Phase {
        regime: law.is_trivial().then(|| p.regime.as_str()),
        k,
        t,
        t_k_c: p.t_k_c,
        k_inv_l2_sq: p.k_inv_l2_sq.is_finite().then_some(p.k_inv_l2_sq),
        disk_radius: d_k_disk(k, t, &summary),
    };
    out.write_json("phase.json", &phase)?;
    Ok(true)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Reads a data file and checks it against the manifest next to it.
fn load_artifact(path: &Path, command: Command) -> Result<(String, RunManifest), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let manifest = RunManifest::load(dir)?;
    if manifest.spec.command != command {
        return Err(CliError::Invalid(format!(
            "{} was produced by `{}`, expected `{}`",
            path.display(),
            manifest.command,
            command.as_str()
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    match manifest.files.get(name) {
        Some(entry) if entry.sha256 == sha256_hex(text.as_bytes()) => Ok((text, manifest)),
        Some(_) => Err(CliError::Invalid(format!("{} does not match its manifest checksum", path.display()))),
        None => Err(CliError::Invalid(format!("{} is not listed in its manifest", path.display()))),
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Invalid(format!("not a number: {s:?}")))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes())
}

pub fn read_esd(text: &str) -> Result<Vec<Complex64>, CliError> {
    let mut points = Vec::new();
    for rec in csv_reader(text).records() {
        let rec = rec?;
        points.push(Complex64::new(parse_f64(&rec[2])?, parse_f64(&rec[3])?));
    }
    Ok(points)
}

/// `key=value` pairs of the `#` footer line.
fn footer_value(text: &str, key: &str) -> Result<f64, CliError> {
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('#'))
        .ok_or_else(|| CliError::Invalid("density.csv has no footer".into()))?;
    line.trim_start_matches('#')
        .split(',')
        .filter_map(|kv| kv.trim().split_once('='))
        .find(|(k, _)| *k == key)
        .ok_or_else(|| CliError::Invalid(format!("density.csv footer lacks `{key}`")))
        .and_then(|(_, v)| parse_f64(v))
}

pub fn read_density(text: &str) -> Result<DensityGrid, CliError> {
    let mut radii: Vec<f64> = Vec::new();
    let mut angles: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut mask = Vec::new();
    for rec in csv_reader(text).records() {
        let rec = rec?;
        let (r, th) = (parse_f64(&rec[0])?, parse_f64(&rec[1])?);
        if radii.last() != Some(&r) {
            radii.push(r);
        }
        if radii.len() == 1 {
            angles.push(th);
        }
        values.push(parse_f64(&rec[4])?);
        let code: u8 = rec[5].trim().parse().map_err(|_| CliError::Invalid(format!("bad mask {:?}", &rec[5])))?;
        mask.push(CellMask::from_code(code).ok_or_else(|| CliError::Invalid(format!("unknown mask code {code}")))?);
    }
    if radii.is_empty() || values.len() != radii.len() * angles.len() {
        return Err(CliError::Invalid("density.csv is not a full polar grid".into()));
    }
    let (dr, dtheta) = (footer_value(text, "dr")?, footer_value(text, "dtheta")?);
    let mut masked_area = 0.0;
    for (c, m) in mask.iter().enumerate() {
        if !matches!(m, CellMask::Evaluated | CellMask::Outside) {
            masked_area += radii[c / angles.len()] * dr * dtheta;
        }
    }
    Ok(DensityGrid { radii, angles, dr, dtheta, values, mask, mass: footer_value(text, "mass")?, masked_area, clipped: 0 })
}

#[derive(Serialize)]
struct CompareReport {
    eigenvalues: usize,
    radial_w1: f64,
    max_abs_z: f64,
    radial_edges: Vec<f64>,
    sector_observed: Vec<Vec<usize>>,
    sector_expected: Vec<Vec<f64>>,
    sector_z_scores: Vec<Vec<f64>>,
    outside_fraction: f64,
    epsilon: f64,
    max_w1: f64,
    max_abs_z_allowed: f64,
    max_outside: f64,
    pass: bool,
}

fn rows_of<T: Clone>(flat: &[T], width: usize) -> Vec<Vec<T>> {
    flat.chunks(width).map(|c| c.to_vec()).collect()
}

fn compare(spec: &ExperimentSpec, spec_dir: &Path, out: &mut OutputDir) -> Result<bool, CliError> {
    let c = spec.compare.as_ref().ok_or_else(|| CliError::Invalid("compare needs a `compare` section".into()))?;
    let (esd_text, esd_m) = load_artifact(&resolve(spec_dir, &c.esd), Command::SampleEsd)?;
    let (den_text, den_m) = load_artifact(&resolve(spec_dir, &c.density), Command::DensityGrid)?;
    for (what, w) in [("sample-esd", &esd_m.spec.walk), ("density-grid", &den_m.spec.walk)] {
        if w.k != spec.walk.k || w.t != spec.walk.t {
            return Err(CliError::Invalid(format!("{what} output was run with k={:?}, t={}", w.k, w.t)));
        }
        if w.step_law != spec.walk.step_law || w.initial_law != spec.walk.initial_law {
            return Err(CliError::Invalid(format!("{what} output was run with a different law")));
        }
    }

    let points = read_esd(&esd_text)?;
    let grid = read_density(&den_text)?;
    let (law, t, ks) = (spec.initial_law()?, spec.walk.t, spec.walk.k.steps());
    let boundary = boundary_curve(&law, ks, t, BOUNDARY_POINTS)?;
    let epsilon = c.epsilon.unwrap_or(0.05);
    let outside = outside_fraction(
        &points,
        |z| match ks {
            KSteps::Finite(k) => sigma_k_contains(&law, k, t, z),
            KSteps::Infinity => sigma_infinity_contains(&law, t, z),
        },
        &boundary,
        epsilon,
    );
    let sectors = sector_test(&points, &grid, SECTORS, SECTORS)?;
    let w1 = radial_w1(&points, &grid)?;
    let (max_w1, max_z, max_out) = (c.max_w1.unwrap_or(0.02), c.max_abs_z.unwrap_or(4.0), c.max_outside.unwrap_or(0.01));
    let pass = w1 <= max_w1 && sectors.max_abs_z <= max_z && outside <= max_out;
    out.write_json(
        "report.json",
        &CompareReport {
            eigenvalues: points.len(),
            radial_w1: w1,
            max_abs_z: sectors.max_abs_z,
            radial_edges: sectors.radial_edges.clone(),
            sector_observed: rows_of(&sectors.observed, sectors.angular_bins),
            sector_expected: rows_of(&sectors.expected, sectors.angular_bins),
            sector_z_scores: rows_of(&sectors.z_scores, sectors.angular_bins),
            outside_fraction: outside,
            epsilon,
            max_w1,
            max_abs_z_allowed: max_z,
            max_outside: max_out,
            pass,
        },
    )?;
    Ok(pass)
}

#[derive(Serialize)]
struct SlopeReport {
    slope: f64,
    ci_low: f64,
    ci_high: f64,
    p: f64,
    reference_mesh: f64,
    trials: usize,
    bounds: Option<(f64, f64)>,
}

fn wz(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let w = spec.wz.as_ref().ok_or_else(|| CliError::Invalid("wz-convergence needs a `wz` section".into()))?;
    let r = wz_convergence_experiment(spec.walk.n, spec.walk.t, w.p, &w.meshes, spec.walk.trials, spec.walk.seed)?;
    let rows = r.meshes.iter().zip(&r.lp_errors).map(|(m, e)| vec![fmt_f64(*m), fmt_f64(*e)]);
    out.write("wz.csv", &csv_bytes(&["mesh", "lp_error"], rows)?)?;
    let pass = w.slope_bounds.is_none_or(|(lo, hi)| (lo..=hi).contains(&r.fitted_slope));
    out.write_json(
        "slope.json",
        &SlopeReport {
            slope: r.fitted_slope,
            ci_low: r.slope_ci.0,
            ci_high: r.slope_ci.1,
            p: r.p,
            reference_mesh: r.reference_mesh,
            trials: r.trials,
            bounds: w.slope_bounds,
        },
    )?;
    Ok(pass)
}

fn sigma_min(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let ns = spec.ns.as_ref().ok_or_else(|| CliError::Invalid("sigma-min needs a list `ns`".into()))?;
    let sweep = sigma_min_sweep(&spec.walk_config()?, spec.shift()?, ns)?;
    let rows = sweep.rows.iter().map(|r| {
        let mut v = vec![r.n.to_string()];
        v.extend([r.q10, r.q25, r.median, r.q75, r.q90].map(fmt_f64));
        v
    });
    let mut bytes = csv_bytes(&["n", "q10", "q25", "median", "q75", "q90"], rows)?;
    bytes.extend_from_slice(format!("# gamma={}\n", fmt_f64(sweep.gamma)).as_bytes());
    out.write("sigmin.csv", &bytes)?;
    Ok(true)
}

/// `m × m` points inside `Σ₂(t)`, away from its boundary and the exclusion disk.
fn oracle_points(step: &StepLaw, t: f64, m: usize) -> Result<Vec<Complex64>, CliError> {
    let law = InitialLaw::trivial();
    let hw = 0.95 * k_halfwidth(2, t);
    let disk = d_k_disk(2, t, &step.summary()).unwrap_or(0.0);
    let mut pts = Vec::with_capacity(m * m);
    for i in 0..m {
        let th = hw * (-1.0 + 2.0 * (i as f64 + 0.5) / m as f64);
        let s = boundary_radii(&law, 2, t, th)?;
        let lo = s.r_minus.max(disk);
        for j in 0..m {
            let u = 0.1 + 0.8 * (j as f64 + 0.5) / m as f64;
            pts.push(Complex64::from_polar(lo + u * (s.r_plus - lo), th));
        }
    }
    Ok(pts)
}

#[derive(Serialize)]
struct OracleCase {
    step: &'static str,
    t: f64,
    points: usize,
    max_abs_error: f64,
}

#[derive(Serialize)]
struct OracleReport {
    grid_size: usize,
    tolerance: f64,
    cases: Vec<OracleCase>,
    pass: bool,
}

fn k2_oracle(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let m = spec.resolution(ORACLE_RESOLUTION);
    let law = InitialLaw::trivial();
    let mut cases = Vec::new();
    for (name, step, t) in [("haar", StepLaw::Haar, 3.0), ("circular", StepLaw::Circular, 1.0), ("circular", StepLaw::Circular, 2.0)] {
        let pts = oracle_points(&step, t, m)?;
        let ev = KDensity::new(&step, &law, 2, t)?;
        let closed = |z| match step {
            StepLaw::Haar => density_k2_haar(t, z),
            _ => density_k2_circular(t, z),
        };
        let err = sup_gap(&pts, |z| ev.eval(z), closed)?;
        cases.push(OracleCase { step: name, t, points: pts.len(), max_abs_error: err });
    }
    let pass = cases.iter().all(|c| c.max_abs_error <= ORACLE_TOLERANCE);
    out.write_json("oracle.json", &OracleReport { grid_size: m, tolerance: ORACLE_TOLERANCE, cases, pass })?;
    Ok(pass)
}

/// `m × m` points well inside `Σ_∞(t)`, hence inside every `Σ_k(t)`.
fn limit_points(law: &InitialLaw, t: f64, m: usize) -> Result<Vec<Complex64>, CliError> {
    let hw = infinity_halfwidth(t);
    let mut pts = Vec::with_capacity(m * m);
    for i in 0..m {
        let th = 0.6 * hw * (-1.0 + 2.0 * (i as f64 + 0.5) / m as f64);
        let lr = sigma_infinity_boundary(law, t, th)?.ln();
        for j in 0..m {
            let s = 0.6 * (-1.0 + 2.0 * (j as f64 + 0.5) / m as f64);
            pts.push(Complex64::from_polar((s * lr).exp(), th));
        }
    }
    Ok(pts)
}

fn limabean_convergence(spec: &ExperimentSpec, out: &mut OutputDir) -> Result<bool, CliError> {
    let law = spec.initial_law()?;
    if !law.is_trivial() {
        return Err(CliError::Invalid("limabean compares against the u0 = 1 limit only".into()));
    }
    let (t, step) = (spec.walk.t, spec.step_law()?);
    let ks = spec.ks.clone().unwrap_or_else(|| vec![4, 8, 16, 32]);
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Invalid("ks must be a nonempty increasing list".into()));
    }
    let pts = limit_points(&law, t, spec.resolution(20))?;
    let limit = boundary_curve_infinity(t, HAUSDORFF_ANGLES)?;
    let mut rows = Vec::new();
    let (mut gaps, mut dists) = (Vec::new(), Vec::new());
    for &k in &ks {
        let ev = KDensity::new(&step, &law, k, t)?;
        let gap = sup_gap(&pts, |z| ev.eval(z), |z| density_infinity(&law, t, z))?;
        let dist = hausdorff(&boundary_curve_k(&law, k, t, HAUSDORFF_ANGLES)?, &limit)?;
        rows.push(vec![k.to_string(), fmt_f64(gap), fmt_f64(dist)]);
        gaps.push(gap);
        dists.push(dist);
    }
    out.write("conv.csv", &csv_bytes(&["k", "sup_gap", "hausdorff"], rows)?)?;
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    Ok(decreasing(&gaps) && decreasing(&dists))
}
