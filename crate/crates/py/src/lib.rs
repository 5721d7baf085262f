//! Python bindings: `import limabean`.

use limabean::density::{self, KSteps};
use limabean::ensembles::{sample_haar_unitary, Discretization};
use limabean::lifetime;
use limabean::subordination::{self, EtaResult, EtaState};
use limabean::walk::{self, WalkConfig};
use limabean::wz::wz_convergence_experiment;
use limabean::{Complex64, ComplexMatrix, InitialLaw, RngStream, SingularLaw, StepLaw};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: limabean::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

/// Step distribution of the walk.
#[pyclass(name = "StepLaw", module = "limabean", frozen)]
#[derive(Clone)]
struct PyStepLaw(StepLaw);

#[pymethods]
impl PyStepLaw {
    #[staticmethod]
    fn haar() -> Self {
        Self(StepLaw::Haar)
    }

    #[staticmethod]
    fn circular() -> Self {
        Self(StepLaw::Circular)
    }

    /// Atomic singular-value law from `(value, weight)` pairs with `Σ w·value² = 1`.
    #[staticmethod]
    fn atomic(atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        Ok(Self(StepLaw::atomic(SingularLaw::new(atoms).map_err(err)?).map_err(err)?))
    }

    #[getter]
    fn inv_l2_sq(&self) -> f64 {
        self.0.summary().inv_l2_sq
    }

    #[getter]
    fn is_invertible(&self) -> bool {
        self.0.is_invertible()
    }

    fn __repr__(&self) -> String {
        match &self.0 {
            StepLaw::Haar => "StepLaw.haar()".into(),
            StepLaw::Circular => "StepLaw.circular()".into(),
            StepLaw::Atomic(l) => format!("StepLaw.atomic({:?})", l.atoms()),
        }
    }
}

/// Spectral law of the initial unitary; the default is `u₀ = 1`.
#[pyclass(name = "InitialLaw", module = "limabean", frozen)]
#[derive(Clone)]
struct PyInitialLaw(InitialLaw);

#[pymethods]
impl PyInitialLaw {
    /// `atoms` are `(angle, weight)` pairs; omit for the trivial law.
    #[new]
    #[pyo3(signature = (atoms = None))]
    fn new(atoms: Option<Vec<(f64, f64)>>) -> PyResult<Self> {
        match atoms {
            None => Ok(Self(InitialLaw::trivial())),
            Some(a) => Ok(Self(InitialLaw::new(a).map_err(err)?)),
        }
    }

    #[staticmethod]
    fn trivial() -> Self {
        Self(InitialLaw::trivial())
    }

    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.0.atoms().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("InitialLaw({:?})", self.0.atoms())
    }
}

fn step_of(step: Option<&PyStepLaw>) -> StepLaw {
    step.map_or(StepLaw::Circular, |s| s.0.clone())
}

fn law_of(initial: Option<&PyInitialLaw>) -> InitialLaw {
    initial.map_or_else(InitialLaw::trivial, |l| l.0.clone())
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    m.to_row_major().chunks(m.n()).map(|r| r.to_vec()).collect()
}

/// Parameters of the random walk `U₀ ∏ (I + √(t/k) Aⱼ)`.
#[pyclass(name = "WalkConfig", module = "limabean")]
#[derive(Clone)]
struct PyWalkConfig(WalkConfig);

#[pymethods]
impl PyWalkConfig {
    #[new]
    #[pyo3(signature = (n, k, t, step = None, initial = None, seed = 0, trials = 1, iid = false))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        k: u32,
        t: f64,
        step: Option<PyRef<'_, PyStepLaw>>,
        initial: Option<PyRef<'_, PyInitialLaw>>,
        seed: u64,
        trials: usize,
        iid: bool,
    ) -> PyResult<Self> {
        let mut cfg = WalkConfig::new(n, k, t, step_of(step.as_deref()));
        cfg.initial = law_of(initial.as_deref());
        cfg.seed = seed;
        cfg.trials = trials;
        if iid {
            cfg.discretization = Discretization::Iid;
        }
        cfg.validate().map_err(err)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn trials(&self) -> usize {
        self.0.trials
    }

    /// One walk matrix from RNG stream `stream`, as nested row lists.
    #[pyo3(signature = (stream = 0))]
    fn simulate(&self, py: Python<'_>, stream: u64) -> PyResult<Vec<Vec<Complex64>>> {
        let m = py
            .allow_threads(|| walk::simulate_walk(&self.0, &mut RngStream::new(self.0.seed, stream)))
            .map_err(err)?;
        Ok(rows(&m))
    }

    /// Eigenvalues of every trial, trial-major.
    fn sample_esd(&self, py: Python<'_>) -> PyResult<Vec<Complex64>> {
        Ok(py.allow_threads(|| walk::pooled_esd(&self.0)).map_err(err)?.eigenvalues)
    }

    /// Quantiles of `σ_min(U₀B − z)` for each `n` in `ns` and the fitted decay exponent.
    fn sigma_min_sweep<'py>(&self, py: Python<'py>, z: Complex64, ns: Vec<usize>) -> PyResult<Bound<'py, PyDict>> {
        let s = py.allow_threads(|| walk::sigma_min_sweep(&self.0, z, &ns)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("gamma", s.gamma)?;
        d.set_item("n", s.rows.iter().map(|r| r.n).collect::<Vec<_>>())?;
        d.set_item("median", s.rows.iter().map(|r| r.median).collect::<Vec<_>>())?;
        d.set_item("q10", s.rows.iter().map(|r| r.q10).collect::<Vec<_>>())?;
        d.set_item("q90", s.rows.iter().map(|r| r.q90).collect::<Vec<_>>())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "WalkConfig(n={}, k={}, t={}, seed={}, trials={})",
            self.0.n, self.0.k, self.0.t, self.0.seed, self.0.trials
        )
    }
}

/// Polar density grid; `mask` codes: 0 evaluated, 1 outside, 2 boundary band, 3 pole, 4 solver failure.
#[pyclass(name = "DensityGrid", module = "limabean", frozen, get_all)]
struct PyDensityGrid {
    radii: Vec<f64>,
    angles: Vec<f64>,
    values: Vec<f64>,
    mask: Vec<u8>,
    dr: f64,
    dtheta: f64,
    mass: f64,
    masked_area: f64,
}

#[pymethods]
impl PyDensityGrid {
    fn __repr__(&self) -> String {
        format!("DensityGrid({}x{}, mass={:.6})", self.radii.len(), self.angles.len(), self.mass)
    }
}

fn k_steps(k: Option<u32>) -> KSteps {
    k.map_or(KSteps::Infinity, KSteps::Finite)
}

/// Haar-distributed unitary from `(seed, stream)`.
#[pyfunction]
#[pyo3(signature = (n, seed = 0, stream = 0))]
fn haar_unitary(n: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(rows(&sample_haar_unitary(n, &mut RngStream::new(seed, stream)).map_err(err)?))
}

/// Eigenvalues of a square matrix given as nested row lists.
#[pyfunction]
fn eigenvalues(matrix: Vec<Vec<Complex64>>) -> PyResult<Vec<Complex64>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let flat: Vec<Complex64> = matrix.into_iter().flatten().collect();
    let m = ComplexMatrix::from_row_major(n, &flat).map_err(err)?;
    limabean::matrix::eigenvalues(&m).map_err(err)
}

/// `T_k(u₀, z)`.
#[pyfunction]
#[pyo3(signature = (z, k, initial = None))]
fn lifetime_k(z: Complex64, k: u32, initial: Option<PyRef<'_, PyInitialLaw>>) -> f64 {
    lifetime::lifetime_k(&law_of(initial.as_deref()), k, z)
}

/// `T_∞(u₀, z)`.
#[pyfunction]
#[pyo3(signature = (z, initial = None))]
fn lifetime_infinity(z: Complex64, initial: Option<PyRef<'_, PyInitialLaw>>) -> f64 {
    lifetime::lifetime_infinity(&law_of(initial.as_deref()), z)
}

/// Boundary radii of `Σ_k(t)` along the ray at angle `theta`.
#[pyfunction]
#[pyo3(signature = (k, t, theta, initial = None))]
fn boundary_radii<'py>(
    py: Python<'py>,
    k: u32,
    t: f64,
    theta: f64,
    initial: Option<PyRef<'_, PyInitialLaw>>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = lifetime::boundary_radii(&law_of(initial.as_deref()), k, t, theta).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("theta", s.theta)?;
    d.set_item("r_minus", s.r_minus)?;
    d.set_item("r_min", s.r_min)?;
    d.set_item("r_plus", s.r_plus)?;
    d.set_item("t_star", s.t_star)?;
    d.set_item("open", s.is_open_at(t))?;
    Ok(d)
}

/// Collision threshold `t_k^c` for `u₀ = 1`.
#[pyfunction]
fn critical_time(k: u32) -> f64 {
    lifetime::critical_time(k)
}

/// Topological regime of the support for `u₀ = 1`.
#[pyfunction]
#[pyo3(signature = (k, t, step = None))]
fn classify_phase(k: u32, t: f64, step: Option<PyRef<'_, PyStepLaw>>) -> String {
    lifetime::classify_phase(k, t, &step_of(step.as_deref()).summary()).regime.as_str().to_string()
}

fn eta_tuple(r: EtaResult) -> (&'static str, f64) {
    let state = match r.state {
        EtaState::Interior => "interior",
        EtaState::ExteriorZero => "exterior",
        EtaState::DiskInfinite => "disk",
    };
    (state, r.eta)
}

/// `(state, η_k(t, z))` with state `"interior"`, `"exterior"` or `"disk"`.
#[pyfunction]
#[pyo3(signature = (z, k, t, step = None, initial = None))]
fn eta_k(
    z: Complex64,
    k: u32,
    t: f64,
    step: Option<PyRef<'_, PyStepLaw>>,
    initial: Option<PyRef<'_, PyInitialLaw>>,
) -> PyResult<(&'static str, f64)> {
    let r = subordination::solve_eta_k(&step_of(step.as_deref()), &law_of(initial.as_deref()), k, t, z).map_err(err)?;
    Ok(eta_tuple(r))
}

/// `(state, η_∞(t, z))`.
#[pyfunction]
#[pyo3(signature = (z, t, initial = None))]
fn eta_infinity(z: Complex64, t: f64, initial: Option<PyRef<'_, PyInitialLaw>>) -> PyResult<(&'static str, f64)> {
    Ok(eta_tuple(subordination::solve_eta_infinity(&law_of(initial.as_deref()), t, z).map_err(err)?))
}

/// `ρ_k(t, z)` through the subordination solver.
#[pyfunction]
#[pyo3(signature = (z, k, t, step = None, initial = None))]
fn density_k(
    z: Complex64,
    k: u32,
    t: f64,
    step: Option<PyRef<'_, PyStepLaw>>,
    initial: Option<PyRef<'_, PyInitialLaw>>,
) -> PyResult<f64> {
    density::density_k(&step_of(step.as_deref()), &law_of(initial.as_deref()), k, t, z).map_err(err)
}

/// Closed-form `ρ₂` for Haar steps and `u₀ = 1`.
#[pyfunction]
fn density_k2_haar(z: Complex64, t: f64) -> PyResult<f64> {
    density::density_k2_haar(t, z).map_err(err)
}

/// Closed-form `ρ₂` for circular steps and `u₀ = 1`.
#[pyfunction]
fn density_k2_circular(z: Complex64, t: f64) -> PyResult<f64> {
    density::density_k2_circular(t, z).map_err(err)
}

/// `ρ_∞(t, z)` for `u₀ = 1`.
#[pyfunction]
fn density_infinity(z: Complex64, t: f64) -> PyResult<f64> {
    density::density_infinity(&InitialLaw::trivial(), t, z).map_err(err)
}

/// Density on a polar grid; `k=None` is the `k → ∞` limit.
#[pyfunction]
#[pyo3(signature = (k, t, resolution = 200, step = None, initial = None))]
fn density_grid(
    py: Python<'_>,
    k: Option<u32>,
    t: f64,
    resolution: usize,
    step: Option<PyRef<'_, PyStepLaw>>,
    initial: Option<PyRef<'_, PyInitialLaw>>,
) -> PyResult<PyDensityGrid> {
    let (step, law) = (step_of(step.as_deref()), law_of(initial.as_deref()));
    let g = py
        .allow_threads(|| density::build_density_grid(&step, &law, k_steps(k), t, resolution))
        .map_err(err)?;
    Ok(PyDensityGrid {
        mask: g.mask.iter().map(|m| m.code()).collect(),
        radii: g.radii,
        angles: g.angles,
        values: g.values,
        dr: g.dr,
        dtheta: g.dtheta,
        mass: g.mass,
        masked_area: g.masked_area,
    })
}

/// Wong–Zakai mesh sweep: per-mesh `L^p` errors and the fitted log-log slope.
#[pyfunction]
#[pyo3(signature = (n, horizon, meshes, p = 2.0, trials = 200, seed = 0))]
fn wz_convergence<'py>(
    py: Python<'py>,
    n: usize,
    horizon: f64,
    meshes: Vec<f64>,
    p: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .allow_threads(|| wz_convergence_experiment(n, horizon, p, &meshes, trials, seed))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("meshes", r.meshes)?;
    d.set_item("lp_errors", r.lp_errors)?;
    d.set_item("slope", r.fitted_slope)?;
    d.set_item("slope_ci", r.slope_ci)?;
    d.set_item("reference_mesh", r.reference_mesh)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "limabean")]
fn limabean_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyStepLaw>()?;
    m.add_class::<PyInitialLaw>()?;
    m.add_class::<PyWalkConfig>()?;
    m.add_class::<PyDensityGrid>()?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime_k, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_radii, m)?)?;
    m.add_function(wrap_pyfunction!(critical_time, m)?)?;
    m.add_function(wrap_pyfunction!(classify_phase, m)?)?;
    m.add_function(wrap_pyfunction!(eta_k, m)?)?;
    m.add_function(wrap_pyfunction!(eta_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(density_k, m)?)?;
    m.add_function(wrap_pyfunction!(density_k2_haar, m)?)?;
    m.add_function(wrap_pyfunction!(density_k2_circular, m)?)?;
    m.add_function(wrap_pyfunction!(density_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(density_grid, m)?)?;
    m.add_function(wrap_pyfunction!(wz_convergence, m)?)?;
    Ok(())
}
