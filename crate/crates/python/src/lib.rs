//! Python bindings: boundary curves, the NP operator and its spectrum,
//! polarization tensors, Drude contrasts, frequency sweeps and far fields.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use plasmon_core::farfield::{self, FarFieldJob, PlaneWave};
use plasmon_core::geometry::{self, BoundaryCurve, ParticleSystem, Similarity};
use plasmon_core::materials::DrudeMaterial;
use plasmon_core::npop::{self, NPMatrix};
use plasmon_core::polarization::{self, PolarizationTensor};
use plasmon_core::scan::{self, Spacing, SweepGrid};
use plasmon_core::Error;

create_exception!(plasmon, NumericalError, PyRuntimeError, "Near-singular or non-convergent computation.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NearSingular { .. }
        | Error::EigenNonConvergence { .. }
        | Error::Pole { .. }
        | Error::InsideShell { .. } => NumericalError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Matrix = Vec<Vec<Complex64>>;

fn tensor_rows(t: &PolarizationTensor) -> Matrix {
    (0..t.dim()).map(|i| (0..t.dim()).map(|j| t.get(i, j)).collect()).collect()
}

fn tensor_from_rows(key: &str, rows: Option<Matrix>) -> PyResult<PolarizationTensor> {
    let Some(rows) = rows else {
        return Ok(PolarizationTensor::zeros(3));
    };
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(PyValueError::new_err(format!("{key} must be a 3x3 nested list")));
    }
    PolarizationTensor::explicit(DMatrix::from_fn(3, 3, |i, j| rows[i][j])).map_err(to_py)
}

/// Closed smooth boundary sampled at equispaced parameter nodes.
#[pyclass(name = "Curve", module = "plasmon", frozen)]
struct PyCurve {
    inner: BoundaryCurve,
}

#[pymethods]
impl PyCurve {
    #[staticmethod]
    #[pyo3(signature = (radius=1.0, center=(0.0, 0.0), n_nodes=128))]
    fn circle(radius: f64, center: (f64, f64), n_nodes: usize) -> PyResult<Self> {
        let inner = geometry::make_circle(radius, [center.0, center.1], n_nodes).map_err(to_py)?;
        Ok(PyCurve { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (a=1.0, b=0.5, center=(0.0, 0.0), rotation=0.0, n_nodes=256))]
    fn ellipse(a: f64, b: f64, center: (f64, f64), rotation: f64, n_nodes: usize) -> PyResult<Self> {
        let inner = geometry::make_ellipse(a, b, [center.0, center.1], rotation, n_nodes).map_err(to_py)?;
        Ok(PyCurve { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (r0=1.0, amplitude=0.3, petals=5, center=(0.0, 0.0), rotation=0.0, n_nodes=256))]
    fn star(
        r0: f64,
        amplitude: f64,
        petals: u32,
        center: (f64, f64),
        rotation: f64,
        n_nodes: usize,
    ) -> PyResult<Self> {
        let inner = geometry::make_star(r0, amplitude, petals, [center.0, center.1], rotation, n_nodes)
            .map_err(to_py)?;
        Ok(PyCurve { inner })
    }

    /// Rotation about the origin, then scaling, then translation.
    #[pyo3(signature = (rotation=0.0, translation=(0.0, 0.0), scale=1.0))]
    fn transform(&self, rotation: f64, translation: (f64, f64), scale: f64) -> PyResult<Self> {
        let motion = Similarity {
            rotation,
            translation: [translation.0, translation.1],
            scale,
        };
        Ok(PyCurve {
            inner: geometry::transform(&self.inner, &motion).map_err(to_py)?,
        })
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.n_nodes()
    }

    #[getter]
    fn area(&self) -> f64 {
        self.inner.area()
    }

    #[getter]
    fn perimeter(&self) -> f64 {
        self.inner.perimeter()
    }

    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points.iter().map(|p| (p[0], p[1])).collect()
    }

    #[getter]
    fn normals(&self) -> Vec<(f64, f64)> {
        self.inner.normals.iter().map(|p| (p[0], p[1])).collect()
    }

    fn __repr__(&self) -> String {
        format!("Curve(n_nodes={}, area={:.6})", self.inner.n_nodes(), self.inner.area())
    }
}

fn system(curves: Vec<PyRef<'_, PyCurve>>, min_distance: f64) -> PyResult<ParticleSystem> {
    let curves: Vec<BoundaryCurve> = curves.iter().map(|c| c.inner.clone()).collect();
    ParticleSystem::new(curves, min_distance).map_err(to_py)
}

/// Nystrom discretization of the NP operator for one or more particles.
#[pyclass(name = "NPOperator", module = "plasmon", frozen)]
struct PyNPOperator {
    inner: NPMatrix,
}

#[pymethods]
impl PyNPOperator {
    #[new]
    #[pyo3(signature = (curves, min_distance=geometry::DEFAULT_MIN_DISTANCE))]
    fn new(py: Python<'_>, curves: Vec<PyRef<'_, PyCurve>>, min_distance: f64) -> PyResult<Self> {
        let sys = system(curves, min_distance)?;
        Ok(PyNPOperator {
            inner: py.detach(|| npop::assemble(&sys)),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n_particles(&self) -> usize {
        self.inner.n_particles()
    }

    /// Eigenvalues sorted by descending real part.
    fn spectrum(&self, py: Python<'_>) -> PyResult<Vec<Complex64>> {
        py.detach(|| self.inner.spectrum().map(|s| s.eigenvalues.clone()))
            .map_err(to_py)
    }

    /// Dense matrix as nested lists of floats.
    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = &self.inner.entries;
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    /// Polarization tensor summed over all particles, as a 2x2 nested list.
    fn polarization(&self, py: Python<'_>, lam: Complex64) -> PyResult<Matrix> {
        let t = py.detach(|| polarization::pt_numeric(&self.inner, lam)).map_err(to_py)?;
        Ok(tensor_rows(&t))
    }
}

#[pyfunction]
#[pyo3(signature = (lam, radius=1.0))]
fn pt_disk(lam: Complex64, radius: f64) -> PyResult<Matrix> {
    Ok(tensor_rows(&polarization::pt_disk(lam, radius).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (lam, a=1.0, b=0.5))]
fn pt_ellipse(lam: Complex64, a: f64, b: f64) -> PyResult<Matrix> {
    Ok(tensor_rows(&polarization::pt_ellipse(lam, a, b).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (lam, radius=1.0))]
fn pt_sphere(lam: Complex64, radius: f64) -> PyResult<Matrix> {
    Ok(tensor_rows(&polarization::pt_sphere(lam, radius).map_err(to_py)?))
}

/// Drude particle in a background medium; `eps_m_rel` and `mu_m_rel` are
/// relative to `eps0` and `mu0`.
#[pyclass(name = "Drude", module = "plasmon", frozen)]
struct PyDrude {
    inner: DrudeMaterial,
}

#[pymethods]
impl PyDrude {
    #[new]
    #[pyo3(signature = (*, eps0=None, mu0=None, omega_p=None, tau=None, F=None, omega0=None, eps_m_rel=None, mu_m_rel=None))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(
        eps0: Option<f64>,
        mu0: Option<f64>,
        omega_p: Option<f64>,
        tau: Option<f64>,
        F: Option<f64>,
        omega0: Option<f64>,
        eps_m_rel: Option<f64>,
        mu_m_rel: Option<f64>,
    ) -> PyResult<Self> {
        let d = DrudeMaterial::default();
        let eps0 = eps0.unwrap_or(d.eps0);
        let mu0 = mu0.unwrap_or(d.mu0);
        let inner = DrudeMaterial {
            eps0,
            mu0,
            omega_p: omega_p.unwrap_or(d.omega_p),
            tau: tau.unwrap_or(d.tau),
            f_fill: F.unwrap_or(d.f_fill),
            omega0: omega0.unwrap_or(d.omega0),
            eps_m: eps_m_rel.unwrap_or(d.eps_m / d.eps0) * eps0,
            mu_m: mu_m_rel.unwrap_or(1.0) * mu0,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyDrude { inner })
    }

    fn eps_c(&self, omega: f64) -> PyResult<Complex64> {
        self.inner.eps_c(omega).map_err(to_py)
    }

    fn mu_c(&self, omega: f64) -> PyResult<Complex64> {
        self.inner.mu_c(omega).map_err(to_py)
    }

    /// `(lambda_eps, lambda_mu)`; `lambda_mu` is `None` when `mu_c == mu_m`.
    fn contrast(&self, omega: f64) -> PyResult<(Complex64, Option<Complex64>)> {
        let c = self.inner.contrast(omega).map_err(to_py)?;
        Ok((c.lambda_eps, c.lambda_mu))
    }

    fn disk_resonance_omega(&self) -> Option<f64> {
        self.inner.disk_resonance_omega()
    }

    #[getter]
    fn eps_m(&self) -> f64 {
        self.inner.eps_m
    }

    #[getter]
    fn mu_m(&self) -> f64 {
        self.inner.mu_m
    }
}

/// Tensor norm over a wavelength grid, plus detected peaks.
#[pyfunction]
#[pyo3(signature = (curves, material=None, wavelength_min=80e-9, wavelength_max=1100e-9, n_samples=512, spacing="log", prominence=scan::DEFAULT_PROMINENCE))]
#[allow(clippy::too_many_arguments)]
fn frequency_sweep<'py>(
    py: Python<'py>,
    curves: Vec<PyRef<'py, PyCurve>>,
    material: Option<PyRef<'py, PyDrude>>,
    wavelength_min: f64,
    wavelength_max: f64,
    n_samples: usize,
    spacing: &str,
    prominence: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spacing = match spacing {
        "log" => Spacing::Log,
        "linear" => Spacing::Linear,
        other => return Err(PyValueError::new_err(format!("spacing must be 'log' or 'linear', got {other:?}"))),
    };
    let grid = SweepGrid {
        wavelength_min,
        wavelength_max,
        n_samples,
        spacing,
    };
    let material = material.map(|m| m.inner).unwrap_or_default();
    let sys = system(curves, geometry::DEFAULT_MIN_DISTANCE)?;
    let (result, peaks) = py
        .detach(|| {
            let r = scan::frequency_sweep_system(&sys, &material, &grid)?;
            let p = scan::detect_peaks(&r, prominence);
            Ok::<_, Error>((r, p))
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("omega", result.rows.iter().map(|r| r.omega).collect::<Vec<_>>())?;
    out.set_item(
        "wavelength_paper",
        result.rows.iter().map(|r| r.wavelength_paper).collect::<Vec<_>>(),
    )?;
    out.set_item("lambda_eps", result.rows.iter().map(|r| r.lambda_eps).collect::<Vec<_>>())?;
    out.set_item("frobenius", result.frobenius())?;
    out.set_item("rcond", result.rows.iter().map(|r| r.rcond).collect::<Vec<_>>())?;
    let peak_list: Vec<Bound<'py, PyDict>> = peaks
        .peaks
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("index", p.index)?;
            d.set_item("omega", p.omega)?;
            d.set_item("wavelength_paper", p.wavelength_paper)?;
            d.set_item("value", p.value)?;
            d.set_item("prominence", p.prominence)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    out.set_item("peaks", peak_list)?;
    Ok(out)
}

/// Leading-order scattered field `E - E^i` of a small particle at `z`.
#[pyfunction]
#[pyo3(signature = (points, *, z=(0.0, 0.0, 0.0), delta, omega, eps_m, mu_m, me=None, mh=None, direction=(0.0, 0.0, 1.0), polarization=None, r_min=None))]
#[allow(clippy::too_many_arguments)]
fn scattered_field(
    py: Python<'_>,
    points: Vec<(f64, f64, f64)>,
    z: (f64, f64, f64),
    delta: f64,
    omega: f64,
    eps_m: f64,
    mu_m: f64,
    me: Option<Matrix>,
    mh: Option<Matrix>,
    direction: (f64, f64, f64),
    polarization: Option<(Complex64, Complex64, Complex64)>,
    r_min: Option<f64>,
) -> PyResult<Vec<(Complex64, Complex64, Complex64)>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let p = polarization.unwrap_or((one, zero, zero));
    let wave = PlaneWave::new(
        [direction.0, direction.1, direction.2],
        [p.0, p.1, p.2],
        omega,
        eps_m,
        mu_m,
    )
    .map_err(to_py)?;
    let mut job = FarFieldJob::new(
        [z.0, z.1, z.2],
        delta,
        tensor_from_rows("me", me)?,
        tensor_from_rows("mh", mh)?,
        wave,
        points.iter().map(|p| [p.0, p.1, p.2]).collect(),
    );
    if let Some(r) = r_min {
        job.r_min = r;
    }
    let field = py.detach(|| farfield::scattered_field(&job)).map_err(to_py)?;
    Ok(field.iter().map(|e| (e[0], e[1], e[2])).collect())
}

#[pymodule]
fn plasmon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", plasmon_core::VERSION)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyNPOperator>()?;
    m.add_class::<PyDrude>()?;
    m.add_function(wrap_pyfunction!(pt_disk, m)?)?;
    m.add_function(wrap_pyfunction!(pt_ellipse, m)?)?;
    m.add_function(wrap_pyfunction!(pt_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(frequency_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(scattered_field, m)?)?;
    Ok(())
}
