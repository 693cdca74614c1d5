//! Python bindings for the `trsta` crate: the rescaling map, the drive
//! waveforms, trajectory simulation, robustness fidelity, and work-statistics
//! comparison, exposed as the `trsta_py` extension module.

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use trsta::propagate::{
    evolve, evolve_trajectory, propagator_distance, PureState2, TimeGrid, DEFAULT_STEPS,
};
use trsta::protocol::{AeDrive, Drive};
use trsta::workstats::{compare_protocols, ThermalSpec};

fn err(e: trsta::Error) -> PyErr {
    match e {
        trsta::Error::InvalidParameter(_) | trsta::Error::OutOfDomain { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Monotone map compressing a protocol window [0, t_f] into [0, t_f/a].
#[pyclass(frozen, name = "RescaleMap")]
struct PyRescaleMap {
    inner: trsta::RescaleMap,
}

#[pymethods]
impl PyRescaleMap {
    #[new]
    fn new(a: f64, t_f: f64) -> PyResult<Self> {
        Ok(Self {
            inner: trsta::RescaleMap::new(a, t_f).map_err(err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.contraction()
    }

    #[getter]
    fn t_f(&self) -> f64 {
        self.inner.reference_duration()
    }

    /// Duration of the compressed window, t_f / a.
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    /// f(tau).
    fn eval(&self, tau: f64) -> PyResult<f64> {
        self.inner.eval(tau).map_err(err)
    }

    /// f'(tau).
    fn derivative(&self, tau: f64) -> PyResult<f64> {
        self.inner.derivative(tau).map_err(err)
    }

    /// Numerical inverse f^{-1}(t).
    fn inverse(&self, t: f64) -> PyResult<f64> {
        self.inner.inverse(t).map_err(err)
    }

    /// Property checks as (name, residual, tolerance, pass) tuples.
    fn validate(&self, tol: f64) -> Vec<(String, f64, f64, bool)> {
        self.inner
            .validate(tol)
            .checks
            .into_iter()
            .map(|c| (c.name.to_string(), c.residual, c.tolerance, c.pass))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "RescaleMap(a={}, t_f={})",
            self.inner.contraction(),
            self.inner.reference_duration()
        )
    }
}

/// Reference pulse parameters; the protocol window is [0, 8*t0].
#[pyclass(frozen, name = "AeParams")]
struct PyAeParams {
    inner: trsta::AeParams,
}

#[pymethods]
impl PyAeParams {
    #[new]
    #[pyo3(signature = (omega0 = 2.0, beta_chirp = std::f64::consts::SQRT_2, t0 = 1.0))]
    fn new(omega0: f64, beta_chirp: f64, t0: f64) -> PyResult<Self> {
        Ok(Self {
            inner: trsta::AeParams::new(omega0, beta_chirp, t0).map_err(err)?,
        })
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.omega0()
    }

    #[getter]
    fn beta_chirp(&self) -> f64 {
        self.inner.beta_chirp()
    }

    #[getter]
    fn t0(&self) -> f64 {
        self.inner.t0()
    }

    #[getter]
    fn t_f(&self) -> f64 {
        self.inner.total_duration()
    }

    /// Rabi frequency at time t.
    fn rabi(&self, t: f64) -> PyResult<f64> {
        self.inner.rabi(t).map_err(err)
    }

    /// Detuning at time t.
    fn detuning(&self, t: f64) -> PyResult<f64> {
        self.inner.detuning(t).map_err(err)
    }

    /// (P1, P2) of the ideally adiabatic evolution at time t.
    fn adiabatic_populations(&self, t: f64) -> PyResult<(f64, f64)> {
        self.inner.adiabatic_populations(t).map_err(err)
    }

    /// First-order adiabaticity parameter at time t.
    fn adiabaticity_metric(&self, t: f64) -> PyResult<f64> {
        self.inner.adiabaticity_metric(t).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "AeParams(omega0={}, beta_chirp={}, t0={})",
            self.inner.omega0(),
            self.inner.beta_chirp(),
            self.inner.t0()
        )
    }
}

/// Compressed drive for contraction parameter a.
#[pyclass(frozen, name = "TrDrive")]
struct PyTrDrive {
    inner: trsta::TrDrive,
}

#[pymethods]
impl PyTrDrive {
    #[new]
    fn new(params: &PyAeParams, a: f64) -> PyResult<Self> {
        Ok(Self {
            inner: trsta::TrDrive::with_contraction(params.inner, a).map_err(err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.map().contraction()
    }

    /// Window length t_f / a.
    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    /// Peak Rabi amplitude (2a-1)*omega0.
    #[getter]
    fn peak_rabi(&self) -> f64 {
        self.inner.peak_rabi()
    }

    fn rabi(&self, tau: f64) -> PyResult<f64> {
        self.inner.rabi(tau).map_err(err)
    }

    fn detuning(&self, tau: f64) -> PyResult<f64> {
        self.inner.detuning(tau).map_err(err)
    }

    fn adiabaticity_metric(&self, tau: f64) -> PyResult<f64> {
        self.inner.adiabaticity_metric(tau).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("TrDrive(a={}, duration={})", self.a(), self.duration())
    }
}

/// (time, P1, P2, rabi, detuning) sample.
type TrajectoryRow = (f64, f64, f64, f64, f64);

/// Integrate the compressed protocol from |1> and return rows of
/// (time, P1, P2, rabi, detuning). a = 1 is the reference protocol.
#[pyfunction]
#[pyo3(signature = (params, a, steps = DEFAULT_STEPS))]
fn simulate(params: &PyAeParams, a: f64, steps: usize) -> PyResult<Vec<TrajectoryRow>> {
    let drive = trsta::TrDrive::with_contraction(params.inner, a).map_err(err)?;
    let grid = TimeGrid::new(0.0, drive.duration(), steps).map_err(err)?;
    let traj = evolve_trajectory(&drive, &grid, &PureState2::basis_1()).map_err(err)?;
    traj.into_iter()
        .map(|(t, psi)| {
            let (p1, p2) = psi.populations();
            Ok((
                t,
                p1,
                p2,
                drive.rabi(t).map_err(err)?,
                drive.detuning(t).map_err(err)?,
            ))
        })
        .collect()
}

/// Final |2> population of the compressed protocol with systematic errors
/// eps on the Rabi amplitude and delta on the squared chirp rate.
#[pyfunction]
#[pyo3(signature = (params, a, eps = 0.0, delta = 0.0, steps = DEFAULT_STEPS))]
fn fidelity(params: &PyAeParams, a: f64, eps: f64, delta: f64, steps: usize) -> PyResult<f64> {
    trsta::robustness::fidelity(&params.inner, a, eps, delta, steps).map_err(err)
}

/// Square pi-pulse fidelity under a Rabi amplitude error: sin^2((1+eps)*pi/2).
#[pyfunction]
fn pi_pulse_fidelity(eps: f64) -> f64 {
    trsta::robustness::pi_pulse_fidelity(eps)
}

/// Phase-insensitive distance between the reference propagator and the
/// compressed one, both integrated with `steps` steps on their own windows.
#[pyfunction]
#[pyo3(signature = (params, a, steps = DEFAULT_STEPS))]
fn propagator_gap(params: &PyAeParams, a: f64, steps: usize) -> PyResult<f64> {
    let p = params.inner;
    let reference = AeDrive::new(p);
    let (lo, hi) = reference.window();
    let u_ref = evolve(&reference, &TimeGrid::new(lo, hi, steps).map_err(err)?).map_err(err)?;
    let drive = trsta::TrDrive::with_contraction(p, a).map_err(err)?;
    let u_tr = evolve(&drive, &TimeGrid::new(0.0, drive.duration(), steps).map_err(err)?)
        .map_err(err)?;
    Ok(propagator_distance(&u_ref, &u_tr))
}

/// Work-statistics comparison between the reference and compressed
/// protocols at inverse temperature beta. Returns a dict with the means,
/// fluctuations, and their gaps.
#[pyfunction]
#[pyo3(signature = (params, a, beta, steps = DEFAULT_STEPS))]
fn work_comparison(
    params: &PyAeParams,
    a: f64,
    beta: f64,
    steps: usize,
) -> PyResult<HashMap<String, f64>> {
    let spec = ThermalSpec::new(beta).map_err(err)?;
    let report = compare_protocols(&params.inner, &[a], &spec, steps).map_err(err)?;
    let row = report.rows[0];
    Ok(HashMap::from([
        ("a".into(), row.a),
        ("beta".into(), row.beta),
        ("mean_ref".into(), row.mean_ref),
        ("mean_tr".into(), row.mean_tr),
        ("fluct_ref".into(), row.fluct_ref),
        ("fluct_tr".into(), row.fluct_tr),
        ("mean_gap".into(), row.mean_gap),
        ("fluct_gap".into(), row.fluct_gap),
    ]))
}

#[pymodule]
fn trsta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRescaleMap>()?;
    m.add_class::<PyAeParams>()?;
    m.add_class::<PyTrDrive>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(pi_pulse_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(propagator_gap, m)?)?;
    m.add_function(wrap_pyfunction!(work_comparison, m)?)?;
    m.add("DEFAULT_STEPS", DEFAULT_STEPS)?;
    Ok(())
}
