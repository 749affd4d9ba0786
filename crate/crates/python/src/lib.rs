//! Python bindings: `import lsim`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lsim_core as core;
use lsim_core::config::ScenarioConfig;
use lsim_core::ensemble::{Distribution, EnsembleSpec, Sampling};
use lsim_core::propagation::{extract_delay, propagate_pulse, DelayMethod, Envelope, PropagationGrid};
use lsim_core::{Channel, Edge, PulseSequence, Stepping, Transition};

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        core::Error::Config { .. } | core::Error::UnknownScenario { .. } | core::Error::InvalidInput(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type Series = BTreeMap<String, Vec<f64>>;

fn series_dict(ts: &core::TimeSeries) -> Series {
    let mut out = BTreeMap::new();
    out.insert("t_us".to_string(), ts.t_us().to_vec());
    for (c, v) in ts.channels() {
        out.insert(c.name().to_string(), v.to_vec());
    }
    out
}

#[pyclass(name = "DensityMatrix", from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(core::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// Matrix from a 3×3 nested list of complex numbers.
    #[new]
    fn new(elements: [[Complex64; 3]; 3]) -> Self {
        Self(core::DensityMatrix::from_elements(elements))
    }

    #[staticmethod]
    fn ground() -> Self {
        Self(core::DensityMatrix::ground())
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self(core::DensityMatrix::maximally_mixed())
    }

    #[staticmethod]
    fn diagonal(p1: f64, p2: f64, p3: f64) -> Self {
        Self(core::DensityMatrix::diagonal([p1, p2, p3]))
    }

    /// `cos θ|1⟩ + e^{iφ} sin θ|2⟩`.
    #[staticmethod]
    #[pyo3(signature = (theta, phase=0.0))]
    fn spin_superposition(theta: f64, phase: f64) -> Self {
        Self(core::DensityMatrix::spin_superposition(theta, phase))
    }

    fn elements(&self) -> [[Complex64; 3]; 3] {
        *self.0.elements()
    }

    fn rho12(&self) -> Complex64 {
        self.0.rho12()
    }

    fn rho13(&self) -> Complex64 {
        self.0.rho13()
    }

    /// Population of level 1, 2 or 3.
    fn population(&self, level: usize) -> PyResult<f64> {
        if !(1..=3).contains(&level) {
            return Err(PyValueError::new_err("level must be 1, 2 or 3"));
        }
        Ok(self.0.population(level))
    }

    fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `(ok, [violation, ...])`.
    #[pyo3(signature = (tol=1e-9))]
    fn validate(&self, tol: f64) -> PyResult<(bool, Vec<String>)> {
        if !(tol > 0.0) {
            return Err(PyValueError::new_err("tol must be positive"));
        }
        let r = self.0.validate(tol);
        Ok((r.ok(), r.violations.iter().map(|v| v.to_string()).collect()))
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix({:?})", self.0)
    }
}

#[pyclass(name = "MediumParams", from_py_object, get_all, set_all)]
#[derive(Clone)]
struct PyMediumParams {
    gamma12_khz: f64,
    gamma13_khz: f64,
    gamma23_khz: f64,
    decay31_khz: f64,
    decay32_khz: f64,
    delta_s_khz: f64,
    length_mm: f64,
    coupling_const: f64,
    n_density_rel: f64,
}

impl From<&PyMediumParams> for core::MediumParams {
    fn from(p: &PyMediumParams) -> Self {
        core::MediumParams {
            gamma12_khz: p.gamma12_khz,
            gamma13_khz: p.gamma13_khz,
            gamma23_khz: p.gamma23_khz,
            decay31_khz: p.decay31_khz,
            decay32_khz: p.decay32_khz,
            delta_s_khz: p.delta_s_khz,
            length_mm: p.length_mm,
            coupling_const: p.coupling_const,
            n_density_rel: p.n_density_rel,
        }
    }
}

#[pymethods]
impl PyMediumParams {
    #[new]
    #[pyo3(signature = (gamma12_khz=0.0, gamma13_khz=1.0, gamma23_khz=1.0, decay31_khz=0.0,
                        decay32_khz=0.0, delta_s_khz=30.0, length_mm=3.0, coupling_const=1.0,
                        n_density_rel=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        gamma12_khz: f64,
        gamma13_khz: f64,
        gamma23_khz: f64,
        decay31_khz: f64,
        decay32_khz: f64,
        delta_s_khz: f64,
        length_mm: f64,
        coupling_const: f64,
        n_density_rel: f64,
    ) -> PyResult<Self> {
        let p = Self {
            gamma12_khz,
            gamma13_khz,
            gamma23_khz,
            decay31_khz,
            decay32_khz,
            delta_s_khz,
            length_mm,
            coupling_const,
            n_density_rel,
        };
        core::MediumParams::from(&p).validate().map_err(err)?;
        Ok(p)
    }

    fn __repr__(&self) -> String {
        format!("MediumParams({:?})", core::MediumParams::from(self))
    }
}

#[pyclass(name = "Pulse", from_py_object)]
#[derive(Clone)]
struct PyPulse(core::Pulse);

#[pymethods]
impl PyPulse {
    /// `transition` is "probe" or "coupling"; `edge_us = 0` gives a square pulse.
    #[new]
    #[pyo3(signature = (transition, rabi_khz, t_on_us, t_off_us, edge_us=0.0, detuning_khz=0.0))]
    fn new(
        transition: &str,
        rabi_khz: f64,
        t_on_us: f64,
        t_off_us: f64,
        edge_us: f64,
        detuning_khz: f64,
    ) -> PyResult<Self> {
        let transition = match transition {
            "probe" => Transition::Probe,
            "coupling" => Transition::Coupling,
            other => {
                return Err(PyValueError::new_err(format!(
                    "transition `{other}` is not probe or coupling"
                )))
            }
        };
        let edge = if edge_us > 0.0 {
            Edge::RaisedCosine { edge_us }
        } else {
            Edge::Square
        };
        core::Pulse::new(transition, rabi_khz, t_on_us, t_off_us, edge, detuning_khz)
            .map(Self)
            .map_err(err)
    }

    fn envelope(&self, t_us: f64) -> f64 {
        self.0.envelope(t_us)
    }
}

/// Evolves one member; returns `(series dict, final DensityMatrix)`.
#[pyfunction]
#[pyo3(signature = (rho0, pulses, total_us, params, inhomogeneous_khz=0.0, dt_us=0.01, output_stride=1, start_us=0.0))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    rho0: &PyDensityMatrix,
    pulses: Vec<PyPulse>,
    total_us: f64,
    params: &PyMediumParams,
    inhomogeneous_khz: f64,
    dt_us: f64,
    output_stride: usize,
    start_us: f64,
) -> PyResult<(Series, PyDensityMatrix)> {
    let seq = PulseSequence::with_start(pulses.into_iter().map(|p| p.0).collect(), start_us, total_us)
        .map_err(err)?;
    let ev = core::evolve(
        &rho0.0,
        &seq,
        &params.into(),
        inhomogeneous_khz,
        &Stepping::new(dt_us, output_stride),
    )
    .map_err(err)?;
    Ok((series_dict(&ev.series), PyDensityMatrix(ev.final_state)))
}

/// Ensemble-averaged free decay of a maximally coherent spin state; returns T2* in μs.
#[pyfunction]
#[pyo3(signature = (params, n_members=401, distribution="lorentzian", duration_us=60.0, dt_us=0.01))]
fn fid_t2_star(
    params: &PyMediumParams,
    n_members: usize,
    distribution: &str,
    duration_us: f64,
    dt_us: f64,
) -> PyResult<f64> {
    let p: core::MediumParams = params.into();
    let distribution = match distribution {
        "lorentzian" => Distribution::Lorentzian,
        "gaussian" => Distribution::Gaussian,
        other => return Err(PyValueError::new_err(format!("unknown distribution `{other}`"))),
    };
    let spec = EnsembleSpec {
        distribution,
        sampling: Sampling::Quantile,
        ..EnsembleSpec::lorentzian(p.delta_s_khz, n_members)
    };
    let seq = PulseSequence::free(0.0, duration_us).map_err(err)?;
    let ens = core::ensemble::ensemble_evolve(
        &core::ensemble::coherent_spin_state(),
        &seq,
        &p,
        &spec,
        &Stepping::new(dt_us, 10),
    )
    .map_err(err)?;
    core::ensemble::fid_decay_time(&ens.series, Channel::ReRho12, 0.0).map_err(err)
}

/// Weak-probe analytic steady-state ρ13.
#[pyfunction]
#[pyo3(signature = (params, probe_detuning_khz, probe_rabi_khz, coupling_rabi_khz, coupling_detuning_khz=0.0))]
fn steady_state_coherence(
    params: &PyMediumParams,
    probe_detuning_khz: f64,
    probe_rabi_khz: f64,
    coupling_rabi_khz: f64,
    coupling_detuning_khz: f64,
) -> PyResult<Complex64> {
    core::eit::steady_state_coherence(
        &params.into(),
        probe_detuning_khz,
        &core::eit::EitDrive {
            probe_rabi_khz,
            coupling_rabi_khz,
            coupling_detuning_khz,
        },
    )
    .map_err(err)
}

/// Group delay (μs) from the dispersion slope at line center.
#[pyfunction]
fn group_delay_us(params: &PyMediumParams, probe_rabi_khz: f64, coupling_rabi_khz: f64) -> PyResult<f64> {
    core::scenario::predicted_delay(&params.into(), probe_rabi_khz, coupling_rabi_khz).map_err(err)
}

/// Propagates a Gaussian probe; returns `(t_us, |input|, |output|, peak delay μs)`.
#[pyfunction]
#[pyo3(signature = (params, coupling_khz=100.0, probe_khz=10.0, fwhm_us=8.0, center_us=20.0, window_us=80.0, dt_us=0.01, n_slabs=256))]
#[allow(clippy::too_many_arguments)]
fn propagate_gaussian(
    params: &PyMediumParams,
    coupling_khz: f64,
    probe_khz: f64,
    fwhm_us: f64,
    center_us: f64,
    window_us: f64,
    dt_us: f64,
    n_slabs: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    let input = Envelope::gaussian(center_us, fwhm_us, probe_khz, window_us, dt_us).map_err(err)?;
    let r = propagate_pulse(&input, coupling_khz, &params.into(), &PropagationGrid { n_slabs })
        .map_err(err)?;
    let delay = extract_delay(&input.trace(), &r.output.trace(), DelayMethod::Peak).map_err(err)?;
    Ok((input.times(), input.magnitudes(), r.output.magnitudes(), delay))
}

/// Read-out of `rho_start` by a coupling-transition pulse.
///
/// Returns a dict with the series, the oscillation flag and the conversion fit.
#[pyfunction]
#[pyo3(signature = (rho_start, omega_a_khz, t_on_us, t_off_us, params, dt_us=0.01, output_stride=10))]
#[allow(clippy::too_many_arguments)]
fn readout_conversion(
    py: Python<'_>,
    rho_start: &PyDensityMatrix,
    omega_a_khz: f64,
    t_on_us: f64,
    t_off_us: f64,
    params: &PyMediumParams,
    dt_us: f64,
    output_stride: usize,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let pulse = core::Pulse::square(Transition::Coupling, omega_a_khz, t_on_us, t_off_us).map_err(err)?;
    let r = core::fwm::readout_conversion(
        &rho_start.0,
        &pulse,
        &params.into(),
        &Stepping::new(dt_us, output_stride),
    )
    .map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("series", series_dict(&r.series))?;
    d.set_item("oscillation_detected", r.oscillation_detected)?;
    d.set_item("slope_reversals", r.slope_reversals)?;
    if let Some(f) = r.conversion_fit {
        d.set_item("pearson_r", f.pearson_r)?;
        d.set_item("scale", f.scale)?;
        d.set_item("max_residual", f.max_residual)?;
    }
    Ok(d.unbind())
}

/// `k_D = k_C − k_P + k_A` and `| |k_D| − ω_D/c |`, vectors as `(kx, ky, kz)`.
#[pyfunction]
fn phase_match(
    k_c: (f64, f64, f64),
    k_p: (f64, f64, f64),
    k_a: (f64, f64, f64),
    omega_d_over_c: f64,
) -> PyResult<((f64, f64, f64), f64)> {
    let v = |k: (f64, f64, f64)| core::fwm::WaveVector::new(k.0, k.1, k.2).map_err(err);
    let (kd, m) = core::fwm::phase_match(v(k_c)?, v(k_p)?, v(k_a)?, omega_d_over_c);
    Ok(((kd.kx, kd.ky, kd.kz), m))
}

/// Runs a CLI scenario; returns its metrics.
#[pyfunction]
#[pyo3(signature = (name, out_dir, overrides=Vec::new()))]
fn run_scenario(name: &str, out_dir: PathBuf, overrides: Vec<String>) -> PyResult<BTreeMap<String, f64>> {
    let mut all = overrides;
    all.push(format!("out_dir={}", out_dir.display()));
    let cfg = ScenarioConfig::load(None, &all).map_err(err)?;
    let report = core::scenario::run_scenario(name, &cfg).map_err(err)?;
    Ok(report.metrics.into_iter().collect())
}

#[pymodule]
fn lsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyMediumParams>()?;
    m.add_class::<PyPulse>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(fid_t2_star, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_coherence, m)?)?;
    m.add_function(wrap_pyfunction!(group_delay_us, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(readout_conversion, m)?)?;
    m.add_function(wrap_pyfunction!(phase_match, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("SCENARIOS", core::scenario::SCENARIOS.to_vec())?;
    Ok(())
}
