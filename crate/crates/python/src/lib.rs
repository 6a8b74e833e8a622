use std::collections::BTreeMap;

use distcomp::applications::{self, DistortionSpec};
use distcomp::cli::{self, ExperimentConfig};
use distcomp::fidelity::{self, DerandomizeOptions, FidelityMode};
use distcomp::simulate::{self, SimParams};
use distcomp::types::{typical_probability_bounds, TypicalSpec};
use distcomp::zero_error::{self as ze, AlternateOptions, ZeroErrorInstance};
use distcomp::{prob, seed, Caps, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait PyRes<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> PyRes<T> for distcomp::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Distribution {
    inner: prob::Distribution,
}

#[pymethods]
impl Distribution {
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: prob::Distribution::new(probs).py()? })
    }

    #[staticmethod]
    fn uniform(size: usize) -> PyResult<Self> {
        Ok(Self { inner: prob::Distribution::uniform(size).py()? })
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    fn entropy(&self) -> f64 {
        prob::entropy(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Distribution({:?})", self.inner.probs())
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Channel {
    inner: prob::Channel,
}

#[pymethods]
impl Channel {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: prob::Channel::new(rows).py()? })
    }

    #[staticmethod]
    fn bsc(flip: f64) -> PyResult<Self> {
        Ok(Self { inner: prob::Channel::bsc(flip).py()? })
    }

    #[staticmethod]
    fn identity(size: usize) -> PyResult<Self> {
        Ok(Self { inner: prob::Channel::identity(size).py()? })
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    #[getter]
    fn input_size(&self) -> usize {
        self.inner.input_size()
    }

    #[getter]
    fn output_size(&self) -> usize {
        self.inner.output_size()
    }

    fn __repr__(&self) -> String {
        format!("Channel({:?})", self.inner.rows())
    }
}

#[pyfunction]
fn entropy(p: &Distribution) -> f64 {
    prob::entropy(&p.inner)
}

#[pyfunction]
fn mutual_information(p: &Distribution, w: &Channel) -> PyResult<f64> {
    prob::mutual_information(&p.inner, &w.inner).py()
}

#[pyfunction]
fn conditional_entropy(p: &Distribution, w: &Channel) -> PyResult<f64> {
    prob::conditional_entropy(&p.inner, &w.inner).py()
}

#[pyfunction]
fn push_forward(p: &Distribution, w: &Channel) -> PyResult<Distribution> {
    Ok(Distribution { inner: prob::push_forward(&p.inner, &w.inner).py()? })
}

#[pyfunction]
fn tv_distance(p: &Distribution, q: &Distribution) -> PyResult<f64> {
    prob::tv_distance(&p.inner, &q.inner).py()
}

/// Output law and reverse channel.
#[pyfunction]
fn transpose_channel(p: &Distribution, w: &Channel) -> PyResult<(Distribution, Channel)> {
    let t = prob::transpose_channel(&p.inner, &w.inner).py()?;
    Ok((Distribution { inner: t.q }, Channel { inner: t.v }))
}

/// `(chebyshev, chernoff, exact)`
#[pyfunction]
fn typical_bounds(p: &Distribution, n: usize, delta: f64) -> PyResult<(f64, f64, f64)> {
    let b = typical_probability_bounds(&TypicalSpec::new(p.inner.clone(), n, delta).py()?);
    Ok((b.chebyshev, b.chernoff, b.exact))
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen)]
struct SimCode {
    inner: simulate::SimCode,
    caps: Caps,
}

#[pymethods]
impl SimCode {
    #[new]
    #[pyo3(signature = (source, channel, n=4, delta=2.0, epsilon=0.1, seed=0, max_retries=20))]
    fn new(
        py: Python<'_>,
        source: &Distribution,
        channel: &Channel,
        n: usize,
        delta: f64,
        epsilon: f64,
        seed: u64,
        max_retries: u32,
    ) -> PyResult<Self> {
        let params = SimParams { n, delta, epsilon, seed, max_retries };
        let caps = Caps::default();
        let (s, w) = (source.inner.clone(), channel.inner.clone());
        let inner = py.detach(|| simulate::build_sim_code(&s, &w, &params, &caps)).py()?;
        Ok(Self { inner, caps })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_types(&self) -> usize {
        self.inner.num_types()
    }

    fn accounting<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.accounting().py()?)
    }

    fn strong_fidelity<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = py.detach(|| self.inner.strong_fidelity(&self.caps)).py()?;
        to_dict(py, &r)
    }

    /// Exact when `samples` is None, otherwise Monte Carlo over inputs.
    #[pyo3(signature = (samples=None, seed=0))]
    fn fidelity<'py>(&self, py: Python<'py>, samples: Option<usize>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let mode = match samples {
            Some(samples) => FidelityMode::MonteCarlo { samples, seed },
            None => FidelityMode::Exact,
        };
        let code = &self.inner;
        let r = py
            .detach(|| fidelity::measure_fidelity(&code.source, &code.channel, code, mode, &self.caps))
            .py()?;
        to_dict(py, &r)
    }

    /// One protocol run; the shared index and private coins come from `(seed, index)`.
    fn run<'py>(&self, py: Python<'py>, x_word: Vec<usize>, seed: u64, index: u64) -> PyResult<Bound<'py, PyAny>> {
        let mut rng = seed::rng(seed, "python/run", index);
        let shared = self.inner.sample_shared_index(&mut rng);
        let t = self.inner.encode(&x_word, &shared, &mut rng).py()?;
        to_dict(py, &t)
    }

    /// Fixed code drawn from the shared-index law; returns its summary.
    #[pyo3(signature = (epsilon=0.1, seed=0, max_retries=10))]
    fn derandomize<'py>(&self, py: Python<'py>, epsilon: f64, seed: u64, max_retries: u32) -> PyResult<Bound<'py, PyAny>> {
        let opts = DerandomizeOptions { epsilon, seed, max_retries, ..Default::default() };
        let d = py.detach(|| fidelity::derandomize(&self.inner, &opts, &self.caps)).py()?;
        let out = PyDict::new(py);
        out.set_item("q", d.q)?;
        out.set_item("index_bits", d.index_bits())?;
        out.set_item("index_overhead", d.index_overhead())?;
        out.set_item("exact", d.verification == fidelity::Verification::Exact)?;
        out.set_item("letterwise_max_err", d.letterwise_max_err)?;
        out.set_item("retries", d.retries)?;
        Ok(out.into_any())
    }
}

/// Minimal-entropy factorization `W = D E` by alternating minimization.
#[pyfunction]
#[pyo3(signature = (source, channel, restarts=20, max_iters=100, seed=0, c_max=None))]
fn zero_error<'py>(
    py: Python<'py>,
    source: &Distribution,
    channel: &Channel,
    restarts: usize,
    max_iters: usize,
    seed: u64,
    c_max: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let inst = ZeroErrorInstance::new(source.inner.clone(), channel.inner.clone(), c_max).py()?;
    let opts = AlternateOptions { seed, restarts, max_iters, ..Default::default() };
    let r = py.detach(|| ze::alternate(&inst, &opts, &Caps::default())).py()?;
    let s = ze::sandwich(&inst, &r.factorization).py()?;
    let out = PyDict::new(py);
    out.set_item("objective", r.factorization.objective)?;
    out.set_item("e", r.factorization.e.rows().to_vec())?;
    out.set_item("d", r.factorization.d.rows().to_vec())?;
    out.set_item("mu", r.factorization.mu.probs().to_vec())?;
    out.set_item("mutual_information", s.mutual_information)?;
    out.set_item("source_entropy", s.source_entropy)?;
    out.set_item("restart_objectives", r.restart_objectives)?;
    Ok(out.into_any())
}

fn distortion_spec(x_size: usize, distortion: Option<Vec<Vec<f64>>>, target: f64) -> PyResult<DistortionSpec> {
    match distortion {
        Some(d) => DistortionSpec::new(d, target).py(),
        None => DistortionSpec::hamming(x_size, target).py(),
    }
}

/// `(rate, distortion, test channel rows)`; Hamming distortion by default.
#[pyfunction]
#[pyo3(signature = (source, target, distortion=None))]
fn rd_function(source: &Distribution, target: f64, distortion: Option<Vec<Vec<f64>>>) -> PyResult<(f64, f64, Vec<Vec<f64>>)> {
    let spec = distortion_spec(source.inner.len(), distortion, target)?;
    let y_size = spec.d.first().map_or(0, Vec::len);
    let p = applications::rd_function(&source.inner, &spec, y_size).py()?;
    Ok((p.rate, p.distortion, p.channel.rows().to_vec()))
}

/// Block code built by simulating the optimal test channel.
#[pyfunction]
#[pyo3(signature = (source, target, n=6, distortion=None, seed=0))]
fn rd_code<'py>(
    py: Python<'py>,
    source: &Distribution,
    target: f64,
    n: usize,
    distortion: Option<Vec<Vec<f64>>>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = distortion_spec(source.inner.len(), distortion, target)?;
    let y_size = spec.d.first().map_or(0, Vec::len);
    let params = SimParams { n, seed, ..Default::default() };
    let code = py
        .detach(|| applications::rd_code_via_simulation(&source.inner, &spec, y_size, &params, &Caps::default()))
        .py()?;
    let out = to_dict(py, &code)?;
    // the encoder table is one entry per input word; leave it out
    out.del_item("encoder")?;
    Ok(out)
}

#[pyclass(frozen)]
struct DilutionPlan {
    inner: applications::DilutionPlan,
}

#[pymethods]
impl DilutionPlan {
    #[new]
    fn new(target: &Distribution, epsilon: f64) -> PyResult<Self> {
        Ok(Self { inner: applications::build_dilution(&target.inner, epsilon).py()? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn total_uniform_size(&self) -> u64 {
        self.inner.total_uniform_size
    }

    fn realized(&self) -> Distribution {
        Distribution { inner: self.inner.realized() }
    }

    fn realized_error(&self) -> f64 {
        self.inner.realized_error()
    }

    fn error_bound(&self) -> f64 {
        self.inner.error_bound()
    }

    fn letter_for(&self, u: u64) -> PyResult<usize> {
        self.inner.letter_for(u).py()
    }

    fn sample(&self, count: usize, seed: u64) -> PyResult<Vec<usize>> {
        let mut rng = seed::rng(seed, "python/dilution", 0);
        applications::sample_dilution(&self.inner, &mut rng, count).py()
    }
}

/// Runs a CLI experiment from its JSON config; returns `(summary, measurements)`.
#[pyfunction]
fn run_config(py: Python<'_>, config_json: &str) -> PyResult<(String, BTreeMap<String, f64>)> {
    let config: ExperimentConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let record = py.detach(|| cli::run(&config)).py()?;
    if let Some(dir) = &config.out {
        cli::write_outputs(&record, dir).py()?;
    }
    Ok((cli::summary(&record), record.measurements.clone()))
}

#[pymodule]
fn distcomp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Distribution>()?;
    m.add_class::<Channel>()?;
    m.add_class::<SimCode>()?;
    m.add_class::<DilutionPlan>()?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(push_forward, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(transpose_channel, m)?)?;
    m.add_function(wrap_pyfunction!(typical_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(zero_error, m)?)?;
    m.add_function(wrap_pyfunction!(rd_function, m)?)?;
    m.add_function(wrap_pyfunction!(rd_code, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
