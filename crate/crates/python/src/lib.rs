//! Python module `pks_lab`. Events are passed either as 33-character
//! patterns of `g`, `r` and `.` in table order, or as dicts mapping ray
//! labels to `"g"`/`"r"`. Structured results come back as plain dicts.

use num_complex::Complex64;
use pks_core::coevent::{lemma_fuzz as core_lemma_fuzz, phi_m_table as core_phi_m_table};
use pks_core::colouring::{pks_events as core_pks_events, Colour, HomogeneousEvent};
use pks_core::geometry::PeresSet as CorePeresSet;
use pks_core::ks;
use pks_core::path_measure::{self as pm, EventUnion, InitialState, Ordering};
use pks_core::zero_explorer::{self as ze, ScanConfig, SearchConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: pks_core::Error) -> PyErr {
    match e {
        pks_core::Error::BudgetExceeded(_) | pks_core::Error::SpaceTooLarge { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn to_event(ps: &CorePeresSet, obj: &Bound<'_, PyAny>) -> PyResult<HomogeneousEvent> {
    if let Ok(d) = obj.cast::<PyDict>() {
        let mut e = HomogeneousEvent::everything();
        for (k, v) in d.iter() {
            let ray = ps.find(&k.extract::<String>()?).map_err(err)?;
            let colour: Colour = v.extract::<String>()?.parse().map_err(err)?;
            e = e.fix(ray, colour);
        }
        return Ok(e);
    }
    obj.extract::<String>()?.parse().map_err(err)
}

/// A single event, or a list of pairwise disjoint events read as their union.
fn to_union(ps: &CorePeresSet, obj: &Bound<'_, PyAny>) -> PyResult<EventUnion> {
    if obj.is_instance_of::<pyo3::types::PyList>() {
        let members = obj.try_iter()?.map(|m| to_event(ps, &m?)).collect::<PyResult<Vec<_>>>()?;
        return EventUnion::new(members).map_err(err);
    }
    Ok(EventUnion::single(to_event(ps, obj)?))
}

/// The 33 Peres rays with their bases, orthogonal pairs and symmetries.
#[pyclass(name = "PeresSet", frozen)]
struct PeresSet {
    inner: CorePeresSet,
}

#[pymethods]
impl PeresSet {
    #[new]
    fn new() -> Self {
        PeresSet { inner: CorePeresSet::new() }
    }

    fn labels(&self) -> Vec<&'static str> {
        (0..self.inner.rays().len()).map(|i| self.inner.label(i)).collect()
    }

    /// Integer digits of a ray, where 2 stands for √2.
    fn ray(&self, label: &str) -> PyResult<(i8, i8, i8)> {
        let d = self.inner.ray(self.inner.find(label).map_err(err)?).digits();
        Ok((d[0], d[1], d[2]))
    }

    fn ray_type(&self, label: &str) -> PyResult<String> {
        Ok(self.inner.ray(self.inner.find(label).map_err(err)?).ray_type().to_string())
    }

    fn unit_vector(&self, label: &str) -> PyResult<[f64; 3]> {
        Ok(self.inner.ray(self.inner.find(label).map_err(err)?).unit_vector())
    }

    fn orthogonal(&self, a: &str, b: &str) -> PyResult<bool> {
        Ok(self.inner.orthogonal(self.inner.find(a).map_err(err)?, self.inner.find(b).map_err(err)?))
    }

    fn bases(&self) -> Vec<Vec<&'static str>> {
        self.inner.bases().iter().map(|b| b.rays.iter().map(|&r| self.inner.label(r)).collect()).collect()
    }

    /// Bases B1..B11 of the hand proof, in order.
    fn proof_bases(&self) -> Vec<Vec<&'static str>> {
        self.inner.proof_bases().iter().map(|b| b.rays.iter().map(|&r| self.inner.label(r)).collect()).collect()
    }

    /// Orthogonal pairs as `(a, b, inside_some_basis)`.
    fn pairs(&self) -> Vec<(&'static str, &'static str, bool)> {
        self.inner.pairs().iter().map(|p| (self.inner.label(p.rays[0]), self.inner.label(p.rays[1]), p.in_basis)).collect()
    }

    fn symmetries(&self) -> Vec<[[i8; 3]; 3]> {
        self.inner.group().iter().map(|g| g.matrix).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.rays().len()
    }

    fn __repr__(&self) -> String {
        format!("PeresSet({} rays, {} bases)", self.inner.rays().len(), self.inner.bases().len())
    }
}

/// Ordering, initial state and detectors defining a path quantum measure.
#[pyclass(name = "MeasureContext", frozen)]
struct MeasureContext {
    ps: CorePeresSet,
    inner: pm::MeasureContext,
}

#[pymethods]
impl MeasureContext {
    /// `ordering` is a list of ray labels (table order when omitted);
    /// `state` is JSON as accepted by the CLI (`|0,z⟩` when omitted).
    #[new]
    #[pyo3(signature = (ordering=None, state=None, detectors=Vec::new()))]
    fn new(ordering: Option<Vec<String>>, state: Option<&str>, detectors: Vec<String>) -> PyResult<Self> {
        let ps = CorePeresSet::new();
        let ord = match ordering {
            Some(labels) => {
                let chain = labels.iter().map(|l| ps.find(l)).collect::<pks_core::Result<Vec<_>>>().map_err(err)?;
                if chain.len() == 33 { Ordering::new(chain) } else { Ordering::truncated(chain) }.map_err(err)?
            }
            None => Ordering::table_order(),
        };
        let st = match state {
            Some(text) => InitialState::from_json(text).map_err(err)?,
            None => InitialState::default(),
        };
        let mut inner = pm::MeasureContext::new(&ps, ord, st);
        for d in &detectors {
            inner = inner.insert_detector(ps.find(d).map_err(err)?).map_err(err)?;
        }
        Ok(MeasureContext { ps, inner })
    }

    /// Ordering whose last ray is `label`, the rest in table order.
    #[staticmethod]
    #[pyo3(signature = (label, state=None))]
    fn with_last(label: &str, state: Option<&str>) -> PyResult<Self> {
        let ps = CorePeresSet::new();
        let ord = Ordering::with_last(ps.find(label).map_err(err)?).map_err(err)?;
        let labels = ord.labels().iter().map(|s| s.to_string()).collect();
        MeasureContext::new(Some(labels), state, Vec::new())
    }

    fn ordering(&self) -> Vec<&'static str> {
        self.inner.ordering().labels()
    }

    fn detectors(&self) -> Vec<&'static str> {
        self.inner.detectors().iter().map(|&r| self.ps.label(r)).collect()
    }

    fn state_json(&self) -> String {
        self.inner.state().to_json()
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn with_detector(&self, label: &str) -> PyResult<Self> {
        let inner = self.inner.insert_detector(self.ps.find(label).map_err(err)?).map_err(err)?;
        Ok(MeasureContext { ps: self.ps.clone(), inner })
    }

    fn decoherence(&self, a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Complex64> {
        self.inner.decoherence(&to_union(&self.ps, a)?, &to_union(&self.ps, b)?).map_err(err)
    }

    fn measure(&self, a: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner.measure(&to_union(&self.ps, a)?).map_err(err)
    }

    fn event_norm(&self, a: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner.event_norm(&to_event(&self.ps, a)?).map_err(err)
    }

    #[pyo3(signature = (seed=0, pairs=500, triples=1000))]
    fn check_axioms<'py>(&self, py: Python<'py>, seed: u64, pairs: usize, triples: usize) -> PyResult<Bound<'py, PyAny>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        to_py(py, &pm::check_axioms(&self.inner, &mut rng, pairs, triples).map_err(err)?)
    }

    #[pyo3(signature = (threshold=pm::DEFAULT_THRESHOLD))]
    fn verify_pks_zero<'py>(&self, py: Python<'py>, threshold: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &pm::verify_pks_zero(&self.inner, &self.ps, threshold).map_err(err)?)
    }

    #[pyo3(signature = (max_fixed=3, threshold=pm::DEFAULT_THRESHOLD, node_budget=ze::DEFAULT_NODE_BUDGET))]
    fn zero_scan<'py>(&self, py: Python<'py>, max_fixed: usize, threshold: f64, node_budget: u64) -> PyResult<Bound<'py, PyAny>> {
        let config = ScanConfig { max_fixed, threshold, node_budget };
        to_py(py, &ze::scan_zero_events(&self.inner, &self.ps, &config).map_err(err)?)
    }

    /// Zero events, coverage verdict for the φ_M support and whether the
    /// witness re-verifies.
    #[pyo3(signature = (max_fixed=3, threshold=pm::DEFAULT_THRESHOLD))]
    fn coverage<'py>(&self, py: Python<'py>, max_fixed: usize, threshold: f64) -> PyResult<Bound<'py, PyAny>> {
        let (zeros, hits, verdict, verified) = ze::evaluate_candidate(&self.inner, &self.ps, max_fixed, threshold).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("zero_events", zeros)?;
        d.set_item("support_hits", hits)?;
        d.set_item("verdict", to_py(py, &verdict)?)?;
        d.set_item("witness_verified", verified)?;
        Ok(d.into_any())
    }

    #[pyo3(signature = (threshold=pm::DEFAULT_THRESHOLD))]
    fn last_ray_021_construction<'py>(&self, py: Python<'py>, threshold: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &ze::last_ray_021_construction(&self.inner, &self.ps, threshold).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("MeasureContext({})", &self.inner.fingerprint()[..16])
    }
}

/// Non-colourability certificate for the full ray set.
#[pyfunction]
fn verify_ks_theorem<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let cert = ks::verify_ks_theorem(&CorePeresSet::new());
    let d = PyDict::new(py);
    d.set_item("unsat", cert.is_unsat())?;
    d.set_item("nodes", cert.nodes)?;
    d.set_item("closed_branches", cert.closed_branches)?;
    d.set_item("solutions", cert.solutions.len())?;
    Ok(d.into_any())
}

#[pyfunction]
fn seed_colouring_count() -> usize {
    ks::seed_colourings(&CorePeresSet::new()).len()
}

/// Forced greens and the contradiction reached from the fiducial seed.
#[pyfunction]
fn walkthrough<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let ps = CorePeresSet::new();
    let w = ks::peres_walkthrough(&ps, ks::fiducial_seed(&ps)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("forced_green", w.trace.steps.iter().map(|s| ps.label(s.forced_green)).collect::<Vec<_>>())?;
    d.set_item("bases", w.trace.steps.iter().map(|s| s.name.clone()).collect::<Vec<_>>())?;
    d.set_item("contradiction", w.trace.contradiction_basis().and_then(|b| ps.proof_name(&b)))?;
    Ok(d.into_any())
}

#[pyfunction]
fn gamma_p() -> String {
    ks::gamma_p(&CorePeresSet::new()).to_string()
}

#[pyfunction]
fn gamma_p_prime() -> String {
    ks::gamma_p_prime(&CorePeresSet::new()).to_string()
}

#[pyfunction]
fn phi_m_table<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core_phi_m_table(&CorePeresSet::new()))
}

/// The 88 PKS events (16 all-red bases, 72 green pairs) as patterns.
#[pyfunction]
fn pks_events() -> Vec<String> {
    core_pks_events(&CorePeresSet::new()).iter().map(|e| e.to_event().to_string()).collect()
}

#[pyfunction]
#[pyo3(signature = (seed=0, trials=100, max_n=10))]
fn lemma_fuzz<'py>(py: Python<'py>, seed: u64, trials: usize, max_n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &core_lemma_fuzz(seed, trials, max_n).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (budget=100, strategy="mixed", seed=0, max_fixed=3, threshold=pm::DEFAULT_THRESHOLD))]
fn ordering_search<'py>(py: Python<'py>, budget: usize, strategy: &str, seed: u64, max_fixed: usize, threshold: f64) -> PyResult<Bound<'py, PyAny>> {
    let config = SearchConfig { budget, strategy: strategy.parse().map_err(err)?, seed, max_fixed, threshold };
    to_py(py, &ze::ordering_search(&CorePeresSet::new(), &config).map_err(err)?)
}

#[pymodule]
fn pks_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PeresSet>()?;
    m.add_class::<MeasureContext>()?;
    m.add_function(wrap_pyfunction!(verify_ks_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(seed_colouring_count, m)?)?;
    m.add_function(wrap_pyfunction!(walkthrough, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_p, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_p_prime, m)?)?;
    m.add_function(wrap_pyfunction!(phi_m_table, m)?)?;
    m.add_function(wrap_pyfunction!(pks_events, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_fuzz, m)?)?;
    m.add_function(wrap_pyfunction!(ordering_search, m)?)?;
    m.add("DEFAULT_THRESHOLD", pm::DEFAULT_THRESHOLD)?;
    Ok(())
}
