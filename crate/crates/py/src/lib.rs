//! Python bindings. Money crosses the boundary as decimal strings (or
//! `p/q` for values without a finite decimal expansion); structured results
//! come back as plain dicts and lists.

use std::collections::BTreeMap;

use fnpw_core::axioms::{AxiomId, PoolCheck, TypePool};
use fnpw_core::experiments::{replay_fixture, run_ratio_scenarios, run_table_experiment, Fixture};
use fnpw_core::io::{InstanceFile, ScfFile};
use fnpw_core::manipulation::{find_fnpw_manipulation, SearchLimits};
use fnpw_core::mechanisms::MechanismId;
use fnpw_core::porf::run_rule;
use fnpw_core::valuation::GeneratorMode;
use fnpw_core::{Agent, Bundle, Money, Profile, ValuationSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn core_err(e: fnpw_core::Error) -> PyErr {
    if e.is_infeasible() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        value_err(e)
    }
}

fn money(text: &str) -> PyResult<Money> {
    Money::from_decimal(text).map_err(core_err)
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "Valuation", module = "fnpw", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyValuation {
    inner: ValuationSpec,
}

#[pymethods]
impl PyValuation {
    /// Values `target` (e.g. "AB") and every superset at `value`.
    #[staticmethod]
    fn single_minded(m: usize, target: &str, value: &str) -> PyResult<Self> {
        let target = Bundle::parse(m, target).map_err(core_err)?;
        Self::checked(ValuationSpec::single_minded(target, money(value)?))
    }

    #[staticmethod]
    fn additive(values: Vec<String>) -> PyResult<Self> {
        let values = values.iter().map(|v| money(v)).collect::<PyResult<Vec<_>>>()?;
        Self::checked(ValuationSpec::additive(values).map_err(core_err)?)
    }

    /// `table` maps bundle labels to values; missing bundles are worth 0.
    #[staticmethod]
    fn explicit(m: usize, table: BTreeMap<String, String>) -> PyResult<Self> {
        let pairs = table
            .iter()
            .map(|(b, v)| Ok((Bundle::parse(m, b).map_err(core_err)?, money(v)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Self::checked(ValuationSpec::explicit_from_pairs(m, pairs).map_err(core_err)?)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Self::checked(serde_json::from_str(text).map_err(value_err)?)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("valuations serialize")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    fn value(&self, bundle: &str) -> PyResult<String> {
        let b = Bundle::parse(self.inner.m(), bundle).map_err(core_err)?;
        Ok(self.inner.value_of(b).to_string())
    }

    fn __repr__(&self) -> String {
        format!("Valuation({:?})", self.inner)
    }
}

impl PyValuation {
    fn checked(inner: ValuationSpec) -> PyResult<Self> {
        match inner.validate().counterexample {
            Some(cx) => Err(value_err(format!("not a valid valuation: {cx:?}"))),
            None => Ok(PyValuation { inner }),
        }
    }
}

fn specs(values: &[PyValuation]) -> Vec<&ValuationSpec> {
    values.iter().map(|v| &v.inner).collect()
}

#[pyclass(name = "Mechanism", module = "fnpw", frozen)]
struct PyMechanism {
    id: MechanismId,
}

#[pymethods]
impl PyMechanism {
    /// One of vcg, set, mb, mmvip, lds3 or amd:<base>.
    #[new]
    fn new(id: &str) -> PyResult<Self> {
        Ok(PyMechanism {
            id: id.parse().map_err(core_err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.id.to_string()
    }

    #[getter]
    fn is_price_based(&self) -> bool {
        self.id.is_price_based()
    }

    /// Prices of every bundle against `others`, keyed by bundle label.
    fn price_row(&self, m: usize, others: Vec<PyValuation>) -> PyResult<BTreeMap<String, String>> {
        let pf = self.id.price_function().map_err(core_err)?;
        let row = pf.price_row(m, &specs(&others)).map_err(core_err)?;
        Ok(Bundle::all(m)
            .map(|b| (b.label(), row[b.mask() as usize].to_string()))
            .collect())
    }

    fn price(&self, m: usize, bundle: &str, others: Vec<PyValuation>) -> PyResult<String> {
        let b = Bundle::parse(m, bundle).map_err(core_err)?;
        let pf = self.id.price_function().map_err(core_err)?;
        Ok(pf.price(b, &specs(&others)).map_err(core_err)?.to_string())
    }

    /// Runs the mechanism; agents are named "1", "2", .. unless `ids` is
    /// given. Returns allocation, payments, revenue and welfare.
    #[pyo3(signature = (agents, ids=None))]
    fn run(&self, py: Python<'_>, agents: Vec<PyValuation>, ids: Option<Vec<String>>) -> PyResult<Py<PyAny>> {
        let m = agents.first().map(|v| v.inner.m()).ok_or_else(|| value_err("no agents"))?;
        let ids = ids.unwrap_or_else(|| (1..=agents.len()).map(|i| i.to_string()).collect());
        if ids.len() != agents.len() {
            return Err(value_err("ids and agents differ in length"));
        }
        let profile = Profile::new(
            m,
            ids.into_iter()
                .zip(agents)
                .map(|(id, v)| Agent { id, valuation: v.inner })
                .collect(),
        )
        .map_err(core_err)?;
        run_profile(py, &self.id, &profile)
    }

    fn __repr__(&self) -> String {
        format!("Mechanism({:?})", self.id.to_string())
    }
}

fn run_profile(py: Python<'_>, id: &MechanismId, profile: &Profile) -> PyResult<Py<PyAny>> {
    let rule = id.allocation_rule().map_err(core_err)?;
    let outcome = run_rule(rule.as_ref(), profile).map_err(core_err)?;
    let doc = serde_json::json!({
        "allocation": outcome.to_doc().allocation,
        "payments": outcome.to_doc().payments,
        "revenue": outcome.revenue(),
        "welfare": outcome.welfare(&profile.valuations()),
    });
    to_py(py, &doc)
}

/// Runs `mechanism` on an instance document (the CLI's JSON format).
#[pyfunction]
fn run_instance(py: Python<'_>, mechanism: &str, instance_json: &str) -> PyResult<Py<PyAny>> {
    let file: InstanceFile = serde_json::from_str(instance_json).map_err(value_err)?;
    let profile = file.to_profile().map_err(core_err)?;
    run_profile(py, &mechanism.parse().map_err(core_err)?, &profile)
}

/// Checks `axiom` over a type pool; `others` fixes the other agents for
/// the checks that take them.
#[pyfunction]
#[pyo3(signature = (axiom, pool, mechanism=None, others=None, max_n=3))]
fn check(
    py: Python<'_>,
    axiom: &str,
    pool: Vec<PyValuation>,
    mechanism: Option<&str>,
    others: Option<Vec<PyValuation>>,
    max_n: usize,
) -> PyResult<Py<PyAny>> {
    let axiom: AxiomId = axiom.parse().map_err(core_err)?;
    let m = pool.first().map(|v| v.inner.m()).ok_or_else(|| value_err("empty pool"))?;
    let pool = TypePool::new(m, pool.into_iter().map(|v| v.inner).collect()).map_err(core_err)?;
    let mut spec = PoolCheck::new(pool, max_n);
    spec.others = others.unwrap_or_default().into_iter().map(|v| v.inner).collect();
    let mechanism = mechanism.map(|s| s.parse::<MechanismId>()).transpose().map_err(core_err)?;
    let report = py.detach(|| spec.run(axiom, mechanism.as_ref())).map_err(core_err)?;
    to_py(py, &report)
}

/// Checks a tabulated social choice function (the CLI's scf document).
#[pyfunction]
fn check_scf(py: Python<'_>, axiom: &str, scf_json: &str) -> PyResult<Py<PyAny>> {
    let file: ScfFile = serde_json::from_str(scf_json).map_err(value_err)?;
    let f = file.scf().map_err(core_err)?;
    let report = match axiom.parse::<AxiomId>().map_err(core_err)? {
        AxiomId::ScfSp => {
            let utilities = file.utilities.as_ref().ok_or_else(|| value_err("scf-sp needs utilities"))?;
            fnpw_core::axioms::check_scf_strategyproof(&f, utilities)
        }
        AxiomId::ScfFnpw => fnpw_core::axioms::check_scf_fnpw(&f),
        other => return Err(value_err(format!("{other} is not a social choice check"))),
    }
    .map_err(core_err)?;
    to_py(py, &report)
}

/// The most profitable manipulation by `truth` against `others` using
/// identities from `pool`, or None.
#[pyfunction]
#[pyo3(signature = (mechanism, truth, others, pool, k=2, q=2, withdrawal=true))]
#[allow(clippy::too_many_arguments)]
fn find_manipulation(
    py: Python<'_>,
    mechanism: &str,
    truth: PyValuation,
    others: Vec<PyValuation>,
    pool: Vec<PyValuation>,
    k: usize,
    q: usize,
    withdrawal: bool,
) -> PyResult<Py<PyAny>> {
    let rule = mechanism.parse::<MechanismId>().and_then(|id| id.allocation_rule()).map_err(core_err)?;
    let pool = TypePool::new(truth.inner.m(), pool.into_iter().map(|v| v.inner).collect()).map_err(core_err)?;
    let limits = if withdrawal { SearchLimits::fnpw(k, q) } else { SearchLimits::fnp(k) };
    let plan = find_fnpw_manipulation(rule.as_ref(), &truth.inner, &specs(&others), &pool, &limits).map_err(core_err)?;
    to_py(py, &plan)
}

/// Mean revenue and efficiency over `n` random two-item instances.
#[pyfunction]
#[pyo3(signature = (scenario, n=1000, seed=0, mechanisms=None))]
fn table(py: Python<'_>, scenario: &str, n: u64, seed: u64, mechanisms: Option<Vec<String>>) -> PyResult<Py<PyAny>> {
    let scenario: GeneratorMode = scenario.parse().map_err(core_err)?;
    let ids = match mechanisms {
        Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<MechanismId>, _>>().map_err(core_err)?,
        None => fnpw_core::experiments::default_table_mechanisms(),
    };
    let (result, _) = py.detach(|| run_table_experiment(scenario, &ids, n, seed)).map_err(core_err)?;
    to_py(py, &result)
}

#[pyfunction]
fn ratio(py: Python<'_>, mechanism: &str, m: usize, eps: &str) -> PyResult<Py<PyAny>> {
    let id: MechanismId = mechanism.parse().map_err(core_err)?;
    let result = run_ratio_scenarios(&id, m, &money(eps)?).map_err(core_err)?;
    to_py(py, &result)
}

#[pyfunction]
fn fixture(py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
    let f: Fixture = name.parse().map_err(core_err)?;
    to_py(py, &replay_fixture(f).map_err(core_err)?)
}

#[pyfunction]
fn efficient_value(agents: Vec<PyValuation>) -> PyResult<String> {
    let m = agents.first().map(|v| v.inner.m()).unwrap_or(0);
    Ok(fnpw_core::efficient_value(Bundle::grand(m), &specs(&agents)).map_err(core_err)?.to_string())
}

#[pymodule]
fn fnpw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyValuation>()?;
    m.add_class::<PyMechanism>()?;
    m.add_function(wrap_pyfunction!(run_instance, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(check_scf, m)?)?;
    m.add_function(wrap_pyfunction!(find_manipulation, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(ratio, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(efficient_value, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
