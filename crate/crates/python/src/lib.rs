//! Python bindings for `nirsig`.

use nirsig::binomial::{self, Sidedness};
use nirsig::evaluation::{estimate_priors, BaselineSpec, EvaluationSet, LabelAlphabet};
use nirsig::report::{MachineReport, ReportContext};
use nirsig::significance::{self as sig, TestMethod, TestSpec};
use nirsig::StatsError;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn to_py(err: StatsError) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn query(t: u64, m: u64, p: f64) -> PyResult<binomial::TailQuery> {
    binomial::TailQuery::new(t, m, p).map_err(to_py)
}

#[pyclass(name = "PValue", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPValue(binomial::PValue);

#[pymethods]
impl PyPValue {
    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.0.method.as_str()
    }

    #[getter]
    fn sidedness(&self) -> &'static str {
        self.0.sidedness.as_str()
    }

    #[getter]
    fn clamped(&self) -> bool {
        self.0.clamped
    }

    #[getter]
    fn out_of_range(&self) -> bool {
        self.0.out_of_range()
    }

    fn __float__(&self) -> f64 {
        self.0.value
    }

    fn __repr__(&self) -> String {
        format!(
            "PValue(value={:?}, method='{}', sidedness='{}')",
            self.0.value,
            self.0.method.as_str(),
            self.0.sidedness.as_str()
        )
    }
}

#[pyclass(name = "ZStatistic", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyZStatistic(binomial::ZStatistic);

#[pymethods]
impl PyZStatistic {
    #[getter]
    fn z(&self) -> f64 {
        self.0.z
    }

    #[getter]
    fn continuity_corrected(&self) -> bool {
        self.0.continuity_corrected
    }

    #[getter]
    fn mpq(&self) -> f64 {
        self.0.mpq
    }

    #[getter]
    fn gate_satisfied(&self) -> bool {
        self.0.gate_satisfied
    }

    /// Upper-tail p-value from the standard normal.
    fn pvalue(&self) -> PyResult<PyPValue> {
        binomial::normal_upper_pval(&self.0)
            .map(PyPValue)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("ZStatistic(z={:?}, mpq={:?})", self.0.z, self.0.mpq)
    }
}

#[pyclass(name = "TestOutcome", frozen, skip_from_py_object)]
struct PyTestOutcome {
    outcome: sig::TestOutcome,
    alphabet: Vec<String>,
}

#[pymethods]
impl PyTestOutcome {
    #[getter]
    fn m(&self) -> u64 {
        self.outcome.m
    }

    #[getter]
    fn t(&self) -> u64 {
        self.outcome.t
    }

    #[getter]
    fn accuracy(&self) -> f64 {
        self.outcome.accuracy
    }

    #[getter]
    fn p(&self) -> f64 {
        self.outcome.p
    }

    #[getter]
    fn baseline_kind(&self) -> &'static str {
        self.outcome.baseline_kind
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.outcome.alpha
    }

    #[getter]
    fn pval(&self) -> PyPValue {
        PyPValue(self.outcome.pval)
    }

    #[getter]
    fn z(&self) -> Option<PyZStatistic> {
        self.outcome.z.map(PyZStatistic)
    }

    #[getter]
    fn significant(&self) -> bool {
        self.outcome.significant
    }

    #[getter]
    fn majority_class(&self) -> Option<String> {
        self.outcome.majority_class.clone()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.alphabet.clone()
    }

    /// `(code, message)` pairs.
    #[getter]
    fn warnings(&self) -> Vec<(&'static str, String)> {
        self.outcome
            .warnings
            .iter()
            .map(|w| (w.code.as_str(), w.message.clone()))
            .collect()
    }

    /// Machine report as a JSON string.
    fn to_json(&self) -> PyResult<String> {
        let context = ReportContext {
            predictions: None,
            train_labels: None,
            alphabet: self.alphabet.clone(),
        };
        serde_json::to_string(&MachineReport::new(&self.outcome, &context))
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "TestOutcome(t={}, m={}, p={:?}, pval={:?}, significant={})",
            self.outcome.t,
            self.outcome.m,
            self.outcome.p,
            self.outcome.pval.value,
            if self.outcome.significant {
                "True"
            } else {
                "False"
            }
        )
    }
}

#[pyfunction]
fn binom_pmf_log(k: u64, m: u64, p: f64) -> PyResult<f64> {
    binomial::binom_pmf_log(k, m, p).map_err(to_py)
}

/// P(X >= t) for X ~ Binomial(m, p).
#[pyfunction]
fn upper_tail(t: u64, m: u64, p: f64) -> PyResult<PyPValue> {
    Ok(PyPValue(binomial::upper_tail_exact(&query(t, m, p)?)))
}

#[pyfunction]
fn upper_tail_beta(t: u64, m: u64, p: f64) -> PyResult<f64> {
    binomial::upper_tail_beta(&query(t, m, p)?).map_err(to_py)
}

#[pyfunction]
fn upper_tail_oracle(t: u64, m: u64, p: f64) -> PyResult<f64> {
    binomial::upper_tail_oracle(&query(t, m, p)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t, m, p, clamp = true))]
fn two_tailed(t: u64, m: u64, p: f64, clamp: bool) -> PyResult<PyPValue> {
    Ok(PyPValue(binomial::two_tailed(&query(t, m, p)?, clamp)))
}

#[pyfunction]
#[pyo3(signature = (t, m, p, continuity_correction = true))]
fn normal_z(t: u64, m: u64, p: f64, continuity_correction: bool) -> PyResult<PyZStatistic> {
    binomial::normal_z(&query(t, m, p)?, continuity_correction)
        .map(PyZStatistic)
        .map_err(to_py)
}

#[pyfunction]
fn normal_sf(z: f64) -> f64 {
    binomial::normal_sf(z)
}

/// Tests whether predictions beat a baseline accuracy.
///
/// The baseline is `p` when given, the uniform random rate when
/// `baseline="random"`, and otherwise the no-information rate, which needs
/// `train_labels`.
#[pyfunction]
#[pyo3(signature = (
    true_labels,
    pred_labels,
    *,
    train_labels = None,
    p = None,
    baseline = None,
    alpha = sig::DEFAULT_ALPHA,
    two_tailed = false,
    method = "exact",
    clamp = true,
    continuity_correction = true,
))]
#[allow(clippy::too_many_arguments)]
fn significance_test(
    true_labels: Vec<String>,
    pred_labels: Vec<String>,
    train_labels: Option<Vec<String>>,
    p: Option<f64>,
    baseline: Option<&str>,
    alpha: f64,
    two_tailed: bool,
    method: &str,
    clamp: bool,
    continuity_correction: bool,
) -> PyResult<PyTestOutcome> {
    if true_labels.len() != pred_labels.len() {
        return Err(PyValueError::new_err(format!(
            "true_labels has {} entries but pred_labels has {}",
            true_labels.len(),
            pred_labels.len()
        )));
    }
    let baseline = match (p, baseline) {
        (Some(p), None) => BaselineSpec::explicit(p).map_err(to_py)?,
        (None, Some("random")) => BaselineSpec::Random,
        (None, Some("nir")) | (None, None) => BaselineSpec::Nir,
        (Some(_), Some(_)) => {
            return Err(PyValueError::new_err("give either p or baseline, not both"))
        }
        (None, Some(other)) => {
            return Err(PyValueError::new_err(format!("unknown baseline '{other}'")))
        }
    };
    let method = match method {
        "exact" => TestMethod::Exact,
        "normal" | "normal-approximation" => TestMethod::NormalApproximation,
        "auto" => TestMethod::Auto,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };

    let mut alphabet = LabelAlphabet::new();
    let train_ids = train_labels.map(|labels| {
        labels
            .iter()
            .map(|l| alphabet.intern(l))
            .collect::<Vec<_>>()
    });
    let eval = EvaluationSet::from_labels(true_labels.iter().zip(&pred_labels), alphabet)
        .map_err(to_py)?;
    let priors = train_ids
        .map(|ids| estimate_priors(&ids, eval.alphabet()))
        .transpose()
        .map_err(to_py)?;

    let spec = TestSpec {
        baseline,
        alpha,
        sidedness: if two_tailed {
            Sidedness::TwoTailed
        } else {
            Sidedness::OneTailed
        },
        method,
        clamp_two_tailed: clamp,
        continuity_correction,
    };
    let outcome = sig::run_significance_test(&eval, &spec, priors.as_ref()).map_err(to_py)?;
    Ok(PyTestOutcome {
        outcome,
        alphabet: eval.alphabet().names().to_vec(),
    })
}

#[pymodule]
fn nirsig_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPValue>()?;
    m.add_class::<PyZStatistic>()?;
    m.add_class::<PyTestOutcome>()?;
    m.add_function(wrap_pyfunction!(binom_pmf_log, m)?)?;
    m.add_function(wrap_pyfunction!(upper_tail, m)?)?;
    m.add_function(wrap_pyfunction!(upper_tail_beta, m)?)?;
    m.add_function(wrap_pyfunction!(upper_tail_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(two_tailed, m)?)?;
    m.add_function(wrap_pyfunction!(normal_z, m)?)?;
    m.add_function(wrap_pyfunction!(normal_sf, m)?)?;
    m.add_function(wrap_pyfunction!(significance_test, m)?)?;
    m.add("DEFAULT_ALPHA", sig::DEFAULT_ALPHA)?;
    Ok(())
}
