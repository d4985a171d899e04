//! The test procedure: pick the baseline `p`, compute the tail p-value for
//! the observed successes, and compare it against `α`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::binomial::{
    double_tail, normal_upper_pval, normal_z, upper_tail_exact, PValue, Sidedness, TailQuery,
    ZStatistic,
};
use crate::error::{Result, StatsError};
use crate::evaluation::{
    acc_rand, accuracy, count_successes, most_frequent_class, nir, BaselineSpec, ClassPriors,
    EvaluationSet, MajorityClass,
};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Which route produces the reported p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    /// Exact binomial tail.
    #[default]
    Exact,
    /// Normal approximation of the binomial.
    NormalApproximation,
    /// Exact tail, with the z statistic and its gate reported alongside.
    Auto,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestMethod::Exact => "exact",
            TestMethod::NormalApproximation => "normal-approximation",
            TestMethod::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub baseline: BaselineSpec,
    pub alpha: f64,
    pub sidedness: Sidedness,
    pub method: TestMethod,
    pub clamp_two_tailed: bool,
    pub continuity_correction: bool,
}

impl Default for TestSpec {
    fn default() -> Self {
        Self {
            baseline: BaselineSpec::Nir,
            alpha: DEFAULT_ALPHA,
            sidedness: Sidedness::OneTailed,
            method: TestMethod::Exact,
            clamp_two_tailed: true,
            continuity_correction: true,
        }
    }
}

impl TestSpec {
    pub fn with_baseline(baseline: BaselineSpec) -> Self {
        Self {
            baseline,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(StatsError::InvalidAlpha(self.alpha));
        }
        if let BaselineSpec::Explicit(p) = self.baseline {
            BaselineSpec::explicit(p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningCode {
    DegenerateBaseline,
    DegeneratePriors,
    AccuracyBelowBaseline,
    MpqGateFailed,
    MajorityTie,
    TwoTailedClamped,
    TwoTailedOutOfRange,
}

impl WarningCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WarningCode::DegenerateBaseline => "degenerate-baseline",
            WarningCode::DegeneratePriors => "degenerate-priors",
            WarningCode::AccuracyBelowBaseline => "accuracy-below-baseline",
            WarningCode::MpqGateFailed => "mpq-gate-failed",
            WarningCode::MajorityTie => "majority-tie",
            WarningCode::TwoTailedClamped => "two-tailed-clamped",
            WarningCode::TwoTailedOutOfRange => "two-tailed-out-of-range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    pub message: String,
}

impl Warning {
    fn new(code: WarningCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code.as_str(), self.message)
    }
}

/// The baseline probability together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedBaseline {
    pub p: f64,
    pub kind: &'static str,
    /// Training-majority class, for the NIR baseline.
    pub majority: Option<MajorityClass>,
    pub warnings: Vec<Warning>,
}

/// Resolves the expected success probability `p` for `spec`.
pub fn resolve_baseline(
    spec: &BaselineSpec,
    priors: Option<&ClassPriors>,
    eval: &EvaluationSet,
) -> Result<ResolvedBaseline> {
    let mut warnings = Vec::new();
    let (p, majority) = match *spec {
        BaselineSpec::Random => (acc_rand(eval.alphabet().len())?, None),
        BaselineSpec::Explicit(p) => (BaselineSpec::explicit(p).map(|_| p)?, None),
        BaselineSpec::Nir => {
            let priors = priors.ok_or(StatsError::MissingPriors)?;
            let majority = most_frequent_class(priors);
            let name = |id| eval.alphabet().name(id).unwrap_or("?").to_owned();
            if majority.is_tie() {
                let others: Vec<String> = majority.tied_with.iter().map(|&c| name(c)).collect();
                warnings.push(Warning::new(
                    WarningCode::MajorityTie,
                    format!(
                        "training classes tie at {} objects; chose '{}' over {}",
                        majority.count,
                        name(majority.class),
                        others.join(", ")
                    ),
                ));
            }
            if priors.observed_classes() < 2 {
                warnings.push(Warning::new(
                    WarningCode::DegeneratePriors,
                    format!(
                        "training labels contain a single class ('{}')",
                        name(majority.class)
                    ),
                ));
            }
            (nir(eval, majority.class)?, Some(majority))
        }
    };
    Ok(ResolvedBaseline {
        p,
        kind: spec.kind(),
        majority,
        warnings,
    })
}

/// Everything the test computed, in one bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub m: u64,
    pub t: u64,
    pub accuracy: f64,
    pub classes: usize,
    pub baseline_kind: &'static str,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub requested_method: TestMethod,
    pub pval: PValue,
    pub z: Option<ZStatistic>,
    pub significant: bool,
    /// Training-majority class label, for the NIR baseline.
    pub majority_class: Option<String>,
    /// Training prior of the majority class. Informational only: the NIR
    /// itself is counted on the test set.
    pub majority_training_prior: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl TestOutcome {
    pub fn has_warning(&self, code: WarningCode) -> bool {
        self.warnings.iter().any(|w| w.code == code)
    }
}

/// `pval ≤ α`.
pub fn decide(pval: &PValue, alpha: f64) -> bool {
    pval.value <= alpha
}

/// Runs the full test on `eval` under `spec`.
///
/// `priors` is only consulted for the NIR baseline.
pub fn run_significance_test(
    eval: &EvaluationSet,
    spec: &TestSpec,
    priors: Option<&ClassPriors>,
) -> Result<TestOutcome> {
    spec.validate()?;
    let m = eval.len() as u64;
    let t = count_successes(eval);
    let acc = accuracy(eval);

    let baseline = resolve_baseline(&spec.baseline, priors, eval)?;
    let p = baseline.p;
    let query = TailQuery::new(t, m, p)?;
    let mut warnings = baseline.warnings;

    if p == 0.0 || p == 1.0 {
        warnings.push(Warning::new(
            WarningCode::DegenerateBaseline,
            format!("baseline p = {p} makes the binomial test vacuous"),
        ));
    }
    if acc < p {
        warnings.push(Warning::new(
            WarningCode::AccuracyBelowBaseline,
            format!("accuracy {acc} is below the baseline {p}; the upper-tail p-value is not evidence of improvement"),
        ));
    }

    let degenerate = p == 0.0 || p == 1.0;
    let (one_tailed, z) = match spec.method {
        TestMethod::Exact => (upper_tail_exact(&query), None),
        TestMethod::Auto => {
            let z = if degenerate {
                None
            } else {
                Some(normal_z(&query, spec.continuity_correction)?)
            };
            (upper_tail_exact(&query), z)
        }
        TestMethod::NormalApproximation => {
            let z = normal_z(&query, spec.continuity_correction)?;
            (normal_upper_pval(&z)?, Some(z))
        }
    };
    if let Some(z) = z.filter(|z| !z.gate_satisfied) {
        warnings.push(Warning::new(
            WarningCode::MpqGateFailed,
            format!(
                "m*p*q = {} is below 5; the normal approximation is unreliable",
                z.mpq
            ),
        ));
    }

    let pval = match spec.sidedness {
        Sidedness::OneTailed => one_tailed,
        Sidedness::TwoTailed => double_tail(one_tailed, spec.clamp_two_tailed),
    };
    if pval.clamped {
        warnings.push(Warning::new(
            WarningCode::TwoTailedClamped,
            format!(
                "doubled tail {} exceeded 1 and was capped",
                2.0 * one_tailed.value
            ),
        ));
    }
    if pval.out_of_range() {
        warnings.push(Warning::new(
            WarningCode::TwoTailedOutOfRange,
            format!(
                "doubled tail {} exceeds 1 and is not a valid probability",
                pval.value
            ),
        ));
    }

    let majority_class = baseline
        .majority
        .as_ref()
        .and_then(|mc| eval.alphabet().name(mc.class))
        .map(str::to_owned);
    Ok(TestOutcome {
        m,
        t,
        accuracy: acc,
        classes: eval.alphabet().len(),
        baseline_kind: baseline.kind,
        p,
        q: query.q(),
        alpha: spec.alpha,
        requested_method: spec.method,
        significant: decide(&pval, spec.alpha),
        pval,
        z,
        majority_class,
        majority_training_prior: baseline.majority.map(|mc| mc.prior),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binomial::Method;
    use crate::evaluation::{estimate_priors, LabelAlphabet};

    fn synthetic(m: usize, t: usize) -> EvaluationSet {
        let pairs = (0..m).map(|i| {
            let truth = if i % 2 == 0 { "a" } else { "b" };
            let pred = if i < t {
                truth
            } else if truth == "a" {
                "b"
            } else {
                "a"
            };
            (truth, pred)
        });
        EvaluationSet::from_labels(pairs, LabelAlphabet::new()).unwrap()
    }

    fn explicit(p: f64) -> TestSpec {
        TestSpec::with_baseline(BaselineSpec::Explicit(p))
    }

    #[test]
    fn spec_validation() {
        for alpha in [0.0, 1.0, -0.1, f64::NAN] {
            let spec = TestSpec {
                alpha,
                ..TestSpec::default()
            };
            assert!(spec.validate().is_err(), "alpha = {alpha}");
        }
        assert!(explicit(1.2).validate().is_err());
        assert!(explicit(0.2).validate().is_ok());
    }

    #[test]
    fn resolve_examples() {
        let mut alphabet = LabelAlphabet::new();
        for c in ["a", "b", "c", "d"] {
            alphabet.intern(c);
        }
        let eval = EvaluationSet::from_labels([("a", "a")], alphabet).unwrap();
        assert_eq!(
            resolve_baseline(&BaselineSpec::Random, None, &eval)
                .unwrap()
                .p,
            0.25
        );
        assert_eq!(
            resolve_baseline(&BaselineSpec::Explicit(0.7), None, &eval)
                .unwrap()
                .p,
            0.7
        );
        assert_eq!(
            resolve_baseline(&BaselineSpec::Nir, None, &eval),
            Err(StatsError::MissingPriors)
        );
    }

    #[test]
    fn random_baseline_needs_two_classes() {
        let eval = EvaluationSet::from_labels([("a", "a")], LabelAlphabet::new()).unwrap();
        assert_eq!(
            resolve_baseline(&BaselineSpec::Random, None, &eval),
            Err(StatsError::TooFewClasses(1))
        );
    }

    #[test]
    fn nir_baseline_from_training_priors() {
        let mut alphabet = LabelAlphabet::new();
        let train: Vec<_> = std::iter::repeat_n("a", 60)
            .chain(std::iter::repeat_n("b", 40))
            .map(|l| alphabet.intern(l))
            .collect();
        let pairs: Vec<_> = std::iter::repeat_n(("a", "a"), 30)
            .chain(std::iter::repeat_n(("b", "b"), 20))
            .collect();
        let eval = EvaluationSet::from_labels(pairs, alphabet).unwrap();
        let priors = estimate_priors(&train, eval.alphabet()).unwrap();
        let resolved = resolve_baseline(&BaselineSpec::Nir, Some(&priors), &eval).unwrap();
        assert_eq!(resolved.p, 0.6);
        assert_eq!(resolved.kind, "nir");
        assert!(resolved.warnings.is_empty());

        let outcome = run_significance_test(&eval, &TestSpec::default(), Some(&priors)).unwrap();
        assert_eq!(outcome.majority_class.as_deref(), Some("a"));
        assert_eq!(outcome.majority_training_prior, Some(0.6));
    }

    #[test]
    fn tie_and_single_class_warnings() {
        let mut alphabet = LabelAlphabet::new();
        let train: Vec<_> = ["x", "y", "y", "x"]
            .iter()
            .map(|l| alphabet.intern(l))
            .collect();
        let eval = EvaluationSet::from_labels([("x", "x"), ("y", "x")], alphabet).unwrap();
        let priors = estimate_priors(&train, eval.alphabet()).unwrap();
        let outcome = run_significance_test(&eval, &TestSpec::default(), Some(&priors)).unwrap();
        assert!(outcome.has_warning(WarningCode::MajorityTie));
        assert_eq!(outcome.majority_class.as_deref(), Some("x"));

        let mut alphabet = LabelAlphabet::new();
        let train: Vec<_> = ["x"; 5].iter().map(|l| alphabet.intern(l)).collect();
        let eval = EvaluationSet::from_labels([("x", "x"), ("y", "y")], alphabet).unwrap();
        let priors = estimate_priors(&train, eval.alphabet()).unwrap();
        let outcome = run_significance_test(&eval, &TestSpec::default(), Some(&priors)).unwrap();
        assert!(outcome.has_warning(WarningCode::DegeneratePriors));
    }

    #[test]
    fn exact_examples() {
        let outcome = run_significance_test(&synthetic(20, 15), &explicit(0.5), None).unwrap();
        assert_eq!((outcome.m, outcome.t), (20, 15));
        assert!((outcome.pval.value - 21700.0 / 1048576.0).abs() < 1e-12);
        assert!(outcome.significant);
        assert!(outcome.z.is_none());
        assert!(outcome.warnings.is_empty());

        let outcome = run_significance_test(&synthetic(10, 10), &explicit(0.5), None).unwrap();
        assert_eq!(outcome.pval.value, 0.0009765625);
        assert!(outcome.significant);
    }

    #[test]
    fn below_baseline_keeps_literal_tail() {
        // t = 6 of 20 against p = 0.5: by symmetry P(X >= 6) = 1 - P(X >= 15)
        let outcome = run_significance_test(&synthetic(20, 6), &explicit(0.5), None).unwrap();
        assert!(outcome.has_warning(WarningCode::AccuracyBelowBaseline));
        assert!(outcome.pval.value > 0.5);
        assert!(!outcome.significant);
    }

    #[test]
    fn degenerate_baselines_warn() {
        let outcome = run_significance_test(&synthetic(10, 4), &explicit(1.0), None).unwrap();
        assert_eq!(outcome.pval.value, 1.0);
        assert!(outcome.has_warning(WarningCode::DegenerateBaseline));

        let outcome = run_significance_test(&synthetic(10, 4), &explicit(0.0), None).unwrap();
        assert_eq!(outcome.pval.value, 0.0);
        assert!(outcome.significant);
        assert!(outcome.has_warning(WarningCode::DegenerateBaseline));

        let spec = TestSpec {
            method: TestMethod::NormalApproximation,
            ..explicit(0.0)
        };
        assert_eq!(
            run_significance_test(&synthetic(10, 4), &spec, None),
            Err(StatsError::DegenerateNormal(0.0))
        );
        let spec = TestSpec {
            method: TestMethod::Auto,
            ..explicit(1.0)
        };
        assert!(run_significance_test(&synthetic(10, 4), &spec, None)
            .unwrap()
            .z
            .is_none());
    }

    #[test]
    fn auto_reports_z_but_uses_exact() {
        let spec = TestSpec {
            method: TestMethod::Auto,
            ..explicit(0.5)
        };
        let outcome = run_significance_test(&synthetic(20, 15), &spec, None).unwrap();
        assert_eq!(outcome.pval.method, Method::LogSpaceExact);
        let z = outcome.z.unwrap();
        assert!((z.z - 4.5 / 5.0_f64.sqrt()).abs() < 1e-15);
        assert!(z.gate_satisfied);

        let spec = TestSpec {
            method: TestMethod::Auto,
            ..explicit(0.1)
        };
        let outcome = run_significance_test(&synthetic(10, 3), &spec, None).unwrap();
        assert!(outcome.has_warning(WarningCode::MpqGateFailed));
    }

    #[test]
    fn normal_route() {
        let spec = TestSpec {
            method: TestMethod::NormalApproximation,
            continuity_correction: false,
            ..explicit(0.5)
        };
        let outcome = run_significance_test(&synthetic(20, 15), &spec, None).unwrap();
        assert_eq!(outcome.pval.method, Method::NormalApproximation);
        assert!(!outcome.z.unwrap().continuity_corrected);
        assert!((outcome.z.unwrap().z - 5.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_tailed_clamping() {
        let spec = TestSpec {
            sidedness: Sidedness::TwoTailed,
            ..explicit(0.5)
        };
        let outcome = run_significance_test(&synthetic(10, 2), &spec, None).unwrap();
        assert_eq!(outcome.pval.value, 1.0);
        assert!(outcome.pval.clamped);
        assert!(outcome.has_warning(WarningCode::TwoTailedClamped));

        let spec = TestSpec {
            clamp_two_tailed: false,
            ..spec
        };
        let outcome = run_significance_test(&synthetic(10, 2), &spec, None).unwrap();
        assert!(outcome.pval.value > 1.0);
        assert!(outcome.has_warning(WarningCode::TwoTailedOutOfRange));
        assert!(!outcome.significant);
    }

    #[test]
    fn decision_boundary_is_inclusive() {
        let pv = |value| PValue {
            value,
            method: Method::LogSpaceExact,
            sidedness: Sidedness::OneTailed,
            clamped: false,
        };
        assert!(decide(&pv(0.0206947), 0.05));
        assert!(decide(&pv(0.05), 0.05));
        assert!(!decide(&pv(0.051), 0.05));
    }
}
