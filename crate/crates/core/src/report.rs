//! Human and machine renderings of a [`TestOutcome`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::significance::{TestOutcome, Warning};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    Human,
    Machine,
}

/// Input metadata shown next to the outcome.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportContext {
    pub predictions: Option<String>,
    pub train_labels: Option<String>,
    pub alphabet: Vec<String>,
}

/// Flat machine-readable document. Field names are part of the CLI contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineReport {
    pub m: u64,
    pub t: u64,
    pub accuracy: f64,
    pub baseline_kind: String,
    pub p: f64,
    pub q: f64,
    pub sidedness: String,
    pub method: String,
    pub requested_method: String,
    pub pval: f64,
    pub pval_clamped: bool,
    pub pval_out_of_range: bool,
    pub z: Option<f64>,
    pub continuity_corrected: Option<bool>,
    pub mpq: Option<f64>,
    pub gate_satisfied: Option<bool>,
    pub alpha: f64,
    pub significant: bool,
    pub classes: usize,
    pub alphabet: Vec<String>,
    pub majority_class: Option<String>,
    pub majority_training_prior: Option<f64>,
    pub predictions: Option<String>,
    pub train_labels: Option<String>,
    pub warnings: Vec<Warning>,
}

impl MachineReport {
    pub fn new(outcome: &TestOutcome, context: &ReportContext) -> Self {
        Self {
            m: outcome.m,
            t: outcome.t,
            accuracy: outcome.accuracy,
            baseline_kind: outcome.baseline_kind.to_owned(),
            p: outcome.p,
            q: outcome.q,
            sidedness: outcome.pval.sidedness.as_str().to_owned(),
            method: outcome.pval.method.as_str().to_owned(),
            requested_method: outcome.requested_method.as_str().to_owned(),
            pval: outcome.pval.value,
            pval_clamped: outcome.pval.clamped,
            pval_out_of_range: outcome.pval.out_of_range(),
            z: outcome.z.map(|z| z.z),
            continuity_corrected: outcome.z.map(|z| z.continuity_corrected),
            mpq: outcome.z.map(|z| z.mpq),
            gate_satisfied: outcome.z.map(|z| z.gate_satisfied),
            alpha: outcome.alpha,
            significant: outcome.significant,
            classes: outcome.classes,
            alphabet: context.alphabet.clone(),
            majority_class: outcome.majority_class.clone(),
            majority_training_prior: outcome.majority_training_prior,
            predictions: context.predictions.clone(),
            train_labels: context.train_labels.clone(),
            warnings: outcome.warnings.clone(),
        }
    }
}

/// Rounds to `digits` significant digits for display.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let rounded = format!("{:.*e}", digits - 1, x);
    if x.abs() < 1e-4 {
        return rounded;
    }
    rounded.parse::<f64>().map_or(rounded, |r| r.to_string())
}

fn verdict(outcome: &TestOutcome) -> String {
    let word = if outcome.significant {
        "SIGNIFICANT"
    } else {
        "NOT SIGNIFICANT"
    };
    format!("{word} at alpha={}", outcome.alpha)
}

fn render_human(outcome: &TestOutcome, context: &ReportContext) -> String {
    let mut rows: Vec<(&str, String)> = Vec::new();
    if let Some(path) = &context.predictions {
        rows.push(("predictions", path.clone()));
    }
    if let Some(path) = &context.train_labels {
        rows.push(("training labels", path.clone()));
    }
    rows.push(("classes (C)", outcome.classes.to_string()));
    rows.push(("test objects (m)", outcome.m.to_string()));
    rows.push(("correct (t)", outcome.t.to_string()));
    rows.push(("accuracy", significant(outcome.accuracy, 6)));
    let mut baseline = outcome.baseline_kind.to_owned();
    if let Some(class) = &outcome.majority_class {
        baseline.push_str(&format!(" (majority class '{class}'"));
        if let Some(prior) = outcome.majority_training_prior {
            baseline.push_str(&format!(", training prior {}", significant(prior, 6)));
        }
        baseline.push(')');
    }
    rows.push(("baseline", baseline));
    rows.push(("p", significant(outcome.p, 6)));
    rows.push(("q", significant(outcome.q, 6)));
    rows.push((
        "test",
        format!(
            "{}, {}",
            outcome.pval.sidedness.as_str(),
            outcome.pval.method.as_str()
        ),
    ));
    let mut pval = significant(outcome.pval.value, 6);
    if outcome.pval.clamped {
        pval.push_str(" (clamped)");
    }
    rows.push(("p-value", pval));
    if let Some(z) = outcome.z {
        rows.push((
            "z",
            format!(
                "{} ({}, m*p*q = {}, gate {})",
                significant(z.z, 6),
                if z.continuity_corrected {
                    "continuity-corrected"
                } else {
                    "uncorrected"
                },
                significant(z.mpq, 6),
                if z.gate_satisfied {
                    "satisfied"
                } else {
                    "not satisfied"
                }
            ),
        ));
    }
    rows.push(("alpha", outcome.alpha.to_string()));
    rows.push(("verdict", verdict(outcome)));

    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (key, value) in &rows {
        let _ = writeln!(out, "{key:<width$} : {value}");
    }
    if outcome.warnings.is_empty() {
        let _ = writeln!(out, "{:<width$} : none", "warnings");
    } else {
        let _ = writeln!(out, "{:<width$} :", "warnings");
        for w in &outcome.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}

/// Renders an outcome as aligned text or as a single JSON document.
pub fn render_report(outcome: &TestOutcome, context: &ReportContext, mode: ReportMode) -> String {
    match mode {
        ReportMode::Human => render_human(outcome, context),
        ReportMode::Machine => {
            let doc = MachineReport::new(outcome, context);
            // Every field is a plain number, string or bool; this cannot fail.
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{BaselineSpec, EvaluationSet, LabelAlphabet};
    use crate::significance::{run_significance_test, TestSpec, WarningCode};

    fn outcome(m: usize, t: usize, p: f64) -> TestOutcome {
        let pairs = (0..m).map(|i| if i < t { ("a", "a") } else { ("a", "b") });
        let eval = EvaluationSet::from_labels(pairs, LabelAlphabet::new()).unwrap();
        run_significance_test(
            &eval,
            &TestSpec::with_baseline(BaselineSpec::Explicit(p)),
            None,
        )
        .unwrap()
    }

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.020694732666015625, 6), "0.0206947");
        assert_eq!(significant(0.75, 6), "0.75");
        assert_eq!(significant(1.0, 6), "1");
        assert_eq!(significant(0.0, 6), "0");
        assert_eq!(significant(2.5e-9, 6), "2.50000e-9");
    }

    #[test]
    fn machine_report_round_trips() {
        let outcome = outcome(20, 15, 0.5);
        let text = render_report(&outcome, &ReportContext::default(), ReportMode::Machine);
        assert!(text.contains("\"significant\": true"));
        let parsed: MachineReport = serde_json::from_str(&text).unwrap();
        assert_eq!(
            parsed,
            MachineReport::new(&outcome, &ReportContext::default())
        );
        assert_eq!(parsed.pval.to_bits(), outcome.pval.value.to_bits());
        assert!((parsed.pval - 0.0206947327).abs() < 1e-10);

        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in [
            "m",
            "t",
            "accuracy",
            "baseline_kind",
            "p",
            "q",
            "sidedness",
            "method",
            "pval",
            "pval_clamped",
            "z",
            "mpq",
            "gate_satisfied",
            "alpha",
            "significant",
            "warnings",
        ] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn human_report_has_verdict_and_warnings() {
        let text = render_report(
            &outcome(20, 15, 0.5),
            &ReportContext::default(),
            ReportMode::Human,
        );
        assert!(text.contains("SIGNIFICANT at alpha=0.05"), "{text}");
        assert!(text.contains("p-value          : 0.0206947"), "{text}");

        let degenerate = outcome(10, 4, 1.0);
        assert!(degenerate.has_warning(WarningCode::DegenerateBaseline));
        let text = render_report(&degenerate, &ReportContext::default(), ReportMode::Human);
        assert!(text.contains("NOT SIGNIFICANT at alpha=0.05"));
        assert!(text.contains("degenerate-baseline"));
        let text = render_report(&degenerate, &ReportContext::default(), ReportMode::Machine);
        assert!(text.contains("\"degenerate-baseline\""));
    }
}
