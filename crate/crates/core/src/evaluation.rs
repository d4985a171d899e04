//! Observed quantities on a labelled test set: success count, accuracy,
//! class priors from training labels, the majority class and the NIR.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};

/// Dense class index into a [`LabelAlphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassId(pub usize);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Label texts in first-appearance order; the position is the [`ClassId`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAlphabet {
    names: Vec<String>,
    index: HashMap<String, ClassId>,
}

impl LabelAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id for `label`, appending it if unseen.
    pub fn intern(&mut self, label: &str) -> ClassId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = ClassId(self.names.len());
        self.names.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<ClassId> {
        self.index.get(label).copied()
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.names.get(id.0).map(String::as_str)
    }

    pub fn contains(&self, id: ClassId) -> bool {
        id.0 < self.names.len()
    }

    /// Number of classes `C`.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn check(&self, id: ClassId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(StatsError::UnknownClass(id.0))
        }
    }
}

/// True and predicted label of one test object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub true_label: ClassId,
    pub predicted_label: ClassId,
}

impl PredictionRecord {
    pub fn is_correct(&self) -> bool {
        self.true_label == self.predicted_label
    }
}

/// The test set: predictions in input order plus the alphabet they index.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSet {
    records: Vec<PredictionRecord>,
    alphabet: LabelAlphabet,
}

impl EvaluationSet {
    pub fn new(records: Vec<PredictionRecord>, alphabet: LabelAlphabet) -> Result<Self> {
        if records.is_empty() {
            return Err(StatsError::EmptyEvaluation);
        }
        for r in &records {
            alphabet.check(r.true_label)?;
            alphabet.check(r.predicted_label)?;
        }
        Ok(Self { records, alphabet })
    }

    /// Builds a set from `(true, predicted)` label text pairs, extending
    /// `alphabet` in first-appearance order.
    pub fn from_labels<S: AsRef<str>>(
        pairs: impl IntoIterator<Item = (S, S)>,
        mut alphabet: LabelAlphabet,
    ) -> Result<Self> {
        let records = pairs
            .into_iter()
            .map(|(truth, pred)| PredictionRecord {
                true_label: alphabet.intern(truth.as_ref()),
                predicted_label: alphabet.intern(pred.as_ref()),
            })
            .collect();
        Self::new(records, alphabet)
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn alphabet(&self) -> &LabelAlphabet {
        &self.alphabet
    }

    /// Extends the alphabet with further labels (e.g. from training data)
    /// and returns their ids.
    pub fn intern_labels<S: AsRef<str>>(
        &mut self,
        labels: impl IntoIterator<Item = S>,
    ) -> Vec<ClassId> {
        labels
            .into_iter()
            .map(|l| self.alphabet.intern(l.as_ref()))
            .collect()
    }

    /// Test-set size `m`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Number of correctly classified test objects, `t`.
pub fn count_successes(eval: &EvaluationSet) -> u64 {
    eval.records.iter().filter(|r| r.is_correct()).count() as u64
}

/// `t / m`.
pub fn accuracy(eval: &EvaluationSet) -> f64 {
    count_successes(eval) as f64 / eval.len() as f64
}

/// Expected accuracy of a uniformly random classifier over `classes` classes.
pub fn acc_rand(classes: usize) -> Result<f64> {
    if classes < 2 {
        return Err(StatsError::TooFewClasses(classes));
    }
    Ok(1.0 / classes as f64)
}

/// Per-class training counts and the priors `N_i / N` they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPriors {
    pub counts: Vec<u64>,
    pub total: u64,
    pub priors: Vec<f64>,
}

impl ClassPriors {
    /// Number of classes with a non-zero training count.
    pub fn observed_classes(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Estimates class priors from training labels. Classes of the alphabet
/// that never occur in training get prior 0.
pub fn estimate_priors(
    training_labels: &[ClassId],
    alphabet: &LabelAlphabet,
) -> Result<ClassPriors> {
    if training_labels.is_empty() {
        return Err(StatsError::EmptyTraining);
    }
    let mut counts = vec![0u64; alphabet.len()];
    for &label in training_labels {
        alphabet.check(label)?;
        counts[label.0] += 1;
    }
    let total = training_labels.len() as u64;
    let priors = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(ClassPriors {
        counts,
        total,
        priors,
    })
}

/// Which expected success probability the test compares against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "lowercase")]
pub enum BaselineSpec {
    /// `1 / C`.
    Random,
    /// Test-set frequency of the training-majority class.
    Nir,
    /// A caller-supplied probability.
    Explicit(f64),
}

impl BaselineSpec {
    pub fn explicit(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self::Explicit(p))
        } else {
            Err(StatsError::ProbabilityOutOfRange(p))
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BaselineSpec::Random => "random",
            BaselineSpec::Nir => "nir",
            BaselineSpec::Explicit(_) => "explicit",
        }
    }
}

/// Training-majority class; `tied_with` lists the other classes sharing
/// the maximal count when the choice was forced by the tie rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorityClass {
    pub class: ClassId,
    pub count: u64,
    pub prior: f64,
    pub tied_with: Vec<ClassId>,
}

impl MajorityClass {
    pub fn is_tie(&self) -> bool {
        !self.tied_with.is_empty()
    }
}

/// Class with the largest training count; ties go to the smallest id.
pub fn most_frequent_class(priors: &ClassPriors) -> MajorityClass {
    let best = priors.counts.iter().copied().max().unwrap_or(0);
    let mut winners = priors
        .counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == best)
        .map(|(i, _)| ClassId(i));
    // `estimate_priors` guarantees at least one class with a positive count.
    let class = winners.next().unwrap_or(ClassId(0));
    MajorityClass {
        class,
        count: best,
        prior: priors.priors.get(class.0).copied().unwrap_or(0.0),
        tied_with: winners.collect(),
    }
}

/// Fraction of test objects whose true label is `majority`.
pub fn nir(eval: &EvaluationSet, majority: ClassId) -> Result<f64> {
    eval.alphabet.check(majority)?;
    let hits = eval
        .records
        .iter()
        .filter(|r| r.true_label == majority)
        .count();
    Ok(hits as f64 / eval.len() as f64)
}
