//! Exact binomial significance testing of classifier accuracy against the
//! No Information Rate (NIR) and random-classifier baselines.
//!
//! ```
//! use nirsig::evaluation::{BaselineSpec, EvaluationSet, LabelAlphabet};
//! use nirsig::significance::{run_significance_test, TestSpec};
//!
//! let pairs = [("a", "a"), ("a", "a"), ("b", "b"), ("b", "a")];
//! let eval = EvaluationSet::from_labels(pairs, LabelAlphabet::new()).unwrap();
//! let spec = TestSpec::with_baseline(BaselineSpec::Explicit(0.5));
//! let outcome = run_significance_test(&eval, &spec, None).unwrap();
//! assert_eq!(outcome.t, 3);
//! assert!((outcome.pval.value - 5.0 / 16.0).abs() < 1e-15);
//! ```

pub mod binomial;
pub mod error;
pub mod evaluation;
pub mod input;
pub mod report;
pub mod significance;

pub use error::StatsError;
