//! Binomial tail probabilities: the exact upper tail, its two-tailed
//! doubling, and the normal approximation with its `m·p·q ≥ 5` gate.

mod oracle;
mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};

pub use oracle::{
    lower_mass_oracle, pmf_rational, upper_tail_oracle, upper_tail_rational, ORACLE_MAX_TRIALS,
};
pub use special::regularized_beta;

/// Threshold on `m·p·q` above which the normal approximation is considered
/// applicable.
pub const NORMAL_GATE: f64 = 5.0;

/// Above this many trials the upper tail switches from term summation to the
/// incomplete beta identity.
pub const SUMMATION_MAX_TRIALS: u64 = 1_000_000_000;

// Summation stops once a term falls below this fraction of the running total.
const NEGLIGIBLE: f64 = 1e-20;

/// The triple `(t, m, p)` that parameterizes a binomial upper tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailQuery {
    t: u64,
    m: u64,
    p: f64,
}

impl TailQuery {
    pub fn new(t: u64, m: u64, p: f64) -> Result<Self> {
        if m == 0 {
            return Err(StatsError::ZeroTrials);
        }
        if t > m {
            return Err(StatsError::CountExceedsTrials { t, m });
        }
        check_probability(p)?;
        Ok(Self { t, m, p })
    }

    /// Observed successes.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of trials.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Success probability under the baseline.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Failure probability, always `1 − p`.
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(StatsError::ProbabilityOutOfRange(p))
    }
}

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Closed-form or exact summation (degenerate baselines, `t = 0`).
    ExactSum,
    /// Exact tail evaluated in log space.
    LogSpaceExact,
    /// Standard-normal survival of a z statistic.
    NormalApproximation,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactSum => "exact-sum",
            Method::LogSpaceExact => "log-space-exact",
            Method::NormalApproximation => "normal-approximation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneTailed,
    TwoTailed,
}

impl Sidedness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sidedness::OneTailed => "one-tailed",
            Sidedness::TwoTailed => "two-tailed",
        }
    }
}

/// A p-value together with how it was produced.
///
/// An unclamped two-tailed value is the literal doubling of the upper tail
/// and may exceed 1; [`PValue::out_of_range`] reports that case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    pub value: f64,
    pub method: Method,
    pub sidedness: Sidedness,
    /// Set when a two-tailed doubling exceeded 1 and was capped.
    pub clamped: bool,
}

impl PValue {
    pub fn out_of_range(&self) -> bool {
        self.value > 1.0
    }
}

/// Normal-approximation statistic with the `m·p·q` applicability gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZStatistic {
    pub z: f64,
    pub continuity_corrected: bool,
    pub mpq: f64,
    pub gate_satisfied: bool,
}

/// Natural log of the binomial pmf `C(m,k)·p^k·(1−p)^(m−k)`.
///
/// Returns negative infinity where the pmf is exactly zero.
pub fn binom_pmf_log(k: u64, m: u64, p: f64) -> Result<f64> {
    if k > m {
        return Err(StatsError::CountExceedsTrials { t: k, m });
    }
    check_probability(p)?;
    Ok(ln_pmf(k, m, p))
}

fn ln_pmf(k: u64, m: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if k == 0 {
        return if p == 0.0 {
            0.0
        } else {
            m as f64 * (-p).ln_1p()
        };
    }
    if k == m {
        return m as f64 * p.ln();
    }
    if p == 0.0 || p == 1.0 {
        return f64::NEG_INFINITY;
    }
    special::ln_pmf_interior(k, m, p, q)
}

/// Compensated (Neumaier) running sum.
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn new(initial: f64) -> Self {
        Self {
            sum: initial,
            compensation: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `x^n` by binary powering in double-double arithmetic, so the result is
/// within a couple of ulps regardless of `n`.
fn pow_compensated(x: f64, mut n: u64) -> f64 {
    fn mul((ah, al): (f64, f64), (bh, bl): (f64, f64)) -> (f64, f64) {
        let hi = ah * bh;
        let lo = ah.mul_add(bh, -hi) + (ah * bl + al * bh);
        let sum = hi + lo;
        (sum, lo - (sum - hi))
    }
    let mut base = (x, 0.0);
    let mut acc = (1.0, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            acc = mul(acc, base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(base, base);
        }
    }
    acc.0 + acc.1
}

/// Upper tail for `1 ≤ t ≤ m`, `0 < p < 1`.
///
/// Terms are generated relative to the largest one in the summation range
/// (the mode, or `t` when `t` lies above the mode) with the ratio recurrence
/// `b(k+1)/b(k) = (m−k)/(k+1) · p/q`, so every relative term is at most 1
/// and nothing underflows before the final rescaling.
fn tail_by_summation(t: u64, m: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let odds = p / q;
    let mode = (((m + 1) as f64) * p).floor().min(m as f64) as u64;
    let start = t.max(mode);

    let mut sum = CompensatedSum::new(1.0);
    let mut rel = 1.0;
    for k in start..m {
        rel *= (m - k) as f64 / (k + 1) as f64 * odds;
        sum.add(rel);
        if rel <= sum.value() * NEGLIGIBLE {
            break;
        }
    }
    rel = 1.0;
    let mut k = start;
    while k > t {
        rel *= k as f64 / (m - k + 1) as f64 / odds;
        k -= 1;
        sum.add(rel);
        if rel <= sum.value() * NEGLIGIBLE {
            break;
        }
    }
    let total = sum.value();

    let value = if start == m {
        pow_compensated(p, m) * total
    } else {
        let ln_start = ln_pmf(start, m, p);
        if ln_start > -700.0 {
            ln_start.exp() * total
        } else {
            (ln_start + total.ln()).exp()
        }
    };
    value.clamp(0.0, 1.0)
}

/// Closed-form tail for the cases that need no summation.
fn trivial_tail(query: &TailQuery) -> Option<f64> {
    if query.t == 0 || query.p == 1.0 {
        Some(1.0)
    } else if query.p == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// One-tailed p-value `P(X ≥ t)` for `X ~ Binomial(m, p)`.
pub fn upper_tail_exact(query: &TailQuery) -> PValue {
    let one_tailed = |value, method| PValue {
        value,
        method,
        sidedness: Sidedness::OneTailed,
        clamped: false,
    };
    if let Some(value) = trivial_tail(query) {
        return one_tailed(value, Method::ExactSum);
    }
    let (t, m, p) = (query.t, query.m, query.p);
    if m > SUMMATION_MAX_TRIALS {
        if let Ok(value) = special::regularized_beta(t as f64, (m - t + 1) as f64, p) {
            return one_tailed(value, Method::LogSpaceExact);
        }
    }
    one_tailed(tail_by_summation(t, m, p), Method::LogSpaceExact)
}

/// Upper tail through the identity `P(X ≥ t) = I_p(t, m − t + 1)`.
///
/// Independent of the summation route; used as a cross-check and for very
/// large `m`.
pub fn upper_tail_beta(query: &TailQuery) -> Result<f64> {
    if let Some(value) = trivial_tail(query) {
        return Ok(value);
    }
    special::regularized_beta(query.t as f64, (query.m - query.t + 1) as f64, query.p)
}

/// Two-tailed p-value: twice the upper tail, optionally capped at 1.
pub fn two_tailed(query: &TailQuery, clamp: bool) -> PValue {
    let one = upper_tail_exact(query);
    double_tail(one, clamp)
}

/// Doubles a one-tailed p-value, capping at 1 when `clamp` is set.
pub fn double_tail(one: PValue, clamp: bool) -> PValue {
    let raw = 2.0 * one.value;
    let clamped = clamp && raw > 1.0;
    PValue {
        value: if clamped { 1.0 } else { raw },
        method: one.method,
        sidedness: Sidedness::TwoTailed,
        clamped,
    }
}

/// z statistic `(t − c − m·p) / sqrt(m·p·q)`, `c = ½` with continuity
/// correction. Computed whether or not the gate is satisfied.
pub fn normal_z(query: &TailQuery, continuity_correction: bool) -> Result<ZStatistic> {
    let p = query.p;
    if p == 0.0 || p == 1.0 {
        return Err(StatsError::DegenerateNormal(p));
    }
    let m = query.m as f64;
    let mpq = m * p * query.q();
    let correction = if continuity_correction { 0.5 } else { 0.0 };
    let z = (query.t as f64 - correction - m * p) / mpq.sqrt();
    Ok(ZStatistic {
        z,
        continuity_corrected: continuity_correction,
        mpq,
        gate_satisfied: mpq >= NORMAL_GATE,
    })
}

/// Standard normal survival function `P(Z ≥ z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// One-tailed p-value from a z statistic.
pub fn normal_upper_pval(z: &ZStatistic) -> Result<PValue> {
    if !z.z.is_finite() {
        return Err(StatsError::NonFiniteZ(z.z));
    }
    Ok(PValue {
        value: normal_sf(z.z),
        method: Method::NormalApproximation,
        sidedness: Sidedness::OneTailed,
        clamped: false,
    })
}
