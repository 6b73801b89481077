//! Closed forms and threshold bounds.
//!
//! The bound quantities take a distance `d`, the gate cost
//! `c = t + 3h` (transversal gates plus three per Hadamard), the
//! Hadamard count `h` and the physical failure probability `p`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::sim::OutcomeDistribution;

/// Largest distance searched by [`min_d_for_epsilon`].
pub const MAX_SEARCH_DISTANCE: usize = 199;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("negative probability {value} for outcome `{key}`")]
    NegativeProbability { key: String, value: f64 },
    #[error("distribution sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("invalid bound inputs: {0}")]
    InvalidInputs(String),
    #[error("p = {p} is not below the threshold {threshold} for c = {c}")]
    AboveThreshold { p: f64, c: usize, threshold: f64 },
    #[error("no odd distance up to {cap} reaches ratio < {epsilon}")]
    SearchCapExceeded { cap: usize, epsilon: f64 },
}

fn check_distribution(a: &OutcomeDistribution) -> Result<(), AnalysisError> {
    if a.probs.is_empty() {
        return Err(AnalysisError::EmptyDistribution);
    }
    if let Some((k, &v)) = a.probs.iter().find(|(_, &v)| v < 0.0 || v.is_nan()) {
        return Err(AnalysisError::NegativeProbability {
            key: k.clone(),
            value: v,
        });
    }
    let t = a.total();
    if (t - 1.0).abs() > 1e-9 {
        return Err(AnalysisError::NotNormalized(t));
    }
    Ok(())
}

/// Squared statistical overlap `(sum_i sqrt(a_i b_i))^2`.
///
/// Both inputs must be normalized; use
/// [`OutcomeDistribution::normalized`] on raw counts first.
pub fn sso(a: &OutcomeDistribution, b: &OutcomeDistribution) -> Result<f64, AnalysisError> {
    check_distribution(a)?;
    check_distribution(b)?;
    let s: f64 = a.probs.iter().map(|(k, &pa)| (pa * b.get(k)).sqrt()).sum();
    Ok((s * s).min(1.0))
}

/// Logical error rate of `|+>_L` after one non-FT Hadamard on the
/// distance-2 repetition code, every gate followed by depolarizing noise
/// of strength `p`, post-selected with direct measurement.
pub fn nonft_h_logical_error(p: f64) -> f64 {
    p * (2.0 + (p - 2.0) * p) / (2.0 + 2.0 * (p - 1.0) * p)
}

/// `1 / (e c + 1)`.
pub fn threshold(c: usize) -> f64 {
    1.0 / (E * c as f64 + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub d: usize,
    /// Transversal gate count.
    pub t: usize,
    /// Hadamard count.
    pub h: usize,
    pub p: f64,
}

impl BoundInputs {
    pub fn new(d: usize, t: usize, h: usize, p: f64) -> Result<Self, AnalysisError> {
        let b = BoundInputs { d, t, h, p };
        b.validate()?;
        Ok(b)
    }

    pub fn c(&self) -> usize {
        self.t + 3 * self.h
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.d == 0 {
            return Err(AnalysisError::InvalidInputs("d must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Err(AnalysisError::InvalidInputs(format!(
                "p = {} outside [0, 1)",
                self.p
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d: usize,
    pub c: usize,
    pub h: usize,
    pub p: f64,
    pub pl_upper: f64,
    pub ps_lower: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub below_threshold: bool,
}

// ln( C(n,k) q^k (1-q)^(n-k) ) with ln q and ln(1-q) supplied.
fn ln_binomial_term(n: u64, k: u64, ln_q: f64, ln_1mq: f64) -> f64 {
    let mut v = ln_binomial(n, k);
    if k > 0 {
        v += k as f64 * ln_q;
    }
    if n > k {
        v += (n - k) as f64 * ln_1mq;
    }
    v
}

/// Upper bound on the logical error rate:
/// `sum_{j=d}^{cd} C(cd,j) p^j (1-p)^(cd-j) + sum_{m=1}^{h} C(h,m) p^(dm) (1-p^d)^(h-m)`.
///
/// Not clamped to 1.
pub fn pl_upper(d: usize, c: usize, h: usize, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let ln_p = p.ln();
    let ln_1mp = (-p).ln_1p();
    let n = (c * d) as u64;
    let gates: f64 = (d as u64..=n)
        .map(|j| ln_binomial_term(n, j, ln_p, ln_1mp).exp())
        .sum();
    let ln_pd = d as f64 * ln_p;
    let ln_1mpd = (-ln_pd.exp()).ln_1p();
    let hadamards: f64 = (1..=h as u64)
        .map(|m| ln_binomial_term(h as u64, m, ln_pd, ln_1mpd).exp())
        .sum();
    gates + hadamards
}

/// Lower bound on the post-selection rate: `(1-p)^(cd) (1-p^d)^h`.
pub fn ps_lower(d: usize, c: usize, h: usize, p: f64) -> f64 {
    (1.0 - p).powi((c * d) as i32) * (1.0 - p.powi(d as i32)).powi(h as i32)
}

pub fn ratio_report(inputs: &BoundInputs) -> BoundReport {
    let BoundInputs { d, h, p, .. } = *inputs;
    let c = inputs.c();
    let pl = pl_upper(d, c, h, p);
    let ps = ps_lower(d, c, h, p);
    let th = threshold(c);
    BoundReport {
        d,
        c,
        h,
        p,
        pl_upper: pl,
        ps_lower: ps,
        ratio: pl / ps,
        threshold: th,
        below_threshold: p < th,
    }
}

/// Smallest odd distance whose bound ratio drops below `epsilon`.
pub fn min_d_for_epsilon(c: usize, h: usize, p: f64, epsilon: f64) -> Result<usize, AnalysisError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(AnalysisError::InvalidInputs(
            "epsilon must be positive".into(),
        ));
    }
    let th = threshold(c);
    if p.is_nan() || p >= th {
        return Err(AnalysisError::AboveThreshold {
            p,
            c,
            threshold: th,
        });
    }
    for d in (1..=MAX_SEARCH_DISTANCE).step_by(2) {
        let ratio = pl_upper(d, c, h, p) / ps_lower(d, c, h, p);
        if ratio < epsilon {
            return Ok(d);
        }
    }
    Err(AnalysisError::SearchCapExceeded {
        cap: MAX_SEARCH_DISTANCE,
        epsilon,
    })
}

/// `ln[(ec+1)^m (1 - 1/(ec+1))^c]`.
pub fn monotonicity_term(m: usize, c: usize) -> f64 {
    let a = E * c as f64 + 1.0;
    m as f64 * a.ln() + c as f64 * (-1.0 / a).ln_1p()
}

/// Whether `1 < (ec+1)^m (1 - 1/(ec+1))^c` for every `1 <= m <= m_max`,
/// `1 <= c <= c_max`.
pub fn monotonicity_check(m_max: usize, c_max: usize) -> bool {
    (1..=m_max).all(|m| (1..=c_max).all(|c| monotonicity_term(m, c) > 0.0))
}
