//! Weight sequences `M_p`, their structural conditions and associated functions.
//!
//! Everything is stored in log-space: `log M_p` for `0 ≤ p ≤ P_max`.

mod assoc;
mod conditions;
mod pv;

use serde::{Deserialize, Serialize};

pub use assoc::{assoc_estimate_grid, verify_assoc_inequality};
pub use conditions::{check_conditions, ConditionFlags, NaWitness, Witness, WITNESS_GRID};
pub use pv::{petzsche_vogt_search, PvResult};

use crate::scalar::ln_factorials;
use crate::{Error, Result};

pub const DEFAULT_P_MAX: usize = 200;
pub const MIN_P_MAX: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TailRule {
    /// Keeps extending `log m_p` by its last increment.
    RepeatLastQuotientGrowth,
    /// Quotients continue as `m_p ∝ p^s`.
    Gevrey { s: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Gevrey { s: f64 },
    Factorial,
    Table { table_len: usize, tail: TailRule },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    pub family: Family,
    pub p_max: usize,
    log_values: Vec<f64>,
    #[serde(skip)]
    ln_fact: Vec<f64>,
    /// `log m_p`, index 0 unused.
    #[serde(skip)]
    log_mu: Vec<f64>,
    /// `log (m_p / p)`, the quotients of `M_p / p!`; index 0 unused.
    #[serde(skip)]
    log_nu: Vec<f64>,
    /// `log (M_p / p!)` accumulated from `log_nu`.
    #[serde(skip)]
    log_star: Vec<f64>,
    #[serde(skip)]
    log_convex: bool,
    #[serde(skip)]
    log_convex_star: bool,
}

/// Relative slack allowed when comparing consecutive log-quotients.
pub(crate) const MONOTONE_TOL: f64 = 1e-12;

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOL * w[0].abs().max(1.0))
}

impl WeightSequence {
    fn from_logs(family: Family, log_values: Vec<f64>) -> Result<Self> {
        if let Some(index) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonPositiveEntry { index });
        }
        let mut log_mu = vec![0.0; log_values.len()];
        for p in 1..log_values.len() {
            log_mu[p] = log_values[p] - log_values[p - 1];
        }
        Self::from_parts(family, log_values, log_mu)
    }

    /// Builds from log-quotients `log m_p` (index 0 ignored), so that closed
    /// forms keep their quotients exact.
    fn from_quotients(family: Family, log_mu: Vec<f64>) -> Result<Self> {
        let mut log_values = vec![0.0; log_mu.len()];
        let mut acc = 0.0;
        let mut c = 0.0;
        for p in 1..log_mu.len() {
            // Neumaier running sum
            let t = acc + log_mu[p];
            c += if acc.abs() >= log_mu[p].abs() { (acc - t) + log_mu[p] } else { (log_mu[p] - t) + acc };
            acc = t;
            log_values[p] = acc + c;
        }
        Self::from_parts(family, log_values, log_mu)
    }

    fn from_parts(family: Family, log_values: Vec<f64>, log_mu: Vec<f64>) -> Result<Self> {
        let p_max = log_values.len().saturating_sub(1);
        if p_max < MIN_P_MAX {
            return Err(Error::CutoffTooSmall { p_max, min: MIN_P_MAX });
        }
        if let Some(index) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonPositiveEntry { index });
        }
        if log_values[0] != 0.0 {
            return Err(Error::NotNormalized(log_values[0]));
        }
        let ln_fact = ln_factorials(p_max);
        let mut log_nu = vec![0.0; p_max + 1];
        let mut log_star = vec![0.0; p_max + 1];
        for p in 1..=p_max {
            log_nu[p] = log_mu[p] - (p as f64).ln();
            log_star[p] = log_star[p - 1] + log_nu[p];
        }
        let log_convex = non_decreasing(&log_mu[1..]);
        let log_convex_star = non_decreasing(&log_nu[1..]);
        Ok(Self { family, p_max, log_values, ln_fact, log_mu, log_nu, log_star, log_convex, log_convex_star })
    }

    /// `M_p = (p!)^s`.
    pub fn gevrey(s: f64, p_max: usize) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Invalid(format!("Gevrey exponent s = {s} must be finite and non-negative")));
        }
        let mu = (0..=p_max).map(|p| if p == 0 { 0.0 } else { s * (p as f64).ln() }).collect();
        Self::from_quotients(Family::Gevrey { s }, mu)
    }

    /// `M_p = p!`.
    pub fn factorial(p_max: usize) -> Result<Self> {
        let mut w = Self::gevrey(1.0, p_max)?;
        w.family = Family::Factorial;
        Ok(w)
    }

    /// Table of `log M_p`, extended to `p_max` by the tail rule.
    pub fn table(log_values: &[f64], tail: TailRule, p_max: usize) -> Result<Self> {
        if log_values.len() < 2 {
            return Err(Error::Invalid("a table needs at least M_0 and M_1".into()));
        }
        let mut v = log_values.to_vec();
        let len = v.len();
        let last = len - 1;
        let mu_last = v[last] - v[last - 1];
        let growth = if len >= 3 { mu_last - (v[last - 1] - v[last - 2]) } else { 0.0 };
        while v.len() <= p_max {
            let p = v.len();
            let mu = match tail {
                TailRule::RepeatLastQuotientGrowth => mu_last + growth * (p - last) as f64,
                TailRule::Gevrey { s } => mu_last + s * ((p as f64) / (last as f64)).ln(),
            };
            v.push(v[p - 1] + mu);
        }
        Self::from_logs(Family::Table { table_len: len, tail }, v)
    }

    /// Table of raw positive values `M_p`.
    pub fn from_values(values: &[f64], tail: TailRule, p_max: usize) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositiveEntry { index });
        }
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        Self::table(&logs, tail, p_max)
    }

    /// Any sequence given by a closure for `log M_p`.
    pub fn from_log_fn<F: Fn(usize) -> f64>(f: F, p_max: usize) -> Result<Self> {
        let logs: Vec<f64> = (0..=p_max).map(f).collect();
        Self::table(&logs, TailRule::RepeatLastQuotientGrowth, p_max)
    }

    /// Same family, longer cutoff (tables are re-extended by their tail rule).
    pub fn with_p_max(&self, p_max: usize) -> Result<Self> {
        match &self.family {
            Family::Gevrey { s } => Self::gevrey(*s, p_max),
            Family::Factorial => Self::factorial(p_max),
            Family::Table { table_len, tail } => {
                let keep = (*table_len).min(self.log_values.len());
                Self::table(&self.log_values[..keep], tail.clone(), p_max)
            }
        }
    }

    pub fn log_m(&self, p: usize) -> f64 {
        self.log_values[p]
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    /// `log m_p = log M_p − log M_{p−1}`, `p ≥ 1`.
    pub fn log_quotient(&self, p: usize) -> f64 {
        self.log_mu[p]
    }

    /// `log (m_p / p)`, `p ≥ 1`.
    pub fn log_quotient_star(&self, p: usize) -> f64 {
        self.log_nu[p]
    }

    /// (M.1): `m_p` non-decreasing up to the cutoff.
    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }

    /// (M.1)*: `m_p / p` non-decreasing up to the cutoff.
    pub fn is_log_convex_star(&self) -> bool {
        self.log_convex_star
    }

    /// `log (M_p / p!)`.
    pub fn log_m_over_fact(&self, p: usize) -> f64 {
        self.log_star[p]
    }

    pub fn ln_factorial(&self, p: usize) -> f64 {
        self.ln_fact[p]
    }

    /// Parses `{"family":"gevrey","s":2.0,"p_max":200}`, `{"family":"factorial"}`
    /// or `{"family":"table","log_values":[...],"tail":{"rule":"gevrey","s":1.5}}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let spec: WeightFile = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(format!("weights: {e}")))?;
        spec.build()
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: WeightFile = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("weights: {e}")))?;
        spec.build()
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.family {
            Family::Gevrey { s } => serde_json::json!({"family": "gevrey", "s": s, "p_max": self.p_max}),
            Family::Factorial => serde_json::json!({"family": "factorial", "p_max": self.p_max}),
            Family::Table { table_len, tail } => serde_json::json!({
                "family": "table",
                "log_values": &self.log_values[..*table_len],
                "tail": tail,
                "p_max": self.p_max,
            }),
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
enum WeightFile {
    Gevrey {
        s: f64,
        p_max: Option<usize>,
    },
    Factorial {
        p_max: Option<usize>,
    },
    Table {
        log_values: Vec<f64>,
        tail: TailRule,
        p_max: Option<usize>,
    },
}

impl WeightFile {
    fn build(self) -> Result<WeightSequence> {
        match self {
            WeightFile::Gevrey { s, p_max } => WeightSequence::gevrey(s, p_max.unwrap_or(DEFAULT_P_MAX)),
            WeightFile::Factorial { p_max } => WeightSequence::factorial(p_max.unwrap_or(DEFAULT_P_MAX)),
            WeightFile::Table { log_values, tail, p_max } => {
                let p_max = p_max.unwrap_or(DEFAULT_P_MAX.max(log_values.len().saturating_sub(1)));
                WeightSequence::table(&log_values, tail, p_max)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_unnormalized() {
        assert_eq!(WeightSequence::gevrey(1.0, 10), Err(Error::CutoffTooSmall { p_max: 10, min: 20 }));
        let logs: Vec<f64> = (0..30).map(|p| 1.0 + p as f64).collect();
        assert!(matches!(WeightSequence::table(&logs, TailRule::RepeatLastQuotientGrowth, 30), Err(Error::NotNormalized(_))));
        assert_eq!(
            WeightSequence::from_values(&[1.0, 2.0, -1.0], TailRule::RepeatLastQuotientGrowth, 30),
            Err(Error::NonPositiveEntry { index: 2 })
        );
    }

    #[test]
    fn gevrey_tail_reproduces_gevrey() {
        let g = WeightSequence::gevrey(1.5, 60).unwrap();
        let t = WeightSequence::table(&g.log_values()[..=40], TailRule::Gevrey { s: 1.5 }, 60).unwrap();
        for p in 41..=60 {
            // m_p = m_40 (p/40)^1.5 versus the true p^1.5: same up to the slope
            assert!((t.log_quotient(p) - g.log_quotient(p)).abs() < 1e-9);
        }
    }

    #[test]
    fn json_forms() {
        let w = WeightSequence::from_json_str(r#"{"family":"gevrey","s":2.0,"p_max":200}"#).unwrap();
        assert_eq!(w.p_max, 200);
        assert!((w.log_m(3) - 36f64.ln()).abs() < 1e-12);
        let t = WeightSequence::from_json_str(r#"{"family":"table","log_values":[0,0,0.7],"tail":{"rule":"gevrey","s":1.5}}"#).unwrap();
        assert_eq!(t.p_max, 200);
        let back = WeightSequence::from_json(&t.to_json()).unwrap();
        assert_eq!(back.log_values(), t.log_values());
        assert!(WeightSequence::from_json_str(r#"{"family":"gevrey"}"#).is_err());
    }
}
