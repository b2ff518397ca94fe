//! Named pass/fail checks with the measured value and its threshold.

use serde::{Deserialize, Deserializer, Serialize};

fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: String,
    #[serde(deserialize_with = "nan_if_null")]
    pub measured: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub threshold: f64,
    pub pass: bool,
}

impl Verdict {
    /// Passes when `measured < threshold`.
    pub fn below(criterion: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { criterion: criterion.into(), measured, threshold, pass: measured < threshold }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(criterion: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { criterion: criterion.into(), measured, threshold, pass: measured >= threshold }
    }

    /// Passes when `lo <= measured <= hi`; `threshold` records the nearer bound.
    pub fn within(criterion: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        let threshold = if (measured - lo).abs() < (measured - hi).abs() { lo } else { hi };
        Self { criterion: criterion.into(), measured, threshold, pass: (lo..=hi).contains(&measured) }
    }

    pub fn flag(criterion: impl Into<String>, ok: bool) -> Self {
        Self { criterion: criterion.into(), measured: f64::from(u8::from(ok)), threshold: 1.0, pass: ok }
    }
}

pub fn all_pass(vs: &[Verdict]) -> bool {
    vs.iter().all(|v| v.pass)
}

/// JSON array of verdicts; non-finite numbers are written as `null`.
pub fn to_json(vs: &[Verdict]) -> String {
    serde_json::to_string_pretty(vs).expect("verdicts serialize")
}
