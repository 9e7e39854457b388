use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin >= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// A verdict together with its worst-case margin (positive means satisfied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub verdict: Verdict,
    pub margin: Option<f64>,
}

impl Check {
    pub fn margin(margin: f64) -> Self {
        Check {
            verdict: if margin.is_finite() {
                Verdict::from_margin(margin)
            } else {
                Verdict::Fail
            },
            margin: margin.is_finite().then_some(margin),
        }
    }

    pub fn not_applicable() -> Self {
        Check {
            verdict: Verdict::NotApplicable,
            margin: None,
        }
    }
}

/// Reads `null` as NaN; serde_json already writes non-finite floats as `null`.
pub(crate) fn nan_if_null<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}
