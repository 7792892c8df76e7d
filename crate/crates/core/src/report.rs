//! Verification report emitted by every check in the crate.

use serde::{Deserialize, Serialize};

/// One named sub-assertion inside a larger check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    /// Exact or target value when one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl SubCheck {
    /// value must not exceed threshold.
    pub fn upper(name: impl Into<String>, value: f64, threshold: f64) -> SubCheck {
        SubCheck {
            name: name.into(),
            target: None,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// |value - target| must not exceed threshold.
    pub fn near(name: impl Into<String>, value: f64, target: f64, threshold: f64) -> SubCheck {
        SubCheck {
            name: name.into(),
            target: Some(target),
            value,
            threshold,
            pass: (value - target).abs() <= threshold,
        }
    }
}

/// Outcome of a verification run: named check, exact/target and empirical
/// values, tolerance, pass/fail, and the reproducibility block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub subchecks: Vec<SubCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null", default)]
    pub details: serde_json::Value,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>) -> VerificationReport {
        VerificationReport {
            check: check.into(),
            params: serde_json::Value::Null,
            exact: None,
            estimate: None,
            stderr: None,
            threshold: None,
            pass: false,
            seed: None,
            n_samples: None,
            wall_time_s: 0.0,
            subchecks: Vec::new(),
            notes: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    /// Sets `pass` to the conjunction of all subchecks.
    pub fn finish_from_subchecks(&mut self) {
        self.pass = self.subchecks.iter().all(|s| s.pass);
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Serialization with the wall-time field zeroed; two runs with the
    /// same seed must agree byte-for-byte on this form.
    pub fn canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_s = 0.0;
        serde_json::to_string_pretty(&clone).expect("report serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_ignores_wall_time() {
        let mut a = VerificationReport::new("demo");
        let mut b = VerificationReport::new("demo");
        a.wall_time_s = 1.25;
        b.wall_time_s = 9.5;
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_ne!(a.to_json_pretty(), b.to_json_pretty());
    }

    #[test]
    fn subcheck_helpers() {
        assert!(SubCheck::upper("x", 0.5, 1.0).pass);
        assert!(!SubCheck::upper("x", 2.0, 1.0).pass);
        assert!(SubCheck::near("y", 1.05, 1.0, 0.1).pass);
        assert!(!SubCheck::near("y", 1.5, 1.0, 0.1).pass);
    }
}
