use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::args::SystemArgs;

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters a result was produced from.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct InputEcho {
    pub l: usize,
    pub q: f64,
    pub mu: [f64; 2],
    pub geometry: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Command-specific settings.
    pub settings: BTreeMap<String, serde_json::Value>,
}

impl InputEcho {
    pub fn new(sys: &SystemArgs) -> Self {
        let rates = sys.rates().ok().flatten().map(|r| [r.alpha, r.beta, r.gamma, r.delta]);
        Self {
            l: sys.l,
            q: sys.q,
            mu: [sys.mu, sys.mu_im],
            geometry: if sys.periodic { "periodic" } else { "open" }.into(),
            rates,
            particles: if sys.periodic { sys.particles } else { None },
            truncation: sys.truncation,
            settings: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.settings.insert(key.into(), value.into());
        self
    }
}

/// One residual of one check.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: String,
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Cumulants `c_1 … c_K`; entry `i` is order `i + 1`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Default)]
pub struct CumulantTable {
    pub bethe: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_diff: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub command: String,
    pub input: InputEcho,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulants: Option<CumulantTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    /// Wall-clock seconds; left out of written files so that they are
    /// reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl ResultDocument {
    pub fn new(command: &str, input: InputEcho) -> Self {
        Self { schema_version: SCHEMA_VERSION, command: command.into(), input, checks: Vec::new(), cumulants: None, files: Vec::new(), seconds: None }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents contain only finite numbers and strings")
    }

    /// Copy without timing, as written to disk.
    pub fn for_file(&self) -> Self {
        Self { seconds: None, ..self.clone() }
    }
}

/// `v` with 17 significant digits.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut d = ResultDocument::new(
            "cumulants",
            InputEcho {
                l: 3,
                q: 0.3,
                mu: [0.0, 0.0],
                geometry: "open".into(),
                rates: Some([0.1 + 0.2, 0.7, 1.0 / 3.0, 0.0]),
                particles: None,
                truncation: Some(48),
                settings: BTreeMap::from([("orders".into(), 3.into())]),
            },
        );
        d.cumulants = Some(CumulantTable { bethe: vec![0.123_456_789_012_345_67, -1e-300], oracle: None, rel_diff: None });
        d.checks.push(CheckResult { check: "x".into(), name: "y".into(), residual: 5e-324, threshold: 1e-7, pass: true });
        d.seconds = Some(0.25);
        let back: ResultDocument = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!(!d.for_file().to_json().contains("seconds"));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.5), "5.0000000000000000e-1");
        assert_eq!(sig17(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
