//! Circuit files for `aomsim run`.
//!
//! ```json
//! {
//!   "channels":  [{"port": "a", "freq": 0}, ...],
//!   "initial":   [{"amp": [re, im], "occ": [{"port": "a", "freq": 0, "n": 1}, ...]}, ...],
//!   "elements":  [{"kind": "aom", ...} | {"kind": "matrix", ...}, ...],
//!   "detectors": [{"port": "t", "freq": 0}, ...]
//! }
//! ```

use std::collections::BTreeSet;
use std::fmt;

use aomsim_core::{BasisState, Channel, ElementSpec, FrequencyBin, LinearElement, StateVector};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// Location such as `line 3, column 7` or `elements[1].inputs[0]`.
    pub at: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.at, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(at: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError {
        at: at.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    channels: Vec<Channel>,
    initial: Vec<RawTerm>,
    #[serde(default)]
    elements: Vec<ElementSpec>,
    #[serde(default)]
    detectors: Vec<Channel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    amp: [f64; 2],
    occ: Vec<RawOcc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOcc {
    port: String,
    freq: u32,
    n: u32,
}

/// A validated circuit: normalized input, unitary elements, declared
/// detectors.
#[derive(Debug, Clone)]
pub struct CircuitConfig {
    pub channels: Vec<Channel>,
    pub initial: StateVector,
    pub elements: Vec<LinearElement>,
    pub detectors: Vec<Channel>,
}

impl CircuitConfig {
    pub fn parse(text: &str) -> Result<CircuitConfig, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| err(format!("line {}, column {}", e.line(), e.column()), e))?;

        let declared: BTreeSet<&Channel> = raw.channels.iter().collect();
        let check = |at: String, c: &Channel| -> Result<(), ConfigError> {
            if declared.contains(c) {
                Ok(())
            } else {
                Err(err(at, format!("undeclared channel {c}")))
            }
        };

        let mut terms = Vec::with_capacity(raw.initial.len());
        for (i, term) in raw.initial.iter().enumerate() {
            let mut occ = Vec::with_capacity(term.occ.len());
            for (j, o) in term.occ.iter().enumerate() {
                let channel = Channel::new(o.port.clone(), FrequencyBin(o.freq));
                check(format!("initial[{i}].occ[{j}]"), &channel)?;
                occ.push((channel, o.n));
            }
            let basis = BasisState::canonicalize(occ).map_err(|e| err(format!("initial[{i}]"), e))?;
            terms.push((basis, Complex64::new(term.amp[0], term.amp[1])));
        }
        let initial = StateVector::from_terms(terms)
            .and_then(|s| s.normalize())
            .map_err(|e| err("initial", e))?;

        let mut elements = Vec::with_capacity(raw.elements.len());
        for (i, spec) in raw.elements.iter().enumerate() {
            for (j, c) in spec.channels().iter().enumerate() {
                check(format!("elements[{i}].channels[{j}]"), c)?;
            }
            elements.push(spec.build().map_err(|e| err(format!("elements[{i}]"), e))?);
        }

        for (i, c) in raw.detectors.iter().enumerate() {
            check(format!("detectors[{i}]"), c)?;
        }

        Ok(CircuitConfig {
            channels: raw.channels.clone(),
            initial,
            elements,
            detectors: raw.detectors,
        })
    }

    /// Applies the elements in order.
    pub fn evolve(&self) -> Result<StateVector, ConfigError> {
        let mut state = self.initial.clone();
        for (i, element) in self.elements.iter().enumerate() {
            state = element
                .apply(&state)
                .map_err(|e| err(format!("elements[{i}]"), e))?;
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undeclared_channel_is_named() {
        let text = r#"{"channels":[{"port":"a","freq":0}],
            "initial":[{"amp":[1,0],"occ":[{"port":"zz","freq":1,"n":1}]}]}"#;
        let e = CircuitConfig::parse(text).unwrap_err();
        assert_eq!(e.at, "initial[0].occ[0]");
        assert!(e.message.contains("zz:1"));
    }

    #[test]
    fn syntax_error_reports_line() {
        let e = CircuitConfig::parse("{\n\"channels\": [,]}").unwrap_err();
        assert!(e.at.starts_with("line 2"), "{e}");
    }

    #[test]
    fn zero_initial_state_rejected() {
        let text = r#"{"channels":[{"port":"a","freq":0}],
            "initial":[{"amp":[0,0],"occ":[{"port":"a","freq":0,"n":1}]}]}"#;
        assert_eq!(CircuitConfig::parse(text).unwrap_err().at, "initial");
    }

    #[test]
    fn non_unitary_element_rejected_at_load() {
        let text = r#"{"channels":[{"port":"a","freq":0},{"port":"b","freq":0}],
            "initial":[{"amp":[1,0],"occ":[{"port":"a","freq":0,"n":1}]}],
            "elements":[{"kind":"matrix","inputs":[{"port":"a","freq":0}],
                         "outputs":[{"port":"b","freq":0}],"m":[[[2,0]]]}]}"#;
        let e = CircuitConfig::parse(text).unwrap_err();
        assert_eq!(e.at, "elements[0]");
        assert!(e.message.contains("not unitary"));
    }
}
