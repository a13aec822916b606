//! Photon-number-resolving detection on a declared set of channels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{BasisState, Channel, StateVector};
use crate::json;

/// Click counts on every detector channel, zeros included.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionPattern {
    counts: BTreeMap<Channel, u32>,
}

impl DetectionPattern {
    /// Pattern over `detectors`; channels absent from `counts` read zero.
    pub fn new<I>(detectors: &[Channel], counts: I) -> Result<DetectionPattern>
    where
        I: IntoIterator<Item = (Channel, u32)>,
    {
        let mut map: BTreeMap<Channel, u32> = detectors.iter().map(|c| (c.clone(), 0)).collect();
        for (channel, n) in counts {
            match map.get_mut(&channel) {
                Some(slot) => *slot += n,
                None => return Err(Error::NotADetector(channel)),
            }
        }
        Ok(DetectionPattern { counts: map })
    }

    fn from_restriction(detectors: &[Channel], restricted: &BasisState) -> DetectionPattern {
        let mut counts: BTreeMap<Channel, u32> =
            detectors.iter().map(|c| (c.clone(), 0)).collect();
        for (c, n) in restricted.occupations() {
            counts.insert(c.clone(), *n);
        }
        DetectionPattern { counts }
    }

    pub fn counts(&self) -> &BTreeMap<Channel, u32> {
        &self.counts
    }

    pub fn count(&self, channel: &Channel) -> u32 {
        self.counts.get(channel).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    /// Detector channels with at least one click.
    pub fn fired(&self) -> impl Iterator<Item = (&Channel, u32)> {
        self.counts.iter().filter(|(_, n)| **n > 0).map(|(c, n)| (c, *n))
    }

    /// `{"port:freq": count, ...}`
    pub fn to_json(&self) -> String {
        let body: Vec<String> = self
            .counts
            .iter()
            .map(|(c, n)| format!("{}:{}", json::string(&c.to_string()), n))
            .collect();
        format!("{{{}}}", body.join(","))
    }

    /// Compact label listing fired detectors, e.g. `T1:0+T2:0`, or `none`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .fired()
            .map(|(c, n)| if n == 1 { c.to_string() } else { format!("{c}x{n}") })
            .collect();
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pattern: DetectionPattern,
    pub probability: f64,
    /// Normalized, phase-normalized state of the undetected channels.
    pub conditional: StateVector,
}

impl Outcome {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"pattern\":{},\"prob\":{},\"state\":{}}}",
            self.pattern.to_json(),
            json::float(self.probability),
            self.conditional.to_json()
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    pub detectors: Vec<Channel>,
    /// Sorted by pattern order.
    pub outcomes: Vec<Outcome>,
}

impl OutcomeTable {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    pub fn find(&self, pattern: &DetectionPattern) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| &o.pattern == pattern)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self.outcomes.iter().map(Outcome::to_json).collect();
        format!("[{}]", rows.join(","))
    }

    /// CSV with empty metric columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pattern,prob,entropy,concurrence-or-fidelity\n");
        for o in &self.outcomes {
            out.push_str(&format!(
                "{},{},,\n",
                json::csv_field(&o.pattern.label()),
                json::float(o.probability)
            ));
        }
        out
    }
}

type Partition = BTreeMap<BasisState, Vec<(BasisState, Complex64)>>;

fn check_detectors(detectors: &[Channel]) -> Result<Vec<Channel>> {
    let set: BTreeSet<&Channel> = detectors.iter().collect();
    if set.len() != detectors.len() {
        let dup = detectors
            .iter()
            .enumerate()
            .find(|(i, c)| detectors[..*i].contains(c))
            .map(|(_, c)| c.clone())
            .expect("a duplicate exists");
        return Err(Error::DuplicateDetector(dup));
    }
    let mut sorted = detectors.to_vec();
    sorted.sort();
    Ok(sorted)
}

fn ensure_normalized(s: &StateVector) -> Result<()> {
    if s.is_normalized() {
        Ok(())
    } else {
        Err(Error::Unnormalized(s.norm_sqr()))
    }
}

/// Groups terms by their restriction to the detector channels.
fn partition(s: &StateVector, detectors: &[Channel]) -> Partition {
    let set: BTreeSet<&Channel> = detectors.iter().collect();
    let mut groups: Partition = BTreeMap::new();
    for (basis, amp) in s.terms() {
        let (detected, rest) = basis.partition(|c| set.contains(c));
        groups.entry(detected).or_default().push((rest, *amp));
    }
    groups
}

fn finish(
    detectors: &[Channel],
    detected: &BasisState,
    rest: Vec<(BasisState, Complex64)>,
    prune_epsilon: f64,
) -> Result<Outcome> {
    let probability: f64 = rest.iter().map(|(_, a)| a.norm_sqr()).sum();
    let conditional = StateVector::from_terms_with_epsilon(rest, prune_epsilon)?
        .normalize()?
        .phase_normalized();
    Ok(Outcome {
        pattern: DetectionPattern::from_restriction(detectors, detected),
        probability,
        conditional,
    })
}

/// Enumerates every detection pattern with nonzero probability.
pub fn outcome_table(s: &StateVector, detectors: &[Channel]) -> Result<OutcomeTable> {
    ensure_normalized(s)?;
    let detectors = check_detectors(detectors)?;
    let mut outcomes = partition(s, &detectors)
        .into_iter()
        .map(|(detected, rest)| finish(&detectors, &detected, rest, s.prune_epsilon()))
        .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(OutcomeTable {
        detectors,
        outcomes,
    })
}

/// Probability and conditional state for one pattern. An unmatched pattern
/// yields probability 0 and the zero state.
pub fn post_select(
    s: &StateVector,
    pattern: &DetectionPattern,
    detectors: &[Channel],
) -> Result<(f64, StateVector)> {
    ensure_normalized(s)?;
    let detectors = check_detectors(detectors)?;
    if let Some(c) = pattern
        .counts()
        .keys()
        .find(|c| detectors.binary_search(c).is_err())
    {
        return Err(Error::NotADetector(c.clone()));
    }
    let pattern = DetectionPattern::new(&detectors, pattern.fired().map(|(c, n)| (c.clone(), n)))?;
    for (detected, rest) in partition(s, &detectors) {
        if DetectionPattern::from_restriction(&detectors, &detected) == pattern {
            let outcome = finish(&detectors, &detected, rest, s.prune_epsilon())?;
            return Ok((outcome.probability, outcome.conditional));
        }
    }
    Ok((0.0, StateVector::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FrequencyBin;

    fn basis(occ: &[(&str, u32, u32)]) -> BasisState {
        BasisState::canonicalize(
            occ.iter()
                .map(|(p, f, n)| (Channel::new(*p, FrequencyBin(*f)), *n)),
        )
        .unwrap()
    }

    fn bell_with_herald() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_terms([
            (basis(&[("a", 0, 1), ("D", 0, 1)]), Complex64::new(h, 0.0)),
            (basis(&[("a", 1, 1), ("D", 1, 1)]), Complex64::new(0.0, h)),
        ])
        .unwrap()
    }

    #[test]
    fn nothing_measured_gives_single_zero_pattern() {
        let s = StateVector::basis(basis(&[("a", 0, 1)]));
        let table = outcome_table(&s, &[Channel::carrier("D")]).unwrap();
        assert_eq!(table.outcomes.len(), 1);
        let o = &table.outcomes[0];
        assert_eq!(o.pattern.total(), 0);
        assert_eq!(o.probability, 1.0);
        assert_eq!(o.conditional, s);
    }

    #[test]
    fn detection_consumes_photons() {
        let dets = [Channel::carrier("D"), Channel::shifted("D")];
        let table = outcome_table(&bell_with_herald(), &dets).unwrap();
        assert_eq!(table.outcomes.len(), 2);
        for o in &table.outcomes {
            assert!((o.probability - 0.5).abs() < 1e-15);
            assert_eq!(o.conditional.support().len(), 1);
            let amp = o.conditional.terms().next().unwrap().1;
            assert!((amp.re - 1.0).abs() < 1e-15 && amp.im.abs() < 1e-15);
        }
    }

    #[test]
    fn post_select_matches_table_row() {
        let dets = [Channel::carrier("D"), Channel::shifted("D")];
        let s = bell_with_herald();
        let table = outcome_table(&s, &dets).unwrap();
        for o in &table.outcomes {
            let (p, cond) = post_select(&s, &o.pattern, &dets).unwrap();
            assert_eq!(p, o.probability);
            assert_eq!(cond, o.conditional);
        }
    }

    #[test]
    fn impossible_pattern_has_zero_probability() {
        let dets = [Channel::carrier("D")];
        let pattern = DetectionPattern::new(&dets, [(Channel::carrier("D"), 5)]).unwrap();
        let (p, cond) = post_select(&bell_with_herald(), &pattern, &dets).unwrap();
        assert_eq!(p, 0.0);
        assert!(cond.is_empty());
    }

    #[test]
    fn foreign_channel_in_pattern_rejected() {
        let dets = [Channel::carrier("D")];
        assert_eq!(
            DetectionPattern::new(&dets, [(Channel::carrier("X"), 1)]).unwrap_err(),
            Error::NotADetector(Channel::carrier("X"))
        );
        let wider = DetectionPattern::new(
            &[Channel::carrier("D"), Channel::carrier("X")],
            [(Channel::carrier("X"), 1)],
        )
        .unwrap();
        assert_eq!(
            post_select(&bell_with_herald(), &wider, &dets).unwrap_err(),
            Error::NotADetector(Channel::carrier("X"))
        );
    }

    #[test]
    fn unnormalized_input_rejected() {
        let s = bell_with_herald().scale(Complex64::new(2.0, 0.0));
        assert!(matches!(
            outcome_table(&s, &[Channel::carrier("D")]),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn pattern_json_and_label() {
        let dets = [Channel::carrier("T1"), Channel::shifted("T1'")];
        let p = DetectionPattern::new(&dets, [(Channel::carrier("T1"), 2)]).unwrap();
        assert_eq!(p.to_json(), r#"{"T1:0":2,"T1':1":0}"#);
        assert_eq!(p.label(), "T1:0x2");
    }
}
