//! Multi-photon bosonic states over (spatial port, frequency bin) channels.
//!
//! A [`StateVector`] is a sparse map from canonical Fock basis elements to
//! complex amplitudes. Every state has a definite total photon number; the
//! constructors reject superpositions of different photon numbers.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;

/// Amplitudes with modulus at or below this are dropped.
pub const DEFAULT_PRUNE_EPSILON: f64 = 1e-12;

/// Tolerance on `|norm² - 1|` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Discrete frequency bin. Bin 0 is the carrier ω, bin 1 the shifted ω+δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyBin(pub u32);

impl FrequencyBin {
    pub const CARRIER: FrequencyBin = FrequencyBin(0);
    pub const SHIFTED: FrequencyBin = FrequencyBin(1);
}

/// A single-particle mode: spatial port plus frequency bin.
///
/// The derived ordering (port lexicographically, then bin) is the canonical
/// order used for every sorted structure in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub port: String,
    pub freq: FrequencyBin,
}

impl Channel {
    pub fn new(port: impl Into<String>, freq: FrequencyBin) -> Self {
        Channel { port: port.into(), freq }
    }

    /// Channel at the carrier frequency ω.
    pub fn carrier(port: impl Into<String>) -> Self {
        Channel::new(port, FrequencyBin::CARRIER)
    }

    /// Channel at the shifted frequency ω+δ.
    pub fn shifted(port: impl Into<String>) -> Self {
        Channel::new(port, FrequencyBin::SHIFTED)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.port, self.freq.0)
    }
}

/// Fock basis element: sorted `(channel, count)` pairs, counts ≥ 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    occupations: Vec<(Channel, u32)>,
}

impl BasisState {
    pub fn vacuum() -> Self {
        BasisState::default()
    }

    /// Builds a basis state from unsorted, possibly repeated occupations.
    pub fn canonicalize<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Channel, u32)>,
    {
        let mut merged: BTreeMap<Channel, u32> = BTreeMap::new();
        for (channel, count) in raw {
            if count == 0 {
                return Err(Error::NonPositiveCount(channel));
            }
            *merged.entry(channel).or_insert(0) += count;
        }
        Ok(BasisState {
            occupations: merged.into_iter().collect(),
        })
    }

    /// Single photon in `channel`.
    pub fn single(channel: Channel) -> Self {
        BasisState {
            occupations: vec![(channel, 1)],
        }
    }

    pub fn occupations(&self) -> &[(Channel, u32)] {
        &self.occupations
    }

    pub fn photon_number(&self) -> u32 {
        self.occupations.iter().map(|(_, n)| n).sum()
    }

    pub fn count(&self, channel: &Channel) -> u32 {
        self.occupations
            .binary_search_by(|(c, _)| c.cmp(channel))
            .map(|i| self.occupations[i].1)
            .unwrap_or(0)
    }

    pub fn channels(&self) -> impl Iterator<Item = &Channel> {
        self.occupations.iter().map(|(c, _)| c)
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    /// Splits into the part on channels accepted by `pred` and the rest.
    pub fn partition<F>(&self, mut pred: F) -> (BasisState, BasisState)
    where
        F: FnMut(&Channel) -> bool,
    {
        let (inside, outside): (Vec<_>, Vec<_>) =
            self.occupations.iter().cloned().partition(|(c, _)| pred(c));
        (
            BasisState { occupations: inside },
            BasisState {
                occupations: outside,
            },
        )
    }

    /// Union of two basis states on disjoint channels.
    pub fn join(&self, other: &BasisState) -> Result<BasisState> {
        if let Some((c, _)) = self
            .occupations
            .iter()
            .find(|(c, _)| other.count(c) > 0)
        {
            return Err(Error::OverlappingSupport(c.clone()));
        }
        let mut occupations = self.occupations.clone();
        occupations.extend(other.occupations.iter().cloned());
        occupations.sort();
        Ok(BasisState { occupations })
    }

    fn with_added(&self, channel: &Channel) -> (BasisState, u32) {
        let mut occupations = self.occupations.clone();
        let previous = match occupations.binary_search_by(|(c, _)| c.cmp(channel)) {
            Ok(i) => {
                occupations[i].1 += 1;
                occupations[i].1 - 1
            }
            Err(i) => {
                occupations.insert(i, (channel.clone(), 1));
                0
            }
        };
        (BasisState { occupations }, previous)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, (c, n)) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if *n == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}^{n}")?;
            }
        }
        write!(f, "⟩")
    }
}

/// Sparse superposition of Fock basis states with a fixed photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    terms: BTreeMap<BasisState, Complex64>,
    prune_epsilon: f64,
}

impl Default for StateVector {
    fn default() -> Self {
        StateVector::zero()
    }
}

impl StateVector {
    /// The zero vector (no terms). Also serves as the empty-projection marker.
    pub fn zero() -> Self {
        StateVector {
            terms: BTreeMap::new(),
            prune_epsilon: DEFAULT_PRUNE_EPSILON,
        }
    }

    pub fn vacuum() -> Self {
        StateVector::basis(BasisState::vacuum())
    }

    pub fn basis(state: BasisState) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(state, Complex64::new(1.0, 0.0));
        StateVector {
            terms,
            prune_epsilon: DEFAULT_PRUNE_EPSILON,
        }
    }

    /// Sums amplitudes of repeated basis states, then prunes.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisState, Complex64)>,
    {
        StateVector::from_terms_with_epsilon(terms, DEFAULT_PRUNE_EPSILON)
    }

    pub fn from_terms_with_epsilon<I>(terms: I, prune_epsilon: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisState, Complex64)>,
    {
        let mut map: BTreeMap<BasisState, Complex64> = BTreeMap::new();
        let mut photons: Option<u32> = None;
        for (state, amp) in terms {
            let n = state.photon_number();
            match photons {
                None => photons = Some(n),
                Some(expected) if expected != n => {
                    return Err(Error::PhotonNumberMismatch { expected, found: n })
                }
                _ => {}
            }
            *map.entry(state).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(StateVector::from_map(map, prune_epsilon))
    }

    /// Caller guarantees a single photon number across keys.
    pub(crate) fn from_map(mut terms: BTreeMap<BasisState, Complex64>, prune_epsilon: f64) -> Self {
        terms.retain(|_, a| a.norm() > prune_epsilon);
        StateVector {
            terms,
            prune_epsilon,
        }
    }

    pub fn with_prune_epsilon(self, prune_epsilon: f64) -> Self {
        StateVector::from_map(self.terms, prune_epsilon)
    }

    pub fn prune_epsilon(&self) -> f64 {
        self.prune_epsilon
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&BasisState, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, state: &BasisState) -> Complex64 {
        self.terms
            .get(state)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Total photon number, `None` for the zero vector.
    pub fn photon_number(&self) -> Option<u32> {
        self.terms.keys().next().map(BasisState::photon_number)
    }

    /// Sorted set of channels occupied by any term.
    pub fn support(&self) -> Vec<Channel> {
        let mut channels: Vec<Channel> = self
            .terms
            .keys()
            .flat_map(|b| b.channels().cloned())
            .collect();
        channels.sort();
        channels.dedup();
        channels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        let terms = self.terms.iter().map(|(b, a)| (b.clone(), a * factor)).collect();
        StateVector::from_map(terms, self.prune_epsilon)
    }

    /// `self + other`; both must carry the same photon number.
    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if let (Some(expected), Some(found)) = (self.photon_number(), other.photon_number()) {
            if expected != found {
                return Err(Error::PhotonNumberMismatch { expected, found });
            }
        }
        let mut terms = self.terms.clone();
        for (b, a) in &other.terms {
            *terms.entry(b.clone()).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Ok(StateVector::from_map(terms, self.prune_epsilon))
    }

    pub fn normalize(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm <= DEFAULT_PRUNE_EPSILON {
            return Err(Error::ZeroState);
        }
        let terms = self
            .terms
            .iter()
            .map(|(b, a)| (b.clone(), a / norm))
            .collect();
        Ok(StateVector::from_map(terms, self.prune_epsilon))
    }

    /// Rotates the global phase so the canonically first amplitude is real
    /// and positive.
    pub fn phase_normalized(&self) -> StateVector {
        match self.terms.values().next() {
            Some(first) => {
                let phase = first.conj() / first.norm();
                self.scale(phase)
            }
            None => self.clone(),
        }
    }

    /// Termwise comparison over the union of supports.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        let mut worst: f64 = 0.0;
        for (b, a) in &self.terms {
            worst = worst.max((a - other.amplitude(b)).norm());
        }
        for (b, a) in &other.terms {
            if !self.terms.contains_key(b) {
                worst = worst.max(a.norm());
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Serializes as the JSON term array, terms in canonical order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, (basis, amp)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"occ\":[");
            for (j, (c, n)) in basis.occupations().iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!(
                    "{{\"port\":{},\"freq\":{},\"n\":{}}}",
                    json::string(&c.port),
                    c.freq.0,
                    n
                ));
            }
            out.push_str(&format!(
                "],\"re\":{},\"im\":{}}}",
                json::float(amp.re),
                json::float(amp.im)
            ));
        }
        out.push(']');
        out
    }

    /// Parses the JSON term array written by [`StateVector::to_json`].
    pub fn from_json(text: &str) -> std::result::Result<StateVector, String> {
        let records: Vec<TermRecord> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let terms = records
            .into_iter()
            .map(|r| {
                let basis = BasisState::canonicalize(
                    r.occ
                        .into_iter()
                        .map(|o| (Channel::new(o.port, FrequencyBin(o.freq)), o.n)),
                )?;
                Ok((basis, Complex64::new(r.re, r.im)))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        StateVector::from_terms(terms).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
struct TermRecord {
    occ: Vec<OccRecord>,
    re: f64,
    im: f64,
}

#[derive(Debug, Deserialize)]
struct OccRecord {
    port: String,
    freq: u32,
    n: u32,
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, b)?;
        }
        Ok(())
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Complex64 {
    let (small, large, conj_small) = if a.len() <= b.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    small
        .terms
        .iter()
        .filter_map(|(basis, amp)| {
            large.terms.get(basis).map(|other| {
                if conj_small {
                    amp.conj() * other
                } else {
                    other.conj() * amp
                }
            })
        })
        .sum()
}

/// Product state of two states on disjoint channels.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let support_b = b.support();
    if let Some(shared) = a.support().into_iter().find(|c| support_b.binary_search(c).is_ok()) {
        return Err(Error::OverlappingSupport(shared));
    }
    let mut terms = BTreeMap::new();
    for (ba, aa) in &a.terms {
        for (bb, ab) in &b.terms {
            terms.insert(ba.join(bb)?, aa * ab);
        }
    }
    Ok(StateVector::from_map(terms, a.prune_epsilon))
}

pub fn normalize(s: &StateVector) -> Result<StateVector> {
    s.normalize()
}

/// Bosonic creation operator on `channel`: `|n⟩ ↦ √(n+1)|n+1⟩`.
pub fn apply_creation(s: &StateVector, channel: &Channel) -> StateVector {
    let terms = s
        .terms
        .iter()
        .map(|(b, a)| {
            let (raised, previous) = b.with_added(channel);
            (raised, a * f64::from(previous + 1).sqrt())
        })
        .collect();
    StateVector::from_map(terms, s.prune_epsilon)
}
