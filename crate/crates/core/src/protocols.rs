//! The two heralded schemes built from frequency-bin pairs and AOMs.
//!
//! Both schemes start from the same two pairs
//!
//! ```text
//! pair A = (|1,ω⟩|2,ω+δ⟩ + |1',ω+δ⟩|2',ω⟩) / √2
//! pair B = (|3,ω⟩|4,ω+δ⟩ + |3',ω+δ⟩|4',ω⟩) / √2
//! ```
//!
//! *Swapping* sends ports 3 (ω) and 2 (ω+δ) into AOM1 and ports 2' (ω) and
//! 3' (ω+δ) into AOM2, then looks for exactly one click behind each AOM.
//! Photons 1 and 4 are left in a Bell state whose sign depends on whether
//! the two clicks were both transmitted / both deflected (`+`) or mixed
//! (`-`).
//!
//! *GHZ creation* uses AOM1 only. A single click at T or T' leaves photons 1,
//! 4 and the remaining photon from 2'/3' in a three-qubit GHZ state.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::elements::LinearElement;
use crate::entanglement::{
    concurrence, entanglement_entropy, extract_qubits, fidelity, QubitState, RailSpec,
};
use crate::error::{Error, Result};
use crate::fock::{tensor, BasisState, Channel, StateVector};
use crate::json;
use crate::measurement::{outcome_table, post_select, DetectionPattern, OutcomeTable};

/// Port labels shared by both schemes.
pub mod ports {
    pub const A1: &str = "1";
    pub const A1P: &str = "1'";
    pub const A2: &str = "2";
    pub const A2P: &str = "2'";
    pub const B3: &str = "3";
    pub const B3P: &str = "3'";
    pub const B4: &str = "4";
    pub const B4P: &str = "4'";
    pub const T1: &str = "T1";
    pub const T1P: &str = "T1'";
    pub const T2: &str = "T2";
    pub const T2P: &str = "T2'";
    pub const T: &str = "T";
    pub const TP: &str = "T'";
}

/// Default verification tolerance for reports.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A-priori forward-error bound for the few dozen rounded operations behind
/// each reported value. Verification below this is not meaningful.
pub const TOLERANCE_FLOOR: f64 = 64.0 * f64::EPSILON;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

const SWAP_NOTE: &str = "detector subscripts follow the AOM convention: the carrier (ω) leaves \
    through the transmitted port T_i and ω+δ through the deflected port T_i'; the printed \
    expansion transposes T1 and T1' in its second product";
const GHZ_NOTE: &str = "photon 4 accompanies photons 1' and 2' at frequency ω+δ, as fixed by \
    pair B; the printed three-photon expansion shows ω for it in one place";

fn pair(a: &str, a_freq: u32, b: &str, b_freq: u32, a2: &str, b2: &str) -> StateVector {
    // (|a,f⟩|b,g⟩ + |a2,g⟩|b2,f⟩)/√2 with f = a_freq, g = b_freq
    let first = BasisState::canonicalize([
        (Channel::new(a, crate::fock::FrequencyBin(a_freq)), 1),
        (Channel::new(b, crate::fock::FrequencyBin(b_freq)), 1),
    ])
    .expect("counts are positive");
    let second = BasisState::canonicalize([
        (Channel::new(a2, crate::fock::FrequencyBin(b_freq)), 1),
        (Channel::new(b2, crate::fock::FrequencyBin(a_freq)), 1),
    ])
    .expect("counts are positive");
    StateVector::from_terms([
        (first, Complex64::new(FRAC_1_SQRT_2, 0.0)),
        (second, Complex64::new(FRAC_1_SQRT_2, 0.0)),
    ])
    .expect("both terms carry two photons")
}

/// `(|1,ω⟩|2,ω+δ⟩ + |1',ω+δ⟩|2',ω⟩)/√2`
pub fn pair_a() -> StateVector {
    pair(ports::A1, 0, ports::A2, 1, ports::A1P, ports::A2P)
}

/// `(|3,ω⟩|4,ω+δ⟩ + |3',ω+δ⟩|4',ω⟩)/√2`
pub fn pair_b() -> StateVector {
    pair(ports::B3, 0, ports::B4, 1, ports::B3P, ports::B4P)
}

/// The single-photon matrix of the incorrect AOM map, which sends both
/// inputs to the same output superposition. It is not unitary.
pub fn flawed_aom_matrix() -> DMatrix<Complex64> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    DMatrix::from_row_slice(2, 2, &[h, h, h, h])
}

fn aom_with(matrix: &DMatrix<Complex64>, lo: &str, hi: &str, t: &str, d: &str) -> Result<LinearElement> {
    LinearElement::new(
        vec![Channel::carrier(lo), Channel::shifted(hi)],
        vec![Channel::carrier(t), Channel::shifted(d)],
        matrix.clone(),
    )
}

fn joint_input(a: &StateVector, b: &StateVector) -> StateVector {
    tensor(a, b)
        .and_then(|s| s.normalize())
        .expect("pairs occupy disjoint ports")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Swap,
    Ghz,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Swap => "swap",
            Protocol::Ghz => "ghz",
        }
    }
}

/// Sign of the heralded two- or three-qubit cat state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn phase(self) -> Complex64 {
        match self {
            Sign::Plus => ONE,
            Sign::Minus => -ONE,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapSetup {
    pub pair_a: StateVector,
    pub pair_b: StateVector,
    pub aom1: LinearElement,
    pub aom2: LinearElement,
    pub detectors: Vec<Channel>,
    /// Rails for photons 1 and 4.
    pub rails: RailSpec,
}

impl SwapSetup {
    /// Builds the setup with a caller-supplied AOM matrix in place of the
    /// correct one. Fails for any non-unitary matrix.
    pub fn with_aom_matrix(matrix: &DMatrix<Complex64>) -> Result<SwapSetup> {
        use ports::*;
        Ok(SwapSetup {
            pair_a: pair_a(),
            pair_b: pair_b(),
            aom1: aom_with(matrix, B3, A2, T1, T1P)?,
            aom2: aom_with(matrix, A2P, B3P, T2, T2P)?,
            detectors: vec![
                Channel::carrier(T1),
                Channel::shifted(T1P),
                Channel::carrier(T2),
                Channel::shifted(T2P),
            ],
            rails: RailSpec::new(vec![
                (Channel::carrier(A1), Channel::shifted(A1P)),
                (Channel::carrier(B4P), Channel::shifted(B4)),
            ])?,
        })
    }

    /// `pair_a ⊗ pair_b`, renormalized so the four amplitudes are exactly 1/2.
    pub fn input(&self) -> StateVector {
        joint_input(&self.pair_a, &self.pair_b)
    }

    /// Joint state after both AOMs.
    pub fn evolve(&self) -> Result<StateVector> {
        let after_first = self.aom1.apply(&self.input())?;
        self.aom2.apply(&after_first)
    }

    /// Terms of `state` with exactly one photon behind each AOM, renormalized.
    pub fn coincidence_branches(&self, state: &StateVector) -> Result<StateVector> {
        let behind_1 = [&self.detectors[0], &self.detectors[1]];
        let behind_2 = [&self.detectors[2], &self.detectors[3]];
        let kept = state
            .terms()
            .filter(|(b, _)| {
                behind_1.iter().map(|c| b.count(c)).sum::<u32>() == 1
                    && behind_2.iter().map(|c| b.count(c)).sum::<u32>() == 1
            })
            .map(|(b, a)| (b.clone(), *a));
        StateVector::from_terms(kept)?.normalize()
    }

    /// Exactly one click behind each AOM.
    pub fn heralds(&self, pattern: &DetectionPattern) -> bool {
        let behind = |i: usize| pattern.count(&self.detectors[i]) + pattern.count(&self.detectors[i + 1]);
        behind(0) == 1 && behind(2) == 1
    }

    /// Bell sign predicted by the AOM phases: `+` when both clicks are
    /// transmitted or both deflected, `-` otherwise.
    pub fn predicted_sign(&self, pattern: &DetectionPattern) -> Option<Sign> {
        if !self.heralds(pattern) {
            return None;
        }
        let deflected_1 = pattern.count(&self.detectors[1]) == 1;
        let deflected_2 = pattern.count(&self.detectors[3]) == 1;
        Some(if deflected_1 == deflected_2 {
            Sign::Plus
        } else {
            Sign::Minus
        })
    }
}

pub fn build_swap() -> SwapSetup {
    let aom = LinearElement::aom("lo", "hi", "t", "d").expect("AOM matrix is unitary");
    SwapSetup::with_aom_matrix(aom.matrix()).expect("AOM matrix is unitary")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzSetup {
    pub pair_a: StateVector,
    pub pair_b: StateVector,
    pub aom: LinearElement,
    pub detectors: Vec<Channel>,
    /// Rails for photon 1, the undetected middle photon (2' or 3'), photon 4.
    pub rails: RailSpec,
}

impl GhzSetup {
    pub fn with_aom_matrix(matrix: &DMatrix<Complex64>) -> Result<GhzSetup> {
        use ports::*;
        Ok(GhzSetup {
            pair_a: pair_a(),
            pair_b: pair_b(),
            aom: aom_with(matrix, B3, A2, T, TP)?,
            detectors: vec![Channel::carrier(T), Channel::shifted(TP)],
            rails: RailSpec::new(vec![
                (Channel::carrier(A1), Channel::shifted(A1P)),
                (Channel::carrier(A2P), Channel::shifted(B3P)),
                (Channel::carrier(B4P), Channel::shifted(B4)),
            ])?,
        })
    }

    /// `pair_a ⊗ pair_b`, renormalized so the four amplitudes are exactly 1/2.
    pub fn input(&self) -> StateVector {
        joint_input(&self.pair_a, &self.pair_b)
    }

    pub fn evolve(&self) -> Result<StateVector> {
        self.aom.apply(&self.input())
    }

    /// Exactly one photon in total at T and T'.
    pub fn heralds(&self, pattern: &DetectionPattern) -> bool {
        pattern.total() == 1
    }

    /// `+` for a transmitted click, `-` for a deflected one.
    pub fn predicted_sign(&self, pattern: &DetectionPattern) -> Option<Sign> {
        if !self.heralds(pattern) {
            return None;
        }
        Some(if pattern.count(&self.detectors[0]) == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        })
    }
}

pub fn build_ghz() -> GhzSetup {
    let aom = LinearElement::aom("lo", "hi", "t", "d").expect("AOM matrix is unitary");
    GhzSetup::with_aom_matrix(aom.matrix()).expect("AOM matrix is unitary")
}

/// `(|00⟩ ± |11⟩)/√2`
pub fn bell(sign: Sign) -> QubitState {
    QubitState::cat(2, 0b00, 0b11, sign.phase())
}

/// `(|010⟩ ± |101⟩)/√2`
pub fn ghz(sign: Sign) -> QubitState {
    QubitState::cat(3, 0b010, 0b101, sign.phase())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeReport {
    pub pattern: DetectionPattern,
    pub probability: f64,
    pub conditional: StateVector,
    /// Sign of the heralded cat state, read off the conditional state.
    pub heralds: Option<Sign>,
    /// Sign predicted from the click pattern alone.
    pub predicted: Option<Sign>,
    pub qubits: Option<QubitState>,
    /// Entropy between qubit 0 and the rest.
    pub entropy: Option<f64>,
    /// Every single-qubit marginal entropy.
    pub marginal_entropies: Vec<f64>,
    pub concurrence: Option<f64>,
    /// Fidelity with the ideal state of the heralded sign.
    pub fidelity: Option<f64>,
}

impl OutcomeReport {
    fn label(&self, protocol: Protocol) -> Option<String> {
        let prefix = match protocol {
            Protocol::Swap => "bell",
            Protocol::Ghz => "ghz",
        };
        self.heralds.map(|s| format!("{prefix}{s}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    /// Joint state after the AOMs, before detection.
    pub joint: StateVector,
    pub table: OutcomeTable,
    pub rows: Vec<OutcomeReport>,
    pub success_probability: f64,
    /// Heralded probability per sign.
    pub sign_probability: BTreeMap<Sign, f64>,
    pub notes: Vec<String>,
}

/// Reads the sign of a heralded state by fidelity with both ideal states.
fn classify(q: &QubitState, ideal: fn(Sign) -> QubitState) -> Result<(Sign, f64)> {
    let plus = fidelity(q, &ideal(Sign::Plus))?;
    let minus = fidelity(q, &ideal(Sign::Minus))?;
    Ok(if plus >= minus {
        (Sign::Plus, plus)
    } else {
        (Sign::Minus, minus)
    })
}

fn metrics(
    row: &mut OutcomeReport,
    rails: &RailSpec,
    heralded: bool,
    ideal: fn(Sign) -> QubitState,
) -> Result<()> {
    let q = match extract_qubits(&row.conditional, rails) {
        Ok(q) => q,
        Err(Error::RailViolation(_)) if !heralded => return Ok(()),
        Err(e) => return Err(e),
    };
    row.entropy = Some(entanglement_entropy(&q, &[0])?);
    row.marginal_entropies = (0..q.qubits())
        .map(|i| entanglement_entropy(&q, &[i]))
        .collect::<Result<_>>()?;
    if q.qubits() == 2 {
        row.concurrence = Some(concurrence(&q)?);
    }
    if heralded {
        let (sign, f) = classify(&q, ideal)?;
        row.heralds = Some(sign);
        row.fidelity = Some(f);
    }
    row.qubits = Some(q);
    Ok(())
}

fn assemble(
    protocol: Protocol,
    joint: StateVector,
    table: OutcomeTable,
    rails: &RailSpec,
    predict: impl Fn(&DetectionPattern) -> Option<Sign>,
    ideal: fn(Sign) -> QubitState,
    notes: Vec<String>,
) -> Result<ProtocolReport> {
    let mut rows = Vec::with_capacity(table.outcomes.len());
    let mut success_probability = 0.0;
    let mut sign_probability = BTreeMap::from([(Sign::Plus, 0.0), (Sign::Minus, 0.0)]);
    for outcome in &table.outcomes {
        let predicted = predict(&outcome.pattern);
        let mut row = OutcomeReport {
            pattern: outcome.pattern.clone(),
            probability: outcome.probability,
            conditional: outcome.conditional.clone(),
            heralds: None,
            predicted,
            qubits: None,
            entropy: None,
            marginal_entropies: Vec::new(),
            concurrence: None,
            fidelity: None,
        };
        metrics(&mut row, rails, predicted.is_some(), ideal)?;
        if let Some(sign) = row.heralds {
            success_probability += row.probability;
            *sign_probability.entry(sign).or_default() += row.probability;
        }
        rows.push(row);
    }
    Ok(ProtocolReport {
        protocol,
        joint,
        table,
        rows,
        success_probability,
        sign_probability,
        notes,
    })
}

pub fn run_swap_with(setup: &SwapSetup) -> Result<ProtocolReport> {
    let joint = setup.evolve()?;
    let table = outcome_table(&joint, &setup.detectors)?;
    assemble(
        Protocol::Swap,
        joint,
        table,
        &setup.rails,
        |p| setup.predicted_sign(p),
        bell,
        vec![SWAP_NOTE.to_string()],
    )
}

pub fn run_swap() -> ProtocolReport {
    run_swap_with(&build_swap()).expect("the packaged swap setup is consistent")
}

pub fn run_ghz_with(setup: &GhzSetup) -> Result<ProtocolReport> {
    let joint = setup.evolve()?;
    let table = outcome_table(&joint, &setup.detectors)?;
    assemble(
        Protocol::Ghz,
        joint,
        table,
        &setup.rails,
        |p| setup.predicted_sign(p),
        ghz,
        vec![GHZ_NOTE.to_string()],
    )
}

pub fn run_ghz() -> ProtocolReport {
    run_ghz_with(&build_ghz()).expect("the packaged GHZ setup is consistent")
}

/// One verification line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn close(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Check {
        let deviation = (value - target).abs();
        Check {
            name: name.into(),
            passed: deviation <= tol,
            detail: format!("value {value:e}, target {target:e}, deviation {deviation:e}"),
        }
    }

    fn holds(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl ProtocolReport {
    pub fn heralded(&self) -> impl Iterator<Item = &OutcomeReport> {
        self.rows.iter().filter(|r| r.predicted.is_some())
    }

    pub fn row(&self, pattern: &DetectionPattern) -> Option<&OutcomeReport> {
        self.rows.iter().find(|r| &r.pattern == pattern)
    }

    fn expected_probability(&self, pattern: &DetectionPattern) -> f64 {
        match self.protocol {
            Protocol::Swap => 0.125,
            Protocol::Ghz => match pattern.total() {
                0 | 1 => 0.25,
                _ => 0.125,
            },
        }
    }

    /// Checks every expected property at tolerance `tol`.
    pub fn verify(&self, tol: f64) -> Vec<Check> {
        let mut checks = vec![Check::holds(
            "tolerance above accumulation floor",
            tol >= TOLERANCE_FLOOR,
            format!("tolerance {tol:e}, floor {TOLERANCE_FLOOR:e}"),
        )];
        let expected_rows = match self.protocol {
            Protocol::Swap => 8,
            Protocol::Ghz => 5,
        };
        checks.push(Check::holds(
            "outcome count",
            self.rows.len() == expected_rows,
            format!("{} outcomes, expected {expected_rows}", self.rows.len()),
        ));
        checks.push(Check::close(
            "total probability",
            self.table.total_probability(),
            1.0,
            tol,
        ));
        for row in &self.rows {
            let label = row.pattern.label();
            checks.push(Check::close(
                format!("probability {label}"),
                row.probability,
                self.expected_probability(&row.pattern),
                tol,
            ));
            checks.push(Check::close(
                format!("conditional norm {label}"),
                row.conditional.norm_sqr(),
                1.0,
                tol,
            ));
            let Some(predicted) = row.predicted else {
                continue;
            };
            checks.push(Check::holds(
                format!("sign {label}"),
                row.heralds == Some(predicted),
                format!("heralded {:?}, predicted {predicted}", row.heralds),
            ));
            checks.push(Check::close(
                format!("fidelity {label}"),
                row.fidelity.unwrap_or(f64::NAN),
                1.0,
                tol,
            ));
            match self.protocol {
                Protocol::Swap => {
                    checks.push(Check::close(
                        format!("entropy {label}"),
                        row.entropy.unwrap_or(f64::NAN),
                        1.0,
                        tol,
                    ));
                    checks.push(Check::close(
                        format!("concurrence {label}"),
                        row.concurrence.unwrap_or(f64::NAN),
                        1.0,
                        tol,
                    ));
                }
                Protocol::Ghz => {
                    for (q, s) in row.marginal_entropies.iter().enumerate() {
                        checks.push(Check::close(
                            format!("marginal entropy q{q} {label}"),
                            *s,
                            1.0,
                            tol,
                        ));
                    }
                    checks.push(Check::holds(
                        format!("marginal count {label}"),
                        row.marginal_entropies.len() == 3,
                        format!("{} marginals", row.marginal_entropies.len()),
                    ));
                }
            }
        }
        let heralded = self.heralded().count();
        checks.push(Check::holds(
            "heralding outcomes",
            heralded == match self.protocol {
                Protocol::Swap => 4,
                Protocol::Ghz => 2,
            },
            format!("{heralded} heralding outcomes"),
        ));
        checks.push(Check::close("success probability", self.success_probability, 0.5, tol));
        let plus = self.sign_probability[&Sign::Plus];
        let minus = self.sign_probability[&Sign::Minus];
        checks.push(Check::close(
            "plus share of successes",
            plus / self.success_probability,
            0.5,
            tol,
        ));
        checks.push(Check::close(
            "minus share of successes",
            minus / self.success_probability,
            0.5,
            tol,
        ));
        if self.protocol == Protocol::Swap {
            let setup = build_swap();
            let same_aom = DetectionPattern::new(
                &setup.detectors,
                [(setup.detectors[0].clone(), 1), (setup.detectors[1].clone(), 1)],
            )
            .expect("detector channels");
            let p = post_select(&self.joint, &same_aom, &setup.detectors)
                .map(|(p, _)| p)
                .unwrap_or(f64::NAN);
            checks.push(Check::close("same-AOM coincidence suppressed", p, 0.0, tol));
        }
        checks
    }

    pub fn verified(&self, tol: f64) -> bool {
        self.verify(tol).iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let opt = |v: Option<f64>| v.map(json::float).unwrap_or_else(|| "null".into());
                let heralds = r
                    .label(self.protocol)
                    .map(|l| json::string(&l))
                    .unwrap_or_else(|| "null".into());
                format!(
                    "{{\"pattern\":{},\"prob\":{},\"state\":{},\"entropy\":{},\"concurrence\":{},\"fidelity\":{},\"heralds\":{}}}",
                    r.pattern.to_json(),
                    json::float(r.probability),
                    r.conditional.to_json(),
                    opt(r.entropy),
                    opt(r.concurrence),
                    opt(r.fidelity),
                    heralds
                )
            })
            .collect();
        let notes: Vec<String> = self.notes.iter().map(|n| json::string(n)).collect();
        format!(
            "{{\"protocol\":{},\"success_prob\":{},\"outcomes\":[{}],\"notes\":[{}]}}",
            json::string(self.protocol.name()),
            json::float(self.success_probability),
            rows.join(","),
            notes.join(",")
        )
    }

    /// `pattern,prob,entropy,concurrence-or-fidelity`; concurrence for the
    /// swap scheme, fidelity for GHZ.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("pattern,prob,entropy,concurrence-or-fidelity\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(json::float).unwrap_or_default();
            let metric = match self.protocol {
                Protocol::Swap => r.concurrence,
                Protocol::Ghz => r.fidelity,
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                json::csv_field(&r.pattern.label()),
                json::float(r.probability),
                opt(r.entropy),
                opt(metric)
            ));
        }
        out
    }
}
