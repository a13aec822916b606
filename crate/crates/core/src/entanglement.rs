//! Entanglement diagnostics on dual-rail qubit registers extracted from Fock
//! states.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Channel, StateVector, NORM_TOLERANCE};

/// Eigenvalues below this are treated as a broken density matrix.
const EIGENVALUE_FLOOR: f64 = -1e-10;

/// One logical qubit per `(zero_channel, one_channel)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RailSpec {
    rails: Vec<(Channel, Channel)>,
}

impl RailSpec {
    pub fn new(rails: Vec<(Channel, Channel)>) -> Result<RailSpec> {
        let mut seen = std::collections::BTreeSet::new();
        for (zero, one) in &rails {
            for c in [zero, one] {
                if !seen.insert(c.clone()) {
                    return Err(Error::InvalidQubits(format!("channel {c} appears in two rails")));
                }
            }
        }
        Ok(RailSpec { rails })
    }

    pub fn rails(&self) -> &[(Channel, Channel)] {
        &self.rails
    }

    pub fn len(&self) -> usize {
        self.rails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rails.is_empty()
    }
}

/// Dense register of `n` qubits; qubit 0 is the most significant bit of the
/// amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QubitState {
    pub fn new(qubits: usize, amplitudes: Vec<Complex64>) -> Result<QubitState> {
        if amplitudes.len() != 1 << qubits {
            return Err(Error::InvalidQubits(format!(
                "{} amplitudes for {qubits} qubits",
                amplitudes.len()
            )));
        }
        Ok(QubitState {
            qubits,
            amplitudes,
        })
    }

    /// `(|a⟩ + phase·|b⟩)/√2` for two computational basis indices.
    pub fn cat(qubits: usize, a: usize, b: usize, phase: Complex64) -> QubitState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amplitudes[a] += h;
        amplitudes[b] += phase * h;
        QubitState {
            qubits,
            amplitudes,
        }
    }

    pub fn basis(qubits: usize, index: usize) -> QubitState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        QubitState {
            qubits,
            amplitudes,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn ensure_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() <= NORM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::Unnormalized(n))
        }
    }

    pub fn scale(&self, factor: Complex64) -> QubitState {
        QubitState {
            qubits: self.qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &QubitState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Von Neumann entropy in bits, `0·log 0 = 0`.
    pub fn entropy(&self) -> Result<f64> {
        let mut total = 0.0;
        for lambda in self.eigenvalues() {
            if lambda < EIGENVALUE_FLOOR {
                return Err(Error::NegativeEigenvalue(lambda));
            }
            if lambda > 0.0 {
                total -= lambda * lambda.log2();
            }
        }
        Ok(total.max(0.0))
    }
}

/// Maps a Fock state carrying exactly one photon per rail onto qubits.
pub fn extract_qubits(s: &StateVector, spec: &RailSpec) -> Result<QubitState> {
    let k = spec.len();
    let mut rail_of: BTreeMap<&Channel, (usize, usize)> = BTreeMap::new();
    for (q, (zero, one)) in spec.rails().iter().enumerate() {
        rail_of.insert(zero, (q, 0));
        rail_of.insert(one, (q, 1));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << k];
    for (basis, amp) in s.terms() {
        let mut bits: Vec<Option<usize>> = vec![None; k];
        for (channel, n) in basis.occupations() {
            let Some(&(q, bit)) = rail_of.get(channel) else {
                return Err(Error::RailViolation(basis.to_string()));
            };
            if *n != 1 || bits[q].is_some() {
                return Err(Error::RailViolation(basis.to_string()));
            }
            bits[q] = Some(bit);
        }
        let mut index = 0;
        for bit in bits {
            let Some(bit) = bit else {
                return Err(Error::RailViolation(basis.to_string()));
            };
            index = (index << 1) | bit;
        }
        amplitudes[index] += amp;
    }
    QubitState::new(k, amplitudes)
}

fn check_selection(qubits: usize, selection: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = selection.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != selection.len() {
        return Err(Error::InvalidQubits("repeated qubit index".into()));
    }
    if let Some(&q) = sorted.iter().find(|&&q| q >= qubits) {
        return Err(Error::InvalidQubits(format!(
            "qubit {q} out of range for {qubits} qubits"
        )));
    }
    Ok(sorted)
}

/// Partial trace onto the qubits in `keep`, ordered by index.
pub fn reduced_density(q: &QubitState, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidQubits("empty keep set".into()));
    }
    q.ensure_normalized()?;
    let keep = check_selection(q.qubits, keep)?;
    let n = q.qubits;
    let env: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let bit = |index: usize, qubit: usize| (index >> (n - 1 - qubit)) & 1;
    let gather = |index: usize, which: &[usize]| {
        which.iter().fold(0usize, |acc, &qb| (acc << 1) | bit(index, qb))
    };

    let dim = 1 << keep.len();
    // Group amplitudes by environment index.
    let mut by_env: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
    for (index, amp) in q.amplitudes.iter().enumerate() {
        if amp.norm_sqr() > 0.0 {
            by_env
                .entry(gather(index, &env))
                .or_default()
                .push((gather(index, &keep), *amp));
        }
    }
    let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for column in by_env.values() {
        for &(i, a) in column {
            for &(j, b) in column {
                rho[(i, j)] += a * b.conj();
            }
        }
    }
    Ok(DensityMatrix { entries: rho })
}

/// Entropy across the cut `side | rest`, computed on the smaller side.
pub fn entanglement_entropy(q: &QubitState, side: &[usize]) -> Result<f64> {
    let side = check_selection(q.qubits, side)?;
    let rest: Vec<usize> = (0..q.qubits).filter(|i| !side.contains(i)).collect();
    let smaller = if side.len() <= rest.len() { side } else { rest };
    if smaller.is_empty() {
        q.ensure_normalized()?;
        return Ok(0.0);
    }
    reduced_density(q, &smaller)?.entropy()
}

/// Wootters concurrence of a pure two-qubit state, `2|a00·a11 - a01·a10|`.
pub fn concurrence(q: &QubitState) -> Result<f64> {
    if q.qubits != 2 {
        return Err(Error::QubitCount {
            expected: 2,
            found: q.qubits,
        });
    }
    q.ensure_normalized()?;
    let a = &q.amplitudes;
    Ok(2.0 * (a[0] * a[3] - a[1] * a[2]).norm())
}

/// `|⟨reference|q⟩|²`
pub fn fidelity(q: &QubitState, reference: &QubitState) -> Result<f64> {
    if q.qubits != reference.qubits {
        return Err(Error::QubitCount {
            expected: reference.qubits,
            found: q.qubits,
        });
    }
    q.ensure_normalized()?;
    reference.ensure_normalized()?;
    let overlap: Complex64 = reference
        .amplitudes
        .iter()
        .zip(&q.amplitudes)
        .map(|(r, a)| r.conj() * a)
        .sum();
    Ok(overlap.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BasisState, FrequencyBin};

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn bell_plus() -> QubitState {
        QubitState::cat(2, 0b00, 0b11, ONE)
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = reduced_density(&bell_plus(), &[0]).unwrap();
        assert!((rho.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.entries()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(rho.entries()[(0, 1)].norm() < 1e-15);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(rho.hermiticity_error() < 1e-15);
    }

    #[test]
    fn product_marginal_is_pure() {
        let rho = reduced_density(&QubitState::basis(2, 0b01), &[0]).unwrap();
        assert_eq!(rho.entries()[(0, 0)], ONE);
        assert_eq!(rho.entries()[(1, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ghz_single_qubit_marginal() {
        let ghz = QubitState::cat(3, 0b010, 0b101, ONE);
        for q in 0..3 {
            let rho = reduced_density(&ghz, &[q]).unwrap();
            assert!((rho.entries()[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!(rho.entries()[(0, 1)].norm() < 1e-15);
            assert!((entanglement_entropy(&ghz, &[q]).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_keep_rejected() {
        assert!(matches!(
            reduced_density(&bell_plus(), &[]),
            Err(Error::InvalidQubits(_))
        ));
    }

    #[test]
    fn entropy_values() {
        assert!((entanglement_entropy(&bell_plus(), &[0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(entanglement_entropy(&QubitState::basis(2, 1), &[0]).unwrap().abs() < 1e-12);
        assert!(entanglement_entropy(&bell_plus(), &[]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn concurrence_values() {
        assert!((concurrence(&bell_plus()).unwrap() - 1.0).abs() < 1e-15);
        assert!(concurrence(&QubitState::basis(2, 0)).unwrap().abs() < 1e-15);
        let minus = QubitState::cat(2, 0b00, 0b11, -ONE);
        assert!((concurrence(&minus).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            concurrence(&QubitState::basis(3, 0)),
            Err(Error::QubitCount { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn fidelity_values() {
        let b = bell_plus();
        assert!((fidelity(&b, &b).unwrap() - 1.0).abs() < 1e-15);
        let minus = QubitState::cat(2, 0b00, 0b11, -ONE);
        assert!(fidelity(&b, &minus).unwrap().abs() < 1e-15);
        assert!(matches!(
            fidelity(&b, &QubitState::basis(3, 0)),
            Err(Error::QubitCount { .. })
        ));
    }

    fn occ(terms: &[(&str, u32)]) -> BasisState {
        BasisState::canonicalize(
            terms
                .iter()
                .map(|(p, f)| (Channel::new(*p, FrequencyBin(*f)), 1)),
        )
        .unwrap()
    }

    #[test]
    fn extract_dual_rail() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_terms([
            (occ(&[("1", 0), ("4'", 0)]), Complex64::new(h, 0.0)),
            (occ(&[("1'", 1), ("4", 1)]), Complex64::new(h, 0.0)),
        ])
        .unwrap();
        let rails = RailSpec::new(vec![
            (Channel::carrier("1"), Channel::shifted("1'")),
            (Channel::carrier("4'"), Channel::shifted("4")),
        ])
        .unwrap();
        let q = extract_qubits(&s, &rails).unwrap();
        assert!(q.max_abs_diff(&bell_plus()) < 1e-15);
    }

    #[test]
    fn two_photons_on_one_rail_violate() {
        let s = StateVector::basis(occ(&[("1", 0), ("1'", 1)]));
        let rails = RailSpec::new(vec![
            (Channel::carrier("1"), Channel::shifted("1'")),
            (Channel::carrier("4'"), Channel::shifted("4")),
        ])
        .unwrap();
        match extract_qubits(&s, &rails) {
            Err(Error::RailViolation(term)) => assert!(term.contains("1'")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rail_channels_must_be_distinct() {
        assert!(RailSpec::new(vec![
            (Channel::carrier("a"), Channel::shifted("a")),
            (Channel::carrier("a"), Channel::shifted("b")),
        ])
        .is_err());
    }
}
