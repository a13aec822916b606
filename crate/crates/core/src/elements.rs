//! Passive linear-optical elements acting on channel subspaces.
//!
//! An element is a unitary single-photon matrix from a list of input
//! channels to a list of output channels. Multi-photon states transform by
//! substituting every input creation operator with its image,
//! `a†_in[c] -> Σ_r M[r][c] a†_out[r]`. Channels outside the input list pass
//! through untouched.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fock::{BasisState, Channel, StateVector};

/// Largest accepted entry of `|M†M - I|`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearElement {
    inputs: Vec<Channel>,
    outputs: Vec<Channel>,
    matrix: DMatrix<Complex64>,
}

/// Max entry magnitude of `M†M - I`. Panics on a non-square matrix.
pub fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    assert!(matrix.is_square(), "unitarity is only defined for square matrices");
    let gram = matrix.adjoint() * matrix;
    let n = gram.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - target).norm());
        }
    }
    worst
}

fn ensure_distinct(channels: &[Channel], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for c in channels {
        if !seen.insert(c) {
            return Err(Error::MalformedElement(format!("duplicate {what} channel {c}")));
        }
    }
    Ok(())
}

impl LinearElement {
    /// Validates shape and unitarity. Entry `(r, c)` is the amplitude from
    /// `inputs[c]` to `outputs[r]`.
    pub fn new(
        inputs: Vec<Channel>,
        outputs: Vec<Channel>,
        matrix: DMatrix<Complex64>,
    ) -> Result<LinearElement> {
        if !matrix.is_square() {
            return Err(Error::MalformedElement(format!(
                "matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if inputs.len() != matrix.ncols() || outputs.len() != matrix.nrows() {
            return Err(Error::MalformedElement(format!(
                "{} inputs and {} outputs for a {}x{} matrix",
                inputs.len(),
                outputs.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::MalformedElement("non-finite matrix entry".into()));
        }
        ensure_distinct(&inputs, "input")?;
        ensure_distinct(&outputs, "output")?;
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(LinearElement {
            inputs,
            outputs,
            matrix,
        })
    }

    /// Acousto-optic modulator as a frequency-shifting 50/50 splitter.
    ///
    /// Inputs `(lo, ω)` and `(hi, ω+δ)`; outputs `(t, ω)` transmitted and
    /// `(d, ω+δ)` deflected:
    ///
    /// ```text
    /// |ω⟩_lo   -> (|ω⟩_t - i|ω+δ⟩_d) / √2
    /// |ω+δ⟩_hi -> (|ω⟩_t + i|ω+δ⟩_d) / √2
    /// ```
    pub fn aom(port_lo: &str, port_hi: &str, port_t: &str, port_d: &str) -> Result<LinearElement> {
        let ports = [port_lo, port_hi, port_t, port_d];
        for (i, p) in ports.iter().enumerate() {
            if ports[..i].contains(p) {
                return Err(Error::DuplicatePort(p.to_string()));
            }
        }
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let ih = Complex64::new(0.0, FRAC_1_SQRT_2);
        let matrix = DMatrix::from_row_slice(2, 2, &[h, h, -ih, ih]);
        LinearElement::new(
            vec![Channel::carrier(port_lo), Channel::shifted(port_hi)],
            vec![Channel::carrier(port_t), Channel::shifted(port_d)],
            matrix,
        )
    }

    /// Pure relabeling of one channel to another.
    pub fn relabel(from: Channel, to: Channel) -> LinearElement {
        LinearElement {
            inputs: vec![from],
            outputs: vec![to],
            matrix: DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        }
    }

    pub fn inputs(&self) -> &[Channel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Channel] {
        &self.outputs
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Element undoing this one: conjugate-transpose matrix, ports swapped.
    pub fn inverse(&self) -> LinearElement {
        LinearElement {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Applies the element to every term of `state`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let input_index: BTreeMap<&Channel, usize> =
            self.inputs.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let output_set: BTreeSet<&Channel> = self.outputs.iter().collect();

        let mut out: BTreeMap<BasisState, Complex64> = BTreeMap::new();
        for (basis, amp) in state.terms() {
            let (acted, passed) = basis.partition(|c| input_index.contains_key(c));
            if let Some(c) = passed.channels().find(|c| output_set.contains(c)) {
                return Err(Error::OutputCollision(c.clone()));
            }
            let input_counts: Vec<(usize, u32)> = acted
                .occupations()
                .iter()
                .map(|(c, n)| (input_index[c], *n))
                .collect();
            for (occupation, coeff) in self.expand(&input_counts) {
                let image = BasisState::canonicalize(
                    occupation
                        .iter()
                        .enumerate()
                        .filter(|(_, n)| **n > 0)
                        .map(|(r, n)| (self.outputs[r].clone(), *n)),
                )?;
                let full = image.join(&passed)?;
                *out.entry(full).or_insert(Complex64::new(0.0, 0.0)) += amp * coeff;
            }
        }
        Ok(crate::fock::StateVector::from_map(out, state.prune_epsilon()))
    }

    /// Expands `Π_c (a†_in[c])^n_c / √(n_c!)` into normalized output Fock
    /// occupations. Returns occupation vectors indexed like `outputs`.
    fn expand(&self, input_counts: &[(usize, u32)]) -> Vec<(Vec<u32>, Complex64)> {
        let dim = self.outputs.len();
        // Monomial coefficients in output creation operators.
        let mut poly: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        poly.insert(vec![0; dim], Complex64::new(1.0, 0.0));
        let mut input_norm = 1.0;
        for &(col, n) in input_counts {
            input_norm *= factorial(n);
            for _ in 0..n {
                let mut next: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
                for (monomial, coeff) in &poly {
                    for r in 0..dim {
                        let m = self.matrix[(r, col)];
                        if m == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut raised = monomial.clone();
                        raised[r] += 1;
                        *next.entry(raised).or_insert(Complex64::new(0.0, 0.0)) += coeff * m;
                    }
                }
                poly = next;
            }
        }
        let input_norm = input_norm.sqrt();
        poly.into_iter()
            .map(|(monomial, coeff)| {
                let fock_norm: f64 = monomial.iter().map(|&k| factorial(k)).product();
                let scaled = coeff * (fock_norm.sqrt() / input_norm);
                (monomial, scaled)
            })
            .collect()
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn make_element(
    inputs: Vec<Channel>,
    outputs: Vec<Channel>,
    matrix: DMatrix<Complex64>,
) -> Result<LinearElement> {
    LinearElement::new(inputs, outputs, matrix)
}

pub fn make_aom(port_lo: &str, port_hi: &str, port_t: &str, port_d: &str) -> Result<LinearElement> {
    LinearElement::aom(port_lo, port_hi, port_t, port_d)
}

pub fn apply_element(element: &LinearElement, state: &StateVector) -> Result<StateVector> {
    element.apply(state)
}

/// JSON description of an element.
///
/// `{"kind":"aom","lo":..,"hi":..,"t":..,"d":..}` or
/// `{"kind":"matrix","inputs":[..],"outputs":[..],"m":[[[re,im],..],..]}`
/// with channels written as `{"port":..,"freq":..}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ElementSpec {
    Aom {
        lo: String,
        hi: String,
        t: String,
        d: String,
    },
    Matrix {
        inputs: Vec<Channel>,
        outputs: Vec<Channel>,
        m: Vec<Vec<[f64; 2]>>,
    },
}

impl ElementSpec {
    pub fn from_json(text: &str) -> serde_json::Result<ElementSpec> {
        serde_json::from_str(text)
    }

    /// Every channel the element touches, inputs first.
    pub fn channels(&self) -> Vec<Channel> {
        match self {
            ElementSpec::Aom { lo, hi, t, d } => vec![
                Channel::carrier(lo.as_str()),
                Channel::shifted(hi.as_str()),
                Channel::carrier(t.as_str()),
                Channel::shifted(d.as_str()),
            ],
            ElementSpec::Matrix {
                inputs, outputs, ..
            } => inputs.iter().chain(outputs).cloned().collect(),
        }
    }

    /// Dense matrix, checking that rows are rectangular and square overall.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        match self {
            ElementSpec::Aom { .. } => Ok(LinearElement::aom("lo", "hi", "t", "d")?.matrix),
            ElementSpec::Matrix { m, .. } => {
                let rows = m.len();
                if rows == 0 {
                    return Err(Error::MalformedElement("empty matrix".into()));
                }
                if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != rows) {
                    return Err(Error::MalformedElement(format!(
                        "row {i} has {} entries, expected {rows}",
                        row.len()
                    )));
                }
                Ok(DMatrix::from_fn(rows, rows, |r, c| {
                    Complex64::new(m[r][c][0], m[r][c][1])
                }))
            }
        }
    }

    pub fn build(&self) -> Result<LinearElement> {
        match self {
            ElementSpec::Aom { lo, hi, t, d } => LinearElement::aom(lo, hi, t, d),
            ElementSpec::Matrix {
                inputs, outputs, ..
            } => LinearElement::new(inputs.clone(), outputs.clone(), self.matrix()?),
        }
    }
}
