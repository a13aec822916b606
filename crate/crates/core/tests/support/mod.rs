//! Test-only oracles and random case generators.
//!
//! The dense evolver here never calls into the sparse substitution code: it
//! works in first quantization, where N photons over M channels live in
//! `(C^M)^{⊗N}`, a Fock state is the normalized symmetrization of its
//! channel tuples, and an element acts as `U ⊗ ... ⊗ U`.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use aomsim_core::{BasisState, Channel, FrequencyBin, LinearElement, StateVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Dense first-quantized evolution of `state` through `element`.
pub fn dense_apply(element: &LinearElement, state: &StateVector) -> StateVector {
    let Some(photons) = state.photon_number() else {
        return StateVector::zero();
    };
    let n = photons as usize;

    let mut modes: BTreeSet<Channel> = state.support().into_iter().collect();
    modes.extend(element.inputs().iter().cloned());
    modes.extend(element.outputs().iter().cloned());
    let modes: Vec<Channel> = modes.into_iter().collect();
    let m = modes.len();
    let mode_index: HashMap<&Channel, usize> = modes.iter().enumerate().map(|(i, c)| (c, i)).collect();

    // Single-particle map on all modes; identity off the element's inputs.
    let mut u = vec![vec![ZERO; m]; m];
    for (j, c) in modes.iter().enumerate() {
        match element.inputs().iter().position(|x| x == c) {
            Some(col) => {
                for (r, out) in element.outputs().iter().enumerate() {
                    u[mode_index[out]][j] = element.matrix()[(r, col)];
                }
            }
            None => u[j][j] = Complex64::new(1.0, 0.0),
        }
    }

    let dim = m.pow(n as u32);
    let digits = |mut index: usize| {
        let mut tuple = vec![0usize; n];
        for slot in tuple.iter_mut().rev() {
            *slot = index % m;
            index /= m;
        }
        tuple
    };
    let occupation = |tuple: &[usize]| {
        let mut occ = vec![0u32; m];
        for &k in tuple {
            occ[k] += 1;
        }
        occ
    };
    let tuple_count = |occ: &[u32]| factorial(n as u32) / occ.iter().map(|&k| factorial(k)).product::<f64>();

    // Column of the many-body matrix for each input basis state present.
    let mut out: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
    for (basis, amp) in state.terms() {
        let mut occ_in = vec![0u32; m];
        for (c, k) in basis.occupations() {
            occ_in[mode_index[c]] = *k;
        }
        let weight_in = 1.0 / tuple_count(&occ_in).sqrt();

        let mut psi = vec![ZERO; dim];
        for index in 0..dim {
            let tuple = digits(index);
            if occupation(&tuple) != occ_in {
                continue;
            }
            // U^{⊗n} |tuple⟩ as an explicit Kronecker product.
            let mut image = vec![Complex64::new(weight_in, 0.0)];
            for &k in &tuple {
                let mut next = Vec::with_capacity(image.len() * m);
                for a in &image {
                    for row in &u {
                        next.push(a * row[k]);
                    }
                }
                image = next;
            }
            for (p, v) in psi.iter_mut().zip(&image) {
                *p += v;
            }
        }
        for (index, value) in psi.iter().enumerate() {
            if value.norm() == 0.0 {
                continue;
            }
            let occ = occupation(&digits(index));
            let w = 1.0 / tuple_count(&occ).sqrt();
            *out.entry(occ).or_insert(ZERO) += amp * value * w;
        }
    }

    let terms = out.into_iter().map(|(occ, a)| {
        let basis = BasisState::canonicalize(
            occ.iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| (modes[i].clone(), *k)),
        )
        .unwrap();
        (basis, a)
    });
    StateVector::from_terms(terms).unwrap()
}

/// Reduced density of a Fock state on `keep`, as a sparse map.
pub fn reduced_fock_density(
    s: &StateVector,
    keep: &BTreeSet<Channel>,
) -> BTreeMap<(BasisState, BasisState), Complex64> {
    let mut by_env: BTreeMap<BasisState, Vec<(BasisState, Complex64)>> = BTreeMap::new();
    for (b, a) in s.terms() {
        let (kept, env) = b.partition(|c| keep.contains(c));
        by_env.entry(env).or_default().push((kept, *a));
    }
    let mut rho = BTreeMap::new();
    for column in by_env.values() {
        for (i, a) in column {
            for (j, b) in column {
                *rho.entry((i.clone(), j.clone())).or_insert(ZERO) += a * b.conj();
            }
        }
    }
    rho
}

pub fn max_density_diff(
    a: &BTreeMap<(BasisState, BasisState), Complex64>,
    b: &BTreeMap<(BasisState, BasisState), Complex64>,
) -> f64 {
    let keys: BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO)).norm())
        .fold(0.0, f64::max)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Haar-ish random unitary by Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, k: usize) -> nalgebra::DMatrix<Complex64> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<Complex64> = (0..k).map(|_| random_complex(rng)).collect();
        for q in &cols {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    nalgebra::DMatrix::from_fn(k, k, |r, c| cols[c][r])
}

fn pool() -> Vec<Channel> {
    (0..6)
        .flat_map(|p| (0..2).map(move |f| Channel::new(format!("p{p}"), FrequencyBin(f))))
        .collect()
}

/// Random normalized state with `photons` photons over `channels`.
pub fn random_state<R: Rng>(rng: &mut R, channels: &[Channel], photons: u32) -> StateVector {
    let terms_wanted = rng.random_range(1..=4);
    let mut terms = Vec::new();
    for _ in 0..terms_wanted {
        let occ = (0..photons).map(|_| (channels[rng.random_range(0..channels.len())].clone(), 1));
        terms.push((BasisState::canonicalize(occ).unwrap(), random_complex(rng)));
    }
    StateVector::from_terms(terms).unwrap().normalize().unwrap()
}

/// A random element and a compatible state: ≤ 4 photons, ≤ 8 channels in
/// total.
pub struct Case {
    pub element: LinearElement,
    pub state: StateVector,
    pub state_channels: Vec<Channel>,
}

pub fn random_case<R: Rng>(rng: &mut R) -> Case {
    let mut pool = pool();
    pool.shuffle(rng);
    let k = rng.random_range(1..=4);
    let inputs: Vec<Channel> = pool[..k].to_vec();
    let relabel = rng.random_bool(0.5);
    let outputs: Vec<Channel> = if relabel {
        (0..k)
            .map(|i| Channel::new(format!("o{i}"), FrequencyBin(rng.random_range(0..2))))
            .collect()
    } else {
        let mut o = inputs.clone();
        o.shuffle(rng);
        o
    };
    let fresh = if relabel { k } else { 0 };
    let max_pass = 8 - k - fresh;
    let pass = rng.random_range(0..=max_pass.min(3));
    let mut state_channels: Vec<Channel> = inputs.clone();
    state_channels.extend(pool[k..k + pass].iter().cloned());
    let photons = rng.random_range(1..=4);
    let element = LinearElement::new(inputs, outputs, random_unitary(rng, k)).unwrap();
    let state = random_state(rng, &state_channels, photons);
    Case {
        element,
        state,
        state_channels,
    }
}
