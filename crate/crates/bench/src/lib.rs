//! Fixtures for the benchmarks.

use aomsim_core::{make_element, BasisState, Channel, FrequencyBin, LinearElement, StateVector};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// `k`-mode discrete Fourier transform on channels `m0..m{k-1}` at the carrier.
pub fn dft_element(k: usize) -> LinearElement {
    let channels: Vec<Channel> = (0..k).map(|i| Channel::carrier(format!("m{i}"))).collect();
    let scale = 1.0 / (k as f64).sqrt();
    let matrix = DMatrix::from_fn(k, k, |r, c| {
        let angle = 2.0 * std::f64::consts::PI * (r * c) as f64 / k as f64;
        Complex64::from_polar(scale, angle)
    });
    make_element(channels.clone(), channels, matrix).unwrap()
}

/// One photon in each of the first `photons` DFT modes.
pub fn spread_input(photons: usize) -> StateVector {
    let occ = (0..photons).map(|i| (Channel::new(format!("m{i}"), FrequencyBin::CARRIER), 1));
    StateVector::basis(BasisState::canonicalize(occ).unwrap())
}
