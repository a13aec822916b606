//! Frequency-bin linear optics over bosonic Fock states.
//!
//! Photons live on [`Channel`]s, each a spatial port plus a discrete
//! frequency bin. [`LinearElement`]s (the acousto-optic modulator among
//! them) act by creation-operator substitution, [`measurement`] enumerates
//! number-resolving click patterns, and [`entanglement`] certifies the
//! heralded states. [`protocols`] packages the entanglement-swapping and GHZ
//! schemes.

pub mod elements;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod json;
pub mod measurement;
pub mod protocols;

pub use elements::{apply_element, make_aom, make_element, ElementSpec, LinearElement};
pub use entanglement::{
    concurrence, entanglement_entropy, extract_qubits, fidelity, reduced_density, DensityMatrix,
    QubitState, RailSpec,
};
pub use error::{Error, Result};
pub use fock::{
    apply_creation, inner_product, normalize, tensor, BasisState, Channel, FrequencyBin,
    StateVector,
};
pub use measurement::{outcome_table, post_select, DetectionPattern, Outcome, OutcomeTable};
pub use protocols::{
    build_ghz, build_swap, run_ghz, run_swap, GhzSetup, Protocol, ProtocolReport, Sign, SwapSetup,
};
