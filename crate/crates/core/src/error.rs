use thiserror::Error;

use crate::fock::Channel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon count on {0} must be positive")]
    NonPositiveCount(Channel),

    #[error("terms with different photon numbers ({expected} and {found}) in one state")]
    PhotonNumberMismatch { expected: u32, found: u32 },

    #[error("tensor factors share channel {0}")]
    OverlappingSupport(Channel),

    #[error("cannot normalize the zero state")]
    ZeroState,

    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),

    #[error("matrix is not unitary: max |M†M - I| entry is {deviation:e}")]
    NonUnitary { deviation: f64 },

    #[error("malformed element: {0}")]
    MalformedElement(String),

    #[error("duplicate port label {0:?}")]
    DuplicatePort(String),

    #[error("element output {0} collides with an occupied pass-through channel")]
    OutputCollision(Channel),

    #[error("detector channel {0} declared twice")]
    DuplicateDetector(Channel),

    #[error("channel {0} is not a declared detector")]
    NotADetector(Channel),

    #[error("basis term {0} does not fit the rail structure")]
    RailViolation(String),

    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),

    #[error("expected {expected} qubits, found {found}")]
    QubitCount { expected: usize, found: usize },

    #[error("density matrix eigenvalue {0:e} is below -1e-10")]
    NegativeEigenvalue(f64),
}
