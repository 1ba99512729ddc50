//! Adaptive syndrome-measurement decoders for Shor-style fault-tolerant error
//! correction, with a circuit-level Pauli-frame simulator for hexagonal color
//! codes.

pub mod bits;
pub mod colorcode;
pub mod decoders;
pub mod diffvec;
pub mod error;
pub mod extraction;
pub mod gf2;
pub mod harness;
pub mod recovery;
pub mod scalar;
pub mod stabilizer;
pub mod worstcase;

pub use bits::BitVector;
pub use colorcode::{build_hex_color_code, hex_layout, verify_distance, HexLayout};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use stabilizer::{
    commutes, logical_class, multiply, syndrome_of, LogicalClass, PauliOperator, SinglePauli, StabilizerCode, Syndrome,
};
pub use decoders::{evaluate, worst_case_rounds, Action, DecoderKind, Policy, PolicyDecision, S1Branch, StopReason};
pub use diffvec::{decompose, find_usable, DifferenceVector, SyndromeHistory, ZeroSubstring};
pub use extraction::{Extractor, FaultSource, FaultValue, LocationKind, NoiseModel, PlacedFault};
pub use harness::{Experiment, ExperimentConfig, ExperimentStats, ShotRunner};
pub use recovery::{build_table, SyndromeTable};
pub use worstcase::{verify_round_bounds, BoundsReport};

/// Physical and logical error rates.
pub type Rate = f64;
/// A logical error rate with its interval in double precision.
pub type RateEstimate64 = harness::RateEstimate<Rate>;
