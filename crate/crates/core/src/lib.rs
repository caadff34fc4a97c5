//! Two-qubit density-matrix simulation and single-qubit process tomography
//! for echo circuits.
//!
//! The crate simulates noisy two-qubit circuits whose ideal action is the
//! identity (echo circuits: repeated CNOT pairs, Haar-random unitaries
//! composed with their inverses, and twirled CNOT pairs), reconstructs the
//! affine Bloch-sphere map `r -> M r + c` of the qubit-0 channel from
//! polarization measurements, and reports ellipsoid geometry (semi-axes,
//! principal axes, tilt of the major axis away from z) that exposes
//! coherent-error signatures.
//!
//! # Tensor-product convention
//!
//! Qubit 0 is the tomography target and the *slow* (left) tensor factor;
//! qubit 1 is the ancilla and the fast factor. A two-qubit basis state
//! `|q0 q1>` has index `2*q0 + q1`, a single-qubit operator `u` acting on
//! qubit 0 embeds as `u ⊗ I`, and on qubit 1 as `I ⊗ u`. Every gate
//! embedding, partial trace and builder in this crate uses this convention.

// Indexed loops over tiny fixed-size matrices are the house style here.
#![allow(clippy::needless_range_loop)]

mod eigen;

pub mod channels;
pub mod gates;
pub mod kak;
pub mod linalg;
pub mod noise;
pub mod tomography;

pub use channels::{
    build_cnot_echo, build_random_echo, build_twirled_cnot_echo, measure_polarization, simulate,
    ChannelKind, Circuit, CircuitMeta, MeasureMode, MeasurementAxis, TwirlMode,
};
pub use gates::{embed_single_qubit, haar_su2, haar_u4, Gate, GateOp, GateTimes, RngStream};
pub use kak::{euler_zyz, kak_decompose, kak_to_circuit, KakDecomposition, KakError};
pub use linalg::{BlochVector, ComplexMatrix, DensityMatrix, LinalgError};
pub use noise::{
    apply_kraus, coherent_error_unitary, depolarizing_kraus, load_noise_model, readout_confusion,
    thermal_relaxation_kraus, CoherentAttach, CoherentError, KrausSet, NoiseError, NoiseModel,
};
pub use tomography::{
    ellipsoid_report, fidelity, reconstruct_affine, run_tomography, run_tomography_with,
    tomography_of_kraus, AffineMap, EllipsoidReport, InputState, TomographyResult, DEFAULT_REPS,
    DEFAULT_SHOTS,
};
