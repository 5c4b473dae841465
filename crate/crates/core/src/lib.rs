//! Displaced-Fock-state simulator for hybrid-entanglement quantum teleportation.
//!
//! The crate builds truncated multimode Fock states, applies exact linear-optical
//! unitaries to them and runs the teleportation, demodulation and channel
//! generation circuits alongside their closed-form probability laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod channel_gen;
pub mod demod;
pub mod displaced;
pub mod error;
pub mod fock;
pub mod optics;
pub mod protocol;
pub mod qubit;

pub use num_complex::Complex64;

pub use displaced::{
    coeff, coherent_state, displaced_number_state, modulation_factor, scs_distribution, scs_state, MatrixElement,
    ModulationFactors, ScsSpec,
};
pub use error::{Error, Result};
pub use fock::{inner, partial_trace, state_fidelity, tensor, DensityOperator, FockState, Parity, ProjectionResult, Projector};
pub use optics::{
    apply_beam_splitter, apply_displacement, dual_rail_apply, htbs_displace, htbs_fidelity, BeamSplitter, DualRailGate,
};
pub use qubit::{Basis, Qubit};
pub use protocol::{
    alice_measure, alice_mix_exact, am_success_probs, approximation_fidelity, bob_correct, build_channel,
    direct_success_probs, omega_apply, prepare_am_qubit, DistributionKind, HybridChannel, Measurement, MeasurementModel,
    OutcomeRecord, ProbabilityReport,
};
pub use demod::{
    coherent_success_prob, demod_coherent, demod_swap, iterate_coherent_extra, solve_gamma, swap_success_prob,
    total_success, DemodOutcome, GammaSolution, Herald, Method, SuccessComparison,
};
pub use channel_gen::{generate_channel, ideal_generation_state, GenerationConfig, GenerationReport, HeraldedChannel};
pub use analysis::{RhoBReport, SweepConfig, Table, Value};
pub use acceptance::{run_all, CriterionResult};
