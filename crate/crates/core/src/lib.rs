//! Ground-state cooling of a thermal bosonic resonator by repeated projective
//! measurement of a coupled two- or three-level ancilla.
//!
//! The crate evolves diagonal Fock-state populations under the per-level
//! cooling coefficients of the rotating-frame model, tracks survival
//! probability and thermal diagnostics per measurement, and carries an
//! independent brute-force route (block propagators and a Monte Carlo
//! trajectory sampler) for validation.
//!
//! All math is generic over the scalar type ([`Scalar`]); the `*64` aliases
//! at the crate root fix it to `f64`, which is what the CLI uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod fock;
pub mod logspace;
pub mod oracle;
pub mod params;
pub mod protocol;
pub mod scalar;

pub use coefficients::{
    alpha_n, alpha_tilde_n, beta_n, beta_tilde_n, build_table, cooling_free_report,
    first_protected_index, CoefficientTable, CoolingFreeReport, ProtectedIndex, Variant,
};
pub use error::{CoolingError, Result};
pub use fock::{
    mean_occupation, thermal_distribution, thermal_occupation, PopulationDistribution,
    ThermalSource, ThermalSpec,
};
pub use oracle::{
    block_hamiltonian, block_propagator, extract_vg_element, oracle_report, sample_trajectories,
    unitarity_defect, BatchSpec, ExcitationBlock, OracleDraw, OracleReport, TrajectoryBatch,
};
pub use params::PhysicalParams;
pub use protocol::{
    asymptotic_limit, effective_temperature, run, run_with, step, sweep, thermal_fidelity,
    AsymptoticReport, ProtocolSchedule, RunOptions, RunOutcome, Segment, StepRecord, SweepAxis,
    SweepBase, SweepRow, SwitchCondition,
};
pub use scalar::{OracleScalar, Scalar};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

pub type PhysicalParams64 = PhysicalParams<f64>;
pub type PopulationDistribution64 = PopulationDistribution<f64>;
pub type ThermalSpec64 = ThermalSpec<f64>;
pub type CoefficientTable64 = CoefficientTable<f64>;
pub type CoolingFreeReport64 = CoolingFreeReport<f64>;
pub type ProtocolSchedule64 = ProtocolSchedule<f64>;
pub type Segment64 = Segment<f64>;
pub type StepRecord64 = StepRecord<f64>;
pub type RunOutcome64 = RunOutcome<f64>;
pub type AsymptoticReport64 = AsymptoticReport<f64>;
pub type ExcitationBlock64 = ExcitationBlock<f64>;
pub type SweepBase64 = SweepBase<f64>;
pub type SweepRow64 = SweepRow<f64>;

pub type PhysicalParams32 = PhysicalParams<f32>;
pub type PopulationDistribution32 = PopulationDistribution<f32>;
pub type CoefficientTable32 = CoefficientTable<f32>;
