//! Cavity-QED teleportation of an atomic internal state through position
//! measurements on two field-deflected atoms.
//!
//! Two atoms cross the same cavity one after the other. In a nodal region
//! the atom-field coupling is linear in position, so every dressed state
//! `χ_n^±` pushes the atomic wavepacket with a constant force
//! `∓√(n+1)·ħεk`. Once the two deflected branches stop overlapping, a
//! photon-number measurement, a readout of atom 2 and the positions of both
//! atoms leave atom 1 in the state atom 2 started in (up to a σ_z flip).
//!
//! The crate is `no_std` and only needs `alloc`:
//!
//! - [`wavepackets`]: analytic deflected Gaussians and their overlaps.
//! - [`protocol`]: the joint state after both passages and the outcome table.
//! - [`measurement`]: post-selection, the conditional atom-1 state and
//!   seeded Monte Carlo runs of the whole cascade.
//! - [`fidelity`]: the A/B/C position functions, fidelities and their
//!   θ-independent lower bounds, and fidelity surfaces.
#![no_std]
// `!(x > 0.0)` is how NaN gets rejected alongside the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod fidelity;
pub mod gaussian;
pub mod measurement;
pub mod protocol;
pub mod qubit;
pub mod wavepackets;

pub use num_complex::Complex64 as C64;

pub use fidelity::{
    abc, fidelity_pair, fidelity_pair_as_printed, fidelity_surface, lower_bounds, AbcValues,
    FidelityError, FidelityPair, FidelitySurface, LowerBounds, SurfaceGrid, SurfacePoint,
};
pub use measurement::{
    apply_sigma_z_correction, condition_on_field_and_atom2, joint_position_density,
    reduced_atom1_state, sample_run, ConditionalState, MeasurementError, MeasurementRecord,
    ProtocolSampler, RunSeed, Verdict,
};
pub use protocol::{
    branch_probabilities, build_expansion_t3, success_probability, Atom, BlochAngles, BranchMode,
    BranchRow, BranchTable, InteractionTimes, Internal, JointTerm, RowVerdict, SystemExpansion,
    WavepacketLabel,
};
pub use qubit::QubitDensityMatrix;
pub use wavepackets::{
    branch_overlap, deflected_amplitude, initial_amplitude, position_density, BranchSign,
    DeflectedWavepacket, ParamError, PhysicalParams, HBAR,
};
