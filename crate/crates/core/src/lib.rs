//! Simulation and cross-checking toolkit for a magnetically deflected
//! nanomechanical cantilever coupled to two NV-center spins.
//!
//! The crate is layered bottom-up:
//!
//! * [`mechanics`]: cantilever mass, resonances, field-induced deflection and
//!   the resulting gap asymmetry `Δh`.
//! * [`spin_model`]: NV level structure, dressed basis, spin-tip couplings and
//!   the asymmetric parameter bundle [`spin_model::CouplingSet`].
//! * [`dynamics`]: the effective two-spin Hamiltonian, closed-form and RK4
//!   evolution of Bell amplitudes, and three routes to the concurrence.
//! * [`harness`]: JSON scenario configs, time series, `(α, Δh)` sweeps,
//!   deflection reports and the `verify` suite behind the `nv-seesaw` CLI.
//!
//! All quantities are SI internally (angular frequencies in rad/s, times in
//! seconds). Human-scale units (nm, mT, MHz, μs) only appear at the config
//! boundary, see [`units`].

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod mechanics;
pub mod spin_model;
pub mod units;

pub use constants::PhysicalConstants;
pub use error::{PhysicsError, Result};
