//! Solver core for a hybrid atom-molecule Bose-Einstein condensate coupled by
//! magnetic Feshbach resonance, with induced decay of the Feshbach molecules.
//!
//! The model is a pair of coupled dissipative Gross-Pitaevskii equations for
//! the atomic and molecular condensate wavefunctions in a spherically
//! symmetric trap. The substitution `psi = phi/r` reduces the problem to one
//! radial dimension; everything here works on the reduced fields `phi_a`,
//! `phi_m` over a uniform radial mesh in oscillator units.
//!
//! Layout:
//! - [`units`]: physical inputs and their reduction to the dimensionless
//!   coefficients that enter the discrete equations
//! - [`grid`]: radial mesh, two-component complex state, norms
//! - [`tridiag`]: Thomas solver for the Crank-Nicolson linear systems
//! - [`propagator`]: semi-implicit Crank-Nicolson time stepper (real or
//!   imaginary time)
//! - [`ground`]: imaginary-time relaxation to the decay-free ground state
//! - [`stability`]: scalar observables and the Stable/Quasistable/Unstable
//!   classifier
//!
//! The crate is `no_std` (with `alloc`); all file formats, configuration and
//! orchestration live in the companion CLI crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod ground;
pub mod propagator;
pub mod stability;
pub mod tridiag;
pub mod units;

pub use error::{GpError, Result};
pub use grid::{FieldPair, RadialGrid};
pub use ground::{GroundStateResult, RelaxationSettings};
pub use propagator::{Propagator, StepSettings};
pub use stability::{EvolutionRecord, Label, StabilityVerdict, Thresholds};
pub use units::{DimensionlessParams, PhysicalConstants, PhysicalParams};

/// Complex field element used throughout.
pub type C64 = num_complex::Complex<f64>;
