//! Filter-function analysis toolkit for driven two-level systems.
//!
//! Given an arbitrary resonant driving field, this crate computes the full
//! complex first-order filter function of a perturbation axis, decomposes
//! it into per-axis rotation components with phase, draws the equivalent
//! 3D space curves, expands the interaction-frame propagator in Magnus
//! orders of the perturbation strength, extracts synchronous two-axis
//! control parameters from filter peaks, and synthesizes driving fields
//! that cancel quasistatic noise to a chosen order. A brute-force
//! simulator verifies every first-order prediction.
//!
//! Units: times in us, frequencies in MHz, envelope amplitudes in rad/us.
//! A constant amplitude `W` on `sigma_x` rotates the Bloch vector by
//! `2 W t`; 1 MHz Rabi is `pi` rad/us.
//!
//! The numerics are generic over the float type through [`Scalar`]; the
//! aliases below fix `f64`, which every documented tolerance assumes.
//!
//! ```
//! use qff_core::drive::{DriveSpec, TimeGrid};
//! use qff_core::filter::filter_function;
//! use qff_core::pauli::Axis;
//! use qff_core::propagate::{propagate, rotation_trace};
//!
//! // a 1 MHz Rabi drive held for five periods, z perturbation
//! let spec = DriveSpec::constant(std::f64::consts::PI, 0.0, 5.0)?;
//! let grid = TimeGrid::span(5.0, 10_000)?;
//! let rot = rotation_trace(&propagate(&spec, &grid)?, Axis::Z);
//!
//! // continuously driven systems are insensitive to quasistatic noise...
//! assert!(filter_function(&rot, 0.0).combined_magnitude() < 1e-6);
//! // ...and respond at the Rabi frequency instead
//! assert!(filter_function(&rot, 1.0).combined_magnitude() > 0.7);
//! # Ok::<(), qff_core::Error>(())
//! ```

// validations use `!(x > 0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod curve;
pub mod drive;
mod error;
pub mod filter;
pub mod magnus;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod propagate;
pub mod scalar;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

/// Default propagation resolution, steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;

pub type Real = f64;
pub type C64 = num_complex::Complex<f64>;
pub type Mat2 = pauli::Mat2c<f64>;
pub type Pauli3 = pauli::PauliVec<f64>;
pub type CPauli3 = pauli::CPauliVec<f64>;
pub type Drive = drive::DriveSpec<f64>;
pub type Grid = drive::TimeGrid<f64>;
pub type Propagator = propagate::PropagatorTrace<f64>;
pub type Rotation = propagate::RotationTrace<f64>;
pub type Sweep = filter::FilterFunctionSweep<f64>;
pub type Curve = curve::SpaceCurve<f64>;
pub type Magnus = magnus::MagnusSeries<f64>;
pub type Control = control::ControlSolution<f64>;
pub type Psd = filter::PsdTable<f64>;
