//! Extremum-seeking synchronization of blind agents on SO(3) and SE(3).
//!
//! Each agent sees only a single scalar synchronization cost. It perturbs its
//! own state with a sinusoidal dither along exponential curves of the group,
//! correlates the measured cost against that dither, and moves accordingly.
//! On average this reproduces a gradient flow toward the set where all agents
//! coincide.
//!
//! The numerical core ([`lie`], [`dither`], [`cost`], [`dynamics`]) is generic
//! over the scalar type; [`experiment`] drives `f64` simulations from config
//! files and writes CSV records.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod dither;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod lie;
pub mod matrix;
pub mod scalar;

pub use cost::{Configuration, NetworkConfig, SyncCost};
pub use dither::DitherSchedule;
pub use dynamics::{Execution, FieldSample, Integrator, VectorField};
pub use error::{Error, Result};
pub use lie::{AlgebraVector, GroupElement, GroupTag};
pub use matrix::SquareMatrix;
pub use scalar::Real;

pub type GroupElementF64 = GroupElement<f64>;
pub type GroupElementF32 = GroupElement<f32>;
pub type AlgebraVectorF64 = AlgebraVector<f64>;
pub type AlgebraVectorF32 = AlgebraVector<f32>;
pub type ConfigurationF64 = Configuration<f64>;
pub type ConfigurationF32 = Configuration<f32>;
pub type DitherScheduleF64 = DitherSchedule<f64>;
pub type DitherScheduleF32 = DitherSchedule<f32>;
pub type FieldSampleF64 = FieldSample<f64>;
pub type FieldSampleF32 = FieldSample<f32>;
pub type Matrix3F64 = SquareMatrix<f64>;
