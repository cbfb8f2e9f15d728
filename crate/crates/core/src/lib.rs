//! General vector machines (GVMs).
//!
//! A GVM is a three-layer map `x -> y` with a free hidden layer
//! (`h̄ᵢ = Σⱼ w̄ᵢⱼ xⱼ − bᵢ`, `ȳᵢ = f(βᵢ h̄ᵢ)`) and a linear output layer whose
//! weights are frozen at random `±1` values. Training is a derivative-free
//! Monte Carlo walk over the hidden parameters, each of which is confined to a
//! symmetric range set by the [`ControlParams`]. Families of machines trained
//! at one control point are compared by their design risk, the spread of
//! their responses, and combined into a joint machine by averaging.
//!
//! This crate is `no_std` (it needs `alloc`). File formats, the command line
//! and threaded ensembles live in the companion `gvm` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cost;
pub mod data;
pub mod ensemble;
mod error;
pub mod machine;
mod math;
pub mod sensitivity;
pub mod trainer;

pub use cost::{CostSpec, SignMatrix};
pub use data::GoalFunction;
pub use ensemble::{EnsembleConfig, EnsembleReport, Grid, Jgvm};
pub use error::GvmError;
pub use machine::{classify, init_random, ControlParams, Dataset, GvmParams, ParamClasses, Targets, TransferKind};
pub use sensitivity::{SensitivityMode, SensitivityReport};
pub use trainer::{train, TrainOutcome, Trainer, TrainerState};

pub type Result<T, E = GvmError> = core::result::Result<T, E>;
