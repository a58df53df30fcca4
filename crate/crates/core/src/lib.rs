//! Closed-form solution, calibration and numerical verification of the
//! Lucas–Uzawa two-sector growth model with a human-capital externality.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calibration;
pub mod closed_form;
pub mod commands;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod output;
pub mod params;
pub mod verification;

pub use calibration::{assemble_solution, calibrate, SolutionPath};
pub use error::{Error, Result};
pub use params::{derive_constants, validate, DerivedConstants, InitialEndowment, Model, ModelParams};
pub use verification::{run_all, Verdict, VerificationReport, VerificationSettings};
