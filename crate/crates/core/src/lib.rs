//! Non-equilibrium steady states and heat currents of lattices of coupled
//! quantum harmonic oscillators driven by two thermal baths, with optional
//! local dephasing.
//!
//! The state is described by the normally ordered second moments
//! `C[i][j] = <a_i^dag a_j>`, which obey the linear equation
//! `dC/dt = i[W,C] + {L,C} + M` (plus dephasing terms). [`dynamics`] solves
//! and integrates it, [`analytic`] holds the closed-form chain solutions,
//! [`observables`] extracts currents and certificates, and [`experiments`]
//! runs the length, dephasing and dimension studies.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod export;
pub mod model;
pub mod observables;

pub use error::{Error, Result};
