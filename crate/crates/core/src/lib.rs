//! Multiscale mean-field description of finite Bose droplets.
//!
//! * [`units`]: constants and the droplet scale hierarchy
//! * [`potential`]: the Aziz HFDHE2 He-4 pair potential and well analysis
//! * [`smoothing`]: the kernel-smoothed pair potential ṽ(R; ξ)
//! * [`mesoscopic`]: the Hartree order-parameter eigenproblem
//! * [`shortscale`]: pair-reduced short-scale response and the C correction
//! * [`cli`]: configuration, reports and the `mesodrop` commands

// Published potential parameters are kept digit for digit, and `!(x > 0.0)`
// style guards are used on purpose so that NaN is rejected.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod mesoscopic;
pub mod numerics;
pub mod potential;
pub mod shortscale;
pub mod smoothing;
pub mod units;

pub use error::{Error, Result};
