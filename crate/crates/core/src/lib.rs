//! Output-feedback vibration control of a piezo-patched hinged beam.
//!
//! The beam is reduced to its first `N` bending modes; a velocity sensor
//! drives a Luenberger observer whose estimate feeds a state-feedback law on
//! the patch voltage. Uncontrolled modes are simulated alongside to measure
//! observation spillover.

pub mod analysis;
pub mod beam_model;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod modal_system;
pub mod signals;
pub mod simulator;
pub mod synthesis;

pub use error::{Error, Result};
