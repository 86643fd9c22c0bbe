//! Domain-engineered lithium niobate for mid-infrared photon pairs.
//!
//! The crate covers the whole chain from crystal dispersion to source
//! figures of merit:
//!
//! * [`dispersion`] Sellmeier indices, phase mismatch, GVM wavelength and poling period
//! * [`target`] analytic target phase-matching functions and the amplitude curves to track
//! * [`poling`] greedy domain-sign synthesis and reconstruction of the achieved PMF
//! * [`biphoton`] joint spectral/temporal amplitudes, HOM traces and Schmidt numbers
//! * [`pair_rate`] absolute single-mode pair generation rate
//! * [`tolerance`] fabrication-resolution Monte Carlo
//! * [`config`], [`artifacts`], [`heatmap`] and [`pipeline`] for config-driven runs
//!
//! Lengths are in nm and wavevectors in rad/nm throughout. Angular frequencies
//! are in rad/fs inside [`biphoton`]; [`pair_rate`] works in SI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod biphoton;
pub mod config;
pub mod constants;
pub mod dispersion;
mod error;
pub mod heatmap;
pub mod numeric;
pub mod pair_rate;
pub mod pipeline;
pub mod poling;
pub mod target;
pub mod tolerance;

pub use error::{Error, Result};
