//! Toolkit for differential-neural distinguisher experiments on
//! round-reduced DES, Chaskey and PRESENT-80.
//!
//! The crate covers everything on the classical side of the pipeline:
//!
//! * [`ciphers`]: bit-exact round-reduced encryption.
//! * [`sampling`]: labeled multi-pair sample generation and the
//!   `m × ω × 2L/ω` tensor arrangement.
//! * [`datafmt`]: the packed on-disk dataset and prediction formats shared
//!   with external trainers.
//! * [`diffstats`]: S-box difference distribution tables and Monte Carlo
//!   differential transition estimates.
//! * [`evaluator`]: accuracy reports over prediction files.
//!
//! The `neurodiff` binary wraps all of it (see [`cli`]).

pub mod ciphers;
pub mod cli;
pub mod datafmt;
pub mod diffstats;
mod error;
pub mod evaluator;
pub mod manifest;
mod parallel;
pub mod rng;
pub mod sampling;

pub use ciphers::{Block, CipherId, KeyMaterial, KeyedCipher};
pub use error::{Error, Result};
