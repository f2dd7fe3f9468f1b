//! Product partition model over dynamic generalized linear models.
//!
//! A series is split into contiguous blocks; inside a block the state does
//! not evolve, between blocks it evolves with a discount factor. Partitions
//! are sampled by Gibbs flips of the change-point indicators and the discount
//! factor by adaptive rejection Metropolis sampling.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arms;
pub mod config;
pub mod dglm;
pub mod ef_models;
pub mod error;
pub mod eval;
pub mod gibbs;
pub mod io;
pub mod partition;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
