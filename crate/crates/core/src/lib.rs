//! Secure connectivity of heterogeneous sensor networks under random key
//! predistribution and an on/off channel model.
//!
//! Nodes fall into `r` classes drawn from `μ`. A class-`i` node receives `K_i`
//! keys drawn without replacement from a pool of `P` keys, and the channel
//! between a class-`i` and a class-`j` node is on with probability `α_ij`.
//! Two nodes are linked when they share a key and their channel is on.
//!
//! - [`model`]: exact edge probabilities, `Λ`, `c_n`, first moments and the
//!   `Λ_m > ln n / n` threshold.
//! - [`graphgen`]: deterministic sampling of the intersection graph.
//! - [`analysis`]: isolation, connectivity and class-pair edge audits.
//! - [`montecarlo`]: repeated trials, sweeps and Wilson intervals.

pub mod analysis;
pub mod error;
pub mod graphgen;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
