//! Proven upper bounds on the rate of uniformly-random codes over the binary
//! deletion channel, Monte Carlo estimates of the same quantity, and
//! exhaustive-enumeration oracles that validate both at small blocklength.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: base-2 log-domain arithmetic, binary entropy, binomials.
//! * [`walkdp`]: the random-walk dynamic programs for the probability that
//!   two deletion outputs agree, and the weight-tracking variant that
//!   produces the `Π` table.
//! * [`bounds`]: assembly of the warmup, main, efficient and corollary bounds.
//! * [`channelsim`]: channel sampling, subsequence counting and Hoeffding
//!   confidence intervals.
//! * [`oracle`]: brute-force ground truth for `n <= 12`.
//!
//! All logarithms are base 2.

pub mod bounds;
pub mod channelsim;
mod error;
pub mod numerics;
pub mod oracle;
pub mod walkdp;

pub use error::{Error, Result};
pub use numerics::LogValue;
