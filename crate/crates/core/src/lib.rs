//! Welfare measures on the `(c, p)` plane and inference for them.
//!
//! - [`measures`]: the RPV, MVPF family, MSS, `L^q` indices and conversions.
//! - [`aggregation`]: JPV and TPV over policy collections.
//! - [`inference`]: uniform, minimalist and bootstrap confidence intervals.
//! - [`simulation`]: Monte Carlo coverage study of the interval families.
//!
//! All randomness flows from explicit `u64` seeds through counter-addressed
//! streams (see [`rng`]), so results do not depend on the rayon thread count.

pub mod aggregation;
pub mod error;
pub mod inference;
pub mod measures;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
pub use measures::PolicyPoint;
