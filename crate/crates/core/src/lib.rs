//! Vector-model wavefunctions for quantum angular momentum.
//!
//! Exact oracles ([`exact`]) sit beside the semiclassical approximations
//! ([`semiclassical_cg`], [`semiclassical_wigd`]) and the wavepacket,
//! precession and correlation machinery built on them.

pub mod error;
pub mod qnum;
pub mod exact;
pub mod special;
pub mod semiclassical_cg;
pub mod semiclassical_wigd;
pub mod wavepacket;
pub mod precession;
pub mod correlations;

pub use error::{Error, Result};
pub use qnum::{lambda_perp, theta_m, triangle_ok, EulerAngles, HalfInt, NormConvention, JM};
