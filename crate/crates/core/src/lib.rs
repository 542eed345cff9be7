//! Analytic link utilities and greedy resource allocation for multi-carrier
//! limited-feedback coordinated multi-point (CoMP) downlinks.
//!
//! The crate is layered bottom-up:
//!
//! - [`scenario`]: cluster geometry, association, path loss and the
//!   wrap-around inter-cluster noise floor.
//! - [`channel`]: Rayleigh channel draws, quantization-cell error sampling,
//!   interference-cancelling beamformers and instantaneous SINR.
//! - [`kernels`]: closed-form and quadrature evaluation of capacity,
//!   effective capacity and energy efficiency under quantized CDI.
//! - [`allocator`]: the constraint model plus the greedy feedback-bit
//!   partitioning and cluster-based scheduling algorithms.
//! - [`mcval`]: Monte-Carlo oracles for the kernels.
//! - [`harness`]: configuration presets, experiment sweeps and CSV output.

pub mod allocator;
pub mod channel;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod mcval;
pub mod scenario;

pub use error::{Error, Result};
