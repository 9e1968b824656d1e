//! Large-time asymptotics of the defocusing mKdV equation with step-like initial data.

// `!(x > 0.0)` rejects NaN on purpose; reference constants keep every printed digit.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod asymptotics;
pub mod dfunction;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod parametrix;
pub mod phase;
pub mod scattering;
pub mod types;

pub use error::{Error, Result};
pub use types::{c64, CutSide, Matrix2C, Profile, StepParams, C64};
