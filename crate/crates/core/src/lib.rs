//! Holevo capacity of finite-dimensional quantum channels.
//!
//! The crate evaluates the Holevo quantity of signal ensembles, maximizes it
//! over pure-input ensembles of a channel given in Kraus form, and certifies
//! the result with relative-entropy optimality conditions: every available
//! output lies within relative-entropy distance χ* of the optimal average
//! output, and every weighted member sits exactly at χ*.
//!
//! All entropies are in bits. Relative entropies that diverge are carried as
//! [`Bits::Infinite`] rather than as large floats.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

pub mod bits;
pub mod channels;
pub mod ensembles;
pub mod error;
pub mod io;
pub mod opalg;
pub mod optimizer;
pub mod random;

pub use bits::Bits;
pub use channels::KrausChannel;
pub use ensembles::Ensemble;
pub use error::{Error, Result};
pub use opalg::{CMatrix, CVector, DensityOperator, SpectralDecomposition};
pub use optimizer::{CapacityReport, Certificate, OptimizerConfig, PureState};
