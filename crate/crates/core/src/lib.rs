//! Finite-n structure of the deformed Laguerre weight `x^α e^{−x} (x+t)^λ`.
//!
//! The numerical core is generic over [`Scalar`]: the same Hankel, recurrence
//! and identity code runs on `f64`, on exact rationals and on [`BigReal`].

pub mod asymptotics;
pub mod bigreal;
pub mod error;
pub mod ladder;
pub mod moments;
pub mod orthopoly;
pub mod precision;
pub mod scalar;
pub mod special;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use bigreal::BigReal;
pub use error::{Error, Result};
pub use moments::{MomentTable, WeightParams};
pub use orthopoly::{MonicPolynomial, RecurrenceTable};
pub use precision::PrecisionCtx;
pub use scalar::{Exact, Real, Scalar};

/// Tables at arbitrary precision.
pub type BigMomentTable = MomentTable<BigReal>;
pub type BigRecurrenceTable = RecurrenceTable<BigReal>;
pub type BigAuxTable = ladder::AuxTable<BigReal>;

/// Tables in exact rational arithmetic.
pub type ExactMomentTable = MomentTable<Exact>;
pub type ExactRecurrenceTable = RecurrenceTable<Exact>;
pub type ExactAuxTable = ladder::AuxTable<Exact>;

/// Double-precision tables, for quick looks.
pub type F64RecurrenceTable = RecurrenceTable<f64>;
