// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod asymptotics;
pub mod envelope;
pub mod error;
pub mod exact;
pub mod hankel;
pub mod lambert;
pub mod quadrature;
pub mod run;
pub mod saddle;

pub use error::{Error, Result};
