#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod error;
pub mod func;
pub mod harness;
pub mod levy;
pub mod malliavin;
pub mod mc;
pub mod quadrature;
pub mod random_measure;
pub mod rng;
pub mod sde;

pub use error::{Error, Result};
