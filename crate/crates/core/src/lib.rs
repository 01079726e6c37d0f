//! Capacitated ball cover with bounded expansion: instances, the covering
//! LP, the rounding pipeline, integral assignment, an exact oracle and a
//! verifier.

pub mod arith;
pub mod assignment;
pub mod batch;
pub mod error;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod rounding;
pub mod verify;

pub use error::{Error, Result};
