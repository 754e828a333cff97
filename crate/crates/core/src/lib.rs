//! Deterministic identification codes over classical-quantum channels.

pub mod channel;
pub mod codes;
pub mod distinguish;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod typicality;
pub mod verify;

pub use error::{Error, Result};
