//! Reference computations for tests. Everything here is deliberately naive
//! and shares no code with the main crate.

pub mod fd;
pub mod quad;
pub mod rbm;
