//! File formats, a rayon executor and the `kgprox` command line on top of
//! [`kgprox_core`].

pub mod bundle;
pub mod cli;
pub mod error;
pub mod exec;
pub mod io;
pub mod manifest;

pub use error::{Error, Result};
pub use exec::RayonExecutor;
pub use kgprox_core as core;
