pub mod bounds;
pub mod boxes;
pub mod cli;
pub mod error;
pub mod extractor;
pub mod ks_bell;
pub mod ns_certify;
pub mod protocol;
pub mod rational;
pub mod seed;
pub mod sv_source;

pub use error::{Error, Result};
