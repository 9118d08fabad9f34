//! Mining deprecated APIs from Python library sources and flagging their
//! use in client code.

pub mod depdb;
pub mod error;
pub mod eval;
pub mod extractor;
pub mod lsp;
pub mod output;
pub mod pysrc;
pub mod scan;

pub use error::{Error, Result};
