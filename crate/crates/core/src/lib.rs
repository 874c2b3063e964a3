//! Path-summary-driven XML storage and query engine.

pub mod error;
pub mod pattern;
pub mod relpaths;
pub mod store;
pub mod summary;
pub mod ingest;
pub mod testkit;
pub mod varint;

pub use error::{Error, Result};
pub use ingest::{NodeEvent, StructuralId};
