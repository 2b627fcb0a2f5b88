//! Alignment, duality and low-rank certificate tools for the problem of
//! packing `n` nearly-orthogonal unit-diagonal rows into rank `d`.
//!
//! Indices are 0-based throughout the library.

pub mod alignment;
pub mod duality;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod oracle;
pub mod rank2;
pub mod search;

pub use alignment::{ExtReal, Subspace};
pub use duality::{Check, OffCertificate, Source, ThetaCertificate, VerificationReport};
pub use error::{Error, Result};
pub use geometry::PointConfig;
pub use numerics::{Mat, Tolerances};
pub use rank2::{PStruct, Rank2Report};
pub use search::{SearchConfig, SearchResult};
