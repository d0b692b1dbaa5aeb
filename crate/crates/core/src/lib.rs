//! Exact spectral analysis of random walks on the symmetric and alternating groups.

pub mod bounds;
pub mod characters;
pub mod combinat;
pub mod distances;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod partitions;
pub mod real;
pub mod spectra;

pub use characters::{ClassKind, CycleType};
pub use distances::TimeMode;
pub use error::{Error, Result};
pub use oracle::Walk;
pub use partitions::Partition;
pub use real::Real;
pub use spectra::{ClassMeasure, Group, Spectrum, SpectrumEntry};

/// Library version, embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
