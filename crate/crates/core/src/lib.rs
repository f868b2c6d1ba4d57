pub mod coupling;
pub mod decomp;
pub mod error;
pub mod family;
pub mod geometry;
pub mod grid;
pub mod group;
pub mod kernel;
pub mod metrics;
pub mod partition;
pub mod perm;
pub mod sample;
pub mod spectral;
pub mod transient;

pub use error::{Error, Result};
pub use partition::Partition;
pub use perm::{Corner, CornerMove, Perm, Position, Sign};
