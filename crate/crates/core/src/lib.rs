//! Information measures for small quantum systems: coherent and one-time
//! information of Kraus channels, compatible (joint-measurement) information,
//! prepare-send-measure experiments and the Λ-atom emission rate.

pub mod channels;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod states;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use states::{DensityMatrix, PureState};

/// Crate version, stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
