pub mod eigen;
pub mod error;
pub mod fem;
pub mod harness;
pub mod io;
pub mod mesh;
pub mod oracle;
pub mod sparse;

pub use error::{Error, Result};
pub use fem::{FeSpace, Operator, SpaceKind};
pub use mesh::{BoundaryLabel, BoundarySelection, Domain, Mesh};
pub use sparse::SparseSymMatrix;
