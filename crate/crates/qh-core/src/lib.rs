//! Exact symbolic pipeline from a quasi-hereditary algebra presented by
//! quiver and relations to the directed box of its standard modules and the
//! Burt-Butler right/left algebras, with an exact Borel subalgebra exhibited
//! and verified.

pub mod ainfinity;
pub mod boxify;
pub mod boxrep;
pub mod burtbutler;
pub mod dsl;
pub mod error;
pub mod fixtures;
pub mod homotopy;
pub mod linalg;
pub mod modules;
pub mod presentation;
pub mod rng;
pub mod sca;
pub mod scalar;

pub use error::{QhError, Result};
pub use linalg::Mat;
pub use scalar::{FieldCfg, Scalar};
