//! Pseudo-random matrix ensembles built from dual BCH codes.
//!
//! The crate covers the whole pipeline: arithmetic in GF(2^m), BCH and dual
//! code construction, packing of codewords into symmetric and rectangular
//! sign matrices, dense symmetric eigendecomposition, the semicircle and
//! Marchenko-Pastur limit laws, and exact r-independence verification of
//! dual-code coordinates.
//!
//! ```
//! use pseudospec::{codes, gf2m::FieldParams};
//!
//! let field = FieldParams::new(4).unwrap();
//! let bch = codes::bch_generator(&field, 5).unwrap();
//! assert_eq!((bch.n(), bch.k()), (15, 7));
//! let dual = codes::dual_code(&bch).unwrap();
//! assert_eq!(dual.k_dual(), 8);
//! ```

pub mod codes;
pub mod ensembles;
mod error;
pub mod experiment;
pub mod gf2m;
pub mod independence;
pub mod laws;
pub mod matrix;
pub mod quad;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};

/// Library version recorded in experiment sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
