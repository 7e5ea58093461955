//! Orthogonal measures on spaces of unital completely positive maps, in
//! finite dimension and for finitely supported measures.
//!
//! The crate builds minimal Stinespring dilations from the Gram form of a
//! CP map, computes Arveson Radon-Nikodym operators in the commutant of the
//! dilation, and decides orthogonality of atomic barycentric measures three
//! ways: the homomorphism test on `k_mu`, the exhaustive subset-split test,
//! and unitarity of the disintegration isometry `U_mu`. The
//! [`correspondence`] module maps orthogonal measures to abelian
//! subalgebras of the commutant and back.
//!
//! ```
//! use orthomeasure::{gallery, measures, Tolerance};
//!
//! let tol = Tolerance::default();
//! let mu = gallery::fixtures::two_pure_measure();
//! let cert = measures::is_orthogonal_measure(&mu, &tol).unwrap();
//! assert!(cert.orthogonal);
//! ```

pub mod algebra;
pub mod correspondence;
pub mod dilation;
pub mod error;
pub mod gallery;
pub mod measures;
pub mod numkernel;
pub mod radon_nikodym;

pub use algebra::{AbelianSubalgebra, StarAlgebra};
pub use correspondence::{Classification, SubalgebraVerdict};
pub use dilation::{CpMap, StinespringTriple};
pub use error::{Error, ErrorKind, Result};
pub use measures::{DiscreteMeasure, Disintegration};
pub use numkernel::{CMat, Tolerance, C64};
pub use radon_nikodym::RnOperator;
