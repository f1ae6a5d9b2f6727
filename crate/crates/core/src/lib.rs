//! Kernel functions on a data set that is known only through similarity
//! triplets "`a` is more similar to `b` than to `c`".
//!
//! Triplets are collected in a [`TripletStore`]. From it, [`build_phi_k1`] and
//! [`build_phi_k2`] construct sparse unit-norm embeddings of the objects, and
//! [`gram`] turns an embedding into a positive semi-definite kernel matrix.
//! The matrices can be combined ([`combine`]), corrected for diagonal
//! dominance ([`reduce_diagonal_dominance`]) and handed to the kernel methods
//! in [`methods`]. The [`synth`] and [`eval`] modules simulate triplets for
//! labeled point clouds and score the resulting clusterings.
//!
//! ```
//! use triplet_kernels::{build_phi_k1, gram, TripletStore};
//!
//! let store = TripletStore::ingest([(0, 1, 2), (1, 0, 2), (2, 1, 0)], 3).unwrap();
//! let k1 = gram(&build_phi_k1(&store, false).unwrap());
//! assert_eq!(k1.get(0, 0), 1.0);
//! ```

pub mod error;
pub mod eval;
pub mod features;
pub mod kendall;
pub mod kernels;
pub mod linalg;
pub mod methods;
pub mod rng;
pub mod synth;
pub mod triplets;

pub use error::{Error, FeatureKind, Result};
pub use features::{build_phi_k1, build_phi_k2, SparseFeatureMatrix};
pub use kernels::{combine, gram, reduce_diagonal_dominance, smallest_eigenvalue, KernelMatrix};
pub use triplets::{Triplet, TripletStore};
