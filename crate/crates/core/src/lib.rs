//! Hierarchical interpolative factorization for integral equations.
//!
//! A kernel matrix `A = diag(a) + diag(b) K diag(c)` on a uniform grid is
//! factored as a product of sparse block elementary operators by recursive
//! skeletonization (`rskelf`) or by hierarchical interpolative factorization
//! (`hifie`, `hifie_x`), giving fast `F x` and `F^{-1} b`.
//!
//! ```no_run
//! use hifie::{example2, factorize, FactorOptions, FactorScheme};
//!
//! let problem = example2(64, None).unwrap();
//! let f = factorize(&problem, &FactorOptions::new(FactorScheme::HifieX, 1e-6)).unwrap();
//! let b = vec![1.0; problem.n()];
//! let x = f.solve(&b).unwrap();
//! assert_eq!(x.len(), b.len());
//! ```

pub mod analysis;
pub mod compression;
pub mod error;
pub mod factor;
pub mod geometry;
pub mod linalg;
pub mod problem;
pub mod scalar;

pub use analysis::{
    dense_matvec_operator, estimate_forward_error, estimate_inverse_error, fft_matvec_operator, gmres, ErrorEstimate,
    GmresOutcome, InverseOperator, LinearOperator,
};
pub use error::{Error, Result};
pub use factor::{factorize, hifie_factor, rsf_factor, FactorOptions, FactorScheme, Factorization, SkelRecord, Variant};
pub use geometry::{build_level_plan, build_uniform_grid, Cluster, ClusterKind, GridSpec, LevelTag, PointSet, Scheme};
pub use linalg::{factor_block, interpolative_decompose, two_norm_estimate, BlockFactor, IdResult, Mat, Op};
pub use num_complex::Complex64;
pub use problem::{
    example1, example2, example5, example6, lippmann_schwinger_problem, EntryGenerator, KernelKind, KernelProblem,
};
pub use scalar::Scalar;

/// Library version, echoed in benchmark reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
