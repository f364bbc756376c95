//! Dense linear algebra kernels.

pub mod block;
pub mod dense;
pub mod id;
pub mod norm;

pub use block::{factor_block, BlockFactor, FactorKind};
pub use dense::{Mat, Op};
pub use id::{interpolative_decompose, IdResult};
pub use norm::{power_norm, two_norm_estimate, PowerEstimate};
