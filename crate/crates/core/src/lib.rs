//! Critical sets of two-layer networks `g(θ, x) = Σ_k a_k σ(w_k·x)` under the
//! squared loss `R(θ) = Σ_i (g(θ, x_i) - y_i)²`.
//!
//! The crate evaluates the loss with closed-form gradients and Hessians,
//! stratifies parameter space into branches by the number of effective and
//! ineffective neurons, maps critical points between widths with the
//! critical embedding and reduction operators, samples the critical set that
//! represents a given output function and certifies saddle points.
//!
//! ```
//! use critset::{fixtures, model};
//!
//! let problem = fixtures::exp_four_samples();
//! let grad = model::gradient(&problem.spec, &problem.theta, &problem.samples).unwrap();
//! assert!(grad.norm() < 1e-10);
//! ```
//!
//! The guide in `book/` walks through every module; its code blocks are
//! compiled and run as doctests of this crate.

pub mod activation;
pub mod atlas;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod saddle;
pub mod symmetry;

pub use activation::{Activation, Parity};
pub use atlas::{BranchPiece, EstimatedDim, ManifoldTrace, Region, WitnessSequence};
pub use error::{Error, Result};
pub use model::{LossDerivatives, NetworkSpec, ParamPoint, SampleSet};
pub use operators::BranchId;
pub use saddle::{Classification, CriticalityReport, SaddleWitness, Tolerances};
pub use symmetry::{DeltaVector, IndexMap, Partition, Permutation};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/atlas.md")]
    mod atlas {}
    #[doc = include_str!("../../../book/src/saddles.md")]
    mod saddles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
