//! Combinatorial semi-bandits on the hypercube, the m-set and explicit vertex
//! lists.
//!
//! The main learner, [`learner::HybridFtrl`], runs follow-the-regularized-leader
//! with the hybrid regularizer
//! `Ψ(x) = Σᵢ −√xᵢ + γ(1−xᵢ)·log(1−xᵢ)` and learning rate `η_t = 1/√t`,
//! then samples a vertex whose mean is the FTRL point. Around it sit the
//! building blocks ([`regularizer`], [`solver`], [`sampling`]), baseline
//! learners, loss [`environment`]s, closed-form regret constants in
//! [`bounds`], and the [`harness`] that measures pseudo-regret.
//!
//! ```
//! use combband::{action_set::ActionSet, learner::{build_learner, AlgoKind, Feedback, LearnerParams}};
//! use rand::SeedableRng;
//!
//! let set = ActionSet::mset(6, 2)?;
//! let mut learner = build_learner(AlgoKind::Hybrid, &set, LearnerParams::default())?;
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let play = learner.next_action(&mut rng)?;
//! assert_eq!(play.action.ones(), 2);
//! learner.observe(&Feedback::semi_bandit(&play.action, &[-1.0, 1.0, 1.0, 1.0, 1.0, 1.0])?)?;
//! # Ok::<(), combband::Error>(())
//! ```

pub mod action_set;
pub mod bounds;
pub mod environment;
pub mod error;
pub mod harness;
pub mod learner;
pub mod regularizer;
pub mod sampling;
pub mod solver;

pub use action_set::{ActionSet, FractionalPoint, Vertex};
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/action-sets.md")]
    mod action_sets {}
    #[doc = include_str!("../../../book/src/regularizer.md")]
    mod regularizer {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/learners.md")]
    mod learners {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
