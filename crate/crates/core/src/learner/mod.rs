//! Learners behind one interface: `next_action` picks a vertex, `observe`
//! consumes the feedback for that round.
//!
//! FTRL-style learners also report their fractional iterate `x_t`, which the
//! harness uses for exact pseudo-regret.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::action_set::{ActionSet, FractionalPoint, Vertex};
use crate::error::{check_dim, Error, Result};

mod bandit;
mod combucb;
mod ftrl_baseline;
mod hybrid;
mod thompson;

pub use bandit::{bandit_estimate, BanditHybrid};
pub use combucb::CombUcb;
pub use ftrl_baseline::{importance_weighted_estimate, BaselineRegularizer, FtrlBaseline};
pub use hybrid::{semibandit_estimate, HybridFtrl};
pub use thompson::ThompsonSampling;

/// What a learner plays in one round.
#[derive(Clone, Debug, PartialEq)]
pub struct Play {
    pub action: Vertex,
    /// `x_t` with `E[X_t] = x_t`, for learners that maintain one.
    pub fractional: Option<FractionalPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedbackKind {
    SemiBandit,
    Bandit,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feedback {
    /// `o_t = X_t ∘ ℓ_t` together with `X_t`.
    SemiBandit { action: Vertex, observed: Vec<f64> },
    /// `⟨X_t, ℓ_t⟩` together with `X_t`.
    Bandit { action: Vertex, loss: f64 },
}

impl Feedback {
    pub fn semi_bandit(action: &Vertex, ell: &[f64]) -> Result<Self> {
        check_dim(action.dim(), ell.len())?;
        let observed = action
            .iter()
            .zip(ell)
            .map(|(&b, &l)| if b { l } else { 0.0 })
            .collect();
        Ok(Feedback::SemiBandit {
            action: action.clone(),
            observed,
        })
    }

    pub fn bandit(action: &Vertex, ell: &[f64]) -> Result<Self> {
        check_dim(action.dim(), ell.len())?;
        Ok(Feedback::Bandit {
            action: action.clone(),
            loss: action.dot(ell),
        })
    }

    pub fn for_kind(kind: FeedbackKind, action: &Vertex, ell: &[f64]) -> Result<Self> {
        match kind {
            FeedbackKind::SemiBandit => Self::semi_bandit(action, ell),
            FeedbackKind::Bandit => Self::bandit(action, ell),
        }
    }

    pub fn action(&self) -> &Vertex {
        match self {
            Feedback::SemiBandit { action, .. } | Feedback::Bandit { action, .. } => action,
        }
    }

    fn expect_semi_bandit(&self, learner: &str) -> Result<(&Vertex, &[f64])> {
        match self {
            Feedback::SemiBandit { action, observed } => Ok((action, observed)),
            Feedback::Bandit { .. } => Err(Error::Unsupported(format!(
                "{learner} needs semi-bandit feedback"
            ))),
        }
    }
}

pub trait Learner: Send {
    fn name(&self) -> &str;

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::SemiBandit
    }

    fn next_action(&mut self, rng: &mut dyn RngCore) -> Result<Play>;

    fn observe(&mut self, feedback: &Feedback) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AlgoKind {
    Hybrid,
    Exp2,
    LogBarrier,
    CombUcb,
    Thompson,
    BanditHybrid,
}

impl AlgoKind {
    pub const ALL: [AlgoKind; 6] = [
        AlgoKind::Hybrid,
        AlgoKind::Exp2,
        AlgoKind::LogBarrier,
        AlgoKind::CombUcb,
        AlgoKind::Thompson,
        AlgoKind::BanditHybrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgoKind::Hybrid => "hybrid",
            AlgoKind::Exp2 => "exp2",
            AlgoKind::LogBarrier => "logbarrier",
            AlgoKind::CombUcb => "combucb",
            AlgoKind::Thompson => "thompson",
            AlgoKind::BanditHybrid => "bandit-hybrid",
        }
    }

    /// Whether the learning rate has a tunable scale.
    pub fn has_learning_rate(&self) -> bool {
        matches!(
            self,
            AlgoKind::Hybrid | AlgoKind::Exp2 | AlgoKind::LogBarrier | AlgoKind::BanditHybrid
        )
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgoKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

/// Hyperparameters shared by the learner constructors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerParams {
    /// Replaces the default `γ` of the hybrid regularizer.
    pub gamma_override: Option<f64>,
    /// Multiplies the learning rate `η_t` of FTRL-style learners.
    pub lr_scale: f64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            gamma_override: None,
            lr_scale: 1.0,
        }
    }
}

pub fn build_learner(algo: AlgoKind, set: &ActionSet, params: LearnerParams) -> Result<Box<dyn Learner>> {
    if !(params.lr_scale > 0.0 && params.lr_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "learning-rate scale must be positive, got {}",
            params.lr_scale
        )));
    }
    Ok(match algo {
        AlgoKind::Hybrid => Box::new(HybridFtrl::new(set.clone(), params)?),
        AlgoKind::Exp2 => Box::new(FtrlBaseline::new(
            BaselineRegularizer::Exp2,
            set.clone(),
            params.lr_scale,
        )?),
        AlgoKind::LogBarrier => Box::new(FtrlBaseline::new(
            BaselineRegularizer::LogBarrier,
            set.clone(),
            params.lr_scale,
        )?),
        AlgoKind::CombUcb => Box::new(CombUcb::new(set.clone())),
        AlgoKind::Thompson => Box::new(ThompsonSampling::new(set.clone())),
        AlgoKind::BanditHybrid => Box::new(BanditHybrid::new(set.clone(), params.lr_scale)?),
    })
}

/// Draws `X_t ∼ P(x_t)` with the sampler matching the set kind.
pub(crate) fn sample_action(
    set: &ActionSet,
    x: &[f64],
    weights: Option<&[f64]>,
    rng: &mut dyn RngCore,
) -> Result<Vertex> {
    use crate::sampling;
    match set {
        ActionSet::Hypercube { .. } => Ok(sampling::sample_hypercube(x, rng)),
        ActionSet::MSet { m, .. } => sampling::sample_mset(x, *m, rng),
        ActionSet::Enumerated { vertices, .. } => {
            let w = weights.ok_or_else(|| {
                Error::Inconsistent("explicit action set sampled without vertex weights".into())
            })?;
            Ok(vertices[sampling::sample_enumerated(w, rng)?].clone())
        }
    }
}
