use rand::RngCore;

use super::{Feedback, FeedbackKind, Learner, Play};
use crate::action_set::{ActionSet, FractionalPoint, Vertex};
use crate::error::{check_dim, Error, Result};
use crate::regularizer::RegularizerSpec;
use crate::sampling::sample_hypercube;
use crate::solver::{FtrlSolver, WarmStart};

/// `ℓ̂ᵢ = s·Xᵢ/xᵢ − s·(1−Xᵢ)/(1−xᵢ)` from the scalar loss `s = ⟨X, ℓ⟩`.
///
/// Unbiased for any `s` whose law does not depend on `Xᵢ` beyond `ℓᵢXᵢ`, so
/// adding a constant to `s` keeps it unbiased.
pub fn bandit_estimate(loss: f64, action: &Vertex, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(x.len(), action.dim())?;
    action
        .iter()
        .zip(x)
        .enumerate()
        .map(|(i, (&played, &xi))| {
            let p = if played { xi } else { 1.0 - xi };
            if p > 0.0 {
                Ok(if played { loss / xi } else { -loss / (1.0 - xi) })
            } else {
                Err(Error::Inconsistent(format!(
                    "arm {i} outcome had probability zero"
                )))
            }
        })
        .collect()
}

/// FTRL on the hypercube with full bandit feedback.
///
/// Uses the symmetric regularizer `Σ −√xᵢ − √(1−xᵢ)` with `η_t = 1/√t`; the
/// problem separates into one two-armed instance per coordinate.
///
/// The observed loss is shifted by [`BanditHybrid::DEFAULT_SHIFT`] before
/// importance weighting. With `‖ℓ‖₁ ≤ 1` this makes `s + 1 ≥ 0`, so both
/// two-armed estimates are nonnegative; with no shift, `−1/xᵢ`-sized
/// estimates on rare plays occasionally flip a settled coordinate.
#[derive(Clone, Debug)]
pub struct BanditHybrid {
    set: ActionSet,
    shift: f64,
    solver: FtrlSolver,
    lr_scale: f64,
    cumulative: Vec<f64>,
    t: u64,
    warm: WarmStart,
    pending: Option<FractionalPoint>,
}

impl BanditHybrid {
    pub const DEFAULT_SHIFT: f64 = 1.0;

    pub fn new(set: ActionSet, lr_scale: f64) -> Result<Self> {
        Self::with_shift(set, lr_scale, Self::DEFAULT_SHIFT)
    }

    /// `shift = 0` gives the plain estimator on the raw loss.
    pub fn with_shift(set: ActionSet, lr_scale: f64, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::InvalidParameter(format!("loss shift must be finite, got {shift}")));
        }
        if !matches!(set, ActionSet::Hypercube { .. }) {
            return Err(Error::Unsupported(format!(
                "bandit-feedback learner needs the hypercube, got {set}"
            )));
        }
        let d = set.dim();
        Ok(BanditHybrid {
            set,
            shift,
            solver: FtrlSolver::new(RegularizerSpec::SymmetricTsallisHalf),
            lr_scale,
            cumulative: vec![0.0; d],
            t: 1,
            warm: WarmStart::default(),
            pending: None,
        })
    }

    pub fn cumulative_estimate(&self) -> &[f64] {
        &self.cumulative
    }
}

impl Learner for BanditHybrid {
    fn name(&self) -> &str {
        "bandit-hybrid"
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn next_action(&mut self, rng: &mut dyn RngCore) -> Result<Play> {
        let eta_inv = (self.t as f64).sqrt() / self.lr_scale;
        let warm = (!self.warm.x.is_empty()).then_some(&self.warm);
        let report = self.solver.solve_box(&self.cumulative, eta_inv, warm)?;
        self.warm.x = report.x.to_vec();
        let action = sample_hypercube(&report.x, rng);
        debug_assert_eq!(action.dim(), self.set.dim());
        self.pending = Some(report.x.clone());
        Ok(Play {
            action,
            fractional: Some(report.x),
        })
    }

    fn observe(&mut self, feedback: &Feedback) -> Result<()> {
        let Feedback::Bandit { action, loss } = feedback else {
            return Err(Error::Unsupported(
                "bandit-feedback learner received semi-bandit feedback".into(),
            ));
        };
        let x = self
            .pending
            .take()
            .ok_or_else(|| Error::Inconsistent("observe called before next_action".into()))?;
        let estimate = bandit_estimate(*loss + self.shift, action, &x)?;
        for (acc, e) in self.cumulative.iter_mut().zip(estimate) {
            *acc += e;
        }
        self.t += 1;
        Ok(())
    }
}
