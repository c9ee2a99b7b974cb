use rand::RngCore;

use super::{sample_action, Feedback, Learner, Play};
use crate::action_set::{ActionSet, FractionalPoint, Vertex};
use crate::error::{check_dim, Error, Result};
use crate::regularizer::RegularizerSpec;
use crate::solver::{FtrlSolver, WarmStart};

/// Plain importance weighting `ℓ̂ᵢ = oᵢ·1{Xᵢ = 1}/xᵢ`, without the shift used
/// by the hybrid learner.
pub fn importance_weighted_estimate(observed: &[f64], action: &Vertex, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(x.len(), observed.len())?;
    check_dim(x.len(), action.dim())?;
    observed
        .iter()
        .zip(action.iter())
        .zip(x)
        .enumerate()
        .map(|(i, ((&o, &played), &xi))| match (played, xi > 0.0) {
            (false, _) => Ok(0.0),
            (true, true) => Ok(o / xi),
            (true, false) => Err(Error::Inconsistent(format!(
                "arm {i} was played with probability {xi}"
            ))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineRegularizer {
    /// Shannon negative entropy with `η_t = 1/(4√t)`.
    Exp2,
    /// Log barrier with `η_t = 4√(log(t+1)/(t+1))`.
    LogBarrier,
}

impl BaselineRegularizer {
    fn spec(&self) -> RegularizerSpec {
        match self {
            BaselineRegularizer::Exp2 => RegularizerSpec::ShannonNegEntropy,
            BaselineRegularizer::LogBarrier => RegularizerSpec::LogBarrier,
        }
    }

    /// Unscaled learning rate at round `t ≥ 1`. The log-barrier schedule
    /// `4√(log t / t)` vanishes at `t = 1`, so it is evaluated at `t + 1`.
    pub fn learning_rate(&self, t: u64) -> f64 {
        let t = t as f64;
        match self {
            BaselineRegularizer::Exp2 => 1.0 / (4.0 * t.sqrt()),
            BaselineRegularizer::LogBarrier => 4.0 * ((t + 1.0).ln() / (t + 1.0)).sqrt(),
        }
    }
}

/// Exp2 and LogBarrier: FTRL over the box or m-set hull with a baseline
/// regularizer and importance-weighted estimates.
#[derive(Clone, Debug)]
pub struct FtrlBaseline {
    kind: BaselineRegularizer,
    set: ActionSet,
    solver: FtrlSolver,
    lr_scale: f64,
    cumulative: Vec<f64>,
    t: u64,
    warm: WarmStart,
    pending: Option<FractionalPoint>,
}

impl FtrlBaseline {
    pub fn new(kind: BaselineRegularizer, set: ActionSet, lr_scale: f64) -> Result<Self> {
        if matches!(set, ActionSet::Enumerated { .. }) {
            return Err(Error::Unsupported(format!(
                "{kind:?} runs on the hypercube or the m-set, got {set}"
            )));
        }
        let d = set.dim();
        Ok(FtrlBaseline {
            kind,
            set,
            solver: FtrlSolver::new(kind.spec()),
            lr_scale,
            cumulative: vec![0.0; d],
            t: 1,
            warm: WarmStart::default(),
            pending: None,
        })
    }

    pub fn leader(&mut self) -> Result<FractionalPoint> {
        let eta_inv = 1.0 / (self.lr_scale * self.kind.learning_rate(self.t));
        let warm = (!self.warm.x.is_empty()).then_some(&self.warm);
        let report = match &self.set {
            ActionSet::MSet { m, .. } => self.solver.solve_mset(&self.cumulative, eta_inv, *m, warm)?,
            _ => self.solver.solve_box(&self.cumulative, eta_inv, warm)?,
        };
        self.warm.x = report.x.to_vec();
        self.warm.nu = report.dual_value;
        Ok(report.x)
    }
}

impl Learner for FtrlBaseline {
    fn name(&self) -> &str {
        match self.kind {
            BaselineRegularizer::Exp2 => "exp2",
            BaselineRegularizer::LogBarrier => "logbarrier",
        }
    }

    fn next_action(&mut self, rng: &mut dyn RngCore) -> Result<Play> {
        let x = self.leader()?;
        let action = sample_action(&self.set, &x, None, rng)?;
        self.pending = Some(x.clone());
        Ok(Play {
            action,
            fractional: Some(x),
        })
    }

    fn observe(&mut self, feedback: &Feedback) -> Result<()> {
        let (action, observed) = feedback.expect_semi_bandit(self.name())?;
        let x = self
            .pending
            .take()
            .ok_or_else(|| Error::Inconsistent("observe called before next_action".into()))?;
        let estimate = importance_weighted_estimate(observed, action, &x)?;
        for (acc, e) in self.cumulative.iter_mut().zip(estimate) {
            *acc += e;
        }
        self.t += 1;
        Ok(())
    }
}
