use rand::RngCore;

use super::{sample_action, Feedback, Learner, LearnerParams, Play};
use crate::action_set::{ActionSet, FractionalPoint, Vertex};
use crate::error::{check_dim, Error, Result};
use crate::regularizer::{select_gamma, RegularizerSpec};
use crate::solver::{FtrlSolver, SolveReport, WarmStart};

/// Shifted importance-weighted estimate `ℓ̂ᵢ = (oᵢ + 1)·1{Xᵢ = 1}/xᵢ − 1`.
///
/// Unbiased for `ℓ` under any sampler with mean `x`, and never below −1.
pub fn semibandit_estimate(observed: &[f64], action: &Vertex, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(x.len(), observed.len())?;
    check_dim(x.len(), action.dim())?;
    observed
        .iter()
        .zip(action.iter())
        .zip(x)
        .enumerate()
        .map(|(i, ((&o, &played), &xi))| {
            if !played {
                Ok(-1.0)
            } else if xi > 0.0 {
                Ok((o + 1.0) / xi - 1.0)
            } else {
                Err(Error::Inconsistent(format!(
                    "arm {i} was played with probability {xi}"
                )))
            }
        })
        .collect()
}

/// FTRL with the hybrid regularizer and semi-bandit feedback.
///
/// `η_t = 1/√t`; `γ` defaults to the m-set rule for m-sets and to 1
/// otherwise.
#[derive(Clone, Debug)]
pub struct HybridFtrl {
    set: ActionSet,
    solver: FtrlSolver,
    gamma: f64,
    lr_scale: f64,
    cumulative: Vec<f64>,
    t: u64,
    warm: WarmStart,
    pending: Option<FractionalPoint>,
    last_report: Option<SolveReport>,
}

impl HybridFtrl {
    pub fn new(set: ActionSet, params: LearnerParams) -> Result<Self> {
        let gamma = match (params.gamma_override, &set) {
            (Some(g), _) => g,
            (None, ActionSet::MSet { d, m }) => select_gamma(*d, *m),
            (None, _) => 1.0,
        };
        let solver = FtrlSolver::new(RegularizerSpec::hybrid(gamma)?);
        let d = set.dim();
        Ok(HybridFtrl {
            set,
            solver,
            gamma,
            lr_scale: params.lr_scale,
            cumulative: vec![0.0; d],
            t: 1,
            warm: WarmStart::default(),
            pending: None,
            last_report: None,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Current round `t` (starts at 1).
    pub fn round(&self) -> u64 {
        self.t
    }

    /// `L̂_{t−1}`.
    pub fn cumulative_estimate(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn last_report(&self) -> Option<&SolveReport> {
        self.last_report.as_ref()
    }

    fn eta_inv(&self) -> f64 {
        (self.t as f64).sqrt() / self.lr_scale
    }

    /// The regularized leader for the current round.
    pub fn leader(&mut self) -> Result<(FractionalPoint, Option<Vec<f64>>)> {
        let eta_inv = self.eta_inv();
        let warm = (!self.warm.x.is_empty() || !self.warm.weights.is_empty()).then_some(&self.warm);
        let (report, weights) = match &self.set {
            ActionSet::Hypercube { .. } => (self.solver.solve_box(&self.cumulative, eta_inv, warm)?, None),
            ActionSet::MSet { m, .. } => {
                (self.solver.solve_mset(&self.cumulative, eta_inv, *m, warm)?, None)
            }
            ActionSet::Enumerated { vertices, .. } => {
                let (w, report) =
                    self.solver
                        .solve_enumerated(&self.cumulative, eta_inv, vertices, warm)?;
                (report, Some(w))
            }
        };
        self.warm.x = report.x.to_vec();
        self.warm.nu = report.dual_value;
        if let Some(w) = &weights {
            self.warm.weights = w.clone();
        }
        let x = report.x.clone();
        self.last_report = Some(report);
        Ok((x, weights))
    }

    /// Adds the round's estimate to `L̂` and advances `t`.
    pub fn update(&mut self, action: &Vertex, x: &[f64], observed: &[f64]) -> Result<()> {
        let estimate = semibandit_estimate(observed, action, x)?;
        for (acc, e) in self.cumulative.iter_mut().zip(estimate) {
            *acc += e;
        }
        self.t += 1;
        Ok(())
    }
}

impl Learner for HybridFtrl {
    fn name(&self) -> &str {
        "hybrid"
    }

    fn next_action(&mut self, rng: &mut dyn RngCore) -> Result<Play> {
        let (x, weights) = self.leader()?;
        let action = sample_action(&self.set, &x, weights.as_deref(), rng)?;
        self.pending = Some(x.clone());
        Ok(Play {
            action,
            fractional: Some(x),
        })
    }

    fn observe(&mut self, feedback: &Feedback) -> Result<()> {
        let (action, observed) = feedback.expect_semi_bandit("hybrid")?;
        let x = self
            .pending
            .take()
            .ok_or_else(|| Error::Inconsistent("observe called before next_action".into()))?;
        self.update(action, &x, observed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn estimate_examples() {
        let played = Vertex::from_bits(&[1]);
        assert_eq!(semibandit_estimate(&[1.0], &played, &[0.5]).unwrap(), vec![3.0]);
        assert_eq!(
            semibandit_estimate(&[0.0], &Vertex::from_bits(&[0]), &[0.3]).unwrap(),
            vec![-1.0]
        );
        assert_eq!(semibandit_estimate(&[-0.4], &played, &[1.0]).unwrap(), vec![-0.4]);
        assert!(matches!(
            semibandit_estimate(&[1.0], &played, &[0.0]),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn first_round_on_mset_is_uniform() {
        let set = ActionSet::mset(10, 5).unwrap();
        let mut learner = HybridFtrl::new(set, LearnerParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let play = learner.next_action(&mut rng).unwrap();
        for &xi in play.fractional.as_ref().unwrap().iter() {
            assert!((xi - 0.5).abs() < 1e-12);
        }
        assert_eq!(play.action.ones(), 5);
    }

    #[test]
    fn update_accumulates() {
        let set = ActionSet::hypercube(1).unwrap();
        let mut learner = HybridFtrl::new(set, LearnerParams::default()).unwrap();
        let a = Vertex::from_bits(&[1]);
        learner.update(&a, &[0.5], &[1.0]).unwrap();
        assert_eq!(learner.cumulative_estimate(), &[3.0]);
        learner.update(&a, &[0.5], &[1.0]).unwrap();
        assert_eq!(learner.cumulative_estimate(), &[6.0]);
        assert_eq!(learner.round(), 3);

        let mut learner = HybridFtrl::new(ActionSet::hypercube(2).unwrap(), LearnerParams::default()).unwrap();
        let near_one = 1.0 - 1e-14;
        learner
            .update(&Vertex::from_bits(&[1, 1]), &[near_one, near_one], &[0.0, 0.0])
            .unwrap();
        assert!(learner.cumulative_estimate().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn gamma_defaults() {
        let l = HybridFtrl::new(ActionSet::mset(10, 9).unwrap(), LearnerParams::default()).unwrap();
        assert!((l.gamma() - select_gamma(10, 9)).abs() < 1e-15);
        let l = HybridFtrl::new(ActionSet::hypercube(3).unwrap(), LearnerParams::default()).unwrap();
        assert_eq!(l.gamma(), 1.0);
        let params = LearnerParams {
            gamma_override: Some(0.3),
            ..Default::default()
        };
        let l = HybridFtrl::new(ActionSet::mset(10, 5).unwrap(), params).unwrap();
        assert_eq!(l.gamma(), 0.3);
    }

    #[test]
    fn rejects_bandit_feedback() {
        let mut learner = HybridFtrl::new(ActionSet::hypercube(1).unwrap(), LearnerParams::default()).unwrap();
        let fb = Feedback::Bandit {
            action: Vertex::from_bits(&[1]),
            loss: 0.0,
        };
        assert!(learner.observe(&fb).is_err());
    }
}
