use rand::RngCore;
use rand_distr::{Beta, Distribution};

use super::{Feedback, Learner, Play};
use crate::action_set::ActionSet;
use crate::error::{Error, Result};

/// Thompson sampling with independent Beta posteriors per arm.
///
/// Losses are mapped to successes by `(ℓ+1)/2`. For `±1` losses this is a
/// Bernoulli outcome; fractional losses update the posterior fractionally.
#[derive(Clone, Debug)]
pub struct ThompsonSampling {
    set: ActionSet,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ThompsonSampling {
    pub fn new(set: ActionSet) -> Self {
        let d = set.dim();
        ThompsonSampling {
            set,
            alpha: vec![1.0; d],
            beta: vec![1.0; d],
        }
    }

    pub fn posterior(&self, i: usize) -> (f64, f64) {
        (self.alpha[i], self.beta[i])
    }

    /// Posterior mean of the pseudo-loss `2θ − 1`.
    pub fn mean_loss(&self, i: usize) -> f64 {
        2.0 * self.alpha[i] / (self.alpha[i] + self.beta[i]) - 1.0
    }
}

impl Learner for ThompsonSampling {
    fn name(&self) -> &str {
        "thompson"
    }

    fn next_action(&mut self, rng: &mut dyn RngCore) -> Result<Play> {
        let pseudo = self
            .alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| {
                let dist = Beta::new(a, b).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                let theta: f64 = dist.sample(rng);
                Ok(2.0 * theta - 1.0)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Play {
            action: self.set.linear_min_oracle(&pseudo)?,
            fractional: None,
        })
    }

    fn observe(&mut self, feedback: &Feedback) -> Result<()> {
        let (action, observed) = feedback.expect_semi_bandit("thompson")?;
        for (i, (&played, &o)) in action.iter().zip(observed).enumerate() {
            if played {
                let success = (0.5 * (o + 1.0)).clamp(0.0, 1.0);
                self.alpha[i] += success;
                self.beta[i] += 1.0 - success;
            }
        }
        Ok(())
    }
}
