use rand::RngCore;

use super::{Feedback, Learner, Play};
use crate::action_set::ActionSet;
use crate::error::{Error, Result};

/// Confidence-radius constant: `√(1.5 ln t / Tᵢ)` on losses rescaled to `[0,1]`.
const RADIUS_CONSTANT: f64 = 1.5;

/// CombUCB on losses: play the oracle of per-arm lower confidence indices.
///
/// Before the index rule starts, a covering phase plays the action that
/// includes the most never-observed arms until every coverable arm has been
/// seen once.
#[derive(Clone, Debug)]
pub struct CombUcb {
    set: ActionSet,
    counts: Vec<u64>,
    /// Sums of observed losses mapped to `[0,1]` by `(ℓ+1)/2`.
    sums: Vec<f64>,
    t: u64,
    covering: bool,
}

impl CombUcb {
    pub fn new(set: ActionSet) -> Self {
        let d = set.dim();
        CombUcb {
            set,
            counts: vec![0; d],
            sums: vec![0.0; d],
            t: 1,
            covering: true,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Lower confidence index of arm `i` at the current round, in loss units.
    pub fn index(&self, i: usize) -> f64 {
        lcb_index(self.sums[i], self.counts[i], self.t)
    }
}

/// `2·(μ̂' − √(1.5 ln t / n)) − 1` with `μ̂' = sum/n`; `−∞` when unobserved.
pub(crate) fn lcb_index(sum01: f64, n: u64, t: u64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let mean01 = sum01 / n as f64;
    let radius = (RADIUS_CONSTANT * (t as f64).ln() / n as f64).sqrt();
    2.0 * (mean01 - radius) - 1.0
}

impl Learner for CombUcb {
    fn name(&self) -> &str {
        "combucb"
    }

    fn next_action(&mut self, _rng: &mut dyn RngCore) -> Result<Play> {
        if self.covering {
            let pull: Vec<f64> = self
                .counts
                .iter()
                .map(|&n| if n == 0 { -1.0 } else { 0.0 })
                .collect();
            let action = self.set.linear_min_oracle(&pull)?;
            let new_arms = action
                .iter()
                .zip(&self.counts)
                .filter(|(&b, &n)| b && n == 0)
                .count();
            if new_arms > 0 {
                return Ok(Play {
                    action,
                    fractional: None,
                });
            }
            self.covering = false;
        }
        let index: Vec<f64> = (0..self.counts.len())
            .map(|i| {
                let v = self.index(i);
                // Arms no vertex can reach never influence the oracle.
                if v.is_finite() { v } else { 0.0 }
            })
            .collect();
        Ok(Play {
            action: self.set.linear_min_oracle(&index)?,
            fractional: None,
        })
    }

    fn observe(&mut self, feedback: &Feedback) -> Result<()> {
        let (action, observed) = feedback.expect_semi_bandit("combucb")?;
        if action.dim() != self.counts.len() {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                got: action.dim(),
            });
        }
        for (i, (&played, &o)) in action.iter().zip(observed).enumerate() {
            if played {
                self.counts[i] += 1;
                self.sums[i] += 0.5 * (o + 1.0);
            }
        }
        self.t += 1;
        Ok(())
    }
}
