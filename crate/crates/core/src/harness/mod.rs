//! Experiment orchestration: runs every (run, algorithm) pair against its
//! own environment instance and records exact pseudo-regret at logged
//! rounds.
//!
//! Pseudo-regret for learners with a fractional iterate is accumulated as
//! `Σ ⟨x_t − x*, μ_t⟩`, the conditional expectation of `⟨X_t − x*, ℓ_t⟩`
//! given the history. Learners without one (CombUCB, Thompson) use their
//! played vertex `X_t` instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action_set::{ActionSet, Vertex};
use crate::environment::{cumulative_means, Environment, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::learner::{build_learner, AlgoKind, Feedback, Learner, LearnerParams};

mod config;
mod csv;

pub use config::{RunSettings, SetChoice};
pub use self::csv::{read_summary_csv, read_trace_csv, write_summary_csv, write_summary, write_trace, write_trace_csv, SUMMARY_HEADER, TRACE_HEADER};

/// One algorithm entry of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgoSpec {
    pub kind: AlgoKind,
    pub params: LearnerParams,
    /// Name written to the `algo` column.
    pub label: String,
}

impl AlgoSpec {
    pub fn new(kind: AlgoKind) -> Self {
        AlgoSpec {
            kind,
            params: LearnerParams::default(),
            label: kind.name().to_string(),
        }
    }

    /// The learning-rate grid `{2^i : i = −5..=5}` for algorithms that have one.
    pub fn lr_grid(kind: AlgoKind, base: LearnerParams) -> Vec<AlgoSpec> {
        if !kind.has_learning_rate() {
            return vec![AlgoSpec {
                kind,
                params: base,
                label: kind.name().to_string(),
            }];
        }
        (-5..=5)
            .map(|i: i32| AlgoSpec {
                kind,
                params: LearnerParams {
                    lr_scale: base.lr_scale * 2f64.powi(i),
                    ..base
                },
                label: format!("{}@2^{i}", kind.name()),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvironmentSpec,
    pub set: ActionSet,
    pub algorithms: Vec<AlgoSpec>,
    pub runs: usize,
    pub base_seed: u64,
    /// Number of geometrically spaced logging rounds (including 1 and T).
    pub log_points: usize,
    /// Extra rounds to log in addition to the geometric grid.
    pub extra_log_times: Vec<u64>,
}

impl ExperimentConfig {
    /// d = 10, m = 5, Δ = 1/8, T = 10⁵, 20 runs on the stochastic m-set
    /// environment with all semi-bandit algorithms.
    pub fn desk_default() -> Self {
        let env = EnvironmentSpec::new(crate::environment::EnvKind::Stochastic, 10, 5, 0.125, 100_000)
            .expect("valid default environment");
        ExperimentConfig {
            env,
            set: ActionSet::mset(10, 5).expect("valid default set"),
            algorithms: [
                AlgoKind::Hybrid,
                AlgoKind::Exp2,
                AlgoKind::LogBarrier,
                AlgoKind::CombUcb,
                AlgoKind::Thompson,
            ]
            .into_iter()
            .map(AlgoSpec::new)
            .collect(),
            runs: 20,
            base_seed: 0,
            log_points: 50,
            extra_log_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be at least 1".into()));
        }
        if self.log_points < 2 {
            return Err(Error::InvalidParameter("log_points must be at least 2".into()));
        }
        if self.env.horizon < 10 {
            return Err(Error::InvalidParameter("horizon must be at least 10".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms selected".into()));
        }
        if self.set.dim() != self.env.d {
            return Err(Error::InvalidParameter(format!(
                "action set has d = {} but the environment has d = {}",
                self.set.dim(),
                self.env.d
            )));
        }
        if let Some(&t) = self.extra_log_times.iter().find(|&&t| t == 0 || t > self.env.horizon) {
            return Err(Error::InvalidParameter(format!(
                "log time {t} is outside 1..={}",
                self.env.horizon
            )));
        }
        Ok(())
    }

    /// Sorted logging rounds.
    pub fn log_times(&self) -> Vec<u64> {
        let mut times = geometric_log_times(self.env.horizon, self.log_points);
        times.extend(&self.extra_log_times);
        times.sort_unstable();
        times.dedup();
        times
    }
}

/// `n` distinct rounds from 1 to `horizon`, geometrically spaced where the
/// spacing allows and consecutive where rounding would collide.
pub fn geometric_log_times(horizon: u64, n: usize) -> Vec<u64> {
    let n = (n as u64).min(horizon).max(1) as usize;
    if n == 1 {
        return vec![horizon];
    }
    let mut out = Vec::with_capacity(n);
    let ln_t = (horizon as f64).ln();
    for k in 0..n {
        let raw = (ln_t * k as f64 / (n - 1) as f64).exp().round() as u64;
        let floor = out.last().map_or(1, |&p: &u64| p + 1);
        // Leave room for the remaining points below the horizon.
        let ceiling = horizon - (n - 1 - k) as u64;
        out.push(raw.max(floor).min(ceiling));
    }
    out
}

/// One logged value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub run: usize,
    pub algo: String,
    pub env: String,
    pub pseudo_regret: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegretTrace {
    pub rows: Vec<TraceRow>,
}

/// Mean and standard error of one (algorithm, environment, round) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub t: u64,
    pub algo: String,
    pub env: String,
    pub mean: f64,
    pub se: f64,
    pub runs: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the environment stream for a run; shared by all algorithms so
/// they face the same loss sequence.
pub fn environment_seed(base_seed: u64, run: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ (run as u64).wrapping_mul(0xA24B_AED4_963E_E407))
}

/// Seed of the learner's own randomness for a (run, algorithm) pair.
pub fn learner_seed(base_seed: u64, run: usize, algo: usize) -> u64 {
    splitmix64(environment_seed(base_seed, run) ^ splitmix64(0x5851_F42D_4C95_7F2D ^ algo as u64))
}

/// The comparator `x* = argmin_{x∈X} ⟨x, Σ_t μ_t⟩`.
pub fn best_action(config: &ExperimentConfig) -> Result<Vertex> {
    config.set.linear_min_oracle(&cumulative_means(&config.env))
}

/// Runs one learner for one run and returns its logged rows.
pub fn run_single(
    config: &ExperimentConfig,
    learner: &mut dyn Learner,
    run: usize,
    algo_index: usize,
    label: &str,
    best: &Vertex,
    log_times: &[u64],
) -> Result<Vec<TraceRow>> {
    let env_name = config.env.kind.name();
    let mut env = Environment::new(
        config.env.clone(),
        ChaCha8Rng::seed_from_u64(environment_seed(config.base_seed, run)),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(learner_seed(config.base_seed, run, algo_index));
    let best = best.to_f64();
    let mut rows = Vec::with_capacity(log_times.len());
    let mut next_log = log_times.iter().peekable();
    let mut regret = 0.0;
    for t in 1..=config.env.horizon {
        let context = || format!("run {run}, algo {label}, t = {t}");
        let losses = env.step(t);
        let play = learner
            .next_action(&mut rng)
            .map_err(|e| e.with_context(context()))?;
        let instantaneous: f64 = match &play.fractional {
            Some(x) => x
                .iter()
                .zip(&best)
                .zip(&losses.mean)
                .map(|((xi, bi), mu)| (xi - bi) * mu)
                .sum(),
            None => play
                .action
                .iter()
                .zip(&best)
                .zip(&losses.mean)
                .map(|((&xi, bi), mu)| (if xi { 1.0 } else { 0.0 } - bi) * mu)
                .sum(),
        };
        regret += instantaneous;
        let feedback = Feedback::for_kind(learner.feedback_kind(), &play.action, &losses.ell)
            .map_err(|e| e.with_context(context()))?;
        learner
            .observe(&feedback)
            .map_err(|e| e.with_context(context()))?;
        if next_log.peek() == Some(&&t) {
            next_log.next();
            rows.push(TraceRow {
                t,
                run,
                algo: label.to_string(),
                env: env_name.to_string(),
                pseudo_regret: regret,
            });
        }
    }
    Ok(rows)
}

/// Runs every (run, algorithm) pair, in parallel, and merges the rows in
/// (run, algorithm, t) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretTrace> {
    config.validate()?;
    let best = best_action(config)?;
    let log_times = config.log_times();
    let pairs: Vec<(usize, usize)> = (0..config.runs)
        .flat_map(|run| (0..config.algorithms.len()).map(move |a| (run, a)))
        .collect();
    let chunks: Vec<Result<Vec<TraceRow>>> = pairs
        .par_iter()
        .map(|&(run, a)| {
            let spec = &config.algorithms[a];
            let mut learner = build_learner(spec.kind, &config.set, spec.params)
                .map_err(|e| e.with_context(format!("algo {}", spec.label)))?;
            run_single(config, learner.as_mut(), run, a, &spec.label, &best, &log_times)
        })
        .collect();
    let mut rows = Vec::with_capacity(pairs.len() * log_times.len());
    for chunk in chunks {
        rows.extend(chunk?);
    }
    Ok(RegretTrace { rows })
}

/// Groups rows by (algorithm, environment, t): mean and standard error
/// `s/√n` with the sample standard deviation `s` (0 for a single run).
/// Groups keep the order in which algorithms first appear, then ascending t.
pub fn summarize(trace: &RegretTrace) -> Result<Vec<SummaryRow>> {
    if trace.rows.is_empty() {
        return Err(Error::InvalidParameter("cannot summarize an empty trace".into()));
    }
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut groups: std::collections::BTreeMap<(usize, u64), Vec<f64>> = Default::default();
    for row in &trace.rows {
        let key = (row.algo.clone(), row.env.clone());
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                keys.len() - 1
            }
        };
        groups.entry((idx, row.t)).or_default().push(row.pseudo_regret);
    }
    Ok(groups
        .into_iter()
        .map(|((idx, t), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let se = if n > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                t,
                algo: keys[idx].0.clone(),
                env: keys[idx].1.clone(),
                mean,
                se,
                runs: n,
            }
        })
        .collect())
}

/// Mean pseudo-regret of `algo` at round `t`, if logged.
pub fn mean_at(summary: &[SummaryRow], algo: &str, t: u64) -> Option<f64> {
    summary
        .iter()
        .find(|r| r.algo == algo && r.t == t)
        .map(|r| r.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvKind;
    use crate::learner::Play;
    use rand::RngCore;

    fn small_config(kind: AlgoKind) -> ExperimentConfig {
        ExperimentConfig {
            env: EnvironmentSpec::new(EnvKind::Stochastic, 2, 1, 0.25, 10).unwrap(),
            set: ActionSet::mset(2, 1).unwrap(),
            algorithms: vec![AlgoSpec::new(kind)],
            runs: 1,
            base_seed: 3,
            log_points: 10,
            extra_log_times: vec![],
        }
    }

    #[test]
    fn smoke_run_logs_every_point() {
        let trace = run_experiment(&small_config(AlgoKind::Hybrid)).unwrap();
        assert_eq!(trace.rows.len(), 10);
        assert!(trace.rows.iter().all(|r| r.pseudo_regret.is_finite()));
        let ts: Vec<u64> = trace.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, (1..=10).collect::<Vec<_>>());
    }

    struct Oracle(Vertex);

    impl Learner for Oracle {
        fn name(&self) -> &str {
            "oracle"
        }
        fn next_action(&mut self, _rng: &mut dyn RngCore) -> Result<Play> {
            Ok(Play {
                action: self.0.clone(),
                fractional: None,
            })
        }
        fn observe(&mut self, _feedback: &Feedback) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn oracle_learner_has_zero_regret() {
        for kind in [EnvKind::Stochastic, EnvKind::PhasedAdversarial] {
            let mut config = small_config(AlgoKind::Hybrid);
            config.env = EnvironmentSpec::new(kind, 6, 3, 0.125, 500).unwrap();
            config.set = ActionSet::mset(6, 3).unwrap();
            let best = best_action(&config).unwrap();
            let mut learner = Oracle(best.clone());
            let times = config.log_times();
            let rows = run_single(&config, &mut learner, 0, 0, "oracle", &best, &times).unwrap();
            assert!(rows.iter().all(|r| r.pseudo_regret == 0.0));
        }
    }

    #[test]
    fn geometric_times() {
        assert_eq!(geometric_log_times(10, 10), (1..=10).collect::<Vec<_>>());
        let t = geometric_log_times(100_000, 50);
        assert_eq!(t.len(), 50);
        assert_eq!(t[0], 1);
        assert_eq!(*t.last().unwrap(), 100_000);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_log_times(10, 30).len(), 10);
    }

    #[test]
    fn summary_statistics() {
        let row = |run, v| TraceRow {
            t: 5,
            run,
            algo: "a".into(),
            env: "e".into(),
            pseudo_regret: v,
        };
        let trace = RegretTrace {
            rows: vec![row(0, 1.0), row(1, 3.0)],
        };
        let s = summarize(&trace).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].se, s[0].runs), (2.0, 1.0, 2));

        let single = RegretTrace {
            rows: vec![row(0, 4.0)],
        };
        assert_eq!(summarize(&single).unwrap()[0].se, 0.0);
        assert!(summarize(&RegretTrace::default()).is_err());
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for run in 0..50 {
            assert!(seen.insert(environment_seed(7, run)));
            for algo in 0..6 {
                assert!(seen.insert(learner_seed(7, run, algo)));
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small_config(AlgoKind::Hybrid);
        c.runs = 0;
        assert!(c.validate().is_err());
        let mut c = small_config(AlgoKind::Hybrid);
        c.log_points = 1;
        assert!(c.validate().is_err());
        let mut c = small_config(AlgoKind::Hybrid);
        c.env.horizon = 9;
        assert!(c.validate().is_err());
        let mut c = small_config(AlgoKind::Hybrid);
        c.set = ActionSet::hypercube(3).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn errors_carry_context() {
        let mut c = small_config(AlgoKind::BanditHybrid);
        c.set = ActionSet::mset(2, 1).unwrap();
        let err = run_experiment(&c).unwrap_err().to_string();
        assert!(err.contains("bandit-hybrid"), "{err}");
    }
}
