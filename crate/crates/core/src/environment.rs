//! Oblivious loss generators.
//!
//! Every environment exposes its per-round mean vector `μ_t` so the harness
//! can compute exact pseudo-regret. Learners only ever see realized losses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvKind {
    /// Fixed means: `−Δ` for the first `m` arms, `+Δ` for the rest.
    Stochastic,
    /// Alternating phases of length `round(phase_base^s)` whose common
    /// offset swings between `+(1−Δ/2)` and `−(1−Δ/2)`, keeping the gap `Δ`.
    PhasedAdversarial,
    /// Losses in `{−1/d, +1/d}` so that `‖ℓ‖₁ = 1`, with means `∓Δ/d`.
    BanditStochastic,
}

impl EnvKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::Stochastic => "stochastic",
            EnvKind::PhasedAdversarial => "phased",
            EnvKind::BanditStochastic => "bandit",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stochastic" => Ok(EnvKind::Stochastic),
            "phased" | "adversarial" => Ok(EnvKind::PhasedAdversarial),
            "bandit" => Ok(EnvKind::BanditStochastic),
            other => Err(Error::InvalidParameter(format!("unknown environment {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSpec {
    pub kind: EnvKind,
    pub d: usize,
    /// Number of arms with the lower mean.
    pub m: usize,
    pub gap: f64,
    pub phase_base: f64,
    pub horizon: u64,
}

impl EnvironmentSpec {
    pub fn new(kind: EnvKind, d: usize, m: usize, gap: f64, horizon: u64) -> Result<Self> {
        let spec = EnvironmentSpec {
            kind,
            d,
            m,
            gap,
            phase_base: 1.6,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.m > self.d {
            return Err(Error::InvalidParameter(format!(
                "environment needs d ≥ 1 and m ≤ d, got d = {}, m = {}",
                self.d, self.m
            )));
        }
        if !(self.gap > 0.0 && self.gap <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gap must lie in (0, 1], got {}",
                self.gap
            )));
        }
        if !(self.phase_base > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "phase base must exceed 1, got {}",
                self.phase_base
            )));
        }
        Ok(())
    }
}

/// One round of realized losses together with the means they were drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct LossRealization {
    pub ell: Vec<f64>,
    pub mean: Vec<f64>,
}

pub fn stochastic_means(spec: &EnvironmentSpec) -> Vec<f64> {
    (0..spec.d)
        .map(|i| if i < spec.m { -spec.gap } else { spec.gap })
        .collect()
}

/// Length of phase `s ≥ 1`: `round(base^s)`, at least 1.
pub fn phase_length(base: f64, s: u32) -> u64 {
    (base.powi(s as i32).round() as u64).max(1)
}

/// Phase boundaries: `(s, first round, last round)` for phases covering
/// `1..=horizon`.
pub fn phases(base: f64, horizon: u64) -> Vec<(u32, u64, u64)> {
    let mut out = Vec::new();
    let mut start = 1u64;
    let mut s = 1u32;
    while start <= horizon {
        let end = (start + phase_length(base, s) - 1).min(horizon);
        out.push((s, start, end));
        start = end + 1;
        s += 1;
    }
    out
}

/// Iterates over the phase index of consecutive rounds without rescanning.
#[derive(Clone, Debug)]
pub struct PhaseCursor {
    base: f64,
    phase: u32,
    phase_end: u64,
}

impl PhaseCursor {
    pub fn new(base: f64) -> Self {
        PhaseCursor {
            base,
            phase: 1,
            phase_end: phase_length(base, 1),
        }
    }

    /// Phase of round `t`; rounds must be visited in non-decreasing order.
    pub fn phase_of(&mut self, t: u64) -> u32 {
        while t > self.phase_end {
            self.phase += 1;
            self.phase_end += phase_length(self.base, self.phase);
        }
        self.phase
    }
}

fn phase_index(base: f64, t: u64) -> u32 {
    PhaseCursor::new(base).phase_of(t)
}

fn phased_means_in(phase: u32, spec: &EnvironmentSpec) -> Vec<f64> {
    let half = spec.gap / 2.0;
    let swing = if phase % 2 == 1 { 1.0 - half } else { -(1.0 - half) };
    (0..spec.d)
        .map(|i| {
            let base = if i < spec.m { -half } else { half };
            (base + swing).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Means at round `t ≥ 1` of the phased environment.
pub fn phased_means(t: u64, spec: &EnvironmentSpec) -> Vec<f64> {
    phased_means_in(phase_index(spec.phase_base, t), spec)
}

/// Independent `±1` losses with `P(ℓᵢ = +1) = (1+μᵢ)/2`.
pub fn draw_losses<R: Rng + ?Sized>(mean: &[f64], rng: &mut R) -> LossRealization {
    draw_scaled(mean, 1.0, rng)
}

fn draw_scaled<R: Rng + ?Sized>(mean: &[f64], magnitude: f64, rng: &mut R) -> LossRealization {
    let ell = mean
        .iter()
        .map(|&mu| {
            let p_plus = 0.5 * (1.0 + mu / magnitude);
            if rng.random::<f64>() < p_plus {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    LossRealization {
        ell,
        mean: mean.to_vec(),
    }
}

pub fn bandit_means(spec: &EnvironmentSpec) -> Vec<f64> {
    let scale = spec.gap / spec.d as f64;
    (0..spec.d)
        .map(|i| if i < spec.m { -scale } else { scale })
        .collect()
}

/// Losses in `{−1/d, +1/d}` with means `bandit_means(spec)`.
pub fn bandit_losses<R: Rng + ?Sized>(spec: &EnvironmentSpec, rng: &mut R) -> LossRealization {
    draw_scaled(&bandit_means(spec), 1.0 / spec.d as f64, rng)
}

/// A running environment instance. Owns its random stream.
#[derive(Clone, Debug)]
pub struct Environment<R> {
    spec: EnvironmentSpec,
    rng: R,
    cursor: PhaseCursor,
    fixed_means: Vec<f64>,
}

impl<R: Rng> Environment<R> {
    pub fn new(spec: EnvironmentSpec, rng: R) -> Result<Self> {
        spec.validate()?;
        let fixed_means = match spec.kind {
            EnvKind::Stochastic => stochastic_means(&spec),
            EnvKind::BanditStochastic => bandit_means(&spec),
            EnvKind::PhasedAdversarial => Vec::new(),
        };
        let cursor = PhaseCursor::new(spec.phase_base);
        Ok(Environment {
            spec,
            rng,
            cursor,
            fixed_means,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    /// Means at round `t`. Rounds must be requested in order.
    pub fn means(&mut self, t: u64) -> Vec<f64> {
        match self.spec.kind {
            EnvKind::PhasedAdversarial => {
                let phase = self.cursor.phase_of(t);
                phased_means_in(phase, &self.spec)
            }
            _ => self.fixed_means.clone(),
        }
    }

    pub fn step(&mut self, t: u64) -> LossRealization {
        let mean = self.means(t);
        match self.spec.kind {
            EnvKind::BanditStochastic => {
                draw_scaled(&mean, 1.0 / self.spec.d as f64, &mut self.rng)
            }
            _ => draw_losses(&mean, &mut self.rng),
        }
    }
}

/// `Σ_{t≤T} μ_t` computed without drawing losses.
pub fn cumulative_means(spec: &EnvironmentSpec) -> Vec<f64> {
    let d = spec.d;
    match spec.kind {
        EnvKind::Stochastic => stochastic_means(spec)
            .into_iter()
            .map(|mu| mu * spec.horizon as f64)
            .collect(),
        EnvKind::BanditStochastic => bandit_means(spec)
            .into_iter()
            .map(|mu| mu * spec.horizon as f64)
            .collect(),
        EnvKind::PhasedAdversarial => {
            let mut total = vec![0.0; d];
            for (s, start, end) in phases(spec.phase_base, spec.horizon) {
                let len = (end - start + 1) as f64;
                for (acc, mu) in total.iter_mut().zip(phased_means_in(s, spec)) {
                    *acc += len * mu;
                }
            }
            total
        }
    }
}
