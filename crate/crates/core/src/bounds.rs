//! Closed-form regret-bound constants, for overlays on measured regret.
//!
//! The general shapes are reported without their hidden absolute constants,
//! so they describe scaling rather than numeric ceilings.

use std::fmt;

use crate::error::{Error, Result};
use crate::regularizer::select_gamma;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundReport {
    pub c_sto: f64,
    pub c_adv: f64,
    pub c_add_upper: f64,
    pub general_c_sto_upper: f64,
    pub general_c_adv_upper: f64,
    pub gamma_used: f64,
}

/// `Σ_{i>m} 1/(4Δᵢ)` over the gaps of the arms outside the optimal m-set.
pub fn c_sto_mset(gaps: &[f64]) -> Result<f64> {
    if gaps.is_empty() {
        return Err(Error::InvalidParameter("no suboptimal arms (m = d)".into()));
    }
    if let Some(g) = gaps.iter().find(|&&g| !(g > 0.0)) {
        return Err(Error::InvalidParameter(format!("gap must be positive, got {g}")));
    }
    Ok(gaps.iter().map(|g| 0.25 / g).sum())
}

/// Adversarial constant for the m-set: the concave maximization reduces to
/// `(d−m)(√λ + (γ⁻¹ − γ log((d−m)λ/m))λ)`, increasing in `λ`, evaluated at
/// the border `λ = min{1, m/(d−m)}`.
pub fn c_adv_mset(d: usize, m: usize, gamma: f64) -> Result<f64> {
    if m == 0 || m >= d {
        return Err(Error::InvalidParameter(format!(
            "m-set needs 1 ≤ m ≤ d−1, got d = {d}, m = {m}"
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!("γ must lie in (0, 1], got {gamma}")));
    }
    let (d, m) = (d as f64, m as f64);
    let free = d - m;
    let lambda = (m / free).min(1.0);
    let log_term = (free * lambda / m).ln();
    Ok(free * (lambda.sqrt() + (1.0 / gamma - gamma * log_term) * lambda))
}

/// Shapes `md/(4Δ_min)`, `m²/(γ²Δ_min)` and `√(md)/γ`, absolute constants
/// suppressed. Returned as `(c_sto_up, c_add_up, c_adv_up)`.
pub fn general_bounds(d: usize, m: usize, gamma: f64, delta_min: f64) -> Result<(f64, f64, f64)> {
    if !(delta_min > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Δ_min must be positive, got {delta_min}"
        )));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("γ must be positive, got {gamma}")));
    }
    let (d, m) = (d as f64, m as f64);
    Ok((
        m * d / (4.0 * delta_min),
        m * m / (gamma * gamma * delta_min),
        (m * d).sqrt() / gamma,
    ))
}

/// All constants for the m-set with `d − m` suboptimal arms of equal gap.
///
/// `gap` is the per-arm gap `Δᵢ = E[ℓᵢ − ℓ_m]`; `Δ_min` is taken equal to it.
pub fn mset_report(d: usize, m: usize, gap: f64, gamma: Option<f64>) -> Result<BoundReport> {
    if m == 0 || m >= d {
        return Err(Error::InvalidParameter(format!(
            "m-set needs 1 ≤ m ≤ d−1, got d = {d}, m = {m}"
        )));
    }
    let gamma = gamma.unwrap_or_else(|| select_gamma(d, m));
    let gaps = vec![gap; d - m];
    let (general_c_sto_upper, c_add_upper, general_c_adv_upper) = general_bounds(d, m, gamma, gap)?;
    Ok(BoundReport {
        c_sto: c_sto_mset(&gaps)?,
        c_adv: c_adv_mset(d, m, gamma)?,
        c_add_upper,
        general_c_sto_upper,
        general_c_adv_upper,
        gamma_used: gamma,
    })
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "c_sto = {}", self.c_sto)?;
        writeln!(f, "c_adv = {}", self.c_adv)?;
        writeln!(f, "c_add_upper = {}", self.c_add_upper)?;
        writeln!(f, "general_c_sto_upper = {}", self.general_c_sto_upper)?;
        writeln!(f, "general_c_adv_upper = {}", self.general_c_adv_upper)?;
        write!(f, "gamma_used = {}", self.gamma_used)
    }
}
