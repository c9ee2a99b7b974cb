//! Separable regularizers for FTRL over `conv(X)`.
//!
//! The hybrid regularizer `Ψ(x) = Σ −√xᵢ + γ(1−xᵢ)log(1−xᵢ)` couples the
//! 1/2-Tsallis entropy with Shannon entropy on the complement of `x`. The
//! other kinds back the baselines: Shannon negative entropy (Exp2), the log
//! barrier, and the symmetric 1/2-Tsallis form used for full bandit feedback.
//!
//! All kinds are sums of a scalar function `ψ` applied per coordinate, so the
//! Hessian is diagonal and the solver only needs `ψ`, `ψ'` and `ψ''`.

use crate::error::{Error, Result};

/// `y log y` with the continuous extension `0 log 0 = 0`.
fn xlogx(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * y.ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegularizerSpec {
    /// `Σ −√xᵢ + γ(1−xᵢ)log(1−xᵢ)` with `γ ∈ (0, 1]`.
    Hybrid { gamma: f64 },
    /// `Σ xᵢ log xᵢ`.
    ShannonNegEntropy,
    /// `Σ −log xᵢ`.
    LogBarrier,
    /// `Σ −√xᵢ − √(1−xᵢ)`.
    ///
    /// The full-bandit extension is usually printed as `Σ √xᵢ + √(1−xᵢ)`,
    /// which is concave. FTRL needs a convex regularizer, so this is the
    /// sign-flipped form used by the two-armed Tsallis-INF construction it
    /// reduces to.
    SymmetricTsallisHalf,
}

impl RegularizerSpec {
    pub fn hybrid(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "hybrid γ must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(RegularizerSpec::Hybrid { gamma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegularizerSpec::Hybrid { .. } => "hybrid",
            RegularizerSpec::ShannonNegEntropy => "shannon",
            RegularizerSpec::LogBarrier => "log-barrier",
            RegularizerSpec::SymmetricTsallisHalf => "symmetric-tsallis",
        }
    }

    /// Whether `ψ'` diverges at `x = 0` and at `x = 1` respectively.
    pub(crate) fn singular_ends(&self) -> (bool, bool) {
        match self {
            RegularizerSpec::Hybrid { .. } | RegularizerSpec::SymmetricTsallisHalf => (true, true),
            RegularizerSpec::ShannonNegEntropy | RegularizerSpec::LogBarrier => (true, false),
        }
    }

    /// Scalar `ψ(x)` on `[0, 1]`, using limits at the ends where they exist.
    pub fn psi(&self, x: f64) -> f64 {
        match *self {
            RegularizerSpec::Hybrid { gamma } => -x.sqrt() + gamma * xlogx(1.0 - x),
            RegularizerSpec::ShannonNegEntropy => xlogx(x),
            RegularizerSpec::LogBarrier => -x.ln(),
            RegularizerSpec::SymmetricTsallisHalf => -x.sqrt() - (1.0 - x).sqrt(),
        }
    }

    /// Scalar `ψ'(x)`. Infinite or NaN outside the open domain.
    pub fn dpsi(&self, x: f64) -> f64 {
        match *self {
            RegularizerSpec::Hybrid { gamma } => {
                -0.5 / x.sqrt() - gamma * (-x).ln_1p() - gamma
            }
            RegularizerSpec::ShannonNegEntropy => x.ln() + 1.0,
            RegularizerSpec::LogBarrier => -1.0 / x,
            RegularizerSpec::SymmetricTsallisHalf => -0.5 / x.sqrt() + 0.5 / (1.0 - x).sqrt(),
        }
    }

    /// Scalar `ψ''(x)`, strictly positive on the open domain.
    pub fn d2psi(&self, x: f64) -> f64 {
        match *self {
            RegularizerSpec::Hybrid { gamma } => 0.25 / (x * x.sqrt()) + gamma / (1.0 - x),
            RegularizerSpec::ShannonNegEntropy => 1.0 / x,
            RegularizerSpec::LogBarrier => 1.0 / (x * x),
            RegularizerSpec::SymmetricTsallisHalf => {
                let y = 1.0 - x;
                0.25 / (x * x.sqrt()) + 0.25 / (y * y.sqrt())
            }
        }
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        let (at_zero, at_one) = self.singular_ends();
        for (index, &xi) in x.iter().enumerate() {
            let inside = if at_zero { xi > 0.0 } else { xi >= 0.0 }
                && if at_one { xi < 1.0 } else { xi <= 1.0 };
            if !inside {
                return Err(Error::Domain {
                    what: self.name(),
                    index,
                    x: xi,
                });
            }
        }
        Ok(())
    }
}

/// Value, gradient and Hessian diagonal of `η⁻¹Ψ` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct RegEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess_diag: Vec<f64>,
}

/// `Ψ(x)` for the hybrid regularizer, with `(1−x)log(1−x) = 0` at `x = 1`.
pub fn hybrid_value(x: &[f64], gamma: f64) -> f64 {
    let spec = RegularizerSpec::Hybrid { gamma };
    x.iter().map(|&xi| spec.psi(xi)).sum()
}

/// `∇(η⁻¹Ψ)(x)ᵢ = η⁻¹(−1/(2√xᵢ) − γ log(1−xᵢ) − γ)`.
pub fn hybrid_grad(x: &[f64], gamma: f64, eta_inv: f64) -> Result<Vec<f64>> {
    let spec = RegularizerSpec::Hybrid { gamma };
    spec.check_domain(x)?;
    Ok(x.iter().map(|&xi| eta_inv * spec.dpsi(xi)).collect())
}

/// Diagonal of `∇²(η⁻¹Ψ)(x)`: `η⁻¹(1/(4xᵢ^{3/2}) + γ/(1−xᵢ))`.
pub fn hybrid_hess_diag(x: &[f64], gamma: f64, eta_inv: f64) -> Result<Vec<f64>> {
    let spec = RegularizerSpec::Hybrid { gamma };
    spec.check_domain(x)?;
    Ok(x.iter().map(|&xi| eta_inv * spec.d2psi(xi)).collect())
}

/// The m-set choice of `γ`: 1 when `m ≤ d/2`, otherwise
/// `min{1, 1/√log(d/(d−m))}`.
pub fn select_gamma(d: usize, m: usize) -> f64 {
    debug_assert!(m >= 1 && m < d);
    if 2 * m <= d {
        1.0
    } else {
        let ratio = d as f64 / (d - m) as f64;
        (1.0 / ratio.ln().sqrt()).min(1.0)
    }
}

pub fn reg_eval(spec: RegularizerSpec, x: &[f64], eta_inv: f64) -> Result<RegEval> {
    spec.check_domain(x)?;
    Ok(RegEval {
        value: eta_inv * x.iter().map(|&xi| spec.psi(xi)).sum::<f64>(),
        grad: x.iter().map(|&xi| eta_inv * spec.dpsi(xi)).collect(),
        hess_diag: x.iter().map(|&xi| eta_inv * spec.d2psi(xi)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hybrid_value_examples() {
        assert_eq!(hybrid_value(&[0.0; 3], 0.7), 0.0);
        assert_eq!(hybrid_value(&[1.0; 4], 0.3), -4.0);
        assert!(close(hybrid_value(&[0.25], 1.0), -0.715_762, 1e-6));
    }

    #[test]
    fn hybrid_grad_examples() {
        let g = hybrid_grad(&[0.25], 1.0, 1.0).unwrap();
        assert!(close(g[0], -1.712_318, 1e-6));
        let g2 = hybrid_grad(&[0.25, 0.6], 0.4, 2.0).unwrap();
        let g1 = hybrid_grad(&[0.25, 0.6], 0.4, 1.0).unwrap();
        for (a, b) in g2.iter().zip(&g1) {
            assert!(close(*a, 2.0 * b, 1e-15));
        }
    }

    #[test]
    fn hybrid_hess_example() {
        let h = hybrid_hess_diag(&[0.25], 1.0, 1.0).unwrap();
        assert!(close(h[0], 2.0 + 4.0 / 3.0, 1e-12));
    }

    #[test]
    fn boundary_is_a_domain_error() {
        assert!(matches!(
            hybrid_grad(&[0.5, 0.0], 1.0, 1.0),
            Err(Error::Domain { index: 1, .. })
        ));
        assert!(hybrid_hess_diag(&[1.0], 1.0, 1.0).is_err());
        assert!(reg_eval(RegularizerSpec::LogBarrier, &[0.0], 1.0).is_err());
        assert!(reg_eval(RegularizerSpec::LogBarrier, &[1.0], 1.0).is_ok());
        assert!(reg_eval(RegularizerSpec::SymmetricTsallisHalf, &[1.0], 1.0).is_err());
    }

    #[test]
    fn select_gamma_examples() {
        assert_eq!(select_gamma(10, 5), 1.0);
        assert_eq!(select_gamma(4, 2), 1.0);
        assert!(close(select_gamma(10, 9), 1.0 / 10f64.ln().sqrt(), 1e-15));
        assert!(close(select_gamma(10, 9), 0.659_010, 1e-6));
        // ln(d/(d−m)) < 1 keeps γ at 1.
        assert_eq!(select_gamma(10, 6), 1.0);
    }

    #[test]
    fn baseline_gradients() {
        let e = reg_eval(RegularizerSpec::ShannonNegEntropy, &[(-1f64).exp()], 1.0).unwrap();
        assert!(e.grad[0].abs() < 1e-15);
        let e = reg_eval(RegularizerSpec::LogBarrier, &[0.5], 1.0).unwrap();
        assert_eq!(e.grad[0], -2.0);
        let e = reg_eval(RegularizerSpec::SymmetricTsallisHalf, &[0.5], 1.0).unwrap();
        assert_eq!(e.grad[0], 0.0);
    }

    #[test]
    fn hybrid_rejects_bad_gamma() {
        assert!(RegularizerSpec::hybrid(0.0).is_err());
        assert!(RegularizerSpec::hybrid(1.5).is_err());
        assert!(RegularizerSpec::hybrid(1.0).is_ok());
    }
}
