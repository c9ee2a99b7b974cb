//! The regularized leader `x = argmin_{x∈conv(X)} ⟨x, L⟩ + η⁻¹Ψ(x)`.
//!
//! For separable regularizers the box problem splits into independent
//! one-dimensional root finds of the monotone map `x ↦ Lᵢ + η⁻¹ψ'(x)`. The
//! m-set adds a single equality constraint, handled through its multiplier
//! `ν`: every coordinate is solved with `Lᵢ + ν`, and `ν` is the root of the
//! strictly decreasing `h(ν) = Σxᵢ(ν) − m`. Explicit vertex lists are solved
//! over vertex weights: Newton steps on the face spanned by the current
//! support, alternated with Frank–Wolfe vertex insertion until the
//! Frank–Wolfe gap certifies optimality.
//!
//! Iterates live in `[ε, 1−ε]` with `ε = DOMAIN_EPS`. When the exact
//! minimizer lies closer to the boundary than that (large cumulative losses
//! push it within `e^{−100}` of 1), the coordinate sits on the shrunken box
//! and its bound constraint is treated as active.
//!
//! Stationarity residuals are reported in `x` units: for each free coordinate
//! the length `|gᵢ|/gᵢ'` of the Newton step on the optimality condition,
//! with the equality multiplier projected out for the m-set. This stays
//! meaningful when `x` is within a few ulps of 1, where gradient magnitudes
//! cannot be resolved.

use nalgebra::{DMatrix, DVector};

use crate::action_set::{ActionSet, FractionalPoint, Vertex};
use crate::error::{check_dim, Error, Result};
use crate::regularizer::RegularizerSpec;

pub const DOMAIN_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Per-coordinate stationarity tolerance of the 1-D solves.
    pub inner_tol: f64,
    /// Tolerance on `|Σx − m|` for the m-set.
    pub sum_tol: f64,
    /// Certification threshold on the final KKT residual.
    pub kkt_tol: f64,
    pub max_iter: usize,
    /// Cap on Newton plus vertex-insertion steps of the vertex-simplex solver.
    pub enumerated_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            inner_tol: 1e-10,
            sum_tol: 1e-9,
            kkt_tol: 1e-8,
            max_iter: 200,
            enumerated_max_iter: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub x: FractionalPoint,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Multiplier of `Σx = m`; zero for the box and for vertex lists.
    pub dual_value: f64,
    /// Set by the vertex-simplex solver when it stops at its iteration cap
    /// above tolerance.
    pub degraded: bool,
}

/// Previous solution, used to seed the next solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub nu: f64,
    pub weights: Vec<f64>,
}

/// `⟨x, L⟩ + η⁻¹Ψ(x)`.
pub fn objective(reg: RegularizerSpec, l: &[f64], eta_inv: f64, x: &[f64]) -> f64 {
    x.iter()
        .zip(l)
        .map(|(&xi, &li)| li * xi + eta_inv * reg.psi(xi))
        .sum()
}

fn check_inputs(l: &[f64], eta_inv: f64) -> Result<()> {
    if let Some(i) = l.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "loss vector entry {i} is not finite"
        )));
    }
    if !(eta_inv > 0.0 && eta_inv.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "inverse learning rate must be positive, got {eta_inv}"
        )));
    }
    Ok(())
}

/// Bisection point that adapts to brackets spanning several orders of
/// magnitude against either end of the unit interval.
fn split(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 && hi > 4.0 * lo {
        (lo * hi).sqrt()
    } else if (1.0 - lo) > 4.0 * (1.0 - hi) && hi < 1.0 {
        1.0 - ((1.0 - lo) * (1.0 - hi)).sqrt()
    } else {
        0.5 * (lo + hi)
    }
}

fn adjacent(lo: f64, hi: f64) -> bool {
    hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug)]
struct ScalarSolution {
    x: f64,
    iterations: usize,
    /// `1/(η⁻¹ψ''(x))` when free, 0 when clamped.
    sensitivity: f64,
}

/// Projected root of `g(x) = shift + η⁻¹ψ'(x)` over `[ε, 1−ε]`.
fn solve_scalar(
    reg: RegularizerSpec,
    shift: f64,
    eta_inv: f64,
    warm: Option<f64>,
    opts: &SolverOptions,
) -> Result<ScalarSolution> {
    let g = |x: f64| shift + eta_inv * reg.dpsi(x);
    let mut lo = DOMAIN_EPS;
    let mut hi = 1.0 - DOMAIN_EPS;
    if g(lo) >= 0.0 {
        return Ok(ScalarSolution {
            x: lo,
            iterations: 0,
            sensitivity: 0.0,
        });
    }
    if g(hi) <= 0.0 {
        return Ok(ScalarSolution {
            x: hi,
            iterations: 0,
            sensitivity: 0.0,
        });
    }

    let mut x = match warm {
        Some(w) if w > lo && w < hi => w,
        _ => 0.5,
    };
    for iteration in 1..=opts.max_iter {
        let gx = g(x);
        let slope = eta_inv * reg.d2psi(x);
        let step = gx / slope;
        let scale = x.min(1.0 - x);
        if step.abs() <= opts.inner_tol * scale || gx == 0.0 {
            // The last step is tiny and quadratically accurate; take it.
            let last = x - step;
            return Ok(ScalarSolution {
                x: if last > lo && last < hi { last } else { x },
                iterations: iteration,
                sensitivity: 1.0 / slope,
            });
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if adjacent(lo, hi) {
            // x is within an ulp of the root; keep whichever end is closer.
            let (xl, xh) = (lo, hi);
            let (gl, gh) = (g(xl), g(xh));
            let best = if gl.abs() <= gh.abs() { xl } else { xh };
            let slope = eta_inv * reg.d2psi(best);
            return Ok(ScalarSolution {
                x: best,
                iterations: iteration,
                sensitivity: 1.0 / slope,
            });
        }
        let newton = x - step;
        x = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            split(lo, hi)
        };
    }
    let slope = eta_inv * reg.d2psi(x);
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: (g(x) / slope).abs(),
    })
}

/// FTRL solver for one separable regularizer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FtrlSolver {
    pub reg: RegularizerSpec,
    pub options: SolverOptions,
}

impl FtrlSolver {
    pub fn new(reg: RegularizerSpec) -> Self {
        FtrlSolver {
            reg,
            options: SolverOptions::default(),
        }
    }

    pub fn hybrid(gamma: f64) -> Result<Self> {
        Ok(Self::new(RegularizerSpec::hybrid(gamma)?))
    }

    /// Minimizes over `[0,1]^d`; each coordinate independently.
    pub fn solve_box(&self, l: &[f64], eta_inv: f64, warm: Option<&WarmStart>) -> Result<SolveReport> {
        check_inputs(l, eta_inv)?;
        let mut x = Vec::with_capacity(l.len());
        let mut iterations = 0;
        for (i, &li) in l.iter().enumerate() {
            let seed = warm.and_then(|w| w.x.get(i).copied());
            let sol = solve_scalar(self.reg, li, eta_inv, seed, &self.options)?;
            iterations = iterations.max(sol.iterations);
            x.push(sol.x);
        }
        let kkt_residual = box_stationarity(self.reg, l, eta_inv, &x);
        self.certify(kkt_residual, iterations)?;
        Ok(SolveReport {
            x: x.into(),
            kkt_residual,
            iterations,
            dual_value: 0.0,
            degraded: false,
        })
    }

    /// Minimizes over `{x ∈ [0,1]^d : Σx = m}` by root-finding the multiplier.
    pub fn solve_mset(
        &self,
        l: &[f64],
        eta_inv: f64,
        m: usize,
        warm: Option<&WarmStart>,
    ) -> Result<SolveReport> {
        check_inputs(l, eta_inv)?;
        let d = l.len();
        if m == 0 || m >= d {
            return Err(Error::InvalidParameter(format!(
                "m-set solve needs 1 ≤ m ≤ d−1, got d = {d}, m = {m}"
            )));
        }
        let target = m as f64;
        let opts = &self.options;

        let mut x: Vec<f64> = match warm {
            Some(w) if w.x.len() == d => w.x.clone(),
            _ => vec![target / d as f64; d],
        };
        let total_iterations = std::cell::Cell::new(0usize);

        // Evaluates h(ν) and h'(ν), updating x in place.
        let eval = |nu: f64, x: &mut Vec<f64>| -> Result<(f64, f64)> {
            let mut sum = 0.0;
            let mut slope = 0.0;
            for i in 0..d {
                let sol = solve_scalar(self.reg, l[i] + nu, eta_inv, Some(x[i]), opts)?;
                x[i] = sol.x;
                sum += sol.x;
                slope -= sol.sensitivity;
            }
            total_iterations.set(total_iterations.get() + 1);
            Ok((sum - target, slope))
        };

        let mut nu = match warm {
            Some(w) if w.x.len() == d && w.nu.is_finite() => w.nu,
            _ => {
                // Midpoint of the spread of L puts ν inside [−max L, −min L].
                let (lmin, lmax) = l
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                -0.5 * (lmin + lmax)
            }
        };
        let (mut h, mut dh);
        (h, _) = eval(nu, &mut x)?;
        if h.abs() <= opts.sum_tol * 1e-3 {
            return self.finish_mset(l, eta_inv, m, x, nu, total_iterations.get());
        }

        // Bracket the root: h(lo) > 0 > h(hi).
        let (mut nu_lo, mut h_lo, mut nu_hi, mut h_hi);
        let mut step = eta_inv.max(1.0);
        if h > 0.0 {
            nu_lo = nu;
            h_lo = h;
            loop {
                let trial = nu_lo + step;
                let (ht, _) = eval(trial, &mut x)?;
                debug_assert!(ht <= h_lo, "h must decrease in ν");
                if ht <= 0.0 {
                    nu_hi = trial;
                    h_hi = ht;
                    break;
                }
                nu_lo = trial;
                h_lo = ht;
                step *= 2.0;
                if !step.is_finite() || total_iterations.get() > 4 * opts.max_iter {
                    return Err(Error::NoConvergence {
                        iterations: total_iterations.get(),
                        residual: h_lo.abs(),
                    });
                }
            }
        } else {
            nu_hi = nu;
            h_hi = h;
            loop {
                let trial = nu_hi - step;
                let (ht, _) = eval(trial, &mut x)?;
                debug_assert!(ht >= h_hi, "h must decrease in ν");
                if ht >= 0.0 {
                    nu_lo = trial;
                    h_lo = ht;
                    break;
                }
                nu_hi = trial;
                h_hi = ht;
                step *= 2.0;
                if !step.is_finite() || total_iterations.get() > 4 * opts.max_iter {
                    return Err(Error::NoConvergence {
                        iterations: total_iterations.get(),
                        residual: h_hi.abs(),
                    });
                }
            }
        }
        // Newton starts from the end with the smaller |h|; x must match ν.
        nu = if h_lo.abs() < h_hi.abs() { nu_lo } else { nu_hi };
        (h, dh) = eval(nu, &mut x)?;

        for _ in 0..opts.max_iter {
            if h.abs() <= opts.sum_tol * 1e-3 {
                break;
            }
            if h > 0.0 {
                nu_lo = nu;
            } else {
                nu_hi = nu;
            }
            if adjacent(nu_lo, nu_hi) {
                break;
            }
            let newton = if dh < 0.0 { nu - h / dh } else { f64::NAN };
            nu = if newton > nu_lo && newton < nu_hi {
                newton
            } else {
                0.5 * (nu_lo + nu_hi)
            };
            (h, dh) = eval(nu, &mut x)?;
        }
        self.finish_mset(l, eta_inv, m, x, nu, total_iterations.get())
    }

    fn finish_mset(
        &self,
        l: &[f64],
        eta_inv: f64,
        m: usize,
        x: Vec<f64>,
        nu: f64,
        iterations: usize,
    ) -> Result<SolveReport> {
        let feasibility = (x.iter().sum::<f64>() - m as f64).abs();
        if feasibility > self.options.sum_tol {
            return Err(Error::NoConvergence {
                iterations,
                residual: feasibility,
            });
        }
        let kkt_residual = mset_stationarity(self.reg, l, eta_inv, &x).max(feasibility);
        self.certify(kkt_residual, iterations)?;
        Ok(SolveReport {
            x: x.into(),
            kkt_residual,
            iterations,
            dual_value: nu,
            degraded: false,
        })
    }

    fn certify(&self, residual: f64, iterations: usize) -> Result<()> {
        if residual <= self.options.kkt_tol {
            Ok(())
        } else {
            Err(Error::NoConvergence {
                iterations,
                residual,
            })
        }
    }

    /// Minimizes over the hull of an explicit vertex list, parametrized by
    /// weights on the vertex simplex. Returns the weights with the report.
    ///
    /// Arms that are constant across all vertices contribute a constant and
    /// are left out of the regularizer. Hitting the iteration cap returns the
    /// best iterate with `degraded` set rather than failing.
    pub fn solve_enumerated(
        &self,
        l: &[f64],
        eta_inv: f64,
        vertices: &[Vertex],
        warm: Option<&WarmStart>,
    ) -> Result<(Vec<f64>, SolveReport)> {
        check_inputs(l, eta_inv)?;
        if vertices.is_empty() {
            return Err(Error::InvalidActionSet("empty vertex list".into()));
        }
        if vertices.len() > crate::action_set::MAX_ENUMERATED_VERTICES {
            return Err(Error::InvalidActionSet("too many vertices".into()));
        }
        let d = l.len();
        for v in vertices {
            check_dim(d, v.dim())?;
        }
        let problem = SimplexProblem::new(self.reg, l, eta_inv, vertices);
        let n = vertices.len();
        if n == 1 {
            let w = vec![1.0];
            let x = problem.point(&w);
            return Ok((
                w,
                SolveReport {
                    x: x.into(),
                    kkt_residual: 0.0,
                    iterations: 0,
                    dual_value: 0.0,
                    degraded: false,
                },
            ));
        }

        let mut w: Vec<f64> = match warm {
            Some(ws)
                if ws.weights.len() == n
                    && ws.weights.iter().all(|v| v.is_finite() && *v >= 0.0)
                    && ws.weights.iter().sum::<f64>() > 0.0 =>
            {
                let s: f64 = ws.weights.iter().sum();
                ws.weights.iter().map(|&v| v / s).collect()
            }
            _ => vec![1.0 / n as f64; n],
        };
        let target = self.options.kkt_tol * 1e-2;
        let mut iterations = 0;
        let mut residual;
        loop {
            iterations += problem.face_newton(&mut w, self.options.max_iter);
            let x = problem.point(&w);
            residual = frank_wolfe_gap(self.reg, l, eta_inv, vertices, &x);
            if residual <= target || iterations >= self.options.enumerated_max_iter {
                break;
            }
            // Pairwise step: shift mass from the worst support vertex to the
            // Frank–Wolfe vertex; a full step drops the former.
            let (toward, away) = problem.pairwise_vertices(&x, &w);
            let tau = problem.line_search(&x, toward, away, w[away]);
            if !(tau > 0.0) {
                break;
            }
            if tau >= w[away] {
                w[toward] += w[away];
                w[away] = 0.0;
            } else {
                w[toward] += tau;
                w[away] -= tau;
            }
            iterations += 1;
        }
        let x = problem.point(&w);
        Ok((
            w,
            SolveReport {
                x: x.into(),
                kkt_residual: residual,
                iterations,
                dual_value: 0.0,
                degraded: residual > self.options.kkt_tol,
            },
        ))
    }

    /// Stationarity residual of `x` for the given action set; see the module
    /// docs for units. Explicit sets use the Frank–Wolfe gap
    /// `max_v ⟨x − v, ∇f(x)⟩` relative to `max(1, ‖∇f(x)‖∞)`.
    pub fn kkt_residual(&self, l: &[f64], eta_inv: f64, set: &ActionSet, x: &[f64]) -> f64 {
        match set {
            ActionSet::Hypercube { .. } => box_stationarity(self.reg, l, eta_inv, x),
            ActionSet::MSet { m, .. } => {
                let feasibility = (x.iter().sum::<f64>() - *m as f64).abs();
                mset_stationarity(self.reg, l, eta_inv, x).max(feasibility)
            }
            ActionSet::Enumerated { vertices, .. } => {
                frank_wolfe_gap(self.reg, l, eta_inv, vertices, x)
            }
        }
    }
}

fn grad_scale(grad: &[f64]) -> f64 {
    grad.iter().fold(1.0, |a, &g| a.max(g.abs()))
}

fn at_lower(x: f64) -> bool {
    x <= DOMAIN_EPS
}

fn at_upper(x: f64) -> bool {
    x >= 1.0 - DOMAIN_EPS
}

fn box_stationarity(reg: RegularizerSpec, l: &[f64], eta_inv: f64, x: &[f64]) -> f64 {
    x.iter()
        .zip(l)
        .map(|(&xi, &li)| {
            let g = li + eta_inv * reg.dpsi(xi.clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS));
            if (at_lower(xi) && g >= 0.0) || (at_upper(xi) && g <= 0.0) {
                0.0
            } else {
                (g / (eta_inv * reg.d2psi(xi.clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS)))).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Newton step of the equality-constrained stationarity system in the
/// tangent space `Σδ = 0`, over coordinates off their bounds. Bound
/// coordinates only count when the multiplier pushes them inward.
fn mset_stationarity(reg: RegularizerSpec, l: &[f64], eta_inv: f64, x: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let terms: Vec<(f64, f64, bool)> = x
        .iter()
        .zip(l)
        .map(|(&xi, &li)| {
            let xc = xi.clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS);
            let g = li + eta_inv * reg.dpsi(xc);
            let h = eta_inv * reg.d2psi(xc);
            let free = !at_lower(xi) && !at_upper(xi);
            (g, h, free)
        })
        .collect();
    for &(g, h, free) in &terms {
        if free {
            num += g / h;
            den += 1.0 / h;
        }
    }
    if den == 0.0 {
        return 0.0;
    }
    let nu = -num / den;
    terms
        .iter()
        .zip(x)
        .map(|(&(g, h, free), &xi)| {
            let r = g + nu;
            if free || (at_lower(xi) && r < 0.0) || (at_upper(xi) && r > 0.0) {
                (r / h).abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn frank_wolfe_gap(reg: RegularizerSpec, l: &[f64], eta_inv: f64, vertices: &[Vertex], x: &[f64]) -> f64 {
    let variable = variable_arms(vertices, x.len());
    let grad: Vec<f64> = (0..x.len())
        .map(|i| {
            if variable[i] {
                l[i] + eta_inv * reg.dpsi(x[i].clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS))
            } else {
                l[i]
            }
        })
        .collect();
    let at_x: f64 = x.iter().zip(&grad).map(|(a, b)| a * b).sum();
    let best = vertices
        .iter()
        .map(|v| v.dot(&grad))
        .fold(f64::INFINITY, f64::min);
    (at_x - best).max(0.0) / grad_scale(&grad)
}

fn variable_arms(vertices: &[Vertex], d: usize) -> Vec<bool> {
    (0..d)
        .map(|i| {
            let first = vertices[0][i];
            vertices.iter().any(|v| v[i] != first)
        })
        .collect()
}

struct SimplexProblem<'a> {
    reg: RegularizerSpec,
    l: &'a [f64],
    eta_inv: f64,
    vertices: &'a [Vertex],
    variable: Vec<bool>,
}

impl<'a> SimplexProblem<'a> {
    fn new(reg: RegularizerSpec, l: &'a [f64], eta_inv: f64, vertices: &'a [Vertex]) -> Self {
        let variable = variable_arms(vertices, l.len());
        SimplexProblem {
            reg,
            l,
            eta_inv,
            vertices,
            variable,
        }
    }

    fn point(&self, w: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.l.len()];
        for (v, &wv) in self.vertices.iter().zip(w) {
            if wv == 0.0 {
                continue;
            }
            for (xi, &b) in x.iter_mut().zip(v.iter()) {
                if b {
                    *xi += wv;
                }
            }
        }
        // Arms fixed by every vertex are exactly 0 or 1.
        for (i, xi) in x.iter_mut().enumerate() {
            if !self.variable[i] {
                *xi = if self.vertices[0][i] { 1.0 } else { 0.0 };
            } else {
                *xi = xi.clamp(0.0, 1.0);
            }
        }
        x
    }

    fn value(&self, w: &[f64]) -> f64 {
        let x = self.point(w);
        x.iter()
            .enumerate()
            .map(|(i, &xi)| {
                let reg = if self.variable[i] {
                    self.eta_inv * self.reg.psi(xi)
                } else {
                    0.0
                };
                self.l[i] * xi + reg
            })
            .sum()
    }

    fn grad_x(&self, i: usize, xi: f64) -> f64 {
        self.l[i] + self.eta_inv * self.reg.dpsi(xi.clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS))
    }

    /// The vertex minimizing the linearization at `x`, and the support
    /// vertex maximizing it.
    fn pairwise_vertices(&self, x: &[f64], w: &[f64]) -> (usize, usize) {
        let grad: Vec<f64> = (0..x.len())
            .map(|i| if self.variable[i] { self.grad_x(i, x[i]) } else { 0.0 })
            .collect();
        let (mut toward, mut away) = (0, 0);
        let (mut low, mut high) = (f64::INFINITY, f64::NEG_INFINITY);
        for (k, v) in self.vertices.iter().enumerate() {
            let value = v.dot(&grad);
            if value < low {
                toward = k;
                low = value;
            }
            if w[k] > 0.0 && value > high {
                away = k;
                high = value;
            }
        }
        (toward, away)
    }

    /// Exact line search along `x + τ(toward − away)`, `τ ∈ [0, max]`, by
    /// bisection on the directional derivative (increasing by convexity).
    fn line_search(&self, x: &[f64], toward: usize, away: usize, max: f64) -> f64 {
        let (s, a) = (&self.vertices[toward], &self.vertices[away]);
        let dir: Vec<f64> = (0..x.len())
            .map(|i| f64::from(u8::from(s[i])) - f64::from(u8::from(a[i])))
            .collect();
        let slope = |tau: f64| -> f64 {
            dir.iter()
                .enumerate()
                .filter(|(i, &di)| di != 0.0 && self.variable[*i])
                .map(|(i, &di)| self.grad_x(i, x[i] + tau * di) * di)
                .sum()
        };
        if !(slope(0.0) < 0.0) {
            return 0.0;
        }
        if slope(max) <= 0.0 {
            return max;
        }
        let (mut lo, mut hi) = (0.0, max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Damped Newton on the face spanned by the support of `w`.
    ///
    /// The step is computed in `x` over the affine hull of the support, then
    /// mapped back to weights by the minimum-norm update
    /// `Δw_v = w_v·m_vᵀ G⁺ (Δx, 0)` with `m_v = (v, 1)` and
    /// `G = Σ w_v m_v m_vᵀ`, which preserves `Σw = 1` and moves small
    /// weights proportionally little. A ratio test keeps `w ≥ 0`; weights
    /// driven to zero leave the support. Returns the number of steps taken.
    fn face_newton(&self, w: &mut [f64], max_iter: usize) -> usize {
        let mut last_decrement = f64::INFINITY;
        for it in 0..max_iter {
            let support: Vec<usize> = (0..w.len()).filter(|&v| w[v] > 0.0).collect();
            let x = self.point(w);
            let coords: Vec<usize> = (0..x.len())
                .filter(|&i| {
                    let first = self.vertices[support[0]][i];
                    support.iter().any(|&v| self.vertices[v][i] != first)
                })
                .collect();
            if coords.is_empty() {
                return it;
            }
            let k = coords.len();
            let mut g = DVector::zeros(k);
            let mut h = DVector::zeros(k);
            for (j, &i) in coords.iter().enumerate() {
                let xc = x[i].clamp(DOMAIN_EPS, 1.0 - DOMAIN_EPS);
                g[j] = self.grad_x(i, xc);
                h[j] = self.eta_inv * self.reg.d2psi(xc);
            }
            let lift = |v: usize| -> DVector<f64> {
                let vertex = &self.vertices[v];
                DVector::from_iterator(
                    k + 1,
                    coords.iter().map(|&i| f64::from(u8::from(vertex[i]))).chain(std::iter::once(1.0)),
                )
            };
            let mut gram = DMatrix::zeros(k + 1, k + 1);
            for &v in &support {
                let m = lift(v);
                gram.ger(w[v], &m, &m, 1.0);
            }
            let eig = gram.symmetric_eigen();
            let lmax = eig.eigenvalues.max();
            let keep: Vec<usize> = (0..=k).filter(|&j| eig.eigenvalues[j] > 1e-13 * lmax).collect();
            let r = keep.len();
            let basis = DMatrix::from_fn(k + 1, r, |row, col| eig.eigenvectors[(row, keep[col])]);

            // Newton step restricted to range(G) with zero weight-sum change.
            let top = basis.rows(0, k);
            let hess = top.transpose() * DMatrix::from_diagonal(&h) * top;
            let mut kkt = DMatrix::zeros(r + 1, r + 1);
            kkt.view_mut((0, 0), (r, r)).copy_from(&hess);
            let mut rhs = DVector::zeros(r + 1);
            rhs.rows_mut(0, r).copy_from(&-(top.transpose() * &g));
            for col in 0..r {
                kkt[(col, r)] = basis[(k, col)];
                kkt[(r, col)] = basis[(k, col)];
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                return it;
            };
            let a = sol.rows(0, r);
            let dx = top * a;
            let decrement = -g.dot(&dx);
            if !(decrement > 0.0) || decrement >= last_decrement {
                return it;
            }
            last_decrement = decrement;
            let z = DVector::from_fn(k + 1, |row, _| {
                (0..r)
                    .map(|col| basis[(row, col)] * a[col] / eig.eigenvalues[keep[col]])
                    .sum::<f64>()
            });
            let dw: Vec<(usize, f64)> = support.iter().map(|&v| (v, w[v] * lift(v).dot(&z))).collect();

            let alpha_max = dw
                .iter()
                .filter(|(_, d)| *d < 0.0)
                .map(|&(v, d)| -w[v] / d)
                .fold(f64::INFINITY, f64::min);
            let mut alpha = if alpha_max > 1.0 { 1.0 } else { 0.995 * alpha_max };
            let f0 = self.value(w);
            // Below this decrement the objective cannot resolve progress;
            // full Newton steps are taken while the decrement keeps falling.
            let noise = 1e-10 * f0.abs().max(1.0);
            let mut accepted = None;
            for _ in 0..60 {
                let mut cand = w.to_vec();
                for &(v, d) in &dw {
                    cand[v] = (cand[v] + alpha * d).max(0.0);
                }
                let fc = self.value(&cand);
                let armijo = fc <= f0 - 1e-4 * alpha * decrement;
                let flat = decrement <= noise && fc <= f0 + 1e-15 * f0.abs().max(1.0);
                if fc.is_finite() && (armijo || flat) {
                    accepted = Some(cand);
                    break;
                }
                alpha *= 0.5;
            }
            let Some(mut next) = accepted else {
                return it;
            };
            next.iter_mut().filter(|v| **v < 1e-16).for_each(|v| *v = 0.0);
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|v| *v /= s);
            w.copy_from_slice(&next);
        }
        max_iter
    }
}

/// Hybrid-regularizer solve over the unit box.
pub fn solve_box(l: &[f64], eta_inv: f64, gamma: f64) -> Result<SolveReport> {
    FtrlSolver::hybrid(gamma)?.solve_box(l, eta_inv, None)
}

/// Hybrid-regularizer solve over the m-set hull.
pub fn solve_mset(l: &[f64], eta_inv: f64, gamma: f64, m: usize) -> Result<SolveReport> {
    FtrlSolver::hybrid(gamma)?.solve_mset(l, eta_inv, m, None)
}

/// Hybrid-regularizer solve over the hull of an explicit vertex list.
pub fn solve_enumerated(
    l: &[f64],
    eta_inv: f64,
    gamma: f64,
    vertices: &[Vertex],
) -> Result<(Vec<f64>, SolveReport)> {
    FtrlSolver::hybrid(gamma)?.solve_enumerated(l, eta_inv, vertices, None)
}

/// Hybrid-regularizer stationarity residual.
pub fn kkt_residual(l: &[f64], eta_inv: f64, gamma: f64, set: &ActionSet, x: &[f64]) -> f64 {
    FtrlSolver::new(RegularizerSpec::Hybrid { gamma }).kkt_residual(l, eta_inv, set, x)
}
