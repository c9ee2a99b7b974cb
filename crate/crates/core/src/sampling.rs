//! Sampling rules `P(x)` with `E_{X∼P(x)}[X] = x`.
//!
//! * hypercube: independent Bernoulli coordinates;
//! * m-set: sort `x` in decreasing order, write it as a mixture of the
//!   staircase points `β_{i,j} = (1^i, c^{d−i−j}, 0^j)` with
//!   `c = (m−i)/(d−i−j)`, pick a component, then draw a uniform
//!   `(m−i)`-subset of its middle block;
//! * explicit vertex lists: a categorical draw from the solver's weights.

use rand::Rng;

use crate::action_set::Vertex;
use crate::error::{Error, Result};

/// Coordinates within this distance of 0 or 1 are snapped before decomposing.
pub const SNAP_EPS: f64 = 1e-12;
/// Feasibility tolerance accepted by the m-set decomposition.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub fn sample_hypercube<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> Vertex {
    Vertex::new(x.iter().map(|&p| rng.random::<f64>() < p).collect())
}

/// One term `p · β_{i,j}` of an m-set decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    /// Leading coordinates fixed to 1 (in sorted order).
    pub ones: usize,
    /// Trailing coordinates fixed to 0 (in sorted order).
    pub zeros: usize,
}

/// `x` in sorted order as a convex combination of staircase points.
///
/// Only components with positive weight are stored. The full greedy path
/// starts at `(0, 0)` and advances one of `i`, `j` per step; zero-weight
/// stops along it are skipped, so stored components are non-decreasing in
/// both indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MSetDecomposition {
    pub d: usize,
    pub m: usize,
    /// `permutation[k]` is the original index of the k-th largest coordinate.
    pub permutation: Vec<usize>,
    pub components: Vec<Component>,
}

impl MSetDecomposition {
    /// `β_{i,j}` in sorted coordinates.
    pub fn beta(d: usize, m: usize, i: usize, j: usize) -> Vec<f64> {
        let middle = d - i - j;
        let c = if middle == 0 {
            0.0
        } else {
            (m - i) as f64 / middle as f64
        };
        (0..d)
            .map(|k| {
                if k < i {
                    1.0
                } else if k < d - j {
                    c
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `Σ p_s β_{i_s,j_s}`, in sorted coordinates.
    pub fn reconstruct_sorted(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for c in &self.components {
            for (o, b) in out.iter_mut().zip(Self::beta(self.d, self.m, c.ones, c.zeros)) {
                *o += c.weight * b;
            }
        }
        out
    }

    /// Draws a vertex with mean equal to the decomposed point.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vertex {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = *self.components.last().expect("non-empty decomposition");
        for c in &self.components {
            acc += c.weight;
            if u < acc {
                chosen = *c;
                break;
            }
        }
        let mut sorted = vec![false; self.d];
        sorted[..chosen.ones].iter_mut().for_each(|b| *b = true);
        let middle_start = chosen.ones;
        let middle_len = self.d - chosen.ones - chosen.zeros;
        for k in uniform_subset(middle_len, self.m - chosen.ones, rng) {
            sorted[middle_start + k] = true;
        }
        let mut v = Vertex::zeros(self.d);
        for (k, &orig) in self.permutation.iter().enumerate() {
            v.set(orig, sorted[k]);
        }
        v
    }
}

/// A uniformly random `k`-subset of `0..n` by partial Fisher–Yates.
pub fn uniform_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for s in 0..k {
        let r = rng.random_range(s..n);
        pool.swap(s, r);
    }
    pool.truncate(k);
    pool
}

/// Greedy staircase decomposition of a point of the m-set hull.
///
/// At state `(i, j)` with remaining weight `r` and remaining target `y`, the
/// weight of `β_{i,j}` is the largest `p` that keeps `y − pβ` a valid
/// remainder: the top middle coordinate may not exceed `r − p` and the
/// bottom one may not go negative. Whichever bound binds decides whether `i`
/// or `j` advances.
pub fn decompose_mset(x: &[f64], m: usize) -> Result<MSetDecomposition> {
    let d = x.len();
    if m == 0 || m >= d {
        return Err(Error::InvalidParameter(format!(
            "m-set needs 1 ≤ m ≤ d−1, got d = {d}, m = {m}"
        )));
    }
    let box_violation = x
        .iter()
        .map(|&v| (-v).max(v - 1.0).max(0.0))
        .fold(0.0, f64::max);
    let residual = box_violation.max((x.iter().sum::<f64>() - m as f64).abs());
    if !(residual <= FEASIBILITY_TOL) {
        return Err(Error::Infeasible { residual });
    }

    let mut permutation: Vec<usize> = (0..d).collect();
    permutation.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut y: Vec<f64> = permutation
        .iter()
        .map(|&k| {
            let v = x[k].clamp(0.0, 1.0);
            if v < SNAP_EPS {
                0.0
            } else if v > 1.0 - SNAP_EPS {
                1.0
            } else {
                v
            }
        })
        .collect();

    let mut components = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    // The remainder is recomputed from the running total so that summing
    // the stored weights in order gives exactly 1.
    let mut assigned = 0.0f64;
    let mut r = 1.0f64;
    loop {
        if i == m || j == d - m || r <= 0.0 {
            break;
        }
        let middle = d - i - j;
        let c = (m - i) as f64 / middle as f64;
        let top = y[i];
        let bottom = y[d - j - 1];
        let p_top = ((r - top) / (1.0 - c)).max(0.0);
        let p_bottom = (bottom / c).max(0.0);
        let p = p_top.min(p_bottom).min(r);
        if p > 0.0 {
            components.push(Component {
                weight: p,
                ones: i,
                zeros: j,
            });
            for v in &mut y[i..d - j] {
                *v -= p * c;
            }
            assigned += p;
            r = 1.0 - assigned;
        }
        if p_top <= p_bottom {
            // Top middle coordinate saturates at the remaining weight.
            y[i] = r;
            i += 1;
        } else {
            y[d - j - 1] = 0.0;
            j += 1;
        }
    }
    if r > 0.0 {
        // Once i = m or j = d − m the staircase is the vertex β_{m,d−m}; it
        // takes whatever weight is left.
        components.push(Component {
            weight: r,
            ones: m,
            zeros: d - m,
        });
    }
    Ok(MSetDecomposition {
        d,
        m,
        permutation,
        components,
    })
}

pub fn sample_mset<R: Rng + ?Sized>(x: &[f64], m: usize, rng: &mut R) -> Result<Vertex> {
    Ok(decompose_mset(x, m)?.sample(rng))
}

/// Categorical draw of a vertex index. Weights are renormalized; they must
/// be non-negative with a positive sum.
pub fn sample_enumerated<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(
            "vertex weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("vertex weights are all zero".into()));
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = k;
        }
        acc += w;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last_positive)
}
