//! Combinatorial action sets `X ⊂ {0,1}^d` and their convex hulls.
//!
//! Three families are supported: the full hypercube, the m-set (all subsets
//! of exactly `m` arms) and a small explicit list of vertices. Each exposes a
//! membership test, a linear minimization oracle and a feasibility residual
//! for fractional points.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use crate::error::{check_dim, Error, Result};

/// Largest vertex list accepted by [`ActionSet::enumerated`].
pub const MAX_ENUMERATED_VERTICES: usize = 1 << 16;

/// A binary vector selecting a subset of arms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vertex(Vec<bool>);

impl Vertex {
    pub fn new(bits: Vec<bool>) -> Self {
        Vertex(bits)
    }

    pub fn zeros(d: usize) -> Self {
        Vertex(vec![false; d])
    }

    /// Builds a vertex from 0/1 integers; any non-zero entry counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Vertex(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Number of selected arms, `‖v‖₁`.
    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(w)
            .filter(|(&b, _)| b)
            .map(|(_, &wi)| wi)
            .sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

impl Deref for Vertex {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex(")?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A point of `conv(X)`, i.e. the FTRL iterate `x_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    pub fn new(x: Vec<f64>) -> Self {
        FractionalPoint(x)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Deref for FractionalPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for FractionalPoint {
    fn from(x: Vec<f64>) -> Self {
        FractionalPoint(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionSet {
    /// `{0,1}^d`; its hull is the unit box.
    Hypercube { d: usize },
    /// All subsets of exactly `m` arms; its hull is the box cut by `Σx = m`.
    MSet { d: usize, m: usize },
    /// An explicit, deduplicated vertex list.
    Enumerated { d: usize, vertices: Vec<Vertex> },
}

impl ActionSet {
    pub fn hypercube(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidActionSet("hypercube needs d ≥ 1".into()));
        }
        Ok(ActionSet::Hypercube { d })
    }

    pub fn mset(d: usize, m: usize) -> Result<Self> {
        if d < 2 || m == 0 || m >= d {
            return Err(Error::InvalidActionSet(format!(
                "m-set needs 1 ≤ m ≤ d−1, got d = {d}, m = {m}"
            )));
        }
        Ok(ActionSet::MSet { d, m })
    }

    /// Builds an explicit action set. Duplicates are dropped, keeping the
    /// first occurrence, so vertex indices follow input order.
    pub fn enumerated(vertices: Vec<Vertex>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidActionSet("empty vertex list".into()));
        };
        let d = first.dim();
        if d == 0 {
            return Err(Error::InvalidActionSet("vertices have dimension 0".into()));
        }
        let mut seen = HashSet::with_capacity(vertices.len());
        let mut unique = Vec::with_capacity(vertices.len());
        for v in vertices {
            check_dim(d, v.dim())?;
            if seen.insert(v.clone()) {
                unique.push(v);
            }
        }
        if unique.len() > MAX_ENUMERATED_VERTICES {
            return Err(Error::InvalidActionSet(format!(
                "{} vertices exceeds the limit of {MAX_ENUMERATED_VERTICES}",
                unique.len()
            )));
        }
        Ok(ActionSet::Enumerated {
            d,
            vertices: unique,
        })
    }

    /// Reads one vertex per line, written as a run of `0`/`1` characters.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn load_enumerated(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_enumerated(&text).map_err(|(line, message)| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    fn parse_enumerated(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut vertices = Vec::new();
        let mut last_line = 0;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            last_line = n + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bits = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err((n + 1, format!("unexpected character {other:?}"))),
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if let Some(first) = vertices.first() {
                let first: &Vertex = first;
                if first.dim() != bits.len() {
                    return Err((
                        n + 1,
                        format!("expected {} digits, found {}", first.dim(), bits.len()),
                    ));
                }
            }
            vertices.push(Vertex::new(bits));
        }
        Self::enumerated(vertices).map_err(|e| (last_line, e.to_string()))
    }

    pub fn dim(&self) -> usize {
        match *self {
            ActionSet::Hypercube { d } | ActionSet::MSet { d, .. } => d,
            ActionSet::Enumerated { d, .. } => d,
        }
    }

    /// `max_{x∈X} ‖x‖₁`.
    pub fn max_l1(&self) -> usize {
        match self {
            ActionSet::Hypercube { d } => *d,
            ActionSet::MSet { m, .. } => *m,
            ActionSet::Enumerated { vertices, .. } => {
                vertices.iter().map(Vertex::ones).max().unwrap_or(0)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ActionSet::Hypercube { .. } => "hypercube",
            ActionSet::MSet { .. } => "mset",
            ActionSet::Enumerated { .. } => "enumerated",
        }
    }

    pub fn contains(&self, v: &Vertex) -> Result<bool> {
        check_dim(self.dim(), v.dim())?;
        Ok(match self {
            ActionSet::Hypercube { .. } => true,
            ActionSet::MSet { m, .. } => v.ones() == *m,
            ActionSet::Enumerated { vertices, .. } => vertices.contains(v),
        })
    }

    /// `argmin_{x∈X} ⟨x, w⟩`. Ties go to the lowest index: the hypercube
    /// includes an arm only when its weight is strictly negative, the m-set
    /// prefers lower-indexed arms among equal weights, and explicit sets
    /// return the first minimizing vertex in list order.
    pub fn linear_min_oracle(&self, w: &[f64]) -> Result<Vertex> {
        check_dim(self.dim(), w.len())?;
        Ok(match self {
            ActionSet::Hypercube { .. } => Vertex::new(w.iter().map(|&wi| wi < 0.0).collect()),
            ActionSet::MSet { d, m } => {
                let mut order: Vec<usize> = (0..*d).collect();
                order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
                let mut v = Vertex::zeros(*d);
                for &i in &order[..*m] {
                    v.set(i, true);
                }
                v
            }
            ActionSet::Enumerated { vertices, .. } => {
                let mut best = &vertices[0];
                let mut best_value = best.dot(w);
                for v in &vertices[1..] {
                    let value = v.dot(w);
                    if value < best_value {
                        best = v;
                        best_value = value;
                    }
                }
                best.clone()
            }
        })
    }

    /// Constraint violation of a fractional point: the largest box violation
    /// and, for the m-set, `|Σx − m|`. Explicit sets are checked against the
    /// box only; exact hull membership needs the vertex weights.
    pub fn hull_residual(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let box_violation = x
            .iter()
            .map(|&xi| (-xi).max(xi - 1.0).max(0.0))
            .fold(0.0, f64::max);
        Ok(match self {
            ActionSet::MSet { m, .. } => {
                let sum: f64 = x.iter().sum();
                box_violation.max((sum - *m as f64).abs())
            }
            _ => box_violation,
        })
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSet::Hypercube { d } => write!(f, "hypercube(d={d})"),
            ActionSet::MSet { d, m } => write!(f, "mset(d={d},m={m})"),
            ActionSet::Enumerated { d, vertices } => {
                write!(f, "enumerated(d={d},|X|={})", vertices.len())
            }
        }
    }
}
