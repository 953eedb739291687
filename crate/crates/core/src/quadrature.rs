//! Probability quadrature rules for Gaussian variables.

use gauss_quad::GaussHermite;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and probability weights (summing to one), nodes ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rule for `σ·X` where this rule integrates `X`.
    pub fn scaled(&self, sigma: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|x| x * sigma).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `n`-point Gauss–Hermite rule for the standard normal law. Exact for
/// polynomials of degree up to `2n − 1`.
pub fn gauss_hermite(n: usize) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidQuadrature("at least one node is needed".into()));
    }
    if n == 1 {
        return Ok(GaussRule {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    let rule = GaussHermite::new(n).map_err(|e| Error::InvalidQuadrature(e.to_string()))?;
    let mut pairs: Vec<(f64, f64)> = rule
        .into_node_weight_pairs()
        .into_iter()
        .map(|(x, w)| (x * std::f64::consts::SQRT_2, w / std::f64::consts::PI.sqrt()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // The eigen-solver returns mirrored pairs that agree only to rounding;
    // average them so odd moments vanish exactly.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    })
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Lattice rule `{j·h : |j·h| ≤ reach}` for `N(0, σ²)` with weights
/// proportional to the density. Unlike Gauss–Hermite, shifting the lattice
/// by a multiple of `h` maps it onto itself, which keeps sums like
/// `u + w` on a common grid.
pub fn gaussian_lattice(h: f64, reach: f64, sigma: f64) -> Result<GaussRule> {
    if !(h > 0.0) || !(reach >= 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidQuadrature(format!(
            "lattice needs h > 0, reach ≥ 0, σ > 0 (got {h}, {reach}, {sigma})"
        )));
    }
    let m = (reach / h + 1e-9).floor() as i64;
    let nodes: Vec<f64> = (-m..=m).map(|j| j as f64 * h).collect();
    let raw: Vec<f64> = nodes.iter().map(|x| normal_pdf(x / sigma)).collect();
    let total: f64 = raw.iter().sum();
    Ok(GaussRule {
        nodes,
        weights: raw.into_iter().map(|w| w / total).collect(),
    })
}

/// Tensor product of one-dimensional rules: points (first coordinate most
/// significant) and product weights.
pub fn tensor(rules: &[GaussRule]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut points = vec![Vec::new()];
    let mut weights = vec![1.0];
    for rule in rules {
        let mut next_p = Vec::with_capacity(points.len() * rule.len());
        let mut next_w = Vec::with_capacity(points.len() * rule.len());
        for (p, w) in points.iter().zip(&weights) {
            for (x, v) in rule.nodes.iter().zip(&rule.weights) {
                let mut q = p.clone();
                q.push(*x);
                next_p.push(q);
                next_w.push(w * v);
            }
        }
        points = next_p;
        weights = next_w;
    }
    (points, weights)
}
