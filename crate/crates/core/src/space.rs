use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::INPUT_NORMALIZATION;

/// A finite, ordered set of labelled points.
///
/// The order is fixed at construction and is what every tie-breaking rule in
/// the crate refers to. Points may carry a numeric embedding, which is needed
/// wherever actions are averaged (convexity) or observations are mapped to
/// nearby actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    label: String,
    points: Vec<String>,
    values: Option<Vec<f64>>,
}

impl FiniteSpace {
    pub fn new(label: impl Into<String>, points: Vec<String>) -> Result<Self> {
        let label = label.into();
        if points.is_empty() {
            return Err(Error::Dimension(format!("space `{label}` is empty")));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(p.as_str()) {
                return Err(Error::Dimension(format!(
                    "space `{label}` repeats point `{p}`"
                )));
            }
        }
        Ok(Self {
            label,
            points,
            values: None,
        })
    }

    /// Points labelled `0..n`.
    pub fn indexed(label: impl Into<String>, n: usize) -> Result<Self> {
        Self::new(label, (0..n).map(|i| i.to_string()).collect())
    }

    /// A numeric space; labels are the shortest round-tripping decimal form.
    pub fn numeric(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let points = values.iter().map(|v| format_value(*v)).collect();
        let mut s = Self::new(label, points)?;
        s.values = Some(values);
        Ok(s)
    }

    /// Attach a numeric embedding to an existing labelled space.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::Dimension(format!(
                "space `{}` has {} points but {} values",
                self.label,
                self.points.len(),
                values.len()
            )));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index_of(&self, point: &str) -> Option<usize> {
        self.points.iter().position(|p| p == point)
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Uniform spacing of the numeric embedding, if there is one.
    pub fn uniform_step(&self) -> Option<f64> {
        let v = self.values.as_ref()?;
        if v.len() < 2 {
            return Some(1.0);
        }
        let step = v[1] - v[0];
        if !(step > 0.0) {
            return None;
        }
        let scale = v.iter().fold(step.abs(), |m, x| m.max(x.abs()));
        let uniform = v
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * scale);
        uniform.then_some(step)
    }

    /// Index of the point whose value is nearest `x` (lowest index on ties).
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let v = self.values.as_ref()?;
        let mut best = 0;
        for (i, vi) in v.iter().enumerate() {
            if (vi - x).abs() < (v[best] - x).abs() {
                best = i;
            }
        }
        Some(best)
    }
}

pub(crate) fn format_value(v: f64) -> String {
    let s = format!("{v}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// A probability mass function over `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    /// Validates nonnegativity and normalization (within 1e-9), then
    /// renormalizes to sum to one in working precision.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Dimension("empty pmf".into()));
        }
        if let Some(i) = mass.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Dimension(format!(
                "pmf entry {i} is {} (must be finite and nonnegative)",
                mass[i]
            )));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > INPUT_NORMALIZATION {
            return Err(Error::Dimension(format!("pmf sums to {total}")));
        }
        Ok(Self::renormalized(mass))
    }

    pub(crate) fn renormalized(mut mass: Vec<f64>) -> Self {
        let total: f64 = mass.iter().sum();
        for m in &mut mass {
            *m /= total;
        }
        Self { mass }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut mass = vec![0.0; n];
        mass[at] = 1.0;
        Self { mass }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, i: usize) -> f64 {
        self.mass[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mass
    }

    /// Index of the single atom, if the pmf is a point mass.
    pub fn atom(&self) -> Option<usize> {
        let mut found = None;
        for (i, m) in self.mass.iter().enumerate() {
            if *m > 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }
}

/// Row-major mixed-radix indexing; the first digit is the most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedRadix {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl MixedRadix {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        let mut size = 1usize;
        for i in (0..dims.len()).rev() {
            strides[i] = size;
            size = size.saturating_mul(dims[i]);
        }
        Self {
            dims,
            strides,
            size,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| d * s)
            .sum()
    }

    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.decode(index, &mut out);
        out
    }
}
