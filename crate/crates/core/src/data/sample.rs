use serde::{Deserialize, Serialize};

use super::labels::Label;
use crate::error::{Error, Result};

/// Ordered examples `(x_i, y_i)`; points are stored row-major in one buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    dim: usize,
    points: Vec<f64>,
    labels: Vec<Label>,
}

impl LabeledSample {
    pub fn empty(dim: usize) -> Self {
        LabeledSample {
            dim,
            points: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_parts(dim: usize, points: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if dim == 0 || points.len() != dim * labels.len() {
            return Err(Error::invalid(
                "sample",
                format!("{} coordinates do not fit {} labels in dimension {dim}", points.len(), labels.len()),
            ));
        }
        Ok(LabeledSample { dim, points, labels })
    }

    /// One-dimensional sample from `(x, y)` pairs.
    pub fn from_1d(pairs: &[(f64, Label)]) -> Self {
        LabeledSample {
            dim: 1,
            points: pairs.iter().map(|p| p.0).collect(),
            labels: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn coords(&self) -> &[f64] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.points.chunks_exact(self.dim).zip(self.labels.iter().copied())
    }

    pub fn push(&mut self, x: &[f64], y: Label) {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        self.points.extend_from_slice(x);
        self.labels.push(y);
    }

    /// The first `n` examples.
    pub fn prefix(&self, n: usize) -> LabeledSample {
        LabeledSample {
            dim: self.dim,
            points: self.points[..n * self.dim].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    /// Examples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledSample {
        let mut out = LabeledSample::empty(self.dim);
        out.points.reserve(indices.len() * self.dim);
        out.labels.reserve(indices.len());
        for &i in indices {
            out.push(self.point(i), self.labels[i]);
        }
        out
    }

    /// Copy with examples at `removed` (sorted or not) dropped; order of the rest preserved.
    pub fn without(&self, removed: &[usize]) -> LabeledSample {
        let mut drop = vec![false; self.len()];
        for &i in removed {
            drop[i] = true;
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| !drop[i]).collect();
        self.select(&keep)
    }

    /// Overwrite example `i` with `(x, y)`.
    pub fn replace(&mut self, i: usize, x: &[f64], y: Label) {
        self.points[i * self.dim..(i + 1) * self.dim].copy_from_slice(x);
        self.labels[i] = y;
    }

    pub fn count_ones(&self) -> usize {
        self.labels.iter().filter(|y| y.is_one()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_keep_order() {
        let s = LabeledSample::from_1d(&[(0.1, Label::Zero), (0.2, Label::One), (0.3, Label::Zero)]);
        let t = s.without(&[1]);
        assert_eq!(t.coords(), &[0.1, 0.3]);
        let u = s.select(&[2, 0]);
        assert_eq!(u.coords(), &[0.3, 0.1]);
        assert_eq!(s.prefix(2).labels(), &[Label::Zero, Label::One]);
    }

    #[test]
    fn from_parts_checks_lengths() {
        assert!(LabeledSample::from_parts(2, vec![0.0; 3], vec![Label::Zero]).is_err());
        assert!(LabeledSample::from_parts(2, vec![0.0; 2], vec![Label::Zero]).is_ok());
    }
}
