use serde::{Deserialize, Serialize};

use crate::data::{Interval, Label};

/// Piecewise-constant prediction on the real line.
///
/// `labels[i]` holds on the open interval `(breakpoints[i-1], breakpoints[i])`,
/// with `breakpoints[-1] = -inf` and `breakpoints[len] = +inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRegions {
    pub breakpoints: Vec<f64>,
    pub labels: Vec<Label>,
}

impl DecisionRegions {
    pub fn constant(label: Label) -> Self {
        DecisionRegions {
            breakpoints: Vec::new(),
            labels: vec![label],
        }
    }

    /// Build from `(boundary, label to the right of it)` steps, merging equal neighbours.
    pub fn from_steps(initial: Label, steps: impl IntoIterator<Item = (f64, Label)>) -> Self {
        let mut out = DecisionRegions::constant(initial);
        for (b, label) in steps {
            let last = *out.labels.last().expect("nonempty");
            if label == last {
                continue;
            }
            if out.breakpoints.last() == Some(&b) {
                // zero-width region: overwrite it
                out.labels.pop();
                out.breakpoints.pop();
                if *out.labels.last().expect("nonempty") != label {
                    out.breakpoints.push(b);
                    out.labels.push(label);
                }
                continue;
            }
            out.breakpoints.push(b);
            out.labels.push(label);
        }
        out
    }

    /// Label of the region containing `x` (a breakpoint counts as the left region).
    pub fn label_at(&self, x: f64) -> Label {
        let idx = self.breakpoints.partition_point(|&b| b < x);
        self.labels[idx]
    }

    /// The closed intervals (possibly unbounded) on which `label` is predicted.
    pub fn intervals_with(&self, label: Label) -> Vec<Interval> {
        let mut out = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            if l != label {
                continue;
            }
            let lo = if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] };
            let hi = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
            out.push(Interval::new(lo, hi));
        }
        out
    }
}
