//! 1-nearest-neighbour rule. Equidistant neighbours resolve to the lowest
//! training index.

use super::regions::DecisionRegions;
use crate::data::{Label, LabeledSample};

#[derive(Clone, Debug)]
pub(crate) enum NearestNeighbour {
    /// Distinct sorted abscissae with label and lowest training index of each.
    Line { xs: Vec<f64>, labels: Vec<Label>, first: Vec<usize> },
    Euclidean { sample: LabeledSample },
}

impl NearestNeighbour {
    pub(crate) fn fit(sample: &LabeledSample) -> Self {
        if sample.dim() != 1 {
            return NearestNeighbour::Euclidean { sample: sample.clone() };
        }
        let coords = sample.coords();
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]).then(a.cmp(&b)));
        let mut xs = Vec::with_capacity(order.len());
        let mut labels = Vec::with_capacity(order.len());
        let mut first = Vec::with_capacity(order.len());
        for i in order {
            if xs.last() == Some(&coords[i]) {
                continue; // sorted by index within ties, so the first one wins
            }
            xs.push(coords[i]);
            labels.push(sample.label(i));
            first.push(i);
        }
        NearestNeighbour::Line { xs, labels, first }
    }

    pub(crate) fn predict(&self, x: &[f64]) -> Label {
        match self {
            NearestNeighbour::Line { xs, labels, first } => {
                let v = x[0];
                let pos = xs.partition_point(|&u| u < v);
                if pos == xs.len() {
                    return labels[pos - 1];
                }
                if pos == 0 || xs[pos] == v {
                    return labels[pos];
                }
                let (dl, dr) = (v - xs[pos - 1], xs[pos] - v);
                let left = if dl == dr { first[pos - 1] < first[pos] } else { dl < dr };
                if left {
                    labels[pos - 1]
                } else {
                    labels[pos]
                }
            }
            NearestNeighbour::Euclidean { sample } => {
                let mut best = f64::INFINITY;
                let mut label = Label::Zero;
                for (p, y) in sample.iter() {
                    let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < best {
                        best = d2;
                        label = y;
                    }
                }
                label
            }
        }
    }

    pub(crate) fn regions(&self) -> Option<DecisionRegions> {
        let NearestNeighbour::Line { xs, labels, .. } = self else {
            return None;
        };
        let steps = xs
            .windows(2)
            .zip(labels.windows(2))
            .filter(|(_, l)| l[0] != l[1])
            .map(|(w, l)| (0.5 * (w[0] + w[1]), l[1]));
        Some(DecisionRegions::from_steps(labels[0], steps))
    }
}
