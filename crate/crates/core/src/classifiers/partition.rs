//! Histogram rule on a cubic grid anchored at the origin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::regions::DecisionRegions;
use crate::data::{Label, LabeledSample};
use crate::error::{Error, Result};

/// Cell side length as a function of the sample size.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CellWidth {
    /// `h_n = n^(-1/(2d))`: cells shrink while their expected occupancy grows.
    #[default]
    Default,
    Fixed { h: f64 },
    /// `h_n = scale * n^(-exponent)`.
    Power { scale: f64, exponent: f64 },
}

impl CellWidth {
    pub fn width(&self, n: usize, dim: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            CellWidth::Default => n.powf(-1.0 / (2.0 * dim as f64)),
            CellWidth::Fixed { h } => h,
            CellWidth::Power { scale, exponent } => scale * n.powf(-exponent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CellWidth::Default => true,
            CellWidth::Fixed { h } => h > 0.0 && h.is_finite(),
            CellWidth::Power { scale, exponent } => scale > 0.0 && scale.is_finite() && exponent.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("cell_width", "cell width must be positive and finite"))
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Histogram {
    h: f64,
    /// `[zeros, ones]` per occupied cell.
    counts: BTreeMap<Vec<i64>, [u32; 2]>,
}

impl Histogram {
    pub(crate) fn fit(sample: &LabeledSample, h: f64) -> Self {
        let mut counts: BTreeMap<Vec<i64>, [u32; 2]> = BTreeMap::new();
        for (x, y) in sample.iter() {
            counts.entry(cell_of(x, h)).or_default()[y.index()] += 1;
        }
        Histogram { h, counts }
    }

    pub(crate) fn width(&self) -> f64 {
        self.h
    }

    fn vote(c: &[u32; 2]) -> Label {
        // ties and empty cells go to 0
        Label::from_bool(c[1] > c[0])
    }

    pub(crate) fn predict(&self, x: &[f64]) -> Label {
        self.counts.get(&cell_of(x, self.h)).map_or(Label::Zero, Self::vote)
    }

    pub(crate) fn regions(&self) -> Option<DecisionRegions> {
        if self.counts.keys().next().is_some_and(|k| k.len() != 1) {
            return None;
        }
        let mut steps = Vec::new();
        for (key, c) in &self.counts {
            if Self::vote(c).is_one() {
                let k = key[0];
                steps.push((k as f64 * self.h, Label::One));
                steps.push(((k + 1) as f64 * self.h, Label::Zero));
            }
        }
        Some(DecisionRegions::from_steps(Label::Zero, steps))
    }
}

fn cell_of(x: &[f64], h: f64) -> Vec<i64> {
    x.iter().map(|v| (v / h).floor() as i64).collect()
}
