//! Class-conditional distributions `(P_0, P_1)` with disjoint supports.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::labels::Label;
use super::sample::LabeledSample;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        AxisBox { lo, hi }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        AxisBox { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Closures intersect.
    pub fn touches(&self, other: &AxisBox) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l1, h1), (l2, h2))| l1 <= h2 && l2 <= h1)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(Error::invalid("box", format!("box has wrong dimension (expected {dim})")));
        }
        let ok = self
            .lo
            .iter()
            .zip(&self.hi)
            .all(|(l, h)| l.is_finite() && h.is_finite() && l <= h);
        if !ok {
            return Err(Error::invalid("box", format!("bounds {:?}..{:?} are not finite and ordered", self.lo, self.hi)));
        }
        Ok(())
    }

    /// Corners of the box (`2^d` points, duplicates removed for degenerate axes).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for mask in 0u64..(1u64 << d.min(16)) {
            let c: Vec<f64> = (0..d)
                .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                .collect();
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }
}

/// Closed interval `[lo, hi]` on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Lebesgue measure of the intersection with `[a, b]`.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        (self.hi.min(b) - self.lo.max(a)).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub point: Vec<f64>,
    pub prob: f64,
}

/// The pair `(P_0, P_1)`. The labeling rule `eta` is the class whose support contains `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassConditionalPair {
    /// Uniform over each class's boxes, boxes weighted by volume.
    DisjointBoxes {
        dim: usize,
        boxes0: Vec<AxisBox>,
        boxes1: Vec<AxisBox>,
    },
    /// Finite supports with explicit probabilities.
    DiscreteAlphabet {
        dim: usize,
        support0: Vec<WeightedPoint>,
        support1: Vec<WeightedPoint>,
    },
    /// Class 0 uniform on the grid `{j/N : 0 <= j < N}`; class 1 uniform on `[0, 1]`.
    AtomsVsContinuum { atoms: u32 },
}

impl ClassConditionalPair {
    /// One-dimensional boxes from `(lo, hi)` pairs.
    pub fn intervals(class0: &[(f64, f64)], class1: &[(f64, f64)]) -> Result<Self> {
        let mk = |v: &[(f64, f64)]| v.iter().map(|&(l, h)| AxisBox::interval(l, h)).collect();
        let pair = ClassConditionalPair::DisjointBoxes {
            dim: 1,
            boxes0: mk(class0),
            boxes1: mk(class1),
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassConditionalPair::DisjointBoxes { dim, .. } | ClassConditionalPair::DiscreteAlphabet { dim, .. } => *dim,
            ClassConditionalPair::AtomsVsContinuum { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassConditionalPair::DisjointBoxes { dim, boxes0, boxes1 } => {
                if *dim == 0 {
                    return Err(Error::invalid("disjoint_boxes.dim", "dimension must be at least 1"));
                }
                for (name, boxes) in [("disjoint_boxes.boxes0", boxes0), ("disjoint_boxes.boxes1", boxes1)] {
                    for b in boxes {
                        b.validate(*dim)?;
                    }
                    let vol: f64 = boxes.iter().map(AxisBox::volume).sum();
                    if !(vol > 0.0) {
                        return Err(Error::invalid(name, "class has zero total volume"));
                    }
                }
                for b0 in boxes0 {
                    for b1 in boxes1 {
                        if b0.touches(b1) {
                            return Err(Error::invalid(
                                "disjoint_boxes",
                                format!("boxes {b0:?} and {b1:?} of different classes have intersecting closures"),
                            ));
                        }
                    }
                }
                Ok(())
            }
            ClassConditionalPair::DiscreteAlphabet { dim, support0, support1 } => {
                if *dim == 0 {
                    return Err(Error::invalid("discrete_alphabet.dim", "dimension must be at least 1"));
                }
                for (name, support) in [("discrete_alphabet.support0", support0), ("discrete_alphabet.support1", support1)] {
                    if support.is_empty() {
                        return Err(Error::invalid(name, "support is empty"));
                    }
                    for wp in support {
                        if wp.point.len() != *dim || wp.point.iter().any(|v| !v.is_finite()) {
                            return Err(Error::invalid(name, format!("bad point {:?}", wp.point)));
                        }
                        if !(wp.prob >= 0.0) {
                            return Err(Error::invalid(name, "negative probability"));
                        }
                    }
                    let total: f64 = support.iter().map(|w| w.prob).sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::invalid(name, format!("probabilities sum to {total}, not 1")));
                    }
                }
                if support0.iter().any(|a| support1.iter().any(|b| a.point == b.point)) {
                    return Err(Error::invalid("discrete_alphabet", "supports share a point"));
                }
                Ok(())
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => {
                if *atoms == 0 {
                    Err(Error::invalid("atoms_vs_continuum.atoms", "atom count must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn is_atom(n_atoms: u32, x: f64) -> bool {
        if !(0.0..1.0).contains(&x) {
            return false;
        }
        let n = n_atoms as f64;
        let j = (x * n).round();
        j < n && j / n == x
    }

    /// The class whose support contains `x`.
    pub fn eta(&self, x: &[f64]) -> Result<Label> {
        if x.len() != self.dim() {
            return Err(Error::UnsupportedDimension {
                required: self.dim(),
                actual: x.len(),
            });
        }
        let found = match self {
            ClassConditionalPair::DisjointBoxes { boxes0, boxes1, .. } => {
                if boxes0.iter().any(|b| b.contains(x)) {
                    Some(Label::Zero)
                } else if boxes1.iter().any(|b| b.contains(x)) {
                    Some(Label::One)
                } else {
                    None
                }
            }
            ClassConditionalPair::DiscreteAlphabet { support0, support1, .. } => {
                if support0.iter().any(|w| w.point == x) {
                    Some(Label::Zero)
                } else if support1.iter().any(|w| w.point == x) {
                    Some(Label::One)
                } else {
                    None
                }
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => {
                let v = x[0];
                if Self::is_atom(*atoms, v) {
                    Some(Label::Zero)
                } else if (0.0..=1.0).contains(&v) {
                    Some(Label::One)
                } else {
                    None
                }
            }
        };
        found.ok_or_else(|| Error::OutsideSupport(x.to_vec()))
    }

    /// Draw one point from `P_y`, appending its coordinates to `out`.
    pub fn sample_into(&self, y: Label, rng: &mut SimRng, out: &mut Vec<f64>) {
        match self {
            ClassConditionalPair::DisjointBoxes { boxes0, boxes1, .. } => {
                let boxes = if y.is_one() { boxes1 } else { boxes0 };
                let total: f64 = boxes.iter().map(AxisBox::volume).sum();
                let mut target = rng.random::<f64>() * total;
                let mut chosen = &boxes[boxes.len() - 1];
                for b in boxes {
                    let v = b.volume();
                    if v > 0.0 && target < v {
                        chosen = b;
                        break;
                    }
                    target -= v;
                }
                for (l, h) in chosen.lo.iter().zip(&chosen.hi) {
                    out.push(l + (h - l) * rng.random::<f64>());
                }
            }
            ClassConditionalPair::DiscreteAlphabet { support0, support1, .. } => {
                let support = if y.is_one() { support1 } else { support0 };
                let mut target = rng.random::<f64>();
                let mut chosen = &support[support.len() - 1];
                for wp in support {
                    if wp.prob > 0.0 && target < wp.prob {
                        chosen = wp;
                        break;
                    }
                    target -= wp.prob;
                }
                out.extend_from_slice(&chosen.point);
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => match y {
                Label::Zero => {
                    let j = rng.random_range(0..*atoms);
                    out.push(j as f64 / *atoms as f64);
                }
                Label::One => loop {
                    // Grid points carry no class-1 mass; redraw on the
                    // (probability ~N/2^53) event of hitting one.
                    let v = rng.random::<f64>();
                    if !Self::is_atom(*atoms, v) {
                        out.push(v);
                        break;
                    }
                },
            },
        }
    }

    /// Draw `X_i ~ P_{Y_i}` independently for the given labels.
    pub fn sample_objects(&self, labels: &[Label], seed: u64) -> LabeledSample {
        let mut rng = rng_from_seed(seed);
        let d = self.dim();
        let mut points = Vec::with_capacity(labels.len() * d);
        for &y in labels {
            let start = points.len();
            self.sample_into(y, &mut rng, &mut points);
            assert_eq!(
                self.eta(&points[start..]).ok(),
                Some(y),
                "sampled point disagrees with the labeling rule"
            );
        }
        LabeledSample::from_parts(d, points, labels.to_vec()).expect("consistent lengths")
    }

    /// `P_y(region)` for a union of disjoint intervals (d = 1 only).
    pub fn class_measure(&self, y: Label, region: &[Interval]) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::UnsupportedDimension {
                required: 1,
                actual: self.dim(),
            });
        }
        let m = match self {
            ClassConditionalPair::DisjointBoxes { boxes0, boxes1, .. } => {
                let boxes = if y.is_one() { boxes1 } else { boxes0 };
                let total: f64 = boxes.iter().map(AxisBox::volume).sum();
                let covered: f64 = boxes
                    .iter()
                    .map(|b| region.iter().map(|iv| iv.overlap(b.lo[0], b.hi[0])).sum::<f64>())
                    .sum();
                covered / total
            }
            ClassConditionalPair::DiscreteAlphabet { support0, support1, .. } => {
                let support = if y.is_one() { support1 } else { support0 };
                support
                    .iter()
                    .filter(|w| region.iter().any(|iv| iv.contains(w.point[0])))
                    .map(|w| w.prob)
                    .sum()
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => match y {
                Label::Zero => {
                    let hits = (0..*atoms)
                        .filter(|&j| {
                            let a = j as f64 / *atoms as f64;
                            region.iter().any(|iv| iv.contains(a))
                        })
                        .count();
                    hits as f64 / *atoms as f64
                }
                Label::One => region.iter().map(|iv| iv.overlap(0.0, 1.0)).sum(),
            },
        };
        Ok(m.clamp(0.0, 1.0))
    }

    /// Finite support of `P_y`, if the class is purely atomic.
    pub fn atoms(&self, y: Label) -> Option<Vec<WeightedPoint>> {
        match self {
            ClassConditionalPair::DisjointBoxes { .. } => None,
            ClassConditionalPair::DiscreteAlphabet { support0, support1, .. } => {
                Some(if y.is_one() { support1.clone() } else { support0.clone() })
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => match y {
                Label::Zero => Some(
                    (0..*atoms)
                        .map(|j| WeightedPoint {
                            point: vec![j as f64 / *atoms as f64],
                            prob: 1.0 / *atoms as f64,
                        })
                        .collect(),
                ),
                Label::One => None,
            },
        }
    }

    /// Boundary points of the support of `P_y` (box corners, extreme atoms).
    pub fn support_extremes(&self, y: Label) -> Vec<Vec<f64>> {
        match self {
            ClassConditionalPair::DisjointBoxes { boxes0, boxes1, .. } => {
                let boxes = if y.is_one() { boxes1 } else { boxes0 };
                let mut out: Vec<Vec<f64>> = Vec::new();
                for c in boxes.iter().filter(|b| b.volume() > 0.0).flat_map(AxisBox::corners) {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
                out
            }
            ClassConditionalPair::DiscreteAlphabet { support0, support1, .. } => {
                let support = if y.is_one() { support1 } else { support0 };
                support.iter().filter(|w| w.prob > 0.0).map(|w| w.point.clone()).collect()
            }
            ClassConditionalPair::AtomsVsContinuum { atoms } => {
                let n = *atoms as f64;
                match y {
                    Label::Zero if *atoms == 1 => vec![vec![0.0]],
                    Label::Zero => vec![vec![0.0], vec![(n - 1.0) / n]],
                    Label::One => vec![vec![0.5 / n], vec![1.0]],
                }
            }
        }
    }
}
