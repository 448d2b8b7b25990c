//! Exact empirical risk minimisation over intervals, unions of `k`
//! intervals, and explicit finite classes.

use serde::{Deserialize, Serialize};

use super::regions::DecisionRegions;
use crate::data::{AxisBox, Interval, Label, LabeledSample};
use crate::error::{Error, Result};

/// A decision function: constant, or `1` exactly on a union of closed boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Hypothesis {
    Constant { label: Label },
    Union { boxes: Vec<AxisBox> },
}

impl Hypothesis {
    pub fn intervals(intervals: &[Interval]) -> Self {
        if intervals.is_empty() {
            return Hypothesis::Constant { label: Label::Zero };
        }
        Hypothesis::Union {
            boxes: intervals.iter().map(|iv| AxisBox::interval(iv.lo, iv.hi)).collect(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match self {
            Hypothesis::Constant { label } => *label,
            Hypothesis::Union { boxes } => Label::from_bool(boxes.iter().any(|b| b.contains(x))),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let Hypothesis::Union { boxes } = self {
            for b in boxes {
                if b.dim() != dim || b.hi.len() != dim || b.lo.iter().zip(&b.hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::invalid("hypothesis", format!("box {b:?} is malformed for dimension {dim}")));
                }
            }
        }
        Ok(())
    }

    pub fn regions(&self) -> Option<DecisionRegions> {
        match self {
            Hypothesis::Constant { label } => Some(DecisionRegions::constant(*label)),
            Hypothesis::Union { boxes } => {
                if boxes.iter().any(|b| b.dim() != 1) {
                    return None;
                }
                let mut ivs: Vec<(f64, f64)> = boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect();
                ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut merged: Vec<(f64, f64)> = Vec::new();
                for (lo, hi) in ivs {
                    match merged.last_mut() {
                        Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                        _ => merged.push((lo, hi)),
                    }
                }
                let steps = merged.into_iter().flat_map(|(lo, hi)| [(lo, Label::One), (hi, Label::Zero)]);
                Some(DecisionRegions::from_steps(Label::Zero, steps))
            }
        }
    }
}

/// Sorted distinct abscissae with their label weights (`+1` per one, `-1` per zero).
struct Groups {
    xs: Vec<f64>,
    weights: Vec<i64>,
    ones: usize,
}

fn groups(sample: &LabeledSample) -> Groups {
    let mut pts: Vec<(f64, i64)> = sample
        .iter()
        .map(|(x, y)| (x[0], if y.is_one() { 1 } else { -1 }))
        .collect();
    pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::with_capacity(pts.len());
    let mut weights: Vec<i64> = Vec::with_capacity(pts.len());
    for (x, w) in pts {
        if xs.last() == Some(&x) {
            *weights.last_mut().expect("nonempty") += w;
        } else {
            xs.push(x);
            weights.push(w);
        }
    }
    Groups {
        xs,
        weights,
        ones: sample.count_ones(),
    }
}

fn require_line(sample: &LabeledSample) -> Result<()> {
    if sample.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            required: 1,
            actual: sample.dim(),
        });
    }
    Ok(())
}

/// Result of an interval-class minimisation: the chosen intervals and their empirical error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalFit {
    pub intervals: Vec<Interval>,
    pub errors: usize,
}

/// Best single interval (possibly empty) by maximum-subarray scan.
///
/// Intervals are the hull of the covered sample points. Ties go to the
/// shortest interval, then the leftmost; the empty interval is shortest.
pub fn erm_interval(sample: &LabeledSample) -> Result<IntervalFit> {
    require_line(sample)?;
    let g = groups(sample);
    // best = (sum, start group, end group); None means empty.
    let mut best_sum = 0i64;
    let mut best: Option<(usize, usize)> = None;
    let mut prefix = 0i64;
    let mut min_prefix = 0i64;
    let mut min_at = 0usize;
    for j in 0..g.xs.len() {
        // prefix == S_j here; S_i for candidate starts i <= j
        if prefix <= min_prefix {
            min_prefix = prefix;
            min_at = j;
        }
        prefix += g.weights[j];
        let sum = prefix - min_prefix;
        let (i, len) = (min_at, g.xs[j] - g.xs[min_at]);
        let better = match best {
            _ if sum > best_sum => true,
            _ if sum < best_sum => false,
            None => false,
            Some((bi, bj)) => {
                let blen = g.xs[bj] - g.xs[bi];
                len < blen || (len == blen && g.xs[i] < g.xs[bi])
            }
        };
        if better {
            best_sum = sum;
            best = Some((i, j));
        }
    }
    let intervals = best
        .map(|(i, j)| vec![Interval::new(g.xs[i], g.xs[j])])
        .unwrap_or_default();
    Ok(IntervalFit {
        intervals,
        errors: (g.ones as i64 - best_sum) as usize,
    })
}

#[derive(Clone, Copy, PartialEq, Debug)]
struct Score {
    sum: i64,
    len: f64,
}

impl Score {
    const NONE: Score = Score {
        sum: i64::MIN / 4,
        len: 0.0,
    };

    fn beats(self, other: Score) -> bool {
        self.sum > other.sum || (self.sum == other.sum && self.len < other.len)
    }

    fn add(self, w: i64, len: f64) -> Score {
        Score {
            sum: self.sum + w,
            len: self.len + len,
        }
    }
}

#[derive(Clone, Copy, Default)]
enum Back {
    #[default]
    Start,
    Out(usize),
    In(usize),
}

/// Best union of at most `k` intervals by dynamic programming over sorted points.
///
/// Maximises covered weight, breaking ties toward the smallest total length.
pub fn erm_k_intervals(sample: &LabeledSample, k: usize) -> Result<IntervalFit> {
    require_line(sample)?;
    if k == 0 {
        return Err(Error::invalid("k", "k must be at least 1"));
    }
    let g = groups(sample);
    let m = g.xs.len();
    let width = k + 1;
    let mut out = vec![Score::NONE; width];
    let mut inn = vec![Score::NONE; width];
    out[0] = Score { sum: 0, len: 0.0 };
    // back pointers per group: [out | in] x segment count
    let mut back_out = vec![Back::Start; m * width];
    let mut back_in = vec![Back::Start; m * width];
    for gi in 0..m {
        let w = g.weights[gi];
        let step = if gi == 0 { 0.0 } else { g.xs[gi] - g.xs[gi - 1] };
        let mut new_out = vec![Score::NONE; width];
        let mut new_in = vec![Score::NONE; width];
        for c in 0..width {
            let (mut s, mut b) = (out[c], Back::Out(c));
            if inn[c].beats(s) {
                s = inn[c];
                b = Back::In(c);
            }
            new_out[c] = s;
            back_out[gi * width + c] = b;
            if c == 0 {
                continue;
            }
            let mut s = Score::NONE;
            let mut b = Back::Start;
            let cands = [
                (inn[c].add(w, step), Back::In(c)),
                (out[c - 1].add(w, 0.0), Back::Out(c - 1)),
                (inn[c - 1].add(w, 0.0), Back::In(c - 1)),
            ];
            for (cand, cb) in cands {
                if cand.sum > Score::NONE.sum / 2 && cand.beats(s) {
                    s = cand;
                    b = cb;
                }
            }
            new_in[c] = s;
            back_in[gi * width + c] = b;
        }
        out = new_out;
        inn = new_in;
    }
    // best final state
    let mut best = (out[0], false, 0usize);
    for c in 0..width {
        for (s, is_in) in [(out[c], false), (inn[c], true)] {
            if s.beats(best.0) {
                best = (s, is_in, c);
            }
        }
    }
    // walk back, collecting covered group indices per segment
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let (mut is_in, mut c) = (best.1, best.2);
    let mut end: Option<usize> = None;
    for gi in (0..m).rev() {
        let b = if is_in { back_in[gi * width + c] } else { back_out[gi * width + c] };
        if is_in {
            let e = *end.get_or_insert(gi);
            // a segment starts at gi unless it came from the same segment's "in" state
            match b {
                Back::In(pc) if pc == c => {}
                _ => {
                    segments.push((gi, e));
                    end = None;
                }
            }
        }
        match b {
            Back::Out(pc) => {
                is_in = false;
                c = pc;
            }
            Back::In(pc) => {
                is_in = true;
                c = pc;
            }
            Back::Start => break,
        }
    }
    segments.reverse();
    let intervals = segments
        .into_iter()
        .map(|(i, j)| Interval::new(g.xs[i], g.xs[j]))
        .collect();
    Ok(IntervalFit {
        intervals,
        errors: (g.ones as i64 - best.0.sum) as usize,
    })
}

/// Lowest-index minimiser of empirical error over an explicit list.
pub fn erm_finite(sample: &LabeledSample, hypotheses: &[Hypothesis]) -> Result<(usize, usize)> {
    if hypotheses.is_empty() {
        return Err(Error::invalid("hypotheses", "hypothesis list is empty"));
    }
    let mut best = (0usize, usize::MAX);
    for (i, h) in hypotheses.iter().enumerate() {
        let e = sample.iter().filter(|(x, y)| h.predict(x) != *y).count();
        if e < best.1 {
            best = (i, e);
        }
    }
    Ok(best)
}
