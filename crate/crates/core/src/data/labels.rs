//! Label processes and their statistics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// A binary label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn from_bool(one: bool) -> Self {
        if one {
            Label::One
        } else {
            Label::Zero
        }
    }

    pub fn is_one(self) -> bool {
        self == Label::One
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Zero => Label::One,
            Label::One => Label::Zero,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(Label::Zero),
            1 => Ok(Label::One),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Parse a string of `0`/`1` characters.
pub fn labels_from_str(s: &str) -> Result<Vec<Label>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(Label::Zero),
            '1' => Ok(Label::One),
            other => Err(Error::invalid("label string", format!("unexpected character {other:?}"))),
        })
        .collect()
}

/// Block lengths `k_i` (i = 1, 2, ...) for the block-schedule process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BlockRule {
    /// `k_i = k` for every block.
    Constant { k: u64 },
    /// `k_i = base^i`, saturating at `u64::MAX`.
    Power { base: u64 },
    /// Listed lengths; the last one repeats forever.
    List { ks: Vec<u64> },
}

impl BlockRule {
    /// Length of block `i` (1-based).
    pub fn k(&self, i: u64) -> u64 {
        debug_assert!(i >= 1);
        match self {
            BlockRule::Constant { k } => *k,
            BlockRule::Power { base } => {
                let exp = u32::try_from(i).unwrap_or(u32::MAX);
                base.checked_pow(exp).unwrap_or(u64::MAX)
            }
            BlockRule::List { ks } => {
                let idx = usize::try_from(i - 1).unwrap_or(usize::MAX).min(ks.len() - 1);
                ks[idx]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let BlockRule::List { ks } = self {
            if ks.is_empty() {
                return Err(Error::invalid("block rule", "list of block lengths is empty"));
            }
        }
        Ok(())
    }

    /// True when `k_i` never decreases.
    pub fn is_nondecreasing(&self) -> bool {
        match self {
            BlockRule::Constant { .. } => true,
            BlockRule::Power { base } => *base >= 1,
            BlockRule::List { ks } => ks.windows(2).all(|w| w[0] <= w[1]),
        }
    }
}

/// Generator of the label sequence `Y_1, Y_2, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LabelProcess {
    /// Independent labels with `P(Y = 1) = p`.
    IidBernoulli { p: f64 },
    /// Two-state chain: `t01 = P(0 -> 1)`, `t10 = P(1 -> 0)`, `init1 = P(Y_1 = 1)`.
    TwoStateMarkov { t01: f64, t10: f64, init1: f64 },
    /// A nonempty pattern repeated forever.
    Periodic { pattern: Vec<Label> },
    /// One `1`, then `k_1` zeros, one `1`, then `k_2` zeros, and so on.
    BlockSchedule { schedule: BlockRule },
    /// A finite prefix; past its end the last label repeats.
    Explicit { sequence: Vec<Label> },
}

fn check_prob(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("probability {p} outside [0, 1]")))
    }
}

impl LabelProcess {
    pub fn validate(&self) -> Result<()> {
        match self {
            LabelProcess::IidBernoulli { p } => check_prob("iid_bernoulli.p", *p),
            LabelProcess::TwoStateMarkov { t01, t10, init1 } => {
                check_prob("two_state_markov.t01", *t01)?;
                check_prob("two_state_markov.t10", *t10)?;
                check_prob("two_state_markov.init1", *init1)
            }
            LabelProcess::Periodic { pattern } if pattern.is_empty() => {
                Err(Error::invalid("periodic.pattern", "pattern is empty"))
            }
            LabelProcess::Periodic { .. } => Ok(()),
            LabelProcess::BlockSchedule { schedule } => schedule.validate(),
            LabelProcess::Explicit { sequence } if sequence.is_empty() => {
                Err(Error::invalid("explicit.sequence", "sequence is empty"))
            }
            LabelProcess::Explicit { .. } => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(
            self,
            LabelProcess::Periodic { .. } | LabelProcess::BlockSchedule { .. } | LabelProcess::Explicit { .. }
        )
    }

    /// The first `n` labels of a deterministic process.
    fn deterministic_prefix(&self, n: usize) -> Option<Vec<Label>> {
        match self {
            LabelProcess::Periodic { pattern } => Some((0..n).map(|i| pattern[i % pattern.len()]).collect()),
            LabelProcess::Explicit { sequence } => {
                let last = *sequence.last()?;
                Some((0..n).map(|i| sequence.get(i).copied().unwrap_or(last)).collect())
            }
            LabelProcess::BlockSchedule { schedule } => {
                let mut out = Vec::with_capacity(n);
                let mut block = 0u64;
                while out.len() < n {
                    out.push(Label::One);
                    block += 1;
                    let zeros = schedule.k(block);
                    let room = (n - out.len()) as u64;
                    for _ in 0..zeros.min(room) {
                        out.push(Label::Zero);
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Draw `Y_1..Y_n`. Deterministic variants ignore `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Label> {
        if let Some(seq) = self.deterministic_prefix(n) {
            return seq;
        }
        let mut rng = rng_from_seed(seed);
        match *self {
            LabelProcess::IidBernoulli { p } => (0..n).map(|_| Label::from_bool(rng.random::<f64>() < p)).collect(),
            LabelProcess::TwoStateMarkov { t01, t10, init1 } => {
                let mut out = Vec::with_capacity(n);
                if n == 0 {
                    return out;
                }
                let mut cur = Label::from_bool(rng.random::<f64>() < init1);
                out.push(cur);
                for _ in 1..n {
                    let u = rng.random::<f64>();
                    cur = match cur {
                        Label::Zero => Label::from_bool(u < t01),
                        Label::One => Label::from_bool(u >= t10),
                    };
                    out.push(cur);
                }
                out
            }
            _ => unreachable!("deterministic variants handled above"),
        }
    }

    /// `P(Y_{n+1} = 1 | Y_1..Y_n = history)`.
    pub fn next_label_prob(&self, history: &[Label]) -> Result<f64> {
        match *self {
            LabelProcess::IidBernoulli { p } => {
                let impossible = history.iter().any(|&y| match y {
                    Label::One => p == 0.0,
                    Label::Zero => p == 1.0,
                });
                if impossible {
                    Err(Error::ImpossibleHistory)
                } else {
                    Ok(p)
                }
            }
            LabelProcess::TwoStateMarkov { t01, t10, init1 } => {
                let Some((&first, _)) = history.split_first() else {
                    return Ok(init1);
                };
                let first_p = if first.is_one() { init1 } else { 1.0 - init1 };
                if first_p == 0.0 {
                    return Err(Error::ImpossibleHistory);
                }
                for w in history.windows(2) {
                    let step = match (w[0], w[1]) {
                        (Label::Zero, Label::One) => t01,
                        (Label::Zero, Label::Zero) => 1.0 - t01,
                        (Label::One, Label::Zero) => t10,
                        (Label::One, Label::One) => 1.0 - t10,
                    };
                    if step == 0.0 {
                        return Err(Error::ImpossibleHistory);
                    }
                }
                Ok(match history[history.len() - 1] {
                    Label::Zero => t01,
                    Label::One => 1.0 - t10,
                })
            }
            _ => {
                let seq = self
                    .deterministic_prefix(history.len() + 1)
                    .expect("deterministic variant");
                if seq[..history.len()] != *history {
                    return Err(Error::ImpossibleHistory);
                }
                Ok(if seq[history.len()].is_one() { 1.0 } else { 0.0 })
            }
        }
    }
}

/// `p(n)` lies in `[delta, 1 - delta]`, tested symmetrically on both label counts.
pub fn frequency_in_band(ones: usize, n: usize, delta: f64) -> bool {
    let nf = n as f64;
    ones as f64 / nf >= delta && (n - ones) as f64 / nf >= delta
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OccupancyMethod {
    Exact,
    MonteCarlo { runs: u64, stderr: f64 },
}

/// `C_n` together with an independently accumulated `1 - C_n`, so tiny
/// complements survive without cancellation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub value: f64,
    pub complement: f64,
    #[serde(flatten)]
    pub method: OccupancyMethod,
}

impl Occupancy {
    pub fn exact(value: f64, complement: f64) -> Self {
        Occupancy {
            value: value.clamp(0.0, 1.0),
            complement: complement.clamp(0.0, 1.0),
            method: OccupancyMethod::Exact,
        }
    }
}

/// Largest `n` for which the Markov occupancy dynamic program is used.
pub const MARKOV_EXACT_MAX_N: usize = 5000;
/// Monte-Carlo runs used when no budget is supplied.
pub const DEFAULT_OCCUPANCY_RUNS: u64 = 10_000;

/// `C_n = P(delta <= p(n) <= 1 - delta)`.
pub fn occupancy_prob(process: &LabelProcess, delta: f64, n: usize, mc_budget: Option<u64>, seed: u64) -> Result<Occupancy> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::invalid("delta", "delta must lie in (0, 1/2]"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "n must be positive"));
    }
    if let Some(seq) = process.deterministic_prefix(n) {
        let ones = seq.iter().filter(|y| y.is_one()).count();
        let inside = frequency_in_band(ones, n, delta);
        return Ok(Occupancy::exact(inside as u8 as f64, (!inside) as u8 as f64));
    }
    match *process {
        LabelProcess::IidBernoulli { p } => Ok(binomial_occupancy(p, delta, n)),
        LabelProcess::TwoStateMarkov { t01, t10, init1 } if n <= MARKOV_EXACT_MAX_N => {
            Ok(markov_occupancy(t01, t10, init1, delta, n))
        }
        _ => Ok(occupancy_prob_mc(process, delta, n, mc_budget.unwrap_or(DEFAULT_OCCUPANCY_RUNS), seed)),
    }
}

fn binomial_occupancy(p: f64, delta: f64, n: usize) -> Occupancy {
    if p == 0.0 || p == 1.0 {
        let ones = if p == 1.0 { n } else { 0 };
        let inside = frequency_in_band(ones, n, delta);
        return Occupancy::exact(inside as u8 as f64, (!inside) as u8 as f64);
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let n64 = n as u64;
    let (mut inside, mut outside) = (0.0, 0.0);
    for k in 0..=n {
        let k64 = k as u64;
        let lpmf = ln_binomial(n64, k64) + k as f64 * lp + (n - k) as f64 * lq;
        let mass = lpmf.exp();
        if frequency_in_band(k, n, delta) {
            inside += mass;
        } else {
            outside += mass;
        }
    }
    Occupancy::exact(inside, outside)
}

fn markov_occupancy(t01: f64, t10: f64, init1: f64, delta: f64, n: usize) -> Occupancy {
    // dist[s][k]: probability of being in state s with k ones so far.
    let mut zero = vec![0.0f64; n + 1];
    let mut one = vec![0.0f64; n + 1];
    zero[0] = 1.0 - init1;
    one[1] = init1;
    let mut next_zero = vec![0.0f64; n + 1];
    let mut next_one = vec![0.0f64; n + 1];
    for step in 1..n {
        next_zero[..=step + 1].fill(0.0);
        next_one[..=step + 1].fill(0.0);
        for k in 0..=step {
            let (z, o) = (zero[k], one[k]);
            if z != 0.0 {
                next_zero[k] += z * (1.0 - t01);
                next_one[k + 1] += z * t01;
            }
            if o != 0.0 {
                next_zero[k] += o * t10;
                next_one[k + 1] += o * (1.0 - t10);
            }
        }
        std::mem::swap(&mut zero, &mut next_zero);
        std::mem::swap(&mut one, &mut next_one);
    }
    let (mut inside, mut outside) = (0.0, 0.0);
    for k in 0..=n {
        let mass = zero[k] + one[k];
        if frequency_in_band(k, n, delta) {
            inside += mass;
        } else {
            outside += mass;
        }
    }
    Occupancy::exact(inside, outside)
}

/// Monte-Carlo estimate of `C_n` from `runs` independent label paths.
pub fn occupancy_prob_mc(process: &LabelProcess, delta: f64, n: usize, runs: u64, seed: u64) -> Occupancy {
    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|r| {
            let seq = process.sample(n, derive_seed(seed, r));
            let ones = seq.iter().filter(|y| y.is_one()).count();
            frequency_in_band(ones, n, delta) as u64
        })
        .sum();
    let value = hits as f64 / runs as f64;
    let stderr = (value * (1.0 - value) / runs as f64).sqrt();
    Occupancy {
        value,
        complement: (runs - hits) as f64 / runs as f64,
        method: OccupancyMethod::MonteCarlo { runs, stderr },
    }
}
