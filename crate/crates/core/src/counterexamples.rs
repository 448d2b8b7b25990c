//! Two constructions showing that the frequency and tolerance conditions
//! cannot be dropped.
//!
//! The first is a predictor on `X = Y = {0, 1}` that is nearly always right
//! on i.i.d. data yet always wrong on the alternating label sequence. The
//! second floods 1-NN with atoms of class 0 between rare class-1 examples,
//! so its class-1 error never shrinks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::binomial;
use crate::classifiers::{ClassifierSpec, DecisionRegions, Learner, Predictor};
use crate::data::{generate, BlockRule, ClassConditionalPair, Label, LabelProcess, LabeledSample, WeightedPoint};
use crate::error::{Error, Result};
use crate::error_eval::{class_error_exact, error_prob_curve, step_error, CurveRecord, ErrorMode};
use crate::rng::derive_seed;

/// When the two-point predictor answers `1 - x` instead of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Remark1Variant {
    /// The number of zeros among the training labels is within 1 of `n/2`.
    CountCondition,
    /// The training labels alternate.
    AlternatingHistory,
}

impl Remark1Variant {
    pub fn name(self) -> &'static str {
        match self {
            Remark1Variant::CountCondition => "count-condition",
            Remark1Variant::AlternatingHistory => "alternating-history",
        }
    }

    fn flips(self, labels: &[Label]) -> bool {
        match self {
            Remark1Variant::CountCondition => {
                let n = labels.len() as i64;
                let zeros = labels.iter().filter(|y| !y.is_one()).count() as i64;
                (2 * zeros - n).abs() <= 2
            }
            Remark1Variant::AlternatingHistory => labels.windows(2).all(|w| w[0] != w[1]),
        }
    }
}

/// Learner returning `x` or `1 - x` depending on the training labels only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Remark1Learner {
    pub variant: Remark1Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Remark1Predictor {
    pub flip: bool,
}

impl Predictor for Remark1Predictor {
    fn dim(&self) -> usize {
        1
    }

    fn predict(&self, x: &[f64]) -> Label {
        let y = Label::from_bool(x[0] >= 0.5);
        if self.flip {
            y.flip()
        } else {
            y
        }
    }

    fn decision_regions(&self) -> Option<DecisionRegions> {
        let below = Label::from_bool(self.flip);
        Some(DecisionRegions::from_steps(below, [(0.5, below.flip())]))
    }
}

impl Learner for Remark1Learner {
    fn fit_predictor(&self, sample: &LabeledSample) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(Remark1Predictor {
            flip: self.variant.flips(sample.labels()),
        }))
    }

    fn is_symmetric(&self) -> bool {
        self.variant == Remark1Variant::CountCondition
    }
}

/// `P_0 = delta_0`, `P_1 = delta_1`.
pub fn two_point_pair() -> ClassConditionalPair {
    let atom = |x: f64| vec![WeightedPoint { point: vec![x], prob: 1.0 }];
    ClassConditionalPair::DiscreteAlphabet {
        dim: 1,
        support0: atom(0.0),
        support1: atom(1.0),
    }
}

/// Expected `err_n` of the two-point predictor on the alternating chain with
/// uniformly random first label, computed exactly over both label paths.
pub fn remark1_conditional(n: usize, variant: Remark1Variant) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", "the construction needs n >= 2"));
    }
    let process = LabelProcess::TwoStateMarkov {
        t01: 1.0,
        t10: 1.0,
        init1: 0.5,
    };
    let pair = two_point_pair();
    let learner = Remark1Learner { variant };
    let mut total = 0.0;
    for first in [Label::Zero, Label::One] {
        let labels: Vec<Label> = (0..n)
            .map(|i| if i % 2 == 0 { first } else { first.flip() })
            .collect();
        let sample = LabeledSample::from_1d(&labels.iter().map(|&y| (y.as_u8() as f64, y)).collect::<Vec<_>>());
        let fitted = learner.fit_predictor(&sample)?;
        total += 0.5 * step_error(fitted.as_ref(), &pair, &process, &labels, ErrorMode::Exact)?.value;
    }
    Ok(total)
}

/// Exact `P_p(err_n > 0)` for the two-point predictor under i.i.d. labels
/// with `P(Y = 1) = p`; `p` is taken at its exact binary value.
pub fn remark1_iid(n: usize, p: f64, variant: Remark1Variant) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::invalid("n", "the construction needs n >= 2"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "p must lie in (0, 1)"));
    }
    let p = BigRational::from_float(p).expect("finite");
    let q = BigRational::one() - &p;
    let pow = |b: &BigRational, e: usize| -> BigRational { num_traits::pow(b.clone(), e) };
    Ok(match variant {
        Remark1Variant::CountCondition => {
            let mut acc = BigRational::zero();
            for z in 0..=n {
                if (2 * z as i64 - n as i64).abs() <= 2 {
                    let c = BigInt::from(binomial(n as u64, z as u64));
                    acc += BigRational::from_integer(c) * pow(&p, n - z) * pow(&q, z);
                }
            }
            acc
        }
        Remark1Variant::AlternatingHistory => {
            let (hi, lo) = (n.div_ceil(2), n / 2);
            pow(&p, hi) * pow(&q, lo) + pow(&p, lo) * pow(&q, hi)
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark1Row {
    pub n: usize,
    pub variant: Remark1Variant,
    pub p: f64,
    pub conditional_error: f64,
    pub iid_error_prob: f64,
    /// `iid_error_prob` as an exact fraction.
    pub iid_exact: String,
    /// `2^(1-n)`, the ceiling claimed for the i.i.d. error probability.
    pub claimed_ceiling: f64,
    pub within_ceiling: bool,
}

/// Both variants at every `n` and `p`.
pub fn remark1_table(n_list: &[usize], p_list: &[f64]) -> Result<Vec<Remark1Row>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let ceiling = BigRational::new(BigInt::one(), BigInt::one() << (n - 1));
        for variant in [Remark1Variant::CountCondition, Remark1Variant::AlternatingHistory] {
            let conditional_error = remark1_conditional(n, variant)?;
            for &p in p_list {
                let exact = remark1_iid(n, p, variant)?;
                rows.push(Remark1Row {
                    n,
                    variant,
                    p,
                    conditional_error,
                    iid_error_prob: exact.to_f64().unwrap_or(0.0),
                    iid_exact: exact.to_string(),
                    claimed_ceiling: ceiling.to_f64().unwrap_or(0.0),
                    within_ceiling: exact <= ceiling,
                });
            }
        }
    }
    Ok(rows)
}

pub fn remark1_header() -> Vec<String> {
    [
        "n",
        "variant",
        "p",
        "conditional_error",
        "iid_error_prob",
        "iid_exact",
        "claimed_ceiling",
        "within_ceiling",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn remark1_rows(rows: &[Remark1Row]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.variant.name().to_string(),
                r.p.to_string(),
                r.conditional_error.to_string(),
                r.iid_error_prob.to_string(),
                r.iid_exact.clone(),
                r.claimed_ceiling.to_string(),
                r.within_ceiling.to_string(),
            ]
        })
        .collect()
}

pub fn remark1_csv(rows: &[Remark1Row]) -> String {
    crate::harness::csv_string(&remark1_header(), &remark1_rows(rows))
}

/// Class-1 error of 1-NN at one step that emits label 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Step {
    /// Training examples seen before this step.
    pub n: usize,
    pub mean_err1: f64,
    pub min_err1: f64,
    pub max_err1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Curve {
    pub atoms: u32,
    pub horizon: usize,
    pub runs: usize,
    pub steps: Vec<Remark2Step>,
}

impl Remark2Curve {
    /// Smallest mean class-1 error over steps with more than `n0` examples.
    pub fn min_mean_beyond(&self, n0: usize) -> Option<f64> {
        self.steps
            .iter()
            .filter(|s| s.n > n0)
            .map(|s| s.mean_err1)
            .reduce(f64::min)
    }

    pub fn header() -> Vec<String> {
        ["n", "runs", "mean_err1", "min_err1", "max_err1"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.steps
            .iter()
            .map(|s| {
                vec![
                    s.n.to_string(),
                    self.runs.to_string(),
                    s.mean_err1.to_string(),
                    s.min_err1.to_string(),
                    s.max_err1.to_string(),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        crate::harness::csv_string(&Self::header(), &self.rows())
    }
}

/// 1-NN under the block-schedule labels against atoms-versus-continuum
/// classes: exact class-1 error at every step whose label is 1, before that
/// example is added. Run `r` uses seed `derive_seed(seed, r)`.
pub fn remark2_simulate(atoms: u32, schedule: &BlockRule, horizon: usize, runs: usize, seed: u64) -> Result<Remark2Curve> {
    if atoms < 2 {
        return Err(Error::invalid("atoms", "at least two atoms are required"));
    }
    if !schedule.is_nondecreasing() {
        return Err(Error::invalid("schedule", "block lengths must be nondecreasing"));
    }
    if runs == 0 {
        return Err(Error::invalid("runs", "at least one run is required"));
    }
    let process = LabelProcess::BlockSchedule {
        schedule: schedule.clone(),
    };
    process.validate()?;
    let pair = ClassConditionalPair::AtomsVsContinuum { atoms };
    let labels = process.sample(horizon, 0);
    let one_steps: Vec<usize> = (0..horizon).filter(|&t| labels[t].is_one()).collect();
    let nn = ClassifierSpec::NearestNeighbour;
    let per_run = (0..runs)
        .into_par_iter()
        .map(|r| {
            let sample = generate(&process, &pair, horizon, derive_seed(seed, r as u64));
            one_steps
                .iter()
                .map(|&t| {
                    let fitted = nn.fit_or_default(&sample.prefix(t))?;
                    Ok(class_error_exact(fitted.as_ref(), &pair, Label::One)?.value)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = one_steps
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let vals: Vec<f64> = per_run.iter().map(|v| v[k]).collect();
            Remark2Step {
                n: t,
                mean_err1: vals.iter().sum::<f64>() / runs as f64,
                min_err1: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max_err1: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Ok(Remark2Curve {
        atoms,
        horizon,
        runs,
        steps,
    })
}

/// The same pair and 1-NN under fair i.i.d. labels: mixture error at `n`.
pub fn remark2_control(atoms: u32, n: usize, runs: usize, seed: u64) -> Result<CurveRecord> {
    let pair = ClassConditionalPair::AtomsVsContinuum { atoms };
    let curve = error_prob_curve(
        &ClassifierSpec::NearestNeighbour,
        &pair,
        &LabelProcess::IidBernoulli { p: 0.5 },
        &[n],
        &[],
        runs,
        seed,
        ErrorMode::Exact,
    )?;
    Ok(curve.records.into_iter().next().expect("one sample size"))
}
