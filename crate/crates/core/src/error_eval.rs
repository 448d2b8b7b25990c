//! Error evaluation: class-conditional errors `err_n^0`, `err_n^1`, the
//! mixed step error `err_n`, and repeated-run distributional estimates.
//!
//! On the line every built-in classifier is piecewise constant, so class
//! errors are computed exactly: atomic classes by evaluating the rule on each
//! atom, continuous classes by measuring the misclassified intervals. In
//! higher dimension errors are Monte-Carlo estimates with a binomial standard
//! error.

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Learner, Predictor};
use crate::data::{generate, ClassConditionalPair, Label, LabelProcess};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, derive_seed2, SimRng};

/// How an error value was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EvalMethod {
    Exact,
    MonteCarlo { draws: u64, stderr: f64 },
}

impl EvalMethod {
    pub fn stderr(&self) -> f64 {
        match self {
            EvalMethod::Exact => 0.0,
            EvalMethod::MonteCarlo { stderr, .. } => *stderr,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "conditioning", rename_all = "snake_case")]
pub enum Conditioning {
    Class { label: Label },
    /// Next label is 1 with probability `q`.
    Mixed { q: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub value: f64,
    #[serde(flatten)]
    pub method: EvalMethod,
    #[serde(flatten)]
    pub conditioning: Conditioning,
}

/// Requested evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ErrorMode {
    Exact,
    MonteCarlo { draws: u64, seed: u64 },
    /// Exact when possible, otherwise Monte Carlo.
    Auto { draws: u64, seed: u64 },
}

pub const DEFAULT_MC_DRAWS: u64 = 10_000;
pub const DEFAULT_RUNS: usize = 200;
pub const DEFAULT_P_GRID: usize = 9;

impl Default for ErrorMode {
    fn default() -> Self {
        ErrorMode::Auto {
            draws: DEFAULT_MC_DRAWS,
            seed: 0,
        }
    }
}

impl ErrorMode {
    fn with_seed(self, seed: u64) -> Self {
        match self {
            ErrorMode::Exact => ErrorMode::Exact,
            ErrorMode::MonteCarlo { draws, .. } => ErrorMode::MonteCarlo { draws, seed },
            ErrorMode::Auto { draws, .. } => ErrorMode::Auto { draws, seed },
        }
    }
}

/// `err_n^y = P_y{x : predict(x) != y}`, computed exactly on the line.
pub fn class_error_exact(predictor: &dyn Predictor, pair: &ClassConditionalPair, y: Label) -> Result<ErrorEstimate> {
    if pair.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            required: 1,
            actual: pair.dim(),
        });
    }
    let value = match pair.atoms(y) {
        Some(atoms) => atoms
            .iter()
            .filter(|a| predictor.predict(&a.point) != y)
            .map(|a| a.prob)
            .sum::<f64>(),
        None => {
            let regions = predictor.decision_regions().ok_or(Error::UnsupportedDimension {
                required: 1,
                actual: predictor.dim(),
            })?;
            pair.class_measure(y, &regions.intervals_with(y.flip()))?
        }
    };
    Ok(ErrorEstimate {
        value: value.clamp(0.0, 1.0),
        method: EvalMethod::Exact,
        conditioning: Conditioning::Class { label: y },
    })
}

/// Fraction of `draws` points from `P_y` that `predictor` mislabels.
pub fn class_error_mc(
    predictor: &dyn Predictor,
    pair: &ClassConditionalPair,
    y: Label,
    draws: u64,
    seed: u64,
) -> Result<ErrorEstimate> {
    if draws == 0 {
        return Err(Error::invalid("draws", "at least one draw is required"));
    }
    let mut rng = SimRng::seed_from_u64(seed);
    let mut buf = Vec::with_capacity(pair.dim());
    let mut wrong = 0u64;
    for _ in 0..draws {
        buf.clear();
        pair.sample_into(y, &mut rng, &mut buf);
        if predictor.predict(&buf) != y {
            wrong += 1;
        }
    }
    let value = wrong as f64 / draws as f64;
    Ok(ErrorEstimate {
        value,
        method: EvalMethod::MonteCarlo {
            draws,
            stderr: (value * (1.0 - value) / draws as f64).sqrt(),
        },
        conditioning: Conditioning::Class { label: y },
    })
}

/// Class error under the requested mode.
pub fn class_error(predictor: &dyn Predictor, pair: &ClassConditionalPair, y: Label, mode: ErrorMode) -> Result<ErrorEstimate> {
    match mode {
        ErrorMode::Exact => class_error_exact(predictor, pair, y),
        ErrorMode::MonteCarlo { draws, seed } => class_error_mc(predictor, pair, y, draws, seed),
        ErrorMode::Auto { draws, seed } => {
            if pair.dim() == 1 && predictor.decision_regions().is_some() {
                class_error_exact(predictor, pair, y)
            } else {
                class_error_mc(predictor, pair, y, draws, seed)
            }
        }
    }
}

/// `q * err^1 + (1 - q) * err^0`.
pub fn mixture_error(predictor: &dyn Predictor, pair: &ClassConditionalPair, q: f64, mode: ErrorMode) -> Result<ErrorEstimate> {
    let (seed0, seed1) = match mode {
        ErrorMode::MonteCarlo { seed, .. } | ErrorMode::Auto { seed, .. } => (derive_seed(seed, 0), derive_seed(seed, 1)),
        ErrorMode::Exact => (0, 0),
    };
    let e0 = class_error(predictor, pair, Label::Zero, mode.with_seed(seed0))?;
    let e1 = class_error(predictor, pair, Label::One, mode.with_seed(seed1))?;
    Ok(mix(q, &e0, &e1))
}

/// Combine class-conditional estimates with next-label probability `q`.
pub fn mix(q: f64, e0: &ErrorEstimate, e1: &ErrorEstimate) -> ErrorEstimate {
    let value = q * e1.value + (1.0 - q) * e0.value;
    let method = match (&e0.method, &e1.method) {
        (EvalMethod::Exact, EvalMethod::Exact) => EvalMethod::Exact,
        (m0, m1) => {
            let draws = match (m0, m1) {
                (EvalMethod::MonteCarlo { draws, .. }, _) | (_, EvalMethod::MonteCarlo { draws, .. }) => *draws,
                _ => 0,
            };
            let var = (q * m1.stderr()).powi(2) + ((1.0 - q) * m0.stderr()).powi(2);
            EvalMethod::MonteCarlo {
                draws,
                stderr: var.sqrt(),
            }
        }
    };
    ErrorEstimate {
        value: value.clamp(0.0, 1.0),
        method,
        conditioning: Conditioning::Mixed { q },
    }
}

/// `err_n` for the next step, given the training label history.
pub fn step_error(
    predictor: &dyn Predictor,
    pair: &ClassConditionalPair,
    process: &LabelProcess,
    history: &[Label],
    mode: ErrorMode,
) -> Result<ErrorEstimate> {
    let q = process.next_label_prob(history)?;
    mixture_error(predictor, pair, q, mode)
}

/// Per-`n` summary over repeated runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub n: usize,
    pub runs: usize,
    pub mean_err: f64,
    pub stderr: f64,
    /// Empirical `P(err_n > eps)`, one entry per configured `eps`.
    pub p_exceed: Vec<f64>,
    /// Per-run error values in run-index order.
    #[serde(skip)]
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub eps: Vec<f64>,
    pub records: Vec<CurveRecord>,
}

impl ErrorCurve {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["n", "runs", "mean_err", "stderr"].iter().map(|s| s.to_string()).collect();
        h.extend(self.eps.iter().map(|e| format!("p_exceed_eps_{e}")));
        h
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.n.to_string(),
                    r.runs.to_string(),
                    r.mean_err.to_string(),
                    r.stderr.to_string(),
                ];
                row.extend(r.p_exceed.iter().map(f64::to_string));
                row
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        crate::harness::csv_string(&self.header(), &self.rows())
    }
}

/// Mean and sample standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Fraction of `values` strictly above `eps`.
pub fn exceedance(values: &[f64], eps: f64) -> f64 {
    values.iter().filter(|&&v| v > eps).count() as f64 / values.len() as f64
}

/// Error of one run: sample of size `n`, fit, evaluate the next step.
pub fn run_once(
    learner: &dyn Learner,
    pair: &ClassConditionalPair,
    process: &LabelProcess,
    n: usize,
    seed: u64,
    mode: ErrorMode,
) -> Result<f64> {
    let sample = generate(process, pair, n, seed);
    let fitted = learner.fit_or_default(&sample)?;
    let est = step_error(fitted.as_ref(), pair, process, sample.labels(), mode.with_seed(derive_seed(seed, 2)))?;
    Ok(est.value)
}

/// Empirical distribution of `err_n` along `n_list`.
///
/// Run `r` at `n_list[i]` uses seed `derive_seed2(master_seed, i, r)`;
/// results are reduced in run order, so the output does not depend on the
/// number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn error_prob_curve(
    learner: &dyn Learner,
    pair: &ClassConditionalPair,
    process: &LabelProcess,
    n_list: &[usize],
    eps_list: &[f64],
    runs: usize,
    master_seed: u64,
    mode: ErrorMode,
) -> Result<ErrorCurve> {
    if runs < 2 {
        return Err(Error::invalid("runs", "at least two runs are required"));
    }
    let mut records = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        if n == 0 {
            return Err(Error::invalid("n_list", "sample sizes must be positive"));
        }
        let errors = (0..runs)
            .into_par_iter()
            .map(|r| run_once(learner, pair, process, n, derive_seed2(master_seed, i as u64, r as u64), mode))
            .collect::<Result<Vec<f64>>>()?;
        let (mean_err, stderr) = mean_stderr(&errors);
        records.push(CurveRecord {
            n,
            runs,
            mean_err,
            stderr,
            p_exceed: eps_list.iter().map(|&e| exceedance(&errors, e)).collect(),
            errors,
        });
    }
    Ok(ErrorCurve {
        eps: eps_list.to_vec(),
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub prob: f64,
    pub stderr: f64,
}

/// Grid approximation of the worst-case exceedance over the mixture parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NablaEstimate {
    pub value: f64,
    pub argmax_p: f64,
    pub points: Vec<GridPoint>,
}

/// `G` evenly spaced mixture parameters on `[delta, 1 - delta]`; a single point sits at `1/2`.
pub fn p_grid(delta: f64, g: usize) -> Vec<f64> {
    if g <= 1 {
        return vec![0.5];
    }
    let span = 1.0 - 2.0 * delta;
    (0..g).map(|i| delta + span * i as f64 / (g - 1) as f64).collect()
}

/// Max over a `p` grid of the empirical `P_p(err_n > eps)` under i.i.d. labels.
///
/// The grid maximum lower-bounds the supremum over the continuum.
#[allow(clippy::too_many_arguments)]
pub fn nabla_estimate(
    learner: &dyn Learner,
    pair: &ClassConditionalPair,
    delta: f64,
    n: usize,
    eps: f64,
    grid: usize,
    runs: usize,
    seed: u64,
    mode: ErrorMode,
) -> Result<NablaEstimate> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::invalid("delta", "delta must lie in (0, 1/2]"));
    }
    let mut points = Vec::new();
    for (i, p) in p_grid(delta, grid).into_iter().enumerate() {
        let process = LabelProcess::IidBernoulli { p };
        let curve = error_prob_curve(learner, pair, &process, &[n], &[eps], runs, derive_seed(seed, i as u64), mode)?;
        let prob = curve.records[0].p_exceed[0];
        points.push(GridPoint {
            p,
            prob,
            stderr: (prob * (1.0 - prob) / runs as f64).sqrt(),
        });
    }
    let best = points
        .iter()
        .fold(None::<&GridPoint>, |acc, pt| match acc {
            Some(a) if a.prob >= pt.prob => Some(a),
            _ => Some(pt),
        })
        .expect("grid is nonempty");
    Ok(NablaEstimate {
        value: best.prob,
        argmax_p: best.p,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ClassifierSpec, ConstantPredictor, Hypothesis};
    use crate::data::{AxisBox, LabeledSample, WeightedPoint};

    fn boxes() -> ClassConditionalPair {
        ClassConditionalPair::intervals(&[(0.0, 0.4)], &[(0.6, 1.0)]).unwrap()
    }

    fn eta_rule() -> Hypothesis {
        Hypothesis::Union {
            boxes: vec![AxisBox::interval(0.5, 1.0)],
        }
    }

    #[test]
    fn perfect_and_constant_rules() {
        let pair = boxes();
        for y in [Label::Zero, Label::One] {
            assert_eq!(class_error_exact(&eta_rule(), &pair, y).unwrap().value, 0.0);
            let mc = class_error_mc(&eta_rule(), &pair, y, 1000, 3).unwrap();
            assert_eq!(mc.value, 0.0);
            assert_eq!(mc.method.stderr(), 0.0);
        }
        let zero = ConstantPredictor { label: Label::Zero, dim: 1 };
        assert_eq!(class_error_exact(&zero, &pair, Label::Zero).unwrap().value, 0.0);
        assert_eq!(class_error_exact(&zero, &pair, Label::One).unwrap().value, 1.0);
        let one = ConstantPredictor { label: Label::One, dim: 1 };
        let mc = class_error_mc(&one, &pair, Label::Zero, 10_000, 1).unwrap();
        assert_eq!(mc.value, 1.0);
        assert_eq!(mc.method.stderr(), 0.0);
    }

    #[test]
    fn nearest_neighbour_separates_supports() {
        let s = LabeledSample::from_1d(&[(0.1, Label::Zero), (0.9, Label::One)]);
        let f = ClassifierSpec::NearestNeighbour.fit(&s).unwrap();
        let pair = boxes();
        for y in [Label::Zero, Label::One] {
            assert_eq!(class_error_exact(&f, &pair, y).unwrap().value, 0.0);
            assert_eq!(class_error_mc(&f, &pair, y, 100_000, 9).unwrap().value, 0.0);
        }
    }

    #[test]
    fn mixture_arithmetic() {
        let e0 = ErrorEstimate {
            value: 0.2,
            method: EvalMethod::Exact,
            conditioning: Conditioning::Class { label: Label::Zero },
        };
        let e1 = ErrorEstimate {
            value: 0.4,
            method: EvalMethod::Exact,
            conditioning: Conditioning::Class { label: Label::One },
        };
        assert!((mix(0.5, &e0, &e1).value - 0.3).abs() < 1e-15);
        assert_eq!(mix(1.0, &e0, &e1).value, 0.4);
    }

    #[test]
    fn step_error_uses_next_label_probability() {
        let pair = boxes();
        let zero = ConstantPredictor { label: Label::Zero, dim: 1 };
        let always_one = LabelProcess::IidBernoulli { p: 1.0 };
        let e = step_error(&zero, &pair, &always_one, &[Label::One], ErrorMode::Exact).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(
            step_error(&zero, &pair, &always_one, &[Label::Zero], ErrorMode::Exact),
            Err(Error::ImpossibleHistory)
        );
    }

    #[test]
    fn atomic_classes_evaluated_pointwise() {
        let pair = ClassConditionalPair::DiscreteAlphabet {
            dim: 1,
            support0: vec![
                WeightedPoint { point: vec![0.0], prob: 0.25 },
                WeightedPoint { point: vec![0.5], prob: 0.75 },
            ],
            support1: vec![WeightedPoint { point: vec![1.0], prob: 1.0 }],
        };
        let h = Hypothesis::Union {
            boxes: vec![AxisBox::interval(0.5, 1.0)],
        };
        assert_eq!(class_error_exact(&h, &pair, Label::Zero).unwrap().value, 0.75);
        assert_eq!(class_error_exact(&h, &pair, Label::One).unwrap().value, 0.0);
    }

    #[test]
    fn exact_needs_line() {
        let pair = ClassConditionalPair::DisjointBoxes {
            dim: 2,
            boxes0: vec![AxisBox::new(vec![0.0, 0.0], vec![0.4, 1.0])],
            boxes1: vec![AxisBox::new(vec![0.6, 0.0], vec![1.0, 1.0])],
        };
        let zero = ConstantPredictor { label: Label::Zero, dim: 2 };
        assert!(matches!(
            class_error_exact(&zero, &pair, Label::One),
            Err(Error::UnsupportedDimension { .. })
        ));
        let e = class_error(&zero, &pair, Label::One, ErrorMode::default()).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(matches!(e.method, EvalMethod::MonteCarlo { .. }));
    }

    #[test]
    fn curve_is_reproducible_and_realizable_limit_is_zero() {
        let pair = ClassConditionalPair::intervals(&[(0.0, 0.25), (0.75, 1.0)], &[(0.3, 0.7)]).unwrap();
        let proc = LabelProcess::IidBernoulli { p: 0.5 };
        let run = || {
            error_prob_curve(
                &ClassifierSpec::ErmInterval,
                &pair,
                &proc,
                &[20_000],
                &[0.01, 0.1],
                8,
                5,
                ErrorMode::Exact,
            )
            .unwrap()
        };
        let a = run();
        assert_eq!(a, run());
        assert_eq!(a.records[0].p_exceed, vec![0.0, 0.0]);
        assert_eq!(a.header()[4], "p_exceed_eps_0.01");
    }

    #[test]
    fn degenerate_grid() {
        assert_eq!(p_grid(0.5, 1), vec![0.5]);
        assert_eq!(p_grid(0.25, 3), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn nabla_of_perfect_class_is_zero() {
        let pair = boxes();
        let spec = ClassifierSpec::ErmFinite {
            hypotheses: vec![eta_rule()],
        };
        let est = nabla_estimate(&spec, &pair, 0.2, 50, 0.01, 3, 10, 1, ErrorMode::Exact).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.points.len(), 3);
    }

    #[test]
    fn single_point_grid_matches_plain_curve() {
        let pair = boxes();
        let spec = ClassifierSpec::NearestNeighbour;
        let est = nabla_estimate(&spec, &pair, 0.5, 3, 0.05, 1, 40, 11, ErrorMode::Exact).unwrap();
        let curve = error_prob_curve(
            &spec,
            &pair,
            &LabelProcess::IidBernoulli { p: 0.5 },
            &[3],
            &[0.05],
            40,
            derive_seed(11, 0),
            ErrorMode::Exact,
        )
        .unwrap();
        assert_eq!(est.value, curve.records[0].p_exceed[0]);
    }
}
