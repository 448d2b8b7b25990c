//! Tolerance to data: how far the error of a learner can move when up to
//! `kappa` training examples are deleted (optionally reordering the rest) or
//! replaced by points consistent with the labelling function.
//!
//! Errors are measured under the mixture `p P_1 + (1 - p) P_0`. Exact search
//! enumerates every admissible perturbation; stochastic search returns a
//! lower bound on the same maximum.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::kappa as default_kappa;
use crate::classifiers::Learner;
use crate::data::{generate, ClassConditionalPair, Label, LabelProcess, LabeledSample};
use crate::error::{Error, Result};
use crate::error_eval::{mixture_error, p_grid, ErrorMode};
use crate::rng::{derive_seed, derive_seed2, SimRng};

pub const EXACT_MAX_N: usize = 16;
pub const EXACT_MAX_KAPPA: usize = 4;
/// Exact search over reorderings is only attempted up to this sample size.
pub const EXACT_ORDERED_MAX_N: usize = 8;
/// Cap on the number of perturbations exact replacement search may visit.
pub const EXACT_MAX_REPLACEMENTS: u128 = 2_000_000;
pub const DEFAULT_FRESH_DRAWS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    Deletion,
    Replacement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "search", rename_all = "snake_case")]
pub enum Search {
    Exact,
    /// `budget` random perturbation paths, a greedy path of at most
    /// `greedy_rounds` steps, and full enumeration of every perturbation
    /// size whose count fits in the budget.
    Stochastic { budget: u64, greedy_rounds: u32, seed: u64 },
}

/// Where replacement points come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub fresh_draws: usize,
    pub seed: u64,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            fresh_draws: DEFAULT_FRESH_DRAWS,
            seed: 0,
        }
    }
}

/// Everything needed to turn a sample into an error value.
#[derive(Clone, Copy)]
pub struct ToleranceContext<'a> {
    pub learner: &'a dyn Learner,
    pub pair: &'a ClassConditionalPair,
    /// Mixture parameter of the error measure.
    pub p: f64,
    pub eval: ErrorMode,
    pub pool: PoolConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub index: usize,
    pub point: Vec<f64>,
    pub label: Label,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub deleted: Vec<usize>,
    pub replaced: Vec<Replacement>,
    /// Training order of the kept examples when it matters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub value: f64,
    pub mode: ToleranceMode,
    #[serde(flatten)]
    pub search: Search,
    pub kappa: usize,
    pub n: usize,
    pub base_error: f64,
    pub evaluations: u64,
    pub witness: Witness,
}

impl ToleranceReport {
    pub fn csv_header() -> Vec<String> {
        ["n", "kappa", "mode", "search", "budget", "value", "base_error", "evaluations", "witness_size"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_row(&self) -> Vec<String> {
        let (search, budget) = match self.search {
            Search::Exact => ("exact", String::new()),
            Search::Stochastic { budget, .. } => ("stochastic", budget.to_string()),
        };
        vec![
            self.n.to_string(),
            self.kappa.to_string(),
            mode_name(self.mode).to_string(),
            search.to_string(),
            budget,
            self.value.to_string(),
            self.base_error.to_string(),
            self.evaluations.to_string(),
            (self.witness.deleted.len() + self.witness.replaced.len()).to_string(),
        ]
    }
}

fn mode_name(mode: ToleranceMode) -> &'static str {
    match mode {
        ToleranceMode::Deletion => "deletion",
        ToleranceMode::Replacement => "replacement",
    }
}

struct Evaluator<'a> {
    ctx: ToleranceContext<'a>,
    base: f64,
    evaluations: u64,
    best: f64,
    witness: Witness,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: ToleranceContext<'a>, sample: &LabeledSample) -> Result<Self> {
        let base = Self::error_of(&ctx, sample)?;
        Ok(Evaluator {
            ctx,
            base,
            evaluations: 1,
            best: 0.0,
            witness: Witness::default(),
        })
    }

    fn error_of(ctx: &ToleranceContext<'_>, sample: &LabeledSample) -> Result<f64> {
        let fitted = ctx.learner.fit_or_default(sample)?;
        Ok(mixture_error(fitted.as_ref(), ctx.pair, ctx.p, ctx.eval)?.value)
    }

    /// Deviation of `perturbed`; recorded if it beats the current best.
    fn offer(&mut self, perturbed: &LabeledSample, witness: impl FnOnce() -> Witness) -> Result<f64> {
        let dev = (self.base - Self::error_of(&self.ctx, perturbed)?).abs();
        self.evaluations += 1;
        if dev > self.best {
            self.best = dev;
            self.witness = witness();
        }
        Ok(dev)
    }
}

/// Lexicographic `k`-subsets of `0..n`.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Nondecreasing length-`k` sequences over `0..m`.
fn for_each_multiset(m: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if m == 0 {
        return if k == 0 { f(&[]) } else { Ok(()) };
    }
    let mut idx = vec![0usize; k];
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] != m - 1) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[i];
        }
    }
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul(n - i) / (i + 1);
    }
    c
}

/// Perturbations of exactly `j` examples.
fn level_count(mode: ToleranceMode, n: usize, pool: usize, j: usize) -> u128 {
    let subsets = binom(n as u128, j as u128);
    match mode {
        ToleranceMode::Deletion => subsets,
        ToleranceMode::Replacement => subsets.saturating_mul(binom((pool + j) as u128 - 1, j as u128)),
    }
}

/// Candidate replacement points, each carrying its true label.
pub fn replacement_pool(pair: &ClassConditionalPair, sample: &LabeledSample, config: PoolConfig) -> Vec<(Vec<f64>, Label)> {
    let mut pool: Vec<(Vec<f64>, Label)> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut push = |x: Vec<f64>, y: Label| {
        if seen.insert(x.iter().map(|v| (v + 0.0).to_bits()).collect()) {
            pool.push((x, y));
        }
    };
    for y in [Label::Zero, Label::One] {
        for x in pair.support_extremes(y) {
            push(x, y);
        }
    }
    for (x, y) in sample.iter() {
        push(x.to_vec(), y);
    }
    let mut rng = SimRng::seed_from_u64(config.seed);
    let mut buf = Vec::new();
    for y in [Label::Zero, Label::One] {
        for _ in 0..config.fresh_draws {
            buf.clear();
            pair.sample_into(y, &mut rng, &mut buf);
            push(buf.clone(), y);
        }
    }
    pool
}

fn with_replacements(sample: &LabeledSample, indices: &[usize], choices: &[usize], pool: &[(Vec<f64>, Label)]) -> LabeledSample {
    let mut s = sample.clone();
    for (&i, &c) in indices.iter().zip(choices) {
        s.replace(i, &pool[c].0, pool[c].1);
    }
    s
}

fn replacement_witness(indices: &[usize], choices: &[usize], pool: &[(Vec<f64>, Label)]) -> Witness {
    Witness {
        replaced: indices
            .iter()
            .zip(choices)
            .map(|(&index, &c)| Replacement {
                index,
                point: pool[c].0.clone(),
                label: pool[c].1,
            })
            .collect(),
        ..Default::default()
    }
}

/// Maximal error deviation over perturbations of at most `kappa` examples.
pub fn delta_pointwise(
    ctx: ToleranceContext<'_>,
    sample: &LabeledSample,
    kappa: usize,
    mode: ToleranceMode,
    search: Search,
) -> Result<ToleranceReport> {
    let n = sample.len();
    if kappa > n {
        return Err(Error::invalid("kappa", format!("kappa = {kappa} exceeds the sample size {n}")));
    }
    let pool = match mode {
        ToleranceMode::Replacement => replacement_pool(ctx.pair, sample, ctx.pool),
        ToleranceMode::Deletion => Vec::new(),
    };
    let symmetric = ctx.learner.is_symmetric();
    if search == Search::Exact {
        if n > EXACT_MAX_N || kappa > EXACT_MAX_KAPPA {
            return Err(Error::EnumerationTooLarge(format!(
                "exact search needs n <= {EXACT_MAX_N} and kappa <= {EXACT_MAX_KAPPA}, got n = {n}, kappa = {kappa}"
            )));
        }
        if !symmetric && (mode == ToleranceMode::Replacement || n > EXACT_ORDERED_MAX_N) {
            return Err(Error::EnumerationTooLarge(format!(
                "exact search over training orders needs deletion mode and n <= {EXACT_ORDERED_MAX_N}"
            )));
        }
        let total: u128 = (1..=kappa).map(|j| level_count(mode, n, pool.len(), j)).sum();
        if mode == ToleranceMode::Replacement && total > EXACT_MAX_REPLACEMENTS {
            return Err(Error::EnumerationTooLarge(format!(
                "{total} replacement perturbations exceed the exact limit {EXACT_MAX_REPLACEMENTS}"
            )));
        }
    }
    let mut ev = Evaluator::new(ctx, sample)?;
    // reordering alone is a perturbation for order-dependent learners
    if kappa > 0 || !symmetric {
        match search {
            Search::Exact if !symmetric => ordered_deletions(&mut ev, sample, kappa)?,
            Search::Exact => {
                for j in 1..=kappa {
                    enumerate_level(&mut ev, sample, mode, &pool, j)?;
                }
            }
            Search::Stochastic {
                budget,
                greedy_rounds,
                seed,
            } => {
                greedy(&mut ev, sample, mode, &pool, kappa.min(greedy_rounds as usize))?;
                for c in 0..budget {
                    random_path(&mut ev, sample, mode, &pool, kappa, symmetric, derive_seed(seed, c))?;
                }
                for j in 1..=kappa {
                    if level_count(mode, n, pool.len(), j) <= budget as u128 {
                        enumerate_level(&mut ev, sample, mode, &pool, j)?;
                    }
                }
            }
        }
    }
    Ok(ToleranceReport {
        value: ev.best,
        mode,
        search,
        kappa,
        n,
        base_error: ev.base,
        evaluations: ev.evaluations,
        witness: ev.witness,
    })
}

fn enumerate_level(ev: &mut Evaluator<'_>, sample: &LabeledSample, mode: ToleranceMode, pool: &[(Vec<f64>, Label)], j: usize) -> Result<()> {
    for_each_combination(sample.len(), j, |subset| match mode {
        ToleranceMode::Deletion => ev
            .offer(&sample.without(subset), || Witness {
                deleted: subset.to_vec(),
                ..Default::default()
            })
            .map(drop),
        ToleranceMode::Replacement => for_each_multiset(pool.len(), j, |choices| {
            ev.offer(&with_replacements(sample, subset, choices, pool), || {
                replacement_witness(subset, choices, pool)
            })
            .map(drop)
        }),
    })
}

/// Every ordered selection of `n - j` examples, `j <= kappa`.
fn ordered_deletions(ev: &mut Evaluator<'_>, sample: &LabeledSample, kappa: usize) -> Result<()> {
    let n = sample.len();
    fn rec(
        ev: &mut Evaluator<'_>,
        sample: &LabeledSample,
        chosen: &mut Vec<usize>,
        used: &mut [bool],
        min_len: usize,
    ) -> Result<()> {
        let n = sample.len();
        if chosen.len() >= min_len {
            let kept = chosen.clone();
            ev.offer(&sample.select(&kept), || Witness {
                deleted: (0..n).filter(|i| !kept.contains(i)).collect(),
                replaced: Vec::new(),
                order: Some(kept.clone()),
            })?;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                chosen.push(i);
                rec(ev, sample, chosen, used, min_len)?;
                chosen.pop();
                used[i] = false;
            }
        }
        Ok(())
    }
    rec(ev, sample, &mut Vec::with_capacity(n), &mut vec![false; n], n - kappa)
}

fn greedy(ev: &mut Evaluator<'_>, sample: &LabeledSample, mode: ToleranceMode, pool: &[(Vec<f64>, Label)], steps: usize) -> Result<()> {
    let n = sample.len();
    let mut touched: Vec<usize> = Vec::new();
    let mut choices: Vec<usize> = Vec::new();
    for _ in 0..steps {
        let mut step_best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|i| !touched.contains(i)) {
            let mut idx = touched.clone();
            idx.push(i);
            let options = if mode == ToleranceMode::Replacement { pool.len() } else { 1 };
            for c in 0..options {
                let dev = match mode {
                    ToleranceMode::Deletion => ev.offer(&sample.without(&sorted(&idx)), || Witness {
                        deleted: sorted(&idx),
                        ..Default::default()
                    })?,
                    ToleranceMode::Replacement => {
                        let mut ch = choices.clone();
                        ch.push(c);
                        ev.offer(&with_replacements(sample, &idx, &ch, pool), || replacement_witness(&idx, &ch, pool))?
                    }
                };
                if step_best.is_none_or(|(b, _, _)| dev > b) {
                    step_best = Some((dev, i, c));
                }
            }
        }
        let Some((_, i, c)) = step_best else { break };
        touched.push(i);
        choices.push(c);
    }
    Ok(())
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// One random ordering of the examples; each of its prefixes of length
/// `1..=kappa` is perturbed in turn.
fn random_path(
    ev: &mut Evaluator<'_>,
    sample: &LabeledSample,
    mode: ToleranceMode,
    pool: &[(Vec<f64>, Label)],
    kappa: usize,
    symmetric: bool,
    seed: u64,
) -> Result<()> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..sample.len()).collect();
    perm.shuffle(&mut rng);
    let mut choices = Vec::with_capacity(kappa);
    if !symmetric && mode == ToleranceMode::Deletion {
        ev.offer(&sample.select(&perm), || Witness {
            order: Some(perm.clone()),
            ..Default::default()
        })?;
    }
    for j in 1..=kappa {
        match mode {
            ToleranceMode::Deletion if symmetric => {
                let deleted = sorted(&perm[..j]);
                ev.offer(&sample.without(&deleted), || Witness {
                    deleted: deleted.clone(),
                    ..Default::default()
                })?;
            }
            ToleranceMode::Deletion => {
                let kept = &perm[j..];
                ev.offer(&sample.select(kept), || Witness {
                    deleted: sorted(&perm[..j]),
                    replaced: Vec::new(),
                    order: Some(kept.to_vec()),
                })?;
            }
            ToleranceMode::Replacement => {
                if pool.is_empty() {
                    break;
                }
                choices.push(rng.random_range(0..pool.len()));
                let idx = &perm[..j];
                let s = with_replacements(sample, idx, &choices, pool);
                let s = if symmetric {
                    s
                } else {
                    let mut order = perm.clone();
                    order.shuffle(&mut rng);
                    s.select(&order)
                };
                ev.offer(&s, || replacement_witness(idx, &choices, pool))?;
            }
        }
    }
    Ok(())
}

/// Empirical exceedance `P(Delta > eps)` over i.i.d. samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceDist {
    pub p: f64,
    pub n: usize,
    pub kappa: usize,
    pub eps: f64,
    pub runs: usize,
    pub value: f64,
    pub stderr: f64,
    /// Stochastic search under-reports each pointwise maximum, so `value`
    /// is then a lower bound.
    pub lower_bound: bool,
    pub mean_tolerance: f64,
    pub max_tolerance: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl ToleranceDist {
    pub fn csv_header() -> Vec<String> {
        ["p", "n", "kappa", "eps", "runs", "p_exceed", "stderr", "lower_bound", "mean_tolerance", "max_tolerance"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.p.to_string(),
            self.n.to_string(),
            self.kappa.to_string(),
            self.eps.to_string(),
            self.runs.to_string(),
            self.value.to_string(),
            self.stderr.to_string(),
            self.lower_bound.to_string(),
            self.mean_tolerance.to_string(),
            self.max_tolerance.to_string(),
        ]
    }
}

/// Settings shared by the distributional tolerance estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    pub n: usize,
    pub eps: f64,
    pub mode: ToleranceMode,
    pub runs: usize,
    pub search: Search,
    /// Defaults to `floor(sqrt(n ln n))`.
    pub kappa: Option<usize>,
    pub fresh_draws: usize,
    pub eval: ErrorMode,
}

/// Run `r` draws its sample from `derive_seed2(seed, r, 0)`, and its search
/// and candidate pool from further derived streams.
pub fn delta_dist(learner: &dyn Learner, pair: &ClassConditionalPair, p: f64, cfg: &DistConfig, seed: u64) -> Result<ToleranceDist> {
    if cfg.runs < 2 {
        return Err(Error::invalid("runs", "at least two runs are required"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "mixture parameter must lie in (0, 1)"));
    }
    let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(cfg.n as u64) as usize);
    let process = LabelProcess::IidBernoulli { p };
    let values = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let sample = generate(&process, pair, cfg.n, derive_seed2(seed, r, 0));
            let search = match cfg.search {
                Search::Exact => Search::Exact,
                Search::Stochastic { budget, greedy_rounds, .. } => Search::Stochastic {
                    budget,
                    greedy_rounds,
                    seed: derive_seed2(seed, r, 1),
                },
            };
            let ctx = ToleranceContext {
                learner,
                pair,
                p,
                eval: match cfg.eval {
                    ErrorMode::Exact => ErrorMode::Exact,
                    ErrorMode::MonteCarlo { draws, .. } => ErrorMode::MonteCarlo {
                        draws,
                        seed: derive_seed2(seed, r, 3),
                    },
                    ErrorMode::Auto { draws, .. } => ErrorMode::Auto {
                        draws,
                        seed: derive_seed2(seed, r, 3),
                    },
                },
                pool: PoolConfig {
                    fresh_draws: cfg.fresh_draws,
                    seed: derive_seed2(seed, r, 2),
                },
            };
            delta_pointwise(ctx, &sample, kappa, cfg.mode, search).map(|rep| rep.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let runs = values.len() as f64;
    let frac = values.iter().filter(|&&v| v > cfg.eps).count() as f64 / runs;
    Ok(ToleranceDist {
        p,
        n: cfg.n,
        kappa,
        eps: cfg.eps,
        runs: cfg.runs,
        value: frac,
        stderr: (frac * (1.0 - frac) / runs).sqrt(),
        lower_bound: matches!(cfg.search, Search::Stochastic { .. }),
        mean_tolerance: values.iter().sum::<f64>() / runs,
        max_tolerance: values.iter().copied().fold(0.0, f64::max),
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSup {
    pub value: f64,
    pub argmax_p: f64,
    pub points: Vec<ToleranceDist>,
}

/// Grid maximum of [`delta_dist`] over `p` in `[delta, 1 - delta]`.
pub fn delta_sup(
    learner: &dyn Learner,
    pair: &ClassConditionalPair,
    delta: f64,
    grid: usize,
    cfg: &DistConfig,
    seed: u64,
) -> Result<ToleranceSup> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::invalid("delta", "delta must lie in (0, 1/2]"));
    }
    let points = p_grid(delta, grid)
        .into_iter()
        .enumerate()
        .map(|(i, p)| delta_dist(learner, pair, p, cfg, derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, pt) in points.iter().enumerate() {
        if pt.value > points[best].value {
            best = i;
        }
    }
    Ok(ToleranceSup {
        value: points[best].value,
        argmax_p: points[best].p,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{ClassifierSpec, Hypothesis, Predictor};
    use crate::data::AxisBox;

    fn pair() -> ClassConditionalPair {
        ClassConditionalPair::intervals(&[(0.0, 0.3), (0.7, 1.0)], &[(0.35, 0.65)]).unwrap()
    }

    fn ctx<'a>(learner: &'a dyn Learner, pair: &'a ClassConditionalPair) -> ToleranceContext<'a> {
        ToleranceContext {
            learner,
            pair,
            p: 0.5,
            eval: ErrorMode::Exact,
            pool: PoolConfig { fresh_draws: 4, seed: 7 },
        }
    }

    fn stoch(budget: u64) -> Search {
        Search::Stochastic {
            budget,
            greedy_rounds: 1,
            seed: 3,
        }
    }

    #[test]
    fn combinatorics() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_multiset(5, 3, |_| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count as u128, binom(7, 3));
        assert_eq!(level_count(ToleranceMode::Replacement, 4, 5, 3), 4 * 35);
    }

    #[test]
    fn zero_kappa_and_constant_rule() {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, 10, 1);
        let nn = ClassifierSpec::NearestNeighbour;
        let constant = ClassifierSpec::ErmFinite {
            hypotheses: vec![Hypothesis::Constant { label: Label::Zero }],
        };
        for mode in [ToleranceMode::Deletion, ToleranceMode::Replacement] {
            for search in [Search::Exact, stoch(50)] {
                assert_eq!(delta_pointwise(ctx(&nn, &pair), &s, 0, mode, search).unwrap().value, 0.0);
                let k = if mode == ToleranceMode::Replacement { 2 } else { 3 };
                assert_eq!(delta_pointwise(ctx(&constant, &pair), &s, k, mode, search).unwrap().value, 0.0);
            }
        }
    }

    #[test]
    fn nn_exhaustive_budget_matches_exact() {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, 8, 11);
        let nn = ClassifierSpec::NearestNeighbour;
        let exact = delta_pointwise(ctx(&nn, &pair), &s, 2, ToleranceMode::Deletion, Search::Exact).unwrap();
        assert_eq!(exact.evaluations, 1 + 8 + 28);
        let st = delta_pointwise(ctx(&nn, &pair), &s, 2, ToleranceMode::Deletion, stoch(28)).unwrap();
        assert_eq!(exact.value, st.value);
        assert!(exact.value > 0.0);
    }

    #[test]
    fn exact_guard() {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, 17, 1);
        let e = delta_pointwise(ctx(&ClassifierSpec::NearestNeighbour, &pair), &s, 2, ToleranceMode::Deletion, Search::Exact);
        assert!(matches!(e, Err(Error::EnumerationTooLarge(_))));
    }

    #[test]
    fn witness_reproduces_value() {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, 9, 5);
        let nn = ClassifierSpec::NearestNeighbour;
        let c = ctx(&nn, &pair);
        let rep = delta_pointwise(c, &s, 2, ToleranceMode::Replacement, Search::Exact).unwrap();
        let mut t = s.clone();
        for r in &rep.witness.replaced {
            assert_eq!(pair.eta(&r.point).unwrap(), r.label);
            t.replace(r.index, &r.point, r.label);
        }
        let err = Evaluator::error_of(&c, &t).unwrap();
        assert!(((rep.base_error - err).abs() - rep.value).abs() < 1e-15);
    }

    /// Predicts the label of the last training example.
    struct LastLabel;

    struct Fixed(Label);

    impl Predictor for Fixed {
        fn dim(&self) -> usize {
            1
        }
        fn predict(&self, _: &[f64]) -> Label {
            self.0
        }
        fn decision_regions(&self) -> Option<crate::classifiers::DecisionRegions> {
            Some(crate::classifiers::DecisionRegions::constant(self.0))
        }
    }

    impl Learner for LastLabel {
        fn fit_predictor(&self, s: &LabeledSample) -> Result<Box<dyn Predictor>> {
            Ok(Box::new(Fixed(s.label(s.len() - 1))))
        }
        fn is_symmetric(&self) -> bool {
            false
        }
    }

    #[test]
    fn asymmetric_learner_reorders() {
        let pair = pair();
        let s = LabeledSample::from_1d(&[(0.5, Label::One), (0.1, Label::Zero), (0.4, Label::One)]);
        // p = 1/2: predicting either constant errs with probability 1/2, so
        // reordering alone cannot move the error; use p = 0.9
        let mut c = ctx(&LastLabel, &pair);
        c.p = 0.9;
        let exact = delta_pointwise(c, &s, 0, ToleranceMode::Deletion, Search::Exact).unwrap();
        assert!((exact.value - 0.8).abs() < 1e-12);
        assert!(exact.witness.order.is_some());
        let st = delta_pointwise(c, &s, 1, ToleranceMode::Deletion, stoch(40)).unwrap();
        assert!((st.value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn dist_of_constant_rule_is_zero() {
        let pair = pair();
        let constant = ClassifierSpec::ErmFinite {
            hypotheses: vec![Hypothesis::Union {
                boxes: vec![AxisBox::interval(0.33, 0.67)],
            }],
        };
        let cfg = DistConfig {
            n: 30,
            eps: 0.01,
            mode: ToleranceMode::Deletion,
            runs: 5,
            search: stoch(3),
            kappa: None,
            fresh_draws: 8,
            eval: ErrorMode::Exact,
        };
        let d = delta_dist(&constant, &pair, 0.4, &cfg, 2).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.kappa, 10);
        let nn = ClassifierSpec::NearestNeighbour;
        let big_eps = DistConfig { eps: 1.0, ..cfg };
        assert_eq!(delta_dist(&nn, &pair, 0.4, &big_eps, 2).unwrap().value, 0.0);
        let sup = delta_sup(&constant, &pair, 0.5, 1, &cfg, 4).unwrap();
        assert_eq!(sup.value, 0.0);
        assert_eq!(sup.argmax_p, 0.5);
    }

    #[test]
    fn nn_is_not_tolerant_at_small_n() {
        let pair = pair();
        let cfg = DistConfig {
            n: 12,
            eps: 0.05,
            mode: ToleranceMode::Deletion,
            runs: 20,
            search: Search::Exact,
            kappa: Some(3),
            fresh_draws: 8,
            eval: ErrorMode::Exact,
        };
        let sup = delta_sup(&ClassifierSpec::NearestNeighbour, &pair, 0.3, 3, &cfg, 9).unwrap();
        assert!(sup.value > 0.0);
    }
}
