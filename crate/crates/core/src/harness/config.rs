use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::{EvalPoint, ShatterFunction};
use crate::classifiers::ClassifierSpec;
use crate::data::{BlockRule, ClassConditionalPair, LabelProcess};
use crate::error::{Error, Result};
use crate::error_eval::{ErrorMode, DEFAULT_MC_DRAWS, DEFAULT_P_GRID, DEFAULT_RUNS};
use crate::tolerance::{ToleranceMode, DEFAULT_FRESH_DRAWS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Consistency,
    BoundCheck,
    Tolerance,
    Counterexample,
    KappaCheck,
    NablaSweep,
    McCrosscheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::BoundCheck => "bound-check",
            ExperimentKind::Tolerance => "tolerance",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::KappaCheck => "kappa-check",
            ExperimentKind::NablaSweep => "nabla-sweep",
            ExperimentKind::McCrosscheck => "mc-crosscheck",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalChoice {
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    Exact,
    #[default]
    Stochastic,
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}
fn default_mc_draws() -> u64 {
    DEFAULT_MC_DRAWS
}
fn default_occupancy_runs() -> u64 {
    crate::data::DEFAULT_OCCUPANCY_RUNS
}
fn default_p_grid() -> usize {
    DEFAULT_P_GRID
}
fn default_budget() -> u64 {
    64
}
fn default_fresh_draws() -> usize {
    DEFAULT_FRESH_DRAWS
}
fn default_true() -> bool {
    true
}
fn default_half() -> Vec<f64> {
    vec![0.5]
}
fn default_pass_rate() -> f64 {
    0.99
}
fn default_scenarios() -> usize {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSettings {
    #[serde(default = "deletion")]
    pub mode: ToleranceMode,
    #[serde(default)]
    pub search: SearchKind,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub greedy_rounds: u32,
    /// Overrides `floor(sqrt(n ln n))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default = "default_fresh_draws")]
    pub fresh_draws: usize,
    /// Fixed mixture parameter; without it the grid over `[delta, 1 - delta]` is searched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn deletion() -> ToleranceMode {
    ToleranceMode::Deletion
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm1Settings {
    #[serde(default = "deletion")]
    pub mode: ToleranceMode,
    #[serde(default)]
    pub eval_point: EvalPoint,
    pub runs: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_fresh_draws")]
    pub fresh_draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSettings {
    pub shatter: ShatterFunction,
    pub realizable: bool,
    /// Whether twice the best-in-class error at `p = 1/2` exceeds `eps/2`.
    #[serde(default)]
    pub indicator: bool,
    /// Also assemble the general bound from empirical inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thm1: Option<Thm1Settings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum CounterexampleSettings {
    /// Uses `n_list`.
    Remark1 {
        #[serde(default = "default_half")]
        p_list: Vec<f64>,
    },
    Remark2 {
        atoms: u32,
        schedule: BlockRule,
        horizon: usize,
        /// Steps with more examples than this enter the non-consistency check.
        beyond: usize,
        threshold: f64,
        control_threshold: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSettings {
    pub p_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckSettings {
    #[serde(default = "default_scenarios")]
    pub scenarios: usize,
    #[serde(default = "default_pass_rate")]
    pub min_pass_rate: f64,
}

/// Acceptance predicate of a consistency run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyPredicate {
    #[serde(default = "default_true")]
    pub decreasing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_mean: Option<f64>,
}

/// One experiment, fully described. Every number in the outputs can be
/// regenerated from this value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<LabelProcess>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<ClassConditionalPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierSpec>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub eps_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub eval: EvalChoice,
    #[serde(default = "default_mc_draws")]
    pub mc_draws: u64,
    #[serde(default = "default_occupancy_runs")]
    pub occupancy_runs: u64,
    #[serde(default = "default_p_grid")]
    pub p_grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_check: Option<KappaSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<CrosscheckSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<ConsistencyPredicate>,
}

impl ExperimentConfig {
    /// A config of the given kind with every optional part unset.
    pub fn new(kind: ExperimentKind, master_seed: u64) -> Self {
        ExperimentConfig {
            kind,
            process: None,
            pair: None,
            classifier: None,
            n_list: Vec::new(),
            eps_list: Vec::new(),
            delta: None,
            runs: DEFAULT_RUNS,
            eval: EvalChoice::Auto,
            mc_draws: DEFAULT_MC_DRAWS,
            occupancy_runs: default_occupancy_runs(),
            p_grid: DEFAULT_P_GRID,
            master_seed: Some(master_seed),
            output_dir: None,
            tolerance: None,
            bound: None,
            counterexample: None,
            kappa_check: None,
            crosscheck: None,
            predicate: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn seed(&self) -> Result<u64> {
        self.master_seed
            .ok_or_else(|| Error::InvalidConfig(vec!["master_seed is required".into()]))
    }

    /// Error evaluation mode with the given stream seed.
    pub fn error_mode(&self, seed: u64) -> ErrorMode {
        match self.eval {
            EvalChoice::Exact => ErrorMode::Exact,
            EvalChoice::MonteCarlo => ErrorMode::MonteCarlo {
                draws: self.mc_draws,
                seed,
            },
            EvalChoice::Auto => ErrorMode::Auto {
                draws: self.mc_draws,
                seed,
            },
        }
    }

    /// Field-level diagnostics; empty exactly when the config can be run.
    pub fn validate(&self) -> Vec<String> {
        let mut d = Vec::new();
        if self.master_seed.is_none() {
            d.push("master_seed is required".to_string());
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta <= 0.5) {
                d.push("delta must lie in (0, 1/2]".to_string());
            }
        }
        if self.runs < 2 {
            d.push("runs must be at least 2".to_string());
        }
        if self.mc_draws == 0 {
            d.push("mc_draws must be positive".to_string());
        }
        if self.occupancy_runs == 0 {
            d.push("occupancy_runs must be positive".to_string());
        }
        if self.p_grid == 0 {
            d.push("p_grid must be at least 1".to_string());
        }
        if self.n_list.contains(&0) {
            d.push("n_list entries must be positive".to_string());
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            d.push("eps_list entries must be positive".to_string());
        }
        if let Some(p) = &self.process {
            if let Err(e) = p.validate() {
                d.push(format!("process: {e}"));
            }
        }
        if let Some(pair) = &self.pair {
            if let Err(e) = pair.validate() {
                d.push(format!("pair: {e}"));
            }
            if let Some(c) = &self.classifier {
                if let Err(e) = c.validate(pair.dim()) {
                    d.push(format!("classifier: {e}"));
                }
            }
            if self.eval == EvalChoice::Exact && pair.dim() != 1 {
                d.push(format!("eval: exact evaluation requires dimension 1, got {}", pair.dim()));
            }
        }
        let mut need = |ok: bool, what: &str| {
            if !ok {
                d.push(format!("{} experiment requires {what}", self.kind.name()));
            }
        };
        let data = self.pair.is_some() && self.classifier.is_some();
        match self.kind {
            ExperimentKind::Consistency => {
                need(data && self.process.is_some(), "process, pair and classifier");
                need(!self.n_list.is_empty(), "a nonempty n_list");
            }
            ExperimentKind::BoundCheck => {
                need(data && self.process.is_some(), "process, pair and classifier");
                need(!self.n_list.is_empty() && !self.eps_list.is_empty(), "nonempty n_list and eps_list");
                need(self.delta.is_some(), "delta");
                need(self.bound.is_some(), "bound settings");
                if self.bound.as_ref().is_some_and(|b| !b.realizable) {
                    let ok = self
                        .n_list
                        .iter()
                        .all(|&n| self.eps_list.iter().all(|&e| n as f64 > 4.0 / (e * e)));
                    need(ok, "n > 4/eps^2 at every (n, eps) for the agnostic bounds");
                }
            }
            ExperimentKind::Tolerance => {
                need(data, "pair and classifier");
                need(!self.n_list.is_empty() && !self.eps_list.is_empty(), "nonempty n_list and eps_list");
                match &self.tolerance {
                    None => need(false, "tolerance settings"),
                    Some(t) => {
                        if let Some(p) = t.p {
                            need(p > 0.0 && p < 1.0, "tolerance.p in (0, 1)");
                        } else {
                            need(self.delta.is_some(), "delta or tolerance.p");
                        }
                    }
                }
                if let Some(b) = &self.bound {
                    need(b.realizable, "a realizable bound for the tolerance check");
                }
            }
            ExperimentKind::Counterexample => match &self.counterexample {
                None => need(false, "counterexample settings"),
                Some(CounterexampleSettings::Remark1 { p_list }) => {
                    need(!self.n_list.is_empty() && self.n_list.iter().all(|&n| n >= 2), "n_list entries >= 2");
                    need(!p_list.is_empty() && p_list.iter().all(|&p| p > 0.0 && p < 1.0), "p_list in (0, 1)");
                }
                Some(CounterexampleSettings::Remark2 { atoms, schedule, horizon, .. }) => {
                    need(*atoms >= 2, "at least two atoms");
                    need(schedule.is_nondecreasing(), "a nondecreasing schedule");
                    need(*horizon >= 1, "a positive horizon");
                }
            },
            ExperimentKind::KappaCheck => {
                need(!self.n_list.is_empty(), "a nonempty n_list");
                match &self.kappa_check {
                    None => need(false, "kappa_check settings"),
                    Some(k) => need(
                        !k.p_list.is_empty() && k.p_list.iter().all(|&p| (0.0..=1.0).contains(&p)),
                        "kappa_check.p_list in [0, 1]",
                    ),
                }
            }
            ExperimentKind::NablaSweep => {
                need(data, "pair and classifier");
                need(!self.n_list.is_empty() && !self.eps_list.is_empty(), "nonempty n_list and eps_list");
                need(self.delta.is_some(), "delta");
            }
            ExperimentKind::McCrosscheck => {
                need(self.crosscheck.is_some(), "crosscheck settings");
            }
        }
        d
    }

    /// Fail with every diagnostic at once.
    pub fn check(&self) -> Result<()> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(d))
        }
    }
}
