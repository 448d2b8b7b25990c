use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{CounterexampleSettings, ExperimentConfig, ExperimentKind, SearchKind};
use super::csv_string;
use super::studies::{kappa_admissibility, mc_crosscheck};
use crate::bounds::{
    kappa, proof_form_size, thm1_rhs, thm4_bounds, vc_bounds, BoundReport, EvalPoint, Evaluated, FormulaId, InputKind,
    Thm1Mode,
};
use crate::classifiers::ClassifierSpec;
use crate::counterexamples::{
    remark1_header, remark1_rows, remark1_table, remark2_control, remark2_simulate, Remark1Variant, Remark2Curve,
};
use crate::data::{occupancy_prob, ClassConditionalPair, LabelProcess, Occupancy};
use crate::error::{Error, Result};
use crate::error_eval::{error_prob_curve, exceedance, nabla_estimate, p_grid, ErrorCurve};
use crate::rng::{derive_seed, derive_seed2};
use crate::tolerance::{delta_dist, DistConfig, Search, ToleranceDist, ToleranceMode};

/// One result table, rendered as CSV or JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Table {
    fn new(name: &str, header: Vec<String>, rows: Vec<Vec<String>>, json: Value) -> Self {
        Table {
            name: name.to_string(),
            header,
            rows,
            json,
        }
    }

    pub fn to_csv(&self) -> String {
        csv_string(&self.header, &self.rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub kind: ExperimentKind,
    /// `None` when the experiment carries no acceptance predicate.
    pub passed: Option<bool>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> Option<bool> {
        (!self.checks.is_empty()).then(|| self.checks.iter().all(|c| c.passed))
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn binomial_stderr(f: f64, runs: usize) -> f64 {
    (f * (1.0 - f) / runs as f64).sqrt()
}

struct Parts<'a> {
    process: &'a LabelProcess,
    pair: &'a ClassConditionalPair,
    classifier: &'a ClassifierSpec,
}

fn parts(cfg: &ExperimentConfig) -> Result<Parts<'_>> {
    let missing = |w: &str| Error::InvalidConfig(vec![format!("{w} is required")]);
    Ok(Parts {
        process: cfg.process.as_ref().ok_or_else(|| missing("process"))?,
        pair: cfg.pair.as_ref().ok_or_else(|| missing("pair"))?,
        classifier: cfg.classifier.as_ref().ok_or_else(|| missing("classifier"))?,
    })
}

fn pair_and_classifier(cfg: &ExperimentConfig) -> Result<(&ClassConditionalPair, &ClassifierSpec)> {
    let missing = |w: &str| Error::InvalidConfig(vec![format!("{w} is required")]);
    Ok((
        cfg.pair.as_ref().ok_or_else(|| missing("pair"))?,
        cfg.classifier.as_ref().ok_or_else(|| missing("classifier"))?,
    ))
}

fn curve_table(curve: &ErrorCurve) -> Table {
    Table::new(
        "curve",
        curve.header(),
        curve.rows(),
        serde_json::to_value(curve).expect("curve serialises"),
    )
}

/// Compute every table and check of `cfg` without touching the filesystem.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.check()?;
    let seed = cfg.seed()?;
    match cfg.kind {
        ExperimentKind::Consistency => consistency(cfg, seed),
        ExperimentKind::BoundCheck => bound_check(cfg, seed),
        ExperimentKind::Tolerance => tolerance(cfg, seed),
        ExperimentKind::Counterexample => counterexample(cfg, seed),
        ExperimentKind::KappaCheck => kappa_check(cfg, seed),
        ExperimentKind::NablaSweep => nabla_sweep(cfg, seed),
        ExperimentKind::McCrosscheck => crosscheck(cfg, seed),
    }
}

fn consistency(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let p = parts(cfg)?;
    let curve = error_prob_curve(
        p.classifier,
        p.pair,
        p.process,
        &cfg.n_list,
        &cfg.eps_list,
        cfg.runs,
        derive_seed(seed, 0),
        cfg.error_mode(derive_seed(seed, 1)),
    )?;
    let mut checks = Vec::new();
    if let Some(pred) = &cfg.predicate {
        let means: Vec<f64> = curve.records.iter().map(|r| r.mean_err).collect();
        if pred.decreasing {
            let ok = means.windows(2).all(|w| w[1] < w[0]);
            checks.push(Check::new("mean_err strictly decreasing", ok, format!("{means:?}")));
        }
        if let (Some(max), Some(last)) = (pred.max_final_mean, means.last()) {
            checks.push(Check::new(
                "final mean_err below threshold",
                *last < max,
                format!("{last} < {max}"),
            ));
        }
    }
    Ok(Outcome {
        tables: vec![curve_table(&curve)],
        checks,
    })
}

fn occupancy_at(cfg: &ExperimentConfig, process: &LabelProcess, delta: f64, n: usize, seed: u64) -> Result<Occupancy> {
    occupancy_prob(process, delta, n, Some(cfg.occupancy_runs), seed)
}

fn bound_rows(reports: &[BoundReport]) -> (Vec<Vec<String>>, Value) {
    (
        reports.iter().map(BoundReport::csv_row).collect(),
        serde_json::to_value(reports).expect("reports serialise"),
    )
}

fn bound_check(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let p = parts(cfg)?;
    let bound = cfg.bound.as_ref().expect("validated");
    let delta = cfg.delta.expect("validated");
    let curve = error_prob_curve(
        p.classifier,
        p.pair,
        p.process,
        &cfg.n_list,
        &cfg.eps_list,
        cfg.runs,
        derive_seed(seed, 0),
        cfg.error_mode(derive_seed(seed, 1)),
    )?;
    let mut reports = Vec::new();
    let mut check_rows = Vec::new();
    let mut all_ok = true;
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let occ = occupancy_at(cfg, p.process, delta, n, derive_seed2(seed, 2, i as u64))?;
        for (j, &eps) in cfg.eps_list.iter().enumerate() {
            let rs = thm4_bounds(&bound.shatter, n as u64, delta, eps, &occ, bound.realizable, bound.indicator)?;
            let main = rs
                .iter()
                .find(|r| matches!(r.formula, FormulaId::Eq12 | FormulaId::Eq14))
                .expect("main bound")
                .clone();
            let emp = curve.records[i].p_exceed[j];
            let se = binomial_stderr(emp, cfg.runs);
            let ok = main.vacuous || emp <= main.rhs + 4.0 * se;
            all_ok &= ok;
            check_rows.push(vec![
                n.to_string(),
                eps.to_string(),
                main.formula.to_string(),
                occ.value.to_string(),
                occ.complement.to_string(),
                serde_json::to_value(&occ.method).expect("method")["occupancy_method"]
                    .as_str()
                    .unwrap_or("")
                    .to_string(),
                emp.to_string(),
                se.to_string(),
                main.rhs.to_string(),
                main.log_rhs.to_string(),
                main.vacuous.to_string(),
                ok.to_string(),
            ]);
            reports.extend(rs);
            if let Some(t1) = &bound.thm1 {
                reports.push(thm1_empirical(cfg, t1, p.classifier, p.pair, &occ, n, delta, eps, derive_seed2(seed, 3, (i * 1000 + j) as u64))?);
            }
        }
    }
    let (rows, js) = bound_rows(&reports);
    let header = strings(&[
        "n",
        "eps",
        "formula",
        "c_n",
        "c_n_complement",
        "occupancy_method",
        "empirical",
        "stderr",
        "rhs",
        "log_rhs",
        "vacuous",
        "passed",
    ]);
    let check_json = Value::Array(
        check_rows
            .iter()
            .map(|r| Value::Object(header.iter().cloned().zip(r.iter().map(|v| Value::String(v.clone()))).collect()))
            .collect(),
    );
    Ok(Outcome {
        tables: vec![
            curve_table(&curve),
            Table::new("bounds", BoundReport::csv_header(), rows, js),
            Table::new("check", header, check_rows, check_json),
        ],
        checks: vec![Check::new(
            "empirical P(err > eps) <= rhs + 4 stderr wherever rhs < 1",
            all_ok,
            format!("{} (n, eps) points", cfg.n_list.len() * cfg.eps_list.len()),
        )],
    })
}

/// The general bound assembled from grid and search estimates.
#[allow(clippy::too_many_arguments)]
fn thm1_empirical(
    cfg: &ExperimentConfig,
    t1: &super::config::Thm1Settings,
    classifier: &ClassifierSpec,
    pair: &ClassConditionalPair,
    occ: &Occupancy,
    n: usize,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<BoundReport> {
    let (mode, m) = match t1.mode {
        ToleranceMode::Deletion => {
            let m = match t1.eval_point {
                EvalPoint::Proof => proof_form_size(n as u64),
                _ => n as u64 + kappa(n as u64),
            };
            let point = if t1.eval_point == EvalPoint::Proof {
                EvalPoint::Proof
            } else {
                EvalPoint::Statement
            };
            (Thm1Mode::Deletion { point }, m)
        }
        ToleranceMode::Replacement => (Thm1Mode::Replacement, n as u64),
    };
    let e = delta * eps / 2.0;
    let nabla = nabla_estimate(classifier, pair, delta, m as usize, e, cfg.p_grid, t1.runs, derive_seed(seed, 0), cfg.error_mode(derive_seed(seed, 1)))?;
    let dcfg = DistConfig {
        n: m as usize,
        eps: e,
        mode: t1.mode,
        runs: t1.runs,
        search: Search::Stochastic {
            budget: t1.budget,
            greedy_rounds: 0,
            seed: 0,
        },
        kappa: None,
        fresh_draws: t1.fresh_draws,
        eval: cfg.error_mode(derive_seed(seed, 2)),
    };
    let sup = crate::tolerance::delta_sup(classifier, pair, delta, cfg.p_grid, &dcfg, derive_seed(seed, 3))?;
    thm1_rhs(
        occ,
        n as u64,
        delta,
        eps,
        Evaluated {
            value: nabla.value,
            n: m,
            eps: e,
        },
        Evaluated {
            value: sup.value,
            n: m,
            eps: e,
        },
        mode,
        InputKind::EmpiricalAssembly,
    )
}

fn tolerance(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let (pair, classifier) = pair_and_classifier(cfg)?;
    let t = cfg.tolerance.as_ref().expect("validated");
    let ps = match t.p {
        Some(p) => vec![p],
        None => p_grid(cfg.delta.expect("validated"), cfg.p_grid),
    };
    let mut rows = Vec::new();
    let mut dists: Vec<ToleranceDist> = Vec::new();
    let mut sup_rows: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let mut per_eps_max = vec![(0.0f64, 0.0f64); cfg.eps_list.len()];
        for (k, &p) in ps.iter().enumerate() {
            let dcfg = DistConfig {
                n,
                eps: cfg.eps_list[0],
                mode: t.mode,
                runs: cfg.runs,
                search: match t.search {
                    SearchKind::Exact => Search::Exact,
                    SearchKind::Stochastic => Search::Stochastic {
                        budget: t.budget,
                        greedy_rounds: t.greedy_rounds,
                        seed: 0,
                    },
                },
                kappa: t.kappa,
                fresh_draws: t.fresh_draws,
                eval: cfg.error_mode(0),
            };
            let d = delta_dist(classifier, pair, p, &dcfg, derive_seed2(seed, i as u64, k as u64))?;
            for (j, &eps) in cfg.eps_list.iter().enumerate() {
                let f = exceedance(&d.values, eps);
                let se = binomial_stderr(f, cfg.runs);
                if k == 0 || f > per_eps_max[j].0 {
                    per_eps_max[j] = (f, se);
                }
                rows.push(vec![
                    n.to_string(),
                    p.to_string(),
                    d.kappa.to_string(),
                    eps.to_string(),
                    cfg.runs.to_string(),
                    f.to_string(),
                    se.to_string(),
                    d.lower_bound.to_string(),
                    d.mean_tolerance.to_string(),
                    d.max_tolerance.to_string(),
                ]);
            }
            dists.push(d);
        }
        for (j, &eps) in cfg.eps_list.iter().enumerate() {
            sup_rows.push((n, eps, per_eps_max[j].0, per_eps_max[j].1));
        }
    }
    let header = ToleranceDist::csv_header();
    let mut tables = vec![Table::new(
        "tolerance",
        header,
        rows,
        serde_json::to_value(&dists).expect("dists serialise"),
    )];
    let mut checks = Vec::new();
    if let Some(bound) = &cfg.bound {
        let delta = cfg.delta.unwrap_or(0.5);
        let mut reports = Vec::new();
        let mut all_ok = true;
        for &(n, eps, f, se) in &sup_rows {
            let eq13 = thm4_bounds(&bound.shatter, n as u64, delta, eps, &Occupancy::exact(1.0, 0.0), true, false)?
                .into_iter()
                .next()
                .expect("eq13");
            all_ok &= eq13.vacuous || f <= eq13.rhs + 4.0 * se;
            reports.push(eq13);
        }
        let (rows, js) = bound_rows(&reports);
        tables.push(Table::new("bounds", BoundReport::csv_header(), rows, js));
        checks.push(Check::new(
            "tolerance exceedance <= eq13 rhs + 4 stderr wherever rhs < 1",
            all_ok,
            format!("{} (n, eps) points", sup_rows.len()),
        ));
    }
    Ok(Outcome { tables, checks })
}

fn counterexample(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    match cfg.counterexample.as_ref().expect("validated") {
        CounterexampleSettings::Remark1 { p_list } => {
            let rows = remark1_table(&cfg.n_list, p_list)?;
            let all_one = rows.iter().all(|r| r.conditional_error == 1.0);
            let alt_ok = rows
                .iter()
                .filter(|r| r.variant == Remark1Variant::AlternatingHistory && r.p == 0.5)
                .all(|r| r.iid_exact == format!("1/{}", num_bigint::BigUint::from(1u8) << (r.n - 1)));
            Ok(Outcome {
                tables: vec![Table::new(
                    "remark1",
                    remark1_header(),
                    remark1_rows(&rows),
                    serde_json::to_value(&rows).expect("rows serialise"),
                )],
                checks: vec![
                    Check::new("conditional error is 1 for every n", all_one, ""),
                    Check::new("alternating-history i.i.d. error probability at p = 1/2 is 2^(1-n)", alt_ok, ""),
                ],
            })
        }
        CounterexampleSettings::Remark2 {
            atoms,
            schedule,
            horizon,
            beyond,
            threshold,
            control_threshold,
        } => {
            let curve = remark2_simulate(*atoms, schedule, *horizon, cfg.runs, derive_seed(seed, 0))?;
            let control = remark2_control(*atoms, *horizon, cfg.runs, derive_seed(seed, 1))?;
            let min_mean = curve.min_mean_beyond(*beyond);
            let control_curve = ErrorCurve {
                eps: Vec::new(),
                records: vec![control.clone()],
            };
            Ok(Outcome {
                tables: vec![
                    Table::new(
                        "remark2",
                        Remark2Curve::header(),
                        curve.rows(),
                        serde_json::to_value(&curve).expect("curve serialises"),
                    ),
                    Table::new(
                        "control",
                        control_curve.header(),
                        control_curve.rows(),
                        serde_json::to_value(&control_curve).expect("curve serialises"),
                    ),
                ],
                checks: vec![
                    Check::new(
                        format!("min mean class-1 error beyond n = {beyond} stays >= {threshold}"),
                        min_mean.is_some_and(|m| m >= *threshold),
                        format!("{min_mean:?}"),
                    ),
                    Check::new(
                        format!("i.i.d. control error at n = {horizon} below {control_threshold}"),
                        control.mean_err < *control_threshold,
                        control.mean_err.to_string(),
                    ),
                ],
            })
        }
    }
}

fn kappa_check(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let settings = cfg.kappa_check.as_ref().expect("validated");
    let mut all = Vec::new();
    for (i, &p) in settings.p_list.iter().enumerate() {
        all.extend(kappa_admissibility(p, &cfg.n_list, cfg.runs, derive_seed(seed, i as u64)));
    }
    let header = strings(&["p", "n", "kappa", "runs", "exceed", "stderr", "hoeffding", "passed"]);
    let rows = all
        .iter()
        .map(|r| {
            vec![
                r.p.to_string(),
                r.n.to_string(),
                r.kappa.to_string(),
                r.runs.to_string(),
                r.exceed.to_string(),
                r.stderr.to_string(),
                r.hoeffding.to_string(),
                r.passed.to_string(),
            ]
        })
        .collect();
    let ok = all.iter().all(|r| r.passed);
    Ok(Outcome {
        tables: vec![Table::new("kappa", header, rows, serde_json::to_value(&all).expect("rows"))],
        checks: vec![Check::new("empirical exceedance <= 2/n^2 + 4 stderr", ok, "")],
    })
}

fn nabla_sweep(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let (pair, classifier) = pair_and_classifier(cfg)?;
    let delta = cfg.delta.expect("validated");
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    let mut all_ok = true;
    for (i, &n) in cfg.n_list.iter().enumerate() {
        for (j, &eps) in cfg.eps_list.iter().enumerate() {
            let s = derive_seed2(seed, i as u64, j as u64);
            let est = nabla_estimate(classifier, pair, delta, n, eps, cfg.p_grid, cfg.runs, s, cfg.error_mode(derive_seed(s, 1)))?;
            if let Some(b) = cfg.bound.as_ref().filter(|b| b.realizable) {
                let [_, _, real, _] = vc_bounds(b.shatter.ln_eval(n as u64), n as u64, eps)?;
                let worst = est.points.iter().find(|pt| pt.p == est.argmax_p).expect("argmax");
                all_ok &= real.vacuous || est.value <= real.rhs + 4.0 * worst.stderr;
            }
            for pt in &est.points {
                rows.push(vec![
                    n.to_string(),
                    eps.to_string(),
                    pt.p.to_string(),
                    pt.prob.to_string(),
                    pt.stderr.to_string(),
                    (pt.p == est.argmax_p).to_string(),
                ]);
            }
            estimates.push(json!({"n": n, "eps": eps, "estimate": est}));
        }
    }
    let checks = if cfg.bound.as_ref().is_some_and(|b| b.realizable) {
        vec![Check::new("grid maximum <= 2 S e^(-n eps/2) + 4 stderr", all_ok, "")]
    } else {
        Vec::new()
    };
    Ok(Outcome {
        tables: vec![Table::new(
            "nabla",
            strings(&["n", "eps", "p", "p_exceed", "stderr", "is_max"]),
            rows,
            Value::Array(estimates),
        )],
        checks,
    })
}

fn crosscheck(cfg: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    let settings = cfg.crosscheck.as_ref().expect("validated");
    let rows = mc_crosscheck(settings.scenarios, cfg.mc_draws, seed)?;
    let within = rows.iter().filter(|r| r.within).count();
    let rate = within as f64 / rows.len().max(1) as f64;
    let header = strings(&["scenario", "pair", "classifier", "n", "label", "exact", "mc", "stderr", "within"]);
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.scenario.to_string(),
                r.pair.clone(),
                r.classifier.clone(),
                r.n.to_string(),
                r.label.to_string(),
                r.exact.to_string(),
                r.mc.to_string(),
                r.stderr.to_string(),
                r.within.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        tables: vec![Table::new("crosscheck", header, body, serde_json::to_value(&rows).expect("rows"))],
        checks: vec![Check::new(
            format!("Monte-Carlo within 4 stderr of exact in >= {} of cases", settings.min_pass_rate),
            rate >= settings.min_pass_rate,
            format!("{within}/{} = {rate}", rows.len()),
        )],
    })
}

/// Where `run` writes: the explicit directory, else the config's, else `out`.
pub fn output_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::invalid("output", format!("{}: {e}", path.display()))
}

/// Execute `cfg` and write the manifest, result tables and summary to `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path, format: OutputFormat) -> Result<RunSummary> {
    let outcome = execute(cfg)?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    for t in &outcome.tables {
        let (name, body) = match format {
            OutputFormat::Csv => (format!("{}.csv", t.name), t.to_csv()),
            OutputFormat::Json => (
                format!("{}.json", t.name),
                serde_json::to_string_pretty(&t.json).expect("json") + "\n",
            ),
        };
        let path = dir.join(&name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
        files.push(name);
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "outputs": files,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("json") + "\n").map_err(|e| io_err(&path, e))?;
    let summary = RunSummary {
        kind: cfg.kind,
        passed: outcome.passed(),
        checks: outcome.checks,
        files,
    };
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary).expect("json") + "\n").map_err(|e| io_err(&path, e))?;
    Ok(summary)
}
