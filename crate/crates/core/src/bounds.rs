//! Closed-form rates and bound right-hand sides.
//!
//! Every right-hand side is assembled in log space so that exponentially
//! small terms survive; reports carry the log value, the raw value and the
//! value clamped to `[0, 1]`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::data::Occupancy;
use crate::error::{Error, Result};

/// `floor(sqrt(n ln n))`, the number of examples a perturbation may touch.
pub fn kappa(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let nf = n as f64;
    let mut k = (nf * nf.ln()).sqrt().floor() as u64;
    // guard against rounding at perfect squares
    while (k + 1) as f64 * (k + 1) as f64 <= nf * nf.ln() {
        k += 1;
    }
    while k > 0 && (k as f64) * (k as f64) > nf * nf.ln() {
        k -= 1;
    }
    k
}

/// `1 / (1 - 1/sqrt(n))`.
pub fn alpha(n: u64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::PoleAtOne(n));
    }
    Ok(1.0 / (1.0 - 1.0 / (n as f64).sqrt()))
}

/// Smallest `m` with `m - kappa(m) >= n`.
pub fn proof_form_size(n: u64) -> u64 {
    let mut m = n;
    while m - kappa(m) < n {
        m += 1;
    }
    m
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Dichotomies of `n` collinear points cut out by a single closed interval.
pub fn shatter_intervals(n: u64) -> BigUint {
    BigUint::from(n) * BigUint::from(n + 1) / 2u32 + 1u32
}

/// Dichotomies of `n` collinear points cut out by a union of at most `k` intervals.
pub fn shatter_k_intervals(n: u64, k: u64) -> BigUint {
    (0..=k).map(|r| binomial(n + 1, 2 * r)).sum()
}

/// `sum_{i <= v} C(n, i)`.
pub fn sauer_bound(v: u64, n: u64) -> BigUint {
    (0..=v.min(n)).map(|i| binomial(n, i)).sum()
}

pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(sum exp(terms))`, ignoring `-inf` terms.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// A shatter function `n -> S(C, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ShatterFunction {
    Intervals,
    KIntervals { k: u64 },
    /// Sauer's bound for a class of the given VC dimension.
    Sauer { vc_dim: u64 },
    Finite { size: u64 },
}

impl ShatterFunction {
    pub fn eval(&self, n: u64) -> BigUint {
        match *self {
            ShatterFunction::Intervals => shatter_intervals(n),
            ShatterFunction::KIntervals { k } => shatter_k_intervals(n, k),
            ShatterFunction::Sauer { vc_dim } => sauer_bound(vc_dim, n),
            ShatterFunction::Finite { size } => {
                let size = BigUint::from(size);
                if n < 64 {
                    size.min(BigUint::one() << n)
                } else {
                    size
                }
            }
        }
    }

    pub fn ln_eval(&self, n: u64) -> f64 {
        ln_biguint(&self.eval(n))
    }

    pub fn describe(&self) -> String {
        match self {
            ShatterFunction::Intervals => "intervals".into(),
            ShatterFunction::KIntervals { k } => format!("k_intervals({k})"),
            ShatterFunction::Sauer { vc_dim } => format!("sauer({vc_dim})"),
            ShatterFunction::Finite { size } => format!("finite({size})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "eq5")]
    Eq5,
    #[serde(rename = "eq6")]
    Eq6,
    #[serde(rename = "eq11")]
    Eq11,
    #[serde(rename = "eq12")]
    Eq12,
    #[serde(rename = "eq13")]
    Eq13,
    #[serde(rename = "eq14")]
    Eq14,
    #[serde(rename = "vc_agnostic")]
    VcAgnostic,
    #[serde(rename = "vc_agnostic_shifted")]
    VcAgnosticShifted,
    #[serde(rename = "vc_realizable")]
    VcRealizable,
    #[serde(rename = "uniform_dev_24")]
    UniformDev24,
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// Whether assembled inputs were estimates or proven bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Valid as an upper bound only when the inputs themselves are upper bounds.
    EmpiricalAssembly,
    Analytic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shatter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_shatter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nabla: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Sample size at which supplied inputs were evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_point: Option<EvalPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indicator: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: FormulaId,
    pub params: BoundParams,
    /// Raw value; may exceed 1, saturates at `f64::MAX`.
    pub rhs: f64,
    pub log_rhs: f64,
    /// `min(rhs, 1)`.
    pub clamped: f64,
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<InputKind>,
}

impl BoundReport {
    fn new(formula: FormulaId, params: BoundParams, log_rhs: f64) -> Self {
        let rhs = log_rhs.exp().min(f64::MAX);
        BoundReport {
            formula,
            params,
            rhs,
            log_rhs,
            clamped: rhs.min(1.0),
            vacuous: log_rhs >= 0.0,
            inputs: None,
        }
    }

    pub fn csv_header() -> Vec<String> {
        ["formula", "n", "delta", "eps", "c_n", "shatter", "nabla", "tolerance", "rhs", "log_rhs", "clamped", "vacuous"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let p = &self.params;
        vec![
            self.formula.to_string(),
            p.n.to_string(),
            opt(p.delta),
            p.eps.to_string(),
            opt(p.c_n),
            p.shatter.clone().unwrap_or_default(),
            opt(p.nabla),
            opt(p.tolerance),
            self.rhs.to_string(),
            self.log_rhs.to_string(),
            self.clamped.to_string(),
            self.vacuous.to_string(),
        ]
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("eps", "eps must be positive"))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("delta", "delta must lie in (0, 1/2]"))
    }
}

fn check_occupancy(c: &Occupancy) -> Result<()> {
    if c.value > 0.0 && c.value <= 1.0 && c.complement >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("c_n", "occupancy must lie in (0, 1]"))
    }
}

/// The four i.i.d. VC inequalities at `ln S(C, n) = ln_s`.
pub fn vc_bounds(ln_s: f64, n: u64, eps: f64) -> Result<[BoundReport; 4]> {
    check_eps(eps)?;
    if ln_s.is_nan() || ln_s < 0.0 {
        return Err(Error::invalid("shatter", "shatter coefficient must be at least 1"));
    }
    let nf = n as f64;
    let params = BoundParams {
        n,
        eps,
        ln_shatter: Some(ln_s),
        ..Default::default()
    };
    let ln8 = 8f64.ln();
    let report = |id, log| BoundReport::new(id, params.clone(), log);
    Ok([
        report(FormulaId::VcAgnostic, ln8 + ln_s - nf * eps * eps / 128.0),
        report(FormulaId::VcAgnosticShifted, ln8 + ln_s - nf * eps * eps / 512.0),
        report(FormulaId::VcRealizable, 2f64.ln() + ln_s - nf * eps / 2.0),
        report(FormulaId::UniformDev24, ln8 + ln_s - nf * eps * eps / 32.0),
    ])
}

/// Right-hand sides for an empirical risk minimiser over a class with shatter
/// function `shatter`: `{eq11, eq12}` in general, `{eq13, eq14}` when the
/// labelling function belongs to the class.
///
/// `indicator` is whether twice the best-in-class error at `p = 1/2` exceeds
/// `eps/2`; it is ignored in the realizable case.
pub fn thm4_bounds(
    shatter: &ShatterFunction,
    n: u64,
    delta: f64,
    eps: f64,
    occupancy: &Occupancy,
    realizable: bool,
    indicator: bool,
) -> Result<Vec<BoundReport>> {
    check_eps(eps)?;
    check_delta(delta)?;
    check_occupancy(occupancy)?;
    let nf = n as f64;
    let ln_alpha_over_c = alpha(n)?.ln() - occupancy.value.ln();
    let ln_complement = occupancy.complement.ln();
    let ln_s = shatter.ln_eval(n);
    let params = BoundParams {
        n,
        eps,
        delta: Some(delta),
        c_n: Some(occupancy.value),
        shatter: Some(shatter.describe()),
        ln_shatter: Some(ln_s),
        ..Default::default()
    };
    if realizable {
        let ln_s2 = shatter.ln_eval(2 * n);
        let eq13 = BoundReport::new(
            FormulaId::Eq13,
            BoundParams {
                ln_shatter: Some(ln_s2),
                delta: None,
                c_n: None,
                ..params.clone()
            },
            4f64.ln() + ln_s2 - nf * eps / 8.0 * std::f64::consts::LN_2,
        );
        let main = 4f64.ln() + ln_alpha_over_c + ln_s - nf * delta * eps / 16.0;
        let eq14 = BoundReport::new(FormulaId::Eq14, params, log_sum_exp(&[main, ln_complement]));
        return Ok(vec![eq13, eq14]);
    }
    if nf <= 4.0 / (eps * eps) {
        return Err(Error::PreconditionViolated(format!(
            "n = {n} must exceed 4/eps^2 = {}",
            4.0 / (eps * eps)
        )));
    }
    let eq11 = BoundReport::new(
        FormulaId::Eq11,
        BoundParams {
            delta: None,
            c_n: None,
            ..params.clone()
        },
        16f64.ln() + ln_s - nf * eps * eps / 512.0,
    );
    let main = 16f64.ln() + ln_alpha_over_c + ln_s - nf * delta * delta * eps * eps / 2048.0;
    let ind = if indicator { 0.0 } else { f64::NEG_INFINITY };
    let eq12 = BoundReport::new(
        FormulaId::Eq12,
        BoundParams {
            indicator: Some(indicator),
            ..params
        },
        log_sum_exp(&[ind, main, ln_complement]),
    );
    Ok(vec![eq11, eq12])
}

/// Where the deletion-form inputs are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPoint {
    /// `n + kappa(n)`.
    #[default]
    Statement,
    /// Smallest `m` with `m - kappa(m) >= n`.
    Proof,
    /// Sample size `n` itself (replacement form).
    Same,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Thm1Mode {
    Deletion { point: EvalPoint },
    Replacement,
}

/// A supplied functional value and the arguments it was evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: f64,
    pub n: u64,
    pub eps: f64,
}

/// `alpha_n / C_n * (nabla + tolerance) + (1 - C_n)`.
///
/// Both inputs must have been evaluated at the sample size the mode
/// prescribes and at `delta * eps / 2`.
#[allow(clippy::too_many_arguments)]
pub fn thm1_rhs(
    occupancy: &Occupancy,
    n: u64,
    delta: f64,
    eps: f64,
    nabla: Evaluated,
    tolerance: Evaluated,
    mode: Thm1Mode,
    inputs: InputKind,
) -> Result<BoundReport> {
    check_eps(eps)?;
    check_delta(delta)?;
    check_occupancy(occupancy)?;
    let (formula, point, want_n) = match mode {
        Thm1Mode::Deletion { point } => {
            let m = match point {
                EvalPoint::Statement => n + kappa(n),
                EvalPoint::Proof => proof_form_size(n),
                EvalPoint::Same => {
                    return Err(Error::ArgumentMismatch(
                        "deletion form is evaluated at n + kappa(n) or its proof-form size".into(),
                    ))
                }
            };
            (FormulaId::Eq5, point, m)
        }
        Thm1Mode::Replacement => (FormulaId::Eq6, EvalPoint::Same, n),
    };
    let want_eps = delta * eps / 2.0;
    for (name, e) in [("nabla", nabla), ("tolerance", tolerance)] {
        if e.n != want_n {
            return Err(Error::ArgumentMismatch(format!(
                "{name} evaluated at n = {}, expected {want_n}",
                e.n
            )));
        }
        if (e.eps - want_eps).abs() > 1e-12 * want_eps.max(1.0) {
            return Err(Error::ArgumentMismatch(format!(
                "{name} evaluated at eps = {}, expected delta*eps/2 = {want_eps}",
                e.eps
            )));
        }
        if !(e.value >= 0.0) {
            return Err(Error::invalid("bound input", format!("{name} must be nonnegative")));
        }
    }
    let ln_alpha_over_c = alpha(n)?.ln() - occupancy.value.ln();
    let main = ln_alpha_over_c + (nabla.value + tolerance.value).ln();
    let log = log_sum_exp(&[main, occupancy.complement.ln()]);
    let mut report = BoundReport::new(
        formula,
        BoundParams {
            n,
            eps,
            delta: Some(delta),
            c_n: Some(occupancy.value),
            nabla: Some(nabla.value),
            tolerance: Some(tolerance.value),
            eval_n: Some(want_n),
            eval_point: Some(point),
            ..Default::default()
        },
        log,
    );
    report.inputs = Some(inputs);
    Ok(report)
}
