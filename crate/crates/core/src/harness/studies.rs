//! Simulation studies that have no home in a single module.

use rand::{Rng, RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::kappa;
use crate::classifiers::{CellWidth, ClassifierSpec};
use crate::data::{generate, ClassConditionalPair, Label, LabelProcess, WeightedPoint};
use crate::error::Result;
use crate::error_eval::{class_error_exact, class_error_mc};
use crate::rng::{derive_seed, derive_seed2, SimRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub p: f64,
    pub n: usize,
    pub kappa: u64,
    pub runs: usize,
    /// Empirical `P(|#ones - n p| > kappa_n)`.
    pub exceed: f64,
    pub stderr: f64,
    /// Hoeffding: `2 exp(-2 kappa_n^2 / n)`, about `2 / n^2`.
    pub hoeffding: f64,
    pub passed: bool,
}

/// Runs i.i.d. Bernoulli(`p`) label paths up to `max(n_list)` and records,
/// at each `n`, how often the count of ones strays more than `kappa_n` from
/// its mean. Path `r` uses seed `derive_seed(seed, r)`.
pub fn kappa_admissibility(p: f64, n_list: &[usize], runs: usize, seed: u64) -> Vec<KappaRow> {
    let mut checkpoints: Vec<usize> = n_list.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let horizon = checkpoints.last().copied().unwrap_or(0);
    // P(u64 < t) = p for t = p * 2^64
    let threshold = (p * 2f64.powi(64)).min(u64::MAX as f64) as u64;
    let always = p >= 1.0;
    let counts = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = SimRng::seed_from_u64(derive_seed(seed, r as u64));
            let mut hits = vec![0u64; checkpoints.len()];
            let mut ones = 0u64;
            let mut next = 0;
            for t in 1..=horizon {
                if always || rng.next_u64() < threshold {
                    ones += 1;
                }
                if t == checkpoints[next] {
                    let dev = (ones as f64 - t as f64 * p).abs();
                    if dev > kappa(t as u64) as f64 {
                        hits[next] += 1;
                    }
                    next += 1;
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; checkpoints.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    n_list
        .iter()
        .map(|&n| {
            let k = checkpoints.binary_search(&n).expect("checkpoint");
            let exceed = counts[k] as f64 / runs as f64;
            let stderr = (exceed * (1.0 - exceed) / runs as f64).sqrt();
            let kap = kappa(n as u64);
            let hoeffding = 2.0 * (-2.0 * (kap * kap) as f64 / n as f64).exp();
            KappaRow {
                p,
                n,
                kappa: kap,
                runs,
                exceed,
                stderr,
                hoeffding,
                passed: exceed <= 2.0 / (n as f64 * n as f64) + 4.0 * stderr,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckRow {
    pub scenario: usize,
    pub pair: String,
    pub classifier: String,
    pub n: usize,
    pub label: Label,
    pub exact: f64,
    pub mc: f64,
    /// `sqrt(e (1 - e) / draws)` at the exact value `e`.
    pub stderr: f64,
    pub within: bool,
}

/// A random pair on the line: interleaved intervals, a finite alphabet, or
/// atoms against the continuum.
pub fn random_line_pair(rng: &mut SimRng) -> ClassConditionalPair {
    match rng.random_range(0..6) {
        0 => ClassConditionalPair::AtomsVsContinuum {
            atoms: rng.random_range(2..64),
        },
        1 => {
            let mut pts: Vec<f64> = (0..rng.random_range(2..8)).map(|_| rng.random::<f64>()).collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let half = pts.len() / 2;
            let weights = |k: usize, rng: &mut SimRng| -> Vec<f64> {
                let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            };
            let w0 = weights(half, rng);
            let w1 = weights(pts.len() - half, rng);
            let to_support = |xs: &[f64], w: Vec<f64>| {
                xs.iter()
                    .zip(w)
                    .map(|(&x, prob)| WeightedPoint { point: vec![x], prob })
                    .collect()
            };
            ClassConditionalPair::DiscreteAlphabet {
                dim: 1,
                support0: to_support(&pts[..half], w0),
                support1: to_support(&pts[half..], w1),
            }
        }
        _ => {
            let m = rng.random_range(2..7usize);
            let mut cuts: Vec<f64> = (0..2 * m).map(|_| rng.random::<f64>()).collect();
            cuts.sort_by(f64::total_cmp);
            let first_one = rng.random::<bool>();
            let (mut c0, mut c1) = (Vec::new(), Vec::new());
            for k in 0..m {
                let iv = (cuts[2 * k], cuts[2 * k + 1]);
                if (k % 2 == 1) ^ first_one {
                    c1.push(iv);
                } else {
                    c0.push(iv);
                }
            }
            ClassConditionalPair::intervals(&c0, &c1).expect("interleaved intervals are disjoint")
        }
    }
}

fn random_classifier(rng: &mut SimRng) -> ClassifierSpec {
    match rng.random_range(0..5) {
        0 => ClassifierSpec::NearestNeighbour,
        1 => ClassifierSpec::Partition {
            cell_width: CellWidth::Default,
        },
        2 => ClassifierSpec::Partition {
            cell_width: CellWidth::Fixed {
                h: rng.random_range(0.01..0.3),
            },
        },
        3 => ClassifierSpec::ErmInterval,
        _ => ClassifierSpec::ErmKIntervals {
            k: rng.random_range(1..4),
        },
    }
}

fn pair_name(pair: &ClassConditionalPair) -> &'static str {
    match pair {
        ClassConditionalPair::DisjointBoxes { .. } => "disjoint_boxes",
        ClassConditionalPair::DiscreteAlphabet { .. } => "discrete_alphabet",
        ClassConditionalPair::AtomsVsContinuum { .. } => "atoms_vs_continuum",
    }
}

fn classifier_name(c: &ClassifierSpec) -> String {
    serde_json::to_string(c).expect("spec serialises")
}

/// Exact against Monte-Carlo class errors on random scenarios on the line.
/// Scenario `i` is drawn from `derive_seed(seed, i)`.
pub fn mc_crosscheck(scenarios: usize, draws: u64, seed: u64) -> Result<Vec<CrosscheckRow>> {
    let per = (0..scenarios)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut rng = SimRng::seed_from_u64(s);
            let pair = random_line_pair(&mut rng);
            let spec = random_classifier(&mut rng);
            let n = rng.random_range(5..300usize);
            let process = LabelProcess::IidBernoulli {
                p: rng.random_range(0.2..0.8),
            };
            let sample = generate(&process, &pair, n, derive_seed2(seed, i as u64, 1));
            let fitted = spec.fit(&sample)?;
            [Label::Zero, Label::One]
                .into_iter()
                .map(|y| {
                    let exact = class_error_exact(&fitted, &pair, y)?.value;
                    let mc = class_error_mc(&fitted, &pair, y, draws, derive_seed2(seed, i as u64, 2 + y.as_u8() as u64))?.value;
                    let stderr = (exact * (1.0 - exact) / draws as f64).sqrt();
                    Ok(CrosscheckRow {
                        scenario: i,
                        pair: pair_name(&pair).to_string(),
                        classifier: classifier_name(&spec),
                        n,
                        label: y,
                        exact,
                        mc,
                        stderr,
                        within: (mc - exact).abs() <= 4.0 * stderr,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_rows_are_sane() {
        let rows = kappa_admissibility(0.3, &[100, 10], 2000, 4);
        assert_eq!(rows[0].n, 100);
        assert_eq!(rows[1].n, 10);
        assert!(rows.iter().all(|r| r.passed && r.exceed <= 0.05));
        assert!((rows[0].hoeffding - 2e-4).abs() < 2e-4);
        let certain = kappa_admissibility(1.0, &[50], 10, 1);
        assert_eq!(certain[0].exceed, 0.0);
    }

    #[test]
    fn random_pairs_are_valid() {
        let mut rng = SimRng::seed_from_u64(3);
        for _ in 0..300 {
            random_line_pair(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn crosscheck_small() {
        let rows = mc_crosscheck(20, 2000, 8).unwrap();
        assert_eq!(rows.len(), 40);
        let ok = rows.iter().filter(|r| r.within).count();
        assert!(ok >= 38, "{ok}");
    }
}
