//! Predictors: nearest neighbour, histogram (partitioning) and empirical
//! risk minimisation, behind one fit/predict interface.

mod erm;
mod nn;
mod partition;
mod regions;

use serde::{Deserialize, Serialize};

pub use erm::{erm_finite, erm_interval, erm_k_intervals, Hypothesis, IntervalFit};
pub use partition::CellWidth;
pub use regions::DecisionRegions;

use crate::data::{Label, LabeledSample};
use crate::error::{Error, Result};
use nn::NearestNeighbour;
use partition::Histogram;

/// A trained decision rule `x -> {0, 1}`.
pub trait Predictor: Send + Sync {
    fn dim(&self) -> usize;

    fn predict(&self, x: &[f64]) -> Label;

    /// Exact piecewise-constant description, available on the line.
    fn decision_regions(&self) -> Option<DecisionRegions> {
        None
    }
}

/// Something that turns a training sample into a [`Predictor`].
pub trait Learner: Send + Sync {
    fn fit_predictor(&self, sample: &LabeledSample) -> Result<Box<dyn Predictor>>;

    /// Whether the fitted rule ignores the order of the training sample.
    fn is_symmetric(&self) -> bool;

    /// Fit, falling back to the constant-0 rule on an empty sample.
    fn fit_or_default(&self, sample: &LabeledSample) -> Result<Box<dyn Predictor>> {
        if sample.is_empty() {
            Ok(Box::new(ConstantPredictor {
                label: Label::Zero,
                dim: sample.dim(),
            }))
        } else {
            self.fit_predictor(sample)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantPredictor {
    pub label: Label,
    pub dim: usize,
}

impl Predictor for ConstantPredictor {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, _x: &[f64]) -> Label {
        self.label
    }

    fn decision_regions(&self) -> Option<DecisionRegions> {
        (self.dim == 1).then(|| DecisionRegions::constant(self.label))
    }
}

impl Predictor for Hypothesis {
    fn dim(&self) -> usize {
        match self {
            Hypothesis::Constant { .. } => 1,
            Hypothesis::Union { boxes } => boxes.first().map_or(1, |b| b.dim()),
        }
    }

    fn predict(&self, x: &[f64]) -> Label {
        Hypothesis::predict(self, x)
    }

    fn decision_regions(&self) -> Option<DecisionRegions> {
        self.regions()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierSpec {
    NearestNeighbour,
    Partition {
        #[serde(default)]
        cell_width: CellWidth,
    },
    ErmInterval,
    ErmKIntervals { k: usize },
    ErmFinite { hypotheses: Vec<Hypothesis> },
}

impl ClassifierSpec {
    /// Check the classifier choice against the dimension of the data it will see.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ClassifierSpec::NearestNeighbour => Ok(()),
            ClassifierSpec::Partition { cell_width } => cell_width.validate(),
            ClassifierSpec::ErmInterval | ClassifierSpec::ErmKIntervals { .. } if dim != 1 => {
                Err(Error::UnsupportedDimension { required: 1, actual: dim })
            }
            ClassifierSpec::ErmInterval => Ok(()),
            ClassifierSpec::ErmKIntervals { k } => {
                if *k == 0 {
                    Err(Error::invalid("erm_k_intervals.k", "k must be at least 1"))
                } else {
                    Ok(())
                }
            }
            ClassifierSpec::ErmFinite { hypotheses } => {
                if hypotheses.is_empty() {
                    return Err(Error::invalid("erm_finite.hypotheses", "hypothesis list is empty"));
                }
                hypotheses.iter().try_for_each(|h| h.validate(dim))
            }
        }
    }

    pub fn fit(&self, sample: &LabeledSample) -> Result<FittedClassifier> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        self.validate(sample.dim())?;
        let model = match self {
            ClassifierSpec::NearestNeighbour => Model::NearestNeighbour(NearestNeighbour::fit(sample)),
            ClassifierSpec::Partition { cell_width } => {
                Model::Partition(Histogram::fit(sample, cell_width.width(sample.len(), sample.dim())))
            }
            ClassifierSpec::ErmInterval => Model::Hypothesis(Hypothesis::intervals(&erm_interval(sample)?.intervals)),
            ClassifierSpec::ErmKIntervals { k } => {
                Model::Hypothesis(Hypothesis::intervals(&erm_k_intervals(sample, *k)?.intervals))
            }
            ClassifierSpec::ErmFinite { hypotheses } => {
                let (idx, _) = erm_finite(sample, hypotheses)?;
                Model::Hypothesis(hypotheses[idx].clone())
            }
        };
        Ok(FittedClassifier {
            spec: self.clone(),
            dim: sample.dim(),
            n_train: sample.len(),
            model,
        })
    }

    /// Whether this classifier family is restricted to the line.
    pub fn requires_line(&self) -> bool {
        matches!(self, ClassifierSpec::ErmInterval | ClassifierSpec::ErmKIntervals { .. })
    }
}

impl Learner for ClassifierSpec {
    fn fit_predictor(&self, sample: &LabeledSample) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.fit(sample)?))
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
enum Model {
    NearestNeighbour(NearestNeighbour),
    Partition(Histogram),
    Hypothesis(Hypothesis),
}

/// A trained classifier. Immutable; safe to share across threads.
#[derive(Clone, Debug)]
pub struct FittedClassifier {
    spec: ClassifierSpec,
    dim: usize,
    n_train: usize,
    model: Model,
}

impl FittedClassifier {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn training_size(&self) -> usize {
        self.n_train
    }

    /// All built-in rules ignore training order.
    pub fn symmetric(&self) -> bool {
        true
    }

    /// The selected hypothesis for ERM variants.
    pub fn hypothesis(&self) -> Option<&Hypothesis> {
        match &self.model {
            Model::Hypothesis(h) => Some(h),
            _ => None,
        }
    }

    /// Cell side used by a partition rule.
    pub fn cell_width(&self) -> Option<f64> {
        match &self.model {
            Model::Partition(h) => Some(h.width()),
            _ => None,
        }
    }
}

impl Predictor for FittedClassifier {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Label {
        match &self.model {
            Model::NearestNeighbour(m) => m.predict(x),
            Model::Partition(m) => m.predict(x),
            Model::Hypothesis(h) => h.predict(x),
        }
    }

    fn decision_regions(&self) -> Option<DecisionRegions> {
        if self.dim != 1 {
            return None;
        }
        match &self.model {
            Model::NearestNeighbour(m) => m.regions(),
            Model::Partition(m) => m.regions(),
            Model::Hypothesis(h) => h.regions(),
        }
    }
}

/// Number of training mistakes of `predictor` on `sample`.
pub fn empirical_error(predictor: &dyn Predictor, sample: &LabeledSample) -> usize {
    sample.iter().filter(|(x, y)| predictor.predict(x) != *y).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AxisBox, ClassConditionalPair};
    use Label::{One, Zero};

    #[test]
    fn nearest_neighbour_midpoint() {
        let s = LabeledSample::from_1d(&[(0.1, Zero), (0.9, One)]);
        let f = ClassifierSpec::NearestNeighbour.fit(&s).unwrap();
        assert_eq!(f.predict(&[0.2]), Zero);
        assert_eq!(f.predict(&[0.8]), One);
        let r = f.decision_regions().unwrap();
        assert_eq!(r.breakpoints, vec![0.5]);
        assert_eq!(r.labels, vec![Zero, One]);
    }

    #[test]
    fn nearest_neighbour_tie_goes_to_lowest_index() {
        let s = LabeledSample::from_1d(&[(0.0, Zero), (1.0, One)]);
        let f = ClassifierSpec::NearestNeighbour.fit(&s).unwrap();
        assert_eq!(f.predict(&[0.5]), Zero);
        let s = LabeledSample::from_1d(&[(1.0, One), (0.0, Zero)]);
        let f = ClassifierSpec::NearestNeighbour.fit(&s).unwrap();
        assert_eq!(f.predict(&[0.5]), One);

        let mut s2 = LabeledSample::empty(2);
        s2.push(&[0.0, 0.0], Zero);
        s2.push(&[2.0, 0.0], One);
        let f = ClassifierSpec::NearestNeighbour.fit(&s2).unwrap();
        assert_eq!(f.predict(&[1.0, 5.0]), Zero);
        assert_eq!(f.predict(&[1.5, 0.0]), One);
        assert!(f.decision_regions().is_none());
    }

    #[test]
    fn partition_majority_and_empty_cells() {
        let s = LabeledSample::from_1d(&[(0.1, Zero), (0.2, Zero), (0.3, One)]);
        let spec = ClassifierSpec::Partition {
            cell_width: CellWidth::Fixed { h: 0.5 },
        };
        let f = spec.fit(&s).unwrap();
        assert_eq!(f.predict(&[0.4]), Zero);
        assert_eq!(f.predict(&[0.7]), Zero); // empty cell
        let s = LabeledSample::from_1d(&[(0.1, Zero), (0.2, One)]);
        assert_eq!(spec.fit(&s).unwrap().predict(&[0.3]), Zero); // tie
        let s = LabeledSample::from_1d(&[(0.6, One), (0.2, Zero), (1.2, One)]);
        let f = spec.fit(&s).unwrap();
        let r = f.decision_regions().unwrap();
        assert_eq!(r.breakpoints, vec![0.5, 1.5]);
        assert_eq!(f.predict(&[-0.3]), Zero);
    }

    #[test]
    fn default_cell_width() {
        let w = CellWidth::Default;
        assert!((w.width(100, 1) - 0.1).abs() < 1e-15);
        assert!((w.width(10_000, 2) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_hypothesis_class() {
        let s = LabeledSample::from_1d(&[(0.1, Zero), (0.9, One)]);
        let spec = ClassifierSpec::ErmFinite {
            hypotheses: vec![Hypothesis::Constant { label: One }],
        };
        let f = spec.fit(&s).unwrap();
        for x in [-3.0, 0.0, 0.5, 10.0] {
            assert_eq!(f.predict(&[x]), One);
        }
    }

    #[test]
    fn empirical_error_counts() {
        let s = LabeledSample::from_1d(&[(0.1, One), (0.2, One), (0.3, Zero), (0.4, One)]);
        let zero = Hypothesis::Constant { label: Zero };
        assert_eq!(empirical_error(&zero, &s), 3);
        let pair = ClassConditionalPair::intervals(&[(0.0, 0.25)], &[(0.5, 1.0)]).unwrap();
        let eta = Hypothesis::Union {
            boxes: vec![AxisBox::interval(0.5, 1.0)],
        };
        let sample = crate::data::generate(&crate::data::LabelProcess::IidBernoulli { p: 0.5 }, &pair, 50, 3);
        assert_eq!(empirical_error(&eta, &sample), 0);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(ClassifierSpec::NearestNeighbour.fit(&LabeledSample::empty(1)).unwrap_err(), Error::EmptySample);
        let mut s2 = LabeledSample::empty(2);
        s2.push(&[0.0, 0.0], Zero);
        assert!(matches!(
            ClassifierSpec::ErmInterval.fit(&s2),
            Err(Error::UnsupportedDimension { required: 1, actual: 2 })
        ));
    }

    #[test]
    fn spec_serde() {
        let s: ClassifierSpec = serde_json::from_str(r#"{"type":"partition"}"#).unwrap();
        assert_eq!(s, ClassifierSpec::Partition { cell_width: CellWidth::Default });
        let s: ClassifierSpec = serde_json::from_str(r#"{"type":"erm_k_intervals","k":3}"#).unwrap();
        assert_eq!(s, ClassifierSpec::ErmKIntervals { k: 3 });
    }
}
