use condiid::classifiers::{CellWidth, ClassifierSpec, Learner, Predictor};
use condiid::data::{generate, ClassConditionalPair, LabelProcess, LabeledSample};
use condiid::error_eval::ErrorMode;
use condiid::tolerance::{delta_pointwise, PoolConfig, Search, ToleranceContext, ToleranceMode};
use proptest::prelude::*;

/// A symmetric rule that claims to depend on training order, so the search
/// also ranges over permutations.
struct OrderBlind(ClassifierSpec);

impl Learner for OrderBlind {
    fn fit_predictor(&self, sample: &LabeledSample) -> condiid::Result<Box<dyn Predictor>> {
        self.0.fit_predictor(sample)
    }

    fn is_symmetric(&self) -> bool {
        false
    }
}

fn spec_strategy() -> impl Strategy<Value = ClassifierSpec> {
    prop_oneof![
        Just(ClassifierSpec::NearestNeighbour),
        Just(ClassifierSpec::Partition {
            cell_width: CellWidth::Fixed { h: 0.15 }
        }),
        Just(ClassifierSpec::ErmInterval),
        Just(ClassifierSpec::ErmKIntervals { k: 2 }),
    ]
}

fn mode_strategy() -> impl Strategy<Value = ToleranceMode> {
    prop_oneof![Just(ToleranceMode::Deletion), Just(ToleranceMode::Replacement)]
}

fn pair() -> ClassConditionalPair {
    ClassConditionalPair::intervals(&[(0.0, 0.35), (0.6, 0.8)], &[(0.4, 0.55), (0.85, 1.0)]).unwrap()
}

fn ctx<'a>(learner: &'a dyn Learner, pair: &'a ClassConditionalPair, p: f64, seed: u64) -> ToleranceContext<'a> {
    ToleranceContext {
        learner,
        pair,
        p,
        eval: ErrorMode::Exact,
        pool: PoolConfig { fresh_draws: 3, seed },
    }
}

fn stochastic(budget: u64, seed: u64) -> Search {
    Search::Stochastic {
        budget,
        greedy_rounds: 1,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn larger_budget_never_reports_less(
        spec in spec_strategy(),
        mode in mode_strategy(),
        n in 3usize..30,
        kappa in 1usize..4,
        (b1, b2) in (0u64..20, 0u64..20),
        seed in any::<u64>(),
    ) {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, n, seed);
        let c = ctx(&spec, &pair, 0.5, seed ^ 1);
        let (lo, hi) = (b1.min(b2), b1.max(b2));
        let small = delta_pointwise(c, &s, kappa.min(n), mode, stochastic(lo, seed)).unwrap().value;
        let large = delta_pointwise(c, &s, kappa.min(n), mode, stochastic(hi, seed)).unwrap().value;
        prop_assert!(large >= small);
        prop_assert!((0.0..=1.0).contains(&small) && (0.0..=1.0).contains(&large));
    }

    #[test]
    fn larger_kappa_never_reports_less(
        spec in spec_strategy(),
        mode in mode_strategy(),
        n in 4usize..11,
        k1 in 0usize..4,
        k2 in 0usize..4,
        exact in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.4 }, &pair, n, seed);
        let c = ctx(&spec, &pair, 0.4, seed ^ 2);
        let search = if exact { Search::Exact } else { stochastic(8, seed) };
        let (lo, hi) = (k1.min(k2), k1.max(k2));
        let small = delta_pointwise(c, &s, lo, mode, search).unwrap();
        let large = delta_pointwise(c, &s, hi, mode, search).unwrap();
        prop_assert!(large.value >= small.value);
        if lo == 0 {
            prop_assert_eq!(small.value, 0.0);
        }
    }

    #[test]
    fn permutations_do_not_matter_for_symmetric_rules(
        spec in spec_strategy(),
        n in 2usize..=8,
        kappa in 0usize..3,
        seed in any::<u64>(),
    ) {
        let pair = pair();
        let s = generate(&LabelProcess::IidBernoulli { p: 0.5 }, &pair, n, seed);
        let kappa = kappa.min(n);
        let subsets = delta_pointwise(ctx(&spec, &pair, 0.5, 0), &s, kappa, ToleranceMode::Deletion, Search::Exact).unwrap();
        let blind = OrderBlind(spec.clone());
        let ordered = delta_pointwise(ctx(&blind, &pair, 0.5, 0), &s, kappa, ToleranceMode::Deletion, Search::Exact).unwrap();
        prop_assert_eq!(subsets.value, ordered.value);
        prop_assert!(ordered.evaluations >= subsets.evaluations);
    }
}
