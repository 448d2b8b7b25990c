use condiid::data::{
    generate, occupancy_prob, occupancy_prob_mc, ClassConditionalPair, LabelProcess, OccupancyMethod,
};
use proptest::prelude::*;

fn processes() -> impl Strategy<Value = LabelProcess> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|p| LabelProcess::IidBernoulli { p }),
        (0.01f64..1.0, 0.01f64..1.0, 0.0f64..=1.0)
            .prop_map(|(t01, t10, init1)| LabelProcess::TwoStateMarkov { t01, t10, init1 }),
    ]
}

fn pairs() -> impl Strategy<Value = ClassConditionalPair> {
    prop_oneof![
        (2u32..100).prop_map(|atoms| ClassConditionalPair::AtomsVsContinuum { atoms }),
        (0.1f64..0.9).prop_map(|c| ClassConditionalPair::intervals(&[(0.0, c)], &[(c + 0.01, 1.0)]).unwrap()),
        Just(ClassConditionalPair::intervals(&[(0.0, 0.2), (0.5, 0.6)], &[(0.3, 0.4), (0.7, 1.0)]).unwrap()),
    ]
}

proptest! {
    #[test]
    fn generated_labels_follow_eta(process in processes(), pair in pairs(), n in 1usize..400, seed in any::<u64>()) {
        let s = generate(&process, &pair, n, seed);
        prop_assert_eq!(s.len(), n);
        for (x, y) in s.iter() {
            prop_assert_eq!(pair.eta(x).unwrap(), y);
        }
        let again = generate(&process, &pair, n, seed);
        prop_assert_eq!(s.coords().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.coords().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(s.labels(), again.labels());
    }

    #[test]
    fn occupancy_shrinks_as_band_narrows(process in processes(), n in 1usize..300) {
        let mut last = f64::INFINITY;
        for k in 1..=10 {
            let delta = k as f64 * 0.05;
            let c = occupancy_prob(&process, delta, n, None, 0).unwrap();
            prop_assert!(c.value <= last + 1e-12, "delta = {}", delta);
            prop_assert!((c.value + c.complement - 1.0).abs() < 1e-9);
            last = c.value;
        }
    }
}

#[test]
fn occupancy_is_one_in_the_wide_band_limit() {
    for process in [
        LabelProcess::IidBernoulli { p: 0.3 },
        LabelProcess::TwoStateMarkov {
            t01: 0.2,
            t10: 0.6,
            init1: 0.0,
        },
    ] {
        let c = occupancy_prob(&process, 1e-9, 5000, None, 0).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12, "{process:?}");
    }
}

#[test]
fn monte_carlo_occupancy_agrees_with_exact() {
    for (i, process) in [
        LabelProcess::IidBernoulli { p: 0.35 },
        LabelProcess::TwoStateMarkov {
            t01: 0.1,
            t10: 0.3,
            init1: 0.5,
        },
    ]
    .into_iter()
    .enumerate()
    {
        for (n, delta) in [(40, 0.3), (200, 0.2)] {
            let exact = occupancy_prob(&process, delta, n, None, 0).unwrap();
            assert_eq!(exact.method, OccupancyMethod::Exact);
            let mc = occupancy_prob_mc(&process, delta, n, 100_000, 1234 + i as u64);
            let OccupancyMethod::MonteCarlo { stderr, .. } = mc.method else {
                panic!("expected a Monte-Carlo estimate")
            };
            let se = stderr.max((exact.value * (1.0 - exact.value) / 1e5).sqrt());
            assert!((mc.value - exact.value).abs() <= 4.0 * se, "{process:?} n = {n}: {} vs {}", mc.value, exact.value);
        }
    }
}

#[test]
fn bernoulli_frequency_matches_p() {
    for (i, p) in [0.05, 0.3, 0.5, 0.9].into_iter().enumerate() {
        let labels = LabelProcess::IidBernoulli { p }.sample(100_000, 77 + i as u64);
        let freq = labels.iter().filter(|y| y.is_one()).count() as f64 / 1e5;
        assert!((freq - p).abs() <= 4.0 * (p * (1.0 - p) / 1e5).sqrt(), "p = {p}: {freq}");
    }
}
