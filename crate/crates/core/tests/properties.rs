use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use infosubs_core::classify::{
    check_trivial, classify_moderate, classify_weak, refute_strong, universal_complements_geometric, Mode,
    ModerateOptions, StrongOptions, Triviality, DEFAULT_TOL,
};
use infosubs_core::decision::Custom1D;
use infosubs_core::info::{ci, random_structure, xor2};
use infosubs_core::market::{expected_payoffs, run_market, MarketGame, Realization, ReportRule, StrategyProfile};
use infosubs_core::numeric::{bell, random_simplex};
use infosubs_core::select::{
    greedy_select, greedy_select_naive, reduce_from_set_function, SetFunction, TableFunction, ValueOracle,
};
use infosubs_core::value::{value_sampled, SamplingOptions};
use infosubs_core::{
    DecisionProblem, ExpectedScoreFunction as G, Garbling, InformationStructure, Partition, SignalSet, ValueContext,
};

fn structure(seed: u64, k: usize, sizes: &[usize]) -> InformationStructure {
    random_structure(&mut ChaCha8Rng::seed_from_u64(seed), k, sizes, 0.6)
}

fn arb_structure() -> impl Strategy<Value = InformationStructure> {
    (any::<u64>(), 2usize..=3, prop::collection::vec(2usize..=3, 1..=3))
        .prop_map(|(seed, k, sizes)| structure(seed, k, &sizes))
}

fn arb_rule(k: usize) -> impl Strategy<Value = G> {
    (0..4u8, any::<u64>()).prop_map(move |(which, seed)| match which {
        0 => G::Log,
        1 => G::Quadratic,
        2 => G::PiecewiseMax(DecisionProblem::random(&mut ChaCha8Rng::seed_from_u64(seed), 3, k)),
        _ => G::PiecewiseMax(DecisionProblem::guess(k)),
    })
}

fn arb_ctx() -> impl Strategy<Value = ValueContext> {
    arb_structure().prop_flat_map(|st| {
        let k = st.n_outcomes();
        arb_rule(k).prop_map(move |g| ValueContext::new(st.clone(), g).unwrap())
    })
}

fn arb_partition(len: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0usize..4, len).prop_map(|l| Partition::from_labels(&l))
}

fn arb_ci() -> impl Strategy<Value = InformationStructure> {
    (0.2f64..0.8, prop::collection::vec(0.55f64..0.95, 2..=3)).prop_map(|(r, s)| ci(r, &s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_laws((a, b, c) in (1usize..8).prop_flat_map(|n| (arb_partition(n), arb_partition(n), arb_partition(n)))) {
        let j = |x: &Partition, y: &Partition| x.join(y).unwrap();
        let m = |x: &Partition, y: &Partition| x.meet(y).unwrap();
        prop_assert_eq!(j(&a, &b), j(&b, &a));
        prop_assert_eq!(m(&a, &b), m(&b, &a));
        prop_assert_eq!(j(&j(&a, &b), &c), j(&a, &j(&b, &c)));
        prop_assert_eq!(m(&m(&a, &b), &c), m(&a, &m(&b, &c)));
        prop_assert_eq!(j(&a, &m(&a, &b)), a.clone());
        prop_assert_eq!(m(&a, &j(&a, &b)), a.clone());
        prop_assert!(j(&a, &b).refines(&a) && a.refines(&m(&a, &b)));
    }

    #[test]
    fn coarsening_count_is_bell(n in 0usize..=7) {
        prop_assert_eq!(Partition::top(n).coarsenings(12).unwrap().count() as u128, bell(n));
    }

    #[test]
    fn total_probability(st in arb_structure()) {
        let n = st.n_signals();
        for s in SignalSet::all(n) {
            let p = st.subset_signal(s).unwrap();
            let mut mix = vec![0.0; st.n_outcomes()];
            for cell in 0..p.n_cells() {
                let post = st.posterior(&p, cell).unwrap();
                for (m, x) in mix.iter_mut().zip(&post.dist) {
                    *m += post.mass * x;
                }
            }
            for (m, x) in mix.iter().zip(st.prior_marginal()) {
                prop_assert!((m - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subset_union_is_join(st in arb_structure()) {
        let n = st.n_signals();
        for a in SignalSet::all(n) {
            for b in SignalSet::all(n) {
                let lhs = st.subset_signal(a.union(b)).unwrap();
                let rhs = st.subset_signal(a).unwrap().join(&st.subset_signal(b).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn truthful_report_maximizes_expected_score(k in 2usize..=4, seed in any::<u64>(), which in 0u8..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = match which {
            0 => G::Log,
            1 => G::Quadratic,
            _ => G::PiecewiseMax(DecisionProblem::random(&mut rng, 3, k)),
        };
        let p = random_simplex(&mut rng, k);
        let q = random_simplex(&mut rng, k);
        prop_assert!(g.expected_score(&p, &p) >= g.expected_score(&q, &p) - 1e-12);
        // The divergence is the loss from misreporting.
        let loss = g.expected_score(&p, &p) - g.expected_score(&q, &p);
        prop_assert!((g.bregman(&p, &q) - loss).abs() < 1e-9);
    }

    #[test]
    fn three_way_agreement(c in arb_ctx()) {
        let st = c.structure();
        let bottom = st.subset_signal(SignalSet::EMPTY).unwrap();
        let v0 = c.value_exact(&bottom).unwrap();
        for s in SignalSet::all(st.n_signals()) {
            let p = st.subset_signal(s).unwrap();
            let v = c.value_exact(&p).unwrap();
            prop_assert!((v - c.value_entropy(&p).unwrap()).abs() < 1e-9);
            prop_assert!((v - v0 - c.marginal_bregman(&bottom, &p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn more_information_helps(c in arb_ctx()) {
        let n = c.n_signals();
        for s in SignalSet::all(n) {
            for i in (0..n).filter(|&i| !s.contains(i)) {
                prop_assert!(c.value_subset(s.insert(i)).unwrap() >= c.value_subset(s).unwrap() - 1e-12);
            }
        }
    }

    #[test]
    fn garbling_cannot_help(c in arb_ctx(), seed in any::<u64>(), s in 1u64..8) {
        let st = c.structure();
        let s = SignalSet(s).intersection(st.all_signals());
        let p = st.subset_signal(s).unwrap();
        let g = Garbling::random(p.clone(), 3, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(c.value_garbled(&g, None).unwrap() <= c.value_exact(&p).unwrap() + 1e-12);
        let id = Garbling::identity(p.clone());
        prop_assert!((c.value_garbled(&id, None).unwrap() - c.value_exact(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn weak_and_moderate_hierarchy(c in arb_ctx()) {
        let weak = classify_weak(&c, DEFAULT_TOL, 10).unwrap();
        let moderate = classify_moderate(&c, ModerateOptions::default()).unwrap();
        prop_assert!(!moderate.substitutes || weak.substitutes);
        prop_assert!(!moderate.complements || weak.complements);
        for w in weak.witnesses().chain(moderate.witnesses()) {
            let (l, r) = w.replay(&c).unwrap();
            prop_assert!((l - w.lhs).abs() < 1e-12 && (r - w.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_substitutes_resist_refutation(r in 0.2f64..0.8, seed in any::<u64>()) {
        // Each signal reveals E exactly.
        let st = ci(r, &[1.0, 1.0]);
        prop_assert_eq!(check_trivial(&st).unwrap(), Triviality::TrivialSubstitutes);
        let c = ValueContext::new(st, G::Quadratic).unwrap();
        let found = refute_strong(&c, Mode::Substitutes, StrongOptions { budget: 10, seed, ..Default::default() }).unwrap();
        prop_assert!(found.witness.is_none());
    }

    #[test]
    fn geometric_test_implies_weak_complements(q in 0.05f64..0.95, seed in any::<u64>()) {
        let st = xor2(q);
        if universal_complements_geometric(&st).unwrap().holds {
            let dp = DecisionProblem::random(&mut ChaCha8Rng::seed_from_u64(seed), 3, 2);
            let c = ValueContext::new(st, G::PiecewiseMax(dp)).unwrap();
            prop_assert!(classify_weak(&c, 1e-9, 10).unwrap().complements);
        }
    }

    #[test]
    fn lazy_greedy_matches_naive(st in arb_ci(), k in 1usize..=3) {
        let c = ValueContext::new(st, G::Log).unwrap();
        let f = ValueOracle::new(&c);
        let k = k.min(f.n());
        prop_assert_eq!(greedy_select(&f, k).unwrap(), greedy_select_naive(&f, k).unwrap());
    }

    #[test]
    fn reduction_is_exact_and_preserves_submodularity(n in 1usize..=4, w in prop::collection::vec(0.0f64..1.0, 16)) {
        // Weights on singletons and pairs only, nonnegative singletons,
        // nonpositive pairs bounded so the function stays monotone.
        let f = TableFunction::from_fn(n, |s| {
            let single: f64 = s.iter().map(|i| 1.0 + w[i]).sum();
            let pairs = s.len().saturating_sub(1) as f64 * s.len() as f64 / 2.0;
            single - 0.1 * pairs * w[15]
        });
        let red = reduce_from_set_function(&f, n).unwrap();
        prop_assert!(red.verify().unwrap().is_empty());
        let weak = classify_weak(red.ctx(), 1e-9, 10).unwrap();
        prop_assert!(weak.substitutes);
    }

    #[test]
    fn sampling_close_to_exact(st in arb_ci(), seed in any::<u64>()) {
        let c = ValueContext::new(st, G::Quadratic).unwrap();
        let s = SignalSet::full(c.n_signals());
        let est = value_sampled(&c, s, 0.1, 0.01, seed, SamplingOptions::default()).unwrap();
        // Within 2 eps: failure probability is far below proptest's notice.
        prop_assert!((est.estimate - c.value_subset(s).unwrap()).abs() < 0.2);
    }
}

fn market_game(st: InformationStructure, order: Vec<usize>) -> MarketGame {
    let n = st.n_signals();
    let ctx = ValueContext::new(st, G::Log).unwrap();
    MarketGame::new(ctx, (0..n).map(SignalSet::singleton).collect(), order).unwrap()
}

fn arb_rule_for(game: &MarketGame, trader: usize, choice: u8, seed: u64) -> ReportRule {
    let own = game.own_partition(trader).clone();
    match choice % 4 {
        0 => ReportRule::Truthful,
        1 => ReportRule::Silent,
        2 => ReportRule::Coarsened(Partition::bottom(own.len())),
        _ => ReportRule::Garbled(Garbling::random(own, 2, &mut ChaCha8Rng::seed_from_u64(seed))),
    }
}

fn random_profile(game: &MarketGame, choices: &[u8], seed: u64) -> StrategyProfile {
    let mut it = choices.iter().cycle();
    let rules = (0..game.n_traders())
        .map(|i| {
            (0..game.slots_of(i).len())
                .map(|k| arb_rule_for(game, i, *it.next().unwrap(), seed ^ (i * 31 + k) as u64))
                .collect()
        })
        .collect();
    StrategyProfile { rules }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn payoffs_telescope(st in arb_ci(), choices in prop::collection::vec(0u8..4, 6), seed in any::<u64>()) {
        let n = st.n_signals();
        let order: Vec<usize> = (0..4).map(|t| t % n).collect();
        let game = market_game(st.clone(), order);
        let profile = random_profile(&game, &choices, seed);
        for (gamma, a) in st.support().iter().enumerate() {
            for e in 0..st.n_outcomes() {
                if st.joint(gamma)[e] == 0.0 {
                    continue;
                }
                // Any draw that the garbling can produce: output 0 has
                // positive probability for random garblings.
                let realization = Realization { signals: a.clone(), e, draws: vec![0; game.horizon()] };
                let run = run_market(&game, &profile, &realization).unwrap();
                let total: f64 = run.payoffs.iter().sum();
                prop_assert!((total - run.total_score_change(&game)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_sum_under_full_revelation(st in arb_ci()) {
        let n = st.n_signals();
        let mut order: Vec<usize> = (0..n).collect();
        order.extend(0..n);
        let game = market_game(st, order);
        let pay = expected_payoffs(&game, &StrategyProfile::all_truthful(&game)).unwrap();
        let c = game.ctx();
        let full = c.value_subset(SignalSet::full(n)).unwrap() - c.value_subset(SignalSet::EMPTY).unwrap();
        prop_assert!((pay.iter().sum::<f64>() - full).abs() < 1e-9);
    }

    #[test]
    fn final_slot_truthfulness(st in arb_ci(), choices in prop::collection::vec(0u8..4, 6), seed in any::<u64>()) {
        let n = st.n_signals();
        let order: Vec<usize> = (0..4).map(|t| t % n).collect();
        let game = market_game(st, order);
        let profile = random_profile(&game, &choices, seed);
        let base = expected_payoffs(&game, &profile).unwrap();
        for i in 0..game.n_traders() {
            let mut p = profile.clone();
            *p.rules[i].last_mut().unwrap() = ReportRule::Truthful;
            let better = expected_payoffs(&game, &p).unwrap();
            prop_assert!(better[i] >= base[i] - 1e-9 || base[i].is_nan());
        }
    }
}

#[test]
fn kinked_rule_is_rejected_when_not_convex() {
    assert!(Custom1D::new(vec![(0.0, 1.0), (0.5, 0.0), (1.0, 2.0)]).is_ok());
    assert!(Custom1D::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
}

#[test]
fn classification_agrees_with_market_outcomes() {
    use infosubs_core::market::{verify_equilibrium, DeviationClass};
    let class = DeviationClass { garbled_seeds: 3, ..Default::default() };
    let fixtures = [xor2(0.6), xor2(0.3), ci(0.5, &[0.8, 0.7]), ci(0.3, &[0.9, 0.6])];
    for st in fixtures {
        let c = ValueContext::new(st.clone(), G::Log).unwrap();
        let weak = classify_weak(&c, DEFAULT_TOL, 10).unwrap();
        if !st.is_distinguishable().holds() {
            continue;
        }
        let game = market_game(st, vec![0, 1, 0]);
        let rush = verify_equilibrium(&game, &StrategyProfile::all_rush(&game), &class, 1e-9).unwrap();
        let delay = verify_equilibrium(&game, &StrategyProfile::all_delay(&game), &class, 1e-9).unwrap();
        if weak.complements_strictness == Some(infosubs_core::classify::Strictness::Strict) {
            assert!(delay.verified && !rush.verified);
        }
        if weak.substitutes_strictness == Some(infosubs_core::classify::Strictness::Strict) {
            assert!(rush.verified && !delay.verified);
        }
    }
}
