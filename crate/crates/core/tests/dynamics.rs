use oncograph_core::dynamics::{
    build_pfa, build_pfa_with_neighbor, growth_probability, run, AngiogenicSwitch, CellState,
    DriverParams, GrowthPlan, ModelConfig, ModelState, PfaDefinition,
};
use oncograph_core::RngSeed;
use oncograph_oracles as oracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_switches() -> impl Iterator<Item = AngiogenicSwitch> {
    (0..11).flat_map(|a| {
        (0..11).flat_map(move |b| {
            (0..11).map(move |c| {
                AngiogenicSwitch::new(a as f64 / 10.0, b as f64 / 10.0, c as f64 / 10.0).unwrap()
            })
        })
    })
}

fn check_normalization(pfa: &PfaDefinition) {
    assert_eq!(pfa.initial_mass(), 1.0);
    for &s in pfa.states() {
        assert!(
            (pfa.row_mass(s) - 1.0).abs() < 1e-12,
            "{s}: {}",
            pfa.row_mass(s)
        );
        assert!((0.0..=1.0).contains(&pfa.final_probability(s)));
    }
    assert!(pfa
        .transitions()
        .iter()
        .all(|t| (0.0..=1.0).contains(&t.probability)));
}

#[test]
fn grid_switches_are_normalized() {
    for switch in grid_switches() {
        check_normalization(&build_pfa(&switch));
    }
}

/// Compare the compiled automaton against brute-force enumeration of every
/// success/failure pattern of the hand-transcribed cascade.
#[test]
fn compiled_rows_match_trial_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let neighbor_terms = [0.0, 0.25, 0.5, 1.0];
    for (i, switch) in grid_switches().enumerate().step_by(7) {
        let f = neighbor_terms[i % neighbor_terms.len()];
        let f = if i % 5 == 0 { rng.gen::<f64>() } else { f };
        let pfa = build_pfa_with_neighbor(&switch, f);
        let table = oracle::cascade_table(
            switch.angioprevention,
            switch.angiogenesis,
            switch.quiescent,
            f,
        );
        for (name, trials) in table {
            let state: CellState = name.parse().unwrap();
            for (outcome, p) in oracle::enumerate_cascade(&trials) {
                let compiled = match outcome {
                    None => pfa.final_probability(state),
                    Some(target) => {
                        let target: CellState = target.parse().unwrap();
                        pfa.row(state)
                            .filter(|t| t.to == target)
                            .map(|t| t.probability)
                            .sum()
                    }
                };
                assert!(
                    (compiled - p).abs() < 1e-12,
                    "{switch:?} f={f} {state} -> {outcome:?}: {compiled} vs {p}"
                );
            }
        }
    }
}

#[test]
fn asw1_inflamed_row_matches_enumeration() {
    let pfa = build_pfa(&AngiogenicSwitch::ASW1);
    let table = oracle::cascade_table(0.4, 0.6, 0.2, 0.0);
    let outcomes = oracle::enumerate_cascade(&table[2].1);
    let p = |o: Option<&str>| outcomes.iter().find(|(x, _)| *x == o).unwrap().1;
    assert!((p(Some("quiescent")) - 0.2).abs() < 1e-12);
    assert!((p(Some("dead")) - 0.32).abs() < 1e-12);
    assert!((p(None) - 0.48).abs() < 1e-12);
    assert!((pfa.final_probability(CellState::Inflamed) - 0.48).abs() < 1e-12);
}

fn single_cell_model(switch: AngiogenicSwitch, seed: u64) -> ModelState {
    let config = ModelConfig {
        initial_nodes: 1,
        er_edge_probability: 0.0,
        driver: DriverParams::with_stem_cells(1),
        switch,
        growth_plan: GrowthPlan::default(),
    };
    ModelState::new(config, RngSeed(seed)).unwrap()
}

/// Drive a lone agent through the real scheduler from `start` many times
/// and compare outcome frequencies with the compiled row.
fn one_step_frequencies(
    switch: AngiogenicSwitch,
    start: CellState,
    trials: usize,
    seed: u64,
) -> [f64; 6] {
    let mut model = single_cell_model(switch, seed);
    let mut counts = [0usize; 6];
    for _ in 0..trials {
        model.set_states(&[start]).unwrap();
        model.step().unwrap();
        counts[model.agents()[0].state.index()] += 1;
    }
    counts.map(|c| c as f64 / trials as f64)
}

fn expected_row(pfa: &PfaDefinition, start: CellState) -> [f64; 6] {
    let mut row = [0.0; 6];
    row[start.index()] += pfa.final_probability(start);
    for t in pfa.row(start) {
        row[t.to.index()] += t.probability;
    }
    row
}

#[test]
fn normal_row_one_step_distribution() {
    let n = 200_000;
    for switch in [AngiogenicSwitch::ASW1, AngiogenicSwitch::ASW3] {
        let freq = one_step_frequencies(switch, CellState::Normal, n, 3);
        let expected = expected_row(&build_pfa(&switch), CellState::Normal);
        for s in CellState::ALL {
            let p = expected[s.index()];
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq[s.index()] - p).abs() <= 3.0 * sigma + 1e-12,
                "{s}: {} vs {p}",
                freq[s.index()]
            );
        }
    }
}

#[test]
fn growth_probability_against_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for &(u, d, k, n) in &[(0.3, 2, 2, 2), (0.1, 5, 1, 3), (0.5, 1, 3, 4)] {
        let exact = growth_probability(&DriverParams { u, d, k, n_stem: n }).unwrap();
        let (mc, se) = oracle::monte_carlo_growth_probability(u, d, k, n, 200_000, &mut rng);
        assert!(
            (exact - mc).abs() < 3.0 * se,
            "({u},{d},{k},{n}): {exact} vs {mc} ± {se}"
        );
    }
}

#[test]
fn growth_probability_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let p = DriverParams {
            u: rng.gen_range(0.0..0.2),
            d: rng.gen_range(0..60),
            k: rng.gen_range(1..6),
            n_stem: rng.gen_range(1..200),
        };
        let base = growth_probability(&p).unwrap();
        let bumps = [
            DriverParams {
                u: (p.u * 1.5).min(1.0),
                ..p
            },
            DriverParams { d: p.d + 1, ..p },
            DriverParams {
                n_stem: p.n_stem + 7,
                ..p
            },
        ];
        for bumped in bumps {
            assert!(
                growth_probability(&bumped).unwrap() >= base,
                "{p:?} -> {bumped:?}"
            );
        }
        // more required pathways can only lower p
        let harder = DriverParams { k: p.k + 1, ..p };
        assert!(growth_probability(&harder).unwrap() <= base);
    }
}

fn arb_switch() -> impl Strategy<Value = AngiogenicSwitch> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0)
        .prop_map(|(a, b, c)| AngiogenicSwitch::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_switches_are_normalized(switch in arb_switch(), f in 0.0f64..=1.0) {
        check_normalization(&build_pfa(&switch));
        check_normalization(&build_pfa_with_neighbor(&switch, f));
    }

    #[test]
    fn step_invariants(
        switch in arb_switch(), n in 1usize..60, growth in 0usize..60, steps in 1usize..12, seed in any::<u64>()
    ) {
        let config = ModelConfig {
            initial_nodes: n,
            er_edge_probability: 0.08,
            driver: DriverParams::with_stem_cells(10),
            switch,
            growth_plan: GrowthPlan::uniform(growth, steps),
        };
        let mut model = ModelState::new(config, RngSeed(seed)).unwrap();
        let (mut dead, mut meta) = (0, 0);
        for i in 0..steps {
            let m = model.step().unwrap();
            prop_assert_eq!(m.step, i as u64 + 1);
            prop_assert_eq!(m.state_total(), m.n_nodes);
            prop_assert_eq!(model.agents().len(), model.graph().node_count());
            prop_assert!(m.n_dead >= dead && m.n_metastatic >= meta);
            dead = m.n_dead;
            meta = m.n_metastatic;
        }
        prop_assert_eq!(model.graph().node_count(), n + growth);
    }
}

#[test]
fn runs_are_reproducible() {
    let config = ModelConfig {
        initial_nodes: 100,
        er_edge_probability: 0.04,
        driver: DriverParams {
            u: 0.2,
            d: 3,
            k: 2,
            n_stem: 5,
        },
        switch: AngiogenicSwitch::ASW2,
        growth_plan: GrowthPlan::uniform(100, 20),
    };
    let a = run(ModelState::new(config.clone(), RngSeed(99)).unwrap(), 20).unwrap();
    let b = run(ModelState::new(config.clone(), RngSeed(99)).unwrap(), 20).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let c = run(ModelState::new(config, RngSeed(100)).unwrap(), 20).unwrap();
    assert_ne!(a.metrics, c.metrics);
    // a sizable redirection probability was actually used
    assert!(a.metrics[0].p_redirect > 0.01);
}
