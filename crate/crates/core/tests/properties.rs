use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saswarm::coordination::{
    bco_coordinate, best_index, esa_coordinate, pso_position_sample, pso_velocity_update,
    sigmoid, velocity_component,
};
use saswarm::engine::{run_swarm, Swarm};
use saswarm::{
    accept, brute_force_optimum, is_feasible, objective, repair, run_sa, CoolingSchedule,
    CoordinatorKind, MkpInstance, PsoParams, PsoState, SaConfig, Solution, SwarmConfig,
};

mod common;

fn instance() -> impl Strategy<Value = MkpInstance> {
    (1usize..=10, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(1u32..100, n),
            prop::collection::vec(prop::collection::vec(0u32..30, n), m),
            prop::collection::vec(0u32..80, m),
        )
            .prop_map(|(p, w, b)| {
                let f = |v: &Vec<u32>| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
                MkpInstance::new("prop", f(&p), w.iter().map(f).collect(), f(&b), None).unwrap()
            })
    })
}

fn instance_and_bits() -> impl Strategy<Value = (MkpInstance, Vec<bool>)> {
    instance().prop_flat_map(|t| {
        let n = t.n();
        (Just(t), prop::collection::vec(any::<bool>(), n))
    })
}

fn quick_sa() -> SaConfig {
    SaConfig {
        outer_iterations: 30,
        inner_iterations: 2,
        ..SaConfig::default()
    }
}

proptest! {
    #[test]
    fn repair_is_feasible_and_keeps_feasible_input((t, bits) in instance_and_bits()) {
        let fixed = repair(&t, &bits).unwrap();
        prop_assert!(is_feasible(&t, fixed.bits()).unwrap());
        prop_assert_eq!(fixed.fitness(), objective(&t, fixed.bits()).unwrap());
        if is_feasible(&t, &bits).unwrap() {
            prop_assert_eq!(fixed.bits(), bits.as_slice());
        }
        // Repair is a fixed point on its own output.
        prop_assert_eq!(&repair(&t, fixed.bits()).unwrap(), &fixed);
    }

    #[test]
    fn objective_is_additive_over_disjoint_sets((t, a) in instance_and_bits(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<bool> = a.iter().map(|&x| !x && rng.gen()).collect();
        let union: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        let sum = objective(&t, &a).unwrap() + objective(&t, &b).unwrap();
        prop_assert!((objective(&t, &union).unwrap() - sum).abs() < 1e-9);
    }

    #[test]
    fn dropping_items_preserves_feasibility((t, bits) in instance_and_bits(), j in any::<prop::sample::Index>()) {
        let x = repair(&t, &bits).unwrap();
        let mut fewer = x.bits().to_vec();
        fewer[j.index(t.n())] = false;
        prop_assert!(is_feasible(&t, &fewer).unwrap());
        prop_assert!(objective(&t, &fewer).unwrap() <= x.fitness());
    }

    #[test]
    fn brute_force_dominates((t, bits) in instance_and_bits(), seed in any::<u64>()) {
        let opt = brute_force_optimum(&t).unwrap();
        prop_assert!(is_feasible(&t, opt.bits()).unwrap());
        let hot = repair(&t, &bits).unwrap();
        prop_assert!(opt.fitness() >= hot.fitness());
        let (frozen, trace) = run_sa(&t, &hot, &quick_sa(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(opt.fitness() >= frozen.fitness());
        prop_assert!(frozen.fitness() >= hot.fitness());
        prop_assert!(is_feasible(&t, frozen.bits()).unwrap());
        prop_assert_eq!(trace.end_fitness, frozen.fitness());
    }

    #[test]
    fn cold_annealing_never_goes_downhill((t, bits) in instance_and_bits(), seed in any::<u64>()) {
        let cfg = SaConfig { t_hot: Some(2e-12), t_frozen: 1e-12, ..quick_sa() };
        let hot = repair(&t, &bits).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut current = hot.clone();
        for _ in 0..5 {
            let (next, trace) = run_sa(&t, &current, &cfg, &mut rng).unwrap();
            prop_assert!(next.fitness() >= current.fitness());
            prop_assert!(trace.accepted_moves <= trace.proposed_moves);
            current = next;
        }
    }

    #[test]
    fn acceptance_rule(delta in -1e3f64..1e3, t in 1e-3f64..1e3, rho in 0.0f64..1.0) {
        let got = accept(delta, t, rho).unwrap();
        if delta >= 0.0 {
            prop_assert!(got);
        } else {
            prop_assert_eq!(got, (delta / t).exp() >= rho);
        }
    }

    #[test]
    fn cooling_is_geometric_between_endpoints(t_hot in 1.0f64..1e4, frac in 1e-6f64..0.9, levels in 2usize..500) {
        let t_frozen = t_hot * frac;
        let s = CoolingSchedule::new(t_hot, t_frozen, levels).unwrap();
        prop_assert_eq!(s.temperature(0), t_hot);
        prop_assert_eq!(s.temperature(levels - 1), t_frozen);
        for l in 1..levels {
            prop_assert!(s.temperature(l) < s.temperature(l - 1));
        }
    }

    #[test]
    fn velocity_stays_clamped(
        v in -1e3f64..1e3, w in 0.0f64..2.0, x in 0..2u8, y in 0..2u8, g in 0..2u8,
        r1 in 0.0f64..1.0, r2 in 0.0f64..1.0, v_max in 0.1f64..10.0, delta in 0.1f64..3.0,
    ) {
        let p = PsoParams { v_max, delta, ..PsoParams::default() };
        let out = velocity_component(v, w, x as f64, y as f64, g as f64, r1, r2, &p);
        prop_assert!(out.abs() <= v_max);
    }

    #[test]
    fn coordinators_keep_pool_shape((t, bits) in instance_and_bits(), size in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Solution> = (0..size)
            .map(|i| {
                let b: Vec<bool> = bits.iter().map(|&x| x ^ (i % 2 == 1 && rng.gen())).collect();
                repair(&t, &b).unwrap()
            })
            .collect();

        prop_assert_eq!(&esa_coordinate(&pool).unwrap(), &pool);

        let best = pool[best_index(&pool).unwrap()].clone();
        let bco = bco_coordinate(&pool, &best).unwrap();
        prop_assert_eq!(bco.len(), size);
        prop_assert!(bco.iter().all(|s| s.bits() == best.bits()));

        let params = PsoParams::default();
        let mut state = PsoState::new(&pool, &params, &mut rng).unwrap();
        let next = saswarm::coordination::pso_coordinate(&mut state, &pool, &params, &t, &mut rng).unwrap();
        prop_assert_eq!(next.len(), size);
        prop_assert!(next.iter().all(|s| is_feasible(&t, s.bits()).unwrap()));
        prop_assert!(state.velocities.iter().flatten().all(|v| v.abs() <= params.v_max));
    }
}

#[test]
fn inertia_decays_geometrically() {
    let t = common::mknap1_head().problems[1].clone();
    let params = PsoParams { beta: 0.975, ..PsoParams::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool: Vec<Solution> = (0..4)
        .map(|_| repair(&t, &(0..t.n()).map(|_| rng.gen()).collect::<Vec<_>>()).unwrap())
        .collect();
    let mut state = PsoState::new(&pool, &params, &mut rng).unwrap();
    for g in 1..=60 {
        pso_velocity_update(&mut state, &pool, &params, &mut rng).unwrap();
        let expected = params.w0 * params.beta.powi(g);
        assert!((state.inertia - expected).abs() <= 1e-12 * expected, "g={g}");
        assert!(state.velocities.iter().flatten().all(|v| v.abs() <= params.v_max));
    }
}

#[test]
fn sigmoid_sampling_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 10_000;
    for (v, expected) in [(0.0, 0.5), (4.0, 0.9820), (-4.0, 0.0180)] {
        assert!((sigmoid(v) - expected).abs() < 5e-5);
        let vel = vec![vec![v; draws]];
        let bits = pso_position_sample(&vel, &mut rng).unwrap();
        let freq = bits[0].iter().filter(|&&b| b).count() as f64 / draws as f64;
        assert!((freq - expected).abs() <= 0.02, "v={v} freq={freq}");
    }
}

#[test]
fn repair_feasible_on_random_vectors_per_problem() {
    let file = common::mknap1_problems();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for t in &file.problems {
        for _ in 0..10_000 {
            let bits: Vec<bool> = (0..t.n()).map(|_| rng.gen()).collect();
            let s = repair(t, &bits).unwrap();
            assert!(is_feasible(t, s.bits()).unwrap(), "{}", t.name());
        }
    }
}

#[test]
fn run_is_identical_across_thread_counts() {
    let t = common::mknap1_head().problems[2].clone();
    for kind in [CoordinatorKind::esa(), CoordinatorKind::bco(), CoordinatorKind::pso()] {
        let cfg = SwarmConfig {
            swarm_size: 8,
            generations: 12,
            sa: SaConfig { outer_iterations: 50, inner_iterations: 2, ..SaConfig::default() },
            coordinator: kind,
            seed: 77,
            stop_at_optimum: false,
        };
        let runs: Vec<_> = [1, 4, 16]
            .iter()
            .map(|&threads| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap()
                    .install(|| run_swarm(&t, &cfg).unwrap())
            })
            .collect();
        assert!(runs[0].same_outcome(&runs[1]));
        assert!(runs[0].same_outcome(&runs[2]));
    }
}

#[test]
fn swarm_pool_invariants_over_generations() {
    let t = common::mknap1_head().problems[2].clone();
    for kind in [CoordinatorKind::esa(), CoordinatorKind::bco(), CoordinatorKind::pso()] {
        let cfg = SwarmConfig {
            swarm_size: 6,
            generations: 10,
            sa: SaConfig { outer_iterations: 40, ..SaConfig::default() },
            coordinator: kind.clone(),
            seed: 3,
            stop_at_optimum: false,
        };
        let mut swarm = Swarm::new(&t, cfg).unwrap();
        let mut last_best = f64::MIN;
        for _ in 0..10 {
            let stats = swarm.step(true).unwrap();
            assert_eq!(stats.frozen.len(), 6);
            assert_eq!(swarm.hot_pool().len(), 6);
            assert!(swarm.hot_pool().iter().all(|s| is_feasible(&t, s.bits()).unwrap()));
            assert!(stats.best_so_far >= last_best);
            last_best = stats.best_so_far;
            if kind == CoordinatorKind::esa() {
                assert_eq!(swarm.hot_pool(), stats.frozen.as_slice());
            }
        }
    }
}
