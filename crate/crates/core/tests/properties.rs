mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sipqubo::encoding::fill_slack;
use sipqubo::instance::{EdgeDevice, Scenario};
use sipqubo::solvers::{solve_cim_sim, solve_sa, AnnealSchedule, CimSchedule};
use sipqubo::{
    build_encoding, build_encoding_for, build_qubo, decode_and_repair, decode_bits, evaluate_objective, solve_exact,
    solve_exhaustive, to_ising, ExactBounds, Execution, PenaltyMode, ProblemInstance, QuboMatrix, SipSolution,
    DEFAULT_ALPHA, DEFAULT_BETA,
};

fn random_bits(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..=1)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn exact_matches_brute_force(seed in 0u64..10_000) {
        let inst = common::tiny_instance(seed);
        let (want, _) = common::brute_force_optimum(&inst).expect("tiny instances are feasible");
        let got = solve_exact(&inst, &ExactBounds::for_instance(&inst), Execution::Sequential).unwrap();
        prop_assert!((got.breakdown.total - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!(common::feasible(&inst, &got.solution));
        prop_assert!((common::objective(&inst, &got.solution) - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn encoding_round_trips(seed in 0u64..10_000) {
        let inst = common::tiny_instance(seed);
        let enc = build_encoding(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sol = common::random_plan(&inst, &enc, &mut rng);
        let bits = common::encode(&sol, &enc);
        prop_assert_eq!(decode_bits(&bits, &enc).unwrap(), sol);
        let bits = random_bits(enc.num_vars, &mut rng);
        prop_assert_eq!(common::encode(&decode_bits(&bits, &enc).unwrap(), &enc), bits);
    }

    #[test]
    fn qubo_energy_is_penalized_objective(seed in 0u64..10_000, alpha in 1.0f64..1e4, beta in 1.0f64..1e3) {
        let inst = common::tiny_instance(seed);
        let enc = build_encoding(&inst);
        let q = build_qubo(&inst, &enc, alpha, beta, PenaltyMode::Paper).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let bits = random_bits(enc.num_vars, &mut rng);
            let sol = decode_bits(&bits, &enc).unwrap();
            let want = common::penalized(&inst, &sol, alpha, beta);
            prop_assert!((q.matrix.energy(&bits) - want).abs() <= 1e-6 * want.abs().max(1.0));
            prop_assert!((common::dense_energy(&q.matrix, &bits) - want).abs() <= 1e-6 * want.abs().max(1.0));
        }
    }

    #[test]
    fn ising_agrees_with_qubo(n in 1usize..10, seed in 0u64..10_000) {
        let q = QuboMatrix::random(n, seed);
        let is = to_ising(&q);
        for mask in 0u32..1 << n {
            let bits: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let spins: Vec<i8> = bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect();
            prop_assert!((is.energy(&spins) - common::dense_energy(&q, &bits)).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_is_linear_and_monotone(seed in 0u64..10_000) {
        let inst = common::tiny_instance(seed);
        let enc = build_encoding(&inst);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_plan(&inst, &enc, &mut rng);
        let mut b = a.clone();
        let e = rng.random_range(0..inst.num_edges());
        b.on_demand[0][e][0] += 1;
        b.reserved[0][e] += 1;
        let fa = evaluate_objective(&inst, &a).unwrap().total;
        let fb = evaluate_objective(&inst, &b).unwrap().total;
        prop_assert!(fb >= fa);
        let edge = &inst.edges[e];
        let step = edge.resv_trans_cost + inst.scenarios[0].probability * edge.ondem_trans_cost;
        prop_assert!((fb - fa - step).abs() < 1e-9);
        prop_assert!((fa - common::objective(&inst, &a)).abs() < 1e-9);
    }

    #[test]
    fn qubo_minimum_respects_linking(seed in 0u64..10_000) {
        let inst = common::tiny_instance(seed);
        let enc = build_encoding(&inst);
        prop_assume!(enc.num_vars <= 16);
        let q = build_qubo(&inst, &enc, DEFAULT_ALPHA, DEFAULT_BETA, PenaltyMode::Paper).unwrap();
        let best = solve_exhaustive(&q.matrix, Execution::Sequential).unwrap();
        let sol = decode_bits(&best.best_bits, &enc).unwrap();
        for e in 0..inst.num_edges() {
            prop_assert!(sol.subscribe[0][e] || sol.reserved[0][e] == 0);
        }
    }
}

fn unit_similarity_instance() -> ProblemInstance {
    let edge = |id, m: f64, r: f64, o: f64| EdgeDevice {
        id,
        memb_cost: m,
        resv_trans_cost: r,
        ondem_trans_cost: o,
    };
    ProblemInstance::new(
        1,
        vec![edge(0, 10.0, 1.0, 5.0), edge(1, 8.0, 2.0, 4.0)],
        vec![
            Scenario {
                id: 0,
                probability: 0.25,
                demand: vec![3],
                similarity: vec![vec![1.0, 1.0]],
            },
            Scenario {
                id: 1,
                probability: 0.75,
                demand: vec![1],
                similarity: vec![vec![1.0, 1.0]],
            },
        ],
        3,
        0,
    )
    .unwrap()
}

#[test]
fn slack_register_absorbs_integer_surplus() {
    let inst = unit_similarity_instance();
    let enc = build_encoding_for(&inst, PenaltyMode::Slack);
    let q = build_qubo(&inst, &enc, DEFAULT_ALPHA, DEFAULT_BETA, PenaltyMode::Slack).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for _ in 0..2000 {
        let sol = common::random_plan(&inst, &enc, &mut rng);
        let linked = (0..2).all(|e| sol.subscribe[0][e] || sol.reserved[0][e] == 0);
        let surplus_ok = (0..2).all(|s| {
            let over = common::supply(&inst, &sol, 0, s) - inst.scenarios[s].demand[0] as f64;
            (0.0..=enc.max_on_demand() as f64).contains(&over)
        });
        if !(linked && surplus_ok) {
            continue;
        }
        let mut bits = common::encode(&sol, &enc);
        fill_slack(&mut bits, &sol, &inst, &enc).unwrap();
        assert!((q.matrix.energy(&bits) - common::objective(&inst, &sol)).abs() < 1e-9);
        checked += 1;
    }
    assert!(checked > 50, "only {checked} plans sampled");
}

#[test]
fn zero_costs_give_the_lexicographically_smallest_plan() {
    let edge = |id| EdgeDevice {
        id,
        memb_cost: 0.0,
        resv_trans_cost: 0.0,
        ondem_trans_cost: 0.0,
    };
    let inst = ProblemInstance::new(
        1,
        vec![edge(0), edge(1), edge(2)],
        vec![Scenario {
            id: 0,
            probability: 1.0,
            demand: vec![2],
            similarity: vec![vec![1.0, 1.0, 1.0]],
        }],
        1,
        0,
    )
    .unwrap();
    let got = solve_exact(&inst, &ExactBounds::for_instance(&inst), Execution::Parallel).unwrap();
    // No memberships or reservations; the demand sits as far right as it can.
    let mut want = SipSolution::zeros(1, 3, 1);
    want.on_demand[0][2][0] = 2;
    assert_eq!(got.solution, want);
    assert_eq!(got.breakdown.total, 0.0);
}

#[test]
fn solver_endpoints_cost_what_their_energy_says() {
    for seed in 0..10u64 {
        let inst = common::tiny_instance(seed);
        let enc = build_encoding(&inst);
        let q = build_qubo(&inst, &enc, DEFAULT_ALPHA, DEFAULT_BETA, PenaltyMode::Paper).unwrap();
        let sa = solve_sa(
            &q.matrix,
            &AnnealSchedule {
                restarts: 4,
                ..AnnealSchedule::default_for(&q.matrix)
            },
            seed,
            Execution::Sequential,
        )
        .unwrap();
        let cim = solve_cim_sim(
            &q.matrix,
            &CimSchedule {
                restarts: 4,
                ..CimSchedule::default_for(enc.num_vars)
            },
            seed,
            Execution::Sequential,
        )
        .unwrap();
        let start = vec![1u8; enc.num_vars];
        let mut points = vec![(q.matrix.energy(&start), start)];
        points.push((sa.best_energy, sa.best_bits.clone()));
        points.push((cim.best_energy, cim.best_bits.clone()));
        for (energy, bits) in &points {
            let sol = decode_bits(bits, &enc).unwrap();
            let cost = common::penalized(&inst, &sol, DEFAULT_ALPHA, DEFAULT_BETA);
            assert!((energy - cost).abs() <= 1e-6 * cost.abs().max(1.0));
        }
        for r in [&sa, &cim] {
            assert_eq!(r.best_energy, q.matrix.energy(&r.best_bits));
            let outcome = decode_and_repair(&r.best_bits, &inst, &enc).unwrap();
            assert!(common::feasible(&inst, &outcome.solution));
        }
    }
}
