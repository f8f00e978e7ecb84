mod common;

use proptest::prelude::*;

use common::*;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use ranksched::competition::SeniorityState;
use ranksched::dynamics::stationary::EXACT_LIMIT;
use ranksched::dynamics::{
    brd_run, build_profile_graph, sink_analysis, sub_and_lag, DeviatorRule, GraphMode,
};
use ranksched::greedy::{
    algorithm1, algorithm2, check_identical_unit_stability, check_q2_unit_stability,
    enumerate_runs, rank_decreasing_witness, Greedy, TieBreak,
};
use ranksched::instances::{
    generate, matching_profile, reduce_3dm, solve_3dm_bruteforce, Family, FamilySpec,
    OccurrenceMode, ThreeDMInstance,
};
use ranksched::io::{parse_instance, parse_profile, serialize_instance, serialize_profile};
use ranksched::oracle::exists_ne;
use ranksched::oracle::{enumerate_ne, report, DEFAULT_CAP};
use ranksched::rational::{big_to_f64, int, rat, widen, Rational};
use ranksched::schedule::{
    best_responses, is_ne, is_ne_by_rebuild, outcome_by_rebuild, prefers, ranks, Analysis,
};
use ranksched::solvers::{
    gamma_frontier, make_inversed_policies, solve_inversed, solve_p2_unit, solve_q2_unit,
    TwoMachineRates,
};
use ranksched::{CompetitionStructure, Priorities, PriorityList, Profile};

const RULES: [DeviatorRule; 4] = [
    DeviatorRule::PriorityBased,
    DeviatorRule::LowestIdSuboptimal,
    DeviatorRule::HighestRankSuboptimal,
    DeviatorRule::UniformRandom,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ranks_are_conserved_per_set(n in 1usize..=7, m in 1usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let p = random_profile(&g, &mut r);
        let rk = ranks(&g, &p).unwrap();
        for set in g.sets() {
            let k = set.len() as i64;
            let total: Rational = set.iter().map(|&j| rk.get(j)).sum();
            prop_assert_eq!(total, rat(k * (k + 1), 2));
        }
    }

    #[test]
    fn ranks_nondecreasing_along_each_machine(n in 1usize..=7, m in 1usize..=3, seed: u64) {
        let mut r = rng(seed);
        let mut g = random_game(n, m, &mut r);
        g = g.with_competition(CompetitionStructure::Single).unwrap();
        let p = random_profile(&g, &mut r);
        let a = Analysis::new(&g, p).unwrap();
        for jobs in &a.schedule().machine_jobs {
            for w in jobs.windows(2) {
                prop_assert!(a.schedule().completion[w[0]] < a.schedule().completion[w[1]]);
                prop_assert!(a.rank(w[0]) <= a.rank(w[1]));
            }
        }
    }

    #[test]
    fn incremental_outcomes_match_rebuild(n in 1usize..=7, m in 1usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let p = random_profile(&g, &mut r);
        let a = Analysis::new(&g, p.clone()).unwrap();
        for j in 0..n {
            for i in 0..m {
                prop_assert_eq!(a.outcome(j, i), outcome_by_rebuild(&g, &p.with_move(j, i), j));
            }
        }
        prop_assert_eq!(a.is_ne(), is_ne_by_rebuild(&g, &p));
    }

    #[test]
    fn prefers_is_asymmetric_and_matches_best_responses(n in 1usize..=6, m in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let p = random_profile(&g, &mut r);
        let mut all_best = true;
        for j in 0..n {
            let br = best_responses(&g, &p, j).unwrap();
            all_best &= br.contains(&p.machine_of(j));
            for i in 0..m {
                let q = p.with_move(j, i);
                let fwd = prefers(&g, j, &p, &q).unwrap();
                prop_assert!(!(fwd && prefers(&g, j, &q, &p).unwrap()));
                if br.contains(&i) && !br.contains(&p.machine_of(j)) {
                    prop_assert!(fwd);
                }
            }
        }
        prop_assert_eq!(is_ne(&g, &p).unwrap().is_ne(), all_best);
    }

    #[test]
    fn ne_witness_is_a_real_improvement(n in 1usize..=6, m in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let p = random_profile(&g, &mut r);
        if let Some(d) = is_ne(&g, &p).unwrap().witness() {
            prop_assert!(prefers(&g, d.job, &p, &p.with_move(d.job, d.target)).unwrap());
        }
    }

    #[test]
    fn oracle_equilibria_are_exactly_the_stable_profiles(n in 1usize..=5, m in 1usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let ne = enumerate_ne(&g, DEFAULT_CAP, false).unwrap();
        for idx in 0..g.profile_count() as u64 {
            let p = Profile::from_index(idx, n, m);
            prop_assert_eq!(ne.binary_search(&p).is_ok(), is_ne_by_rebuild(&g, &p));
        }
        let rep = report(&g, DEFAULT_CAP, false).unwrap();
        prop_assert_eq!(rep.ne_profiles, ne);
        if let (Some(poa), Some(pos)) = (rep.poa, rep.pos) {
            prop_assert!(pos <= poa && pos >= int(1));
        }
    }

    #[test]
    fn greedy_outputs_are_cost_stable(n in 1usize..=8, m in 1usize..=3, seed: u64) {
        let mut r = rng(seed);
        let lists: Vec<Vec<usize>> = (0..m).map(|_| shuffled(n, &mut r)).collect();
        let g = unit_game(&vec![int(1); m], lists.clone());
        let p = algorithm1(&g, &TieBreak::LowestIndex).unwrap();
        let a = Analysis::new(&g, p.clone()).unwrap();
        prop_assert!(a.is_cost_stable());
        prop_assert_eq!(rank_decreasing_witness(&g, &p).unwrap().is_none(), a.is_ne());

        let rates: Vec<Rational> = (0..m).map(|_| small_rational(&mut r)).collect();
        let g = unit_game(&rates, lists);
        let p = algorithm2(&g, &TieBreak::LowestIndex).unwrap();
        let a = Analysis::new(&g, p.clone()).unwrap();
        prop_assert!(a.is_cost_stable());
        prop_assert_eq!(rank_decreasing_witness(&g, &p).unwrap().is_none(), a.is_ne());
    }

    #[test]
    fn unit_greedy_loads_are_balanced(n in 1usize..=12, m in 1usize..=4, seed: u64) {
        let mut r = rng(seed);
        let lists = (0..m).map(|_| shuffled(n, &mut r)).collect();
        let g = unit_game(&vec![int(1); m], lists);
        let p = algorithm1(&g, &TieBreak::LowestIndex).unwrap();
        let loads = Analysis::new(&g, p).unwrap().schedule().loads.clone();
        let hi = int(n.div_ceil(m) as i64);
        let lo = int((n / m) as i64);
        prop_assert!(loads.iter().all(|&l| l == hi || l == lo));
        prop_assert_eq!(loads.iter().filter(|&&l| l == hi && hi != lo).count(), n % m);
    }

    #[test]
    fn characterizations_match_is_ne(n in 1usize..=8, m in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let lists: Vec<Vec<usize>> = (0..m).map(|_| shuffled(n, &mut r)).collect();
        let g = unit_game(&vec![int(1); m], lists.clone());
        for (_, p) in enumerate_runs(&g, Greedy::Load).unwrap() {
            let ne = is_ne(&g, &p).unwrap().is_ne();
            prop_assert_eq!(check_identical_unit_stability(&g, &p).unwrap(), ne);
        }
        let slow = [rat(1, 2), rat(2, 3), rat(3, 4), rat(1, 3), int(1)][seed as usize % 5];
        let g = unit_game(&[int(1), slow], lists[..2].to_vec());
        for (_, p) in enumerate_runs(&g, Greedy::NextCompletion).unwrap() {
            let ne = is_ne(&g, &p).unwrap().is_ne();
            prop_assert_eq!(check_q2_unit_stability(&g, &p).unwrap(), ne, "{}", p);
        }
    }

    #[test]
    fn graph_edges_are_best_response_moves(n in 1usize..=5, m in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let graph = build_profile_graph(&g, GraphMode::AllPlayers, None, DEFAULT_CAP, false).unwrap();
        for v in 0..graph.vertex_count() {
            let p = graph.profile(v);
            let a = Analysis::new(&g, p.clone()).unwrap();
            prop_assert_eq!(graph.edges(v).is_empty(), a.is_ne());
            let total: Rational = graph.edges(v).iter().map(|e| e.probability).sum();
            prop_assert!(graph.edges(v).is_empty() || total == int(1));
            for e in graph.edges(v) {
                let q = graph.profile(e.to);
                prop_assert!(prefers(&g, e.deviator, &p, &q).unwrap());
                prop_assert!(a.best_responses(e.deviator).contains(&q.machine_of(e.deviator)));
            }
        }
    }

    #[test]
    fn sinks_cover_equilibria(n in 1usize..=5, m in 2usize..=3, seed: u64, rule in 0usize..4) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let sinks = sink_analysis(&g, RULES[rule], None, DEFAULT_CAP, false).unwrap();
        prop_assert!(!sinks.is_empty());
        let ne = enumerate_ne(&g, DEFAULT_CAP, false).unwrap();
        let singletons: Vec<Profile> = sinks.iter().filter(|s| s.is_singleton()).map(|s| s.members[0].clone()).collect();
        for p in &ne {
            prop_assert!(singletons.contains(p));
        }
        for s in &sinks {
            let total = s.distribution.iter().sum::<BigRational>();
            if s.exact {
                prop_assert_eq!(total, BigRational::one());
            } else {
                prop_assert!(s.members.len() > EXACT_LIMIT);
                prop_assert!((big_to_f64(&total) - 1.0).abs() < 1e-6);
            }
            if s.is_singleton() {
                prop_assert!(ne.contains(&s.members[0]));
            }
        }
    }

    #[test]
    fn lag_is_within_sub(n in 1usize..=9, m in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let g = unit_game(&vec![int(1); m], vec![(0..n).collect(); m]);
        let p = Profile::new((0..n).map(|_| rand::Rng::gen_range(&mut r, 0..m)).collect());
        let (sub, lag) = sub_and_lag(&g, &p).unwrap();
        prop_assert!(lag.iter().all(|j| sub.contains(j)));
    }

    #[test]
    fn brd_is_reproducible_and_improving(n in 1usize..=6, m in 2usize..=3, seed: u64, rule in 0usize..4) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let start = random_profile(&g, &mut r);
        let a = brd_run(&g, &start, RULES[rule], 200, seed).unwrap();
        let b = brd_run(&g, &start, RULES[rule], 200, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let mut prev = start;
        for step in &a.steps {
            prop_assert!(prefers(&g, step.deviator, &prev, &step.profile).unwrap());
            prev = step.profile.clone();
        }
    }
}

fn q2_game(n: usize, slow: Rational, r: &mut rand_chacha::ChaCha8Rng) -> ranksched::Game {
    unit_game(&[int(1), slow], vec![shuffled(n, r), shuffled(n, r)])
}

const SLOW: [(i64, i64); 6] = [(1, 1), (1, 2), (2, 3), (3, 4), (1, 3), (3, 5)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_witnesses_are_equilibria(n in 1usize..=12, seed: u64, s in 0usize..6) {
        let mut r = rng(seed);
        let g = q2_game(n, rat(SLOW[s].0, SLOW[s].1), &mut r);
        let res = if s == 0 { solve_p2_unit(&g) } else { solve_q2_unit(&g) }.unwrap();
        if let Some(w) = &res.witness {
            prop_assert!(is_ne_by_rebuild(&g, w));
        }
        prop_assert_eq!(res.has_ne(), res.witness.is_some());
        if n <= 7 {
            prop_assert_eq!(res.has_ne(), exists_ne(&g, DEFAULT_CAP, false).unwrap());
        }
    }

    #[test]
    fn inversed_policies_always_succeed(n in 1usize..=12, seed: u64) {
        let mut r = rng(seed);
        let lengths: Vec<Rational> = (0..n).map(|_| small_rational(&mut r)).collect();
        let (a, b) = make_inversed_policies(&PriorityList::new(shuffled(n, &mut r)));
        let competition = CompetitionStructure::Sets(random_sets(n, &mut r));
        let g = game(&lengths, &[int(1), int(1)], Priorities::PerMachine(vec![a, b]), competition);
        let res = solve_inversed(&g).unwrap();
        prop_assert!(res.has_ne());
        prop_assert!(is_ne_by_rebuild(&g, res.witness.as_ref().unwrap()));
    }

    #[test]
    fn gamma_frontier_has_at_most_two_close_members(n in 1usize..=14, seed: u64, s in 0usize..6) {
        let mut r = rng(seed);
        let g = q2_game(n, rat(SLOW[s].0, SLOW[s].1), &mut r);
        let block = TwoMachineRates::of(&g).unwrap().block();
        for k in 0..=n / block {
            let f = gamma_frontier(&g, k).unwrap();
            prop_assert!(!f.members.is_empty() && f.members.len() <= 2, "k={} size {}", k, f.members.len());
            if let [x, y] = f.members.as_slice() {
                let diff = x.jobs.iter().filter(|j| !y.jobs.contains(j)).count()
                    + y.jobs.iter().filter(|j| !x.jobs.contains(j)).count();
                prop_assert_eq!(diff, 2);
            }
        }
    }

    #[test]
    fn sink_distributions_are_stationary(n in 1usize..=5, m in 2usize..=3, seed: u64, rule in 0usize..4) {
        let mut r = rng(seed);
        let g = random_game(n, m, &mut r);
        let graph = build_profile_graph(&g, GraphMode::RuleRestricted(RULES[rule]), None, DEFAULT_CAP, false).unwrap();
        for sink in graph.sinks().unwrap() {
            let f = &sink.distribution;
            let members: Vec<usize> = sink.members.iter().map(|p| graph.vertex_of(p).unwrap()).collect();
            for (b, &vb) in members.iter().enumerate() {
                let mut inflow = if graph.edges(vb).is_empty() { f[b].clone() } else { BigRational::zero() };
                for (a, &va) in members.iter().enumerate() {
                    for e in graph.edges(va).iter().filter(|e| e.to == vb) {
                        inflow += &f[a] * widen(&e.probability);
                    }
                }
                if sink.exact {
                    prop_assert_eq!(&inflow, &f[b]);
                } else {
                    prop_assert!((big_to_f64(&inflow) - big_to_f64(&f[b])).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn reduction_of_matching_unions(n in 1usize..=3, layers in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let mut triples = Vec::new();
        for _ in 0..layers {
            let (ys, zs) = (shuffled(n, &mut r), shuffled(n, &mut r));
            triples.extend((0..n).map(|i| [i + 1, ys[i] + 1, zs[i] + 1]));
        }
        triples.shuffle(&mut r);
        let t = ThreeDMInstance::new(n, triples).unwrap();
        let g = reduce_3dm(&t, OccurrenceMode::Strict).unwrap();
        let size = t.triples.len();
        prop_assert_eq!(g.m(), size);
        prop_assert_eq!(g.n(), n + 3 * size);
        prop_assert_eq!(g.total_length(), int(4 * size as i64));
        prop_assert_eq!((0..g.n()).filter(|&j| g.length(j) == int(2)).count(), size - n);
        let matching = solve_3dm_bruteforce(&t).unwrap().expect("a union of matchings has one");
        let p = matching_profile(&t, &matching).unwrap();
        prop_assert!(is_ne_by_rebuild(&g, &p));
    }

    #[test]
    fn generators_are_deterministic(f in 0usize..Family::ALL.len(), m in 2usize..=4, k in 1usize..=3, num in 1i64..=8, den in 1i64..=8) {
        let spec = FamilySpec::new(Family::ALL[f]).m(m).k(k).r(rat(num.min(den), den));
        if let Ok(a) = generate(&spec) {
            let b = generate(&spec).unwrap();
            prop_assert_eq!(serialize_instance(&a), serialize_instance(&b));
        }
    }

    #[test]
    fn instances_round_trip(n in 1usize..=6, m in 1usize..=3, seed: u64, kind in 0usize..3) {
        let mut r = rng(seed);
        let mut g = random_game(n, m, &mut r);
        let lengths: Vec<Rational> = (0..n).map(|j| g.length(j)).collect();
        let rates: Vec<Rational> = (0..m).map(|i| g.rate(i)).collect();
        if kind == 1 {
            g = game(&lengths, &rates, Priorities::Global(PriorityList::new(shuffled(n, &mut r))), g.competition().clone());
        } else if kind == 2 {
            let sets = random_sets(n, &mut r);
            let lists = (0..m).map(|_| shuffled(sets.len(), &mut r)).collect();
            g = game(&lengths, &rates, Priorities::SetLevel(lists), CompetitionStructure::Sets(sets));
        }
        let text = serialize_instance(&g);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
        let p = random_profile(&g, &mut r);
        prop_assert_eq!(parse_profile(&back, &serialize_profile(&g, &p)).unwrap(), p);
    }
}

/// With unequal lengths inside a set, a move can help a job even though it
/// finishes later: the job overtakes a longer set-mate queued behind it.
#[test]
fn seniority_benefit_needs_equal_lengths_per_set() {
    let mut found = None;
    'search: for seed in 0..20_000u64 {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let m = r.gen_range(2..=3);
        let sets = random_sets(n, &mut r);
        let lengths: Vec<Rational> = (0..n).map(|_| int(r.gen_range(1..=4))).collect();
        let rates = vec![int(1); m];
        let lists = (0..m).map(|_| shuffled(sets.len(), &mut r)).collect();
        let g = game(
            &lengths,
            &rates,
            Priorities::SetLevel(lists),
            CompetitionStructure::Sets(sets),
        );
        let s = SeniorityState::from_profile(&g, &random_profile(&g, &mut r)).unwrap();
        for j in 0..n {
            let here = s.outcome(&g, j, s.machine_of(j)).unwrap();
            for i in (0..m).filter(|&i| i != s.machine_of(j)) {
                let there = s.outcome(&g, j, i).unwrap();
                if (there < here) != (there.completion() < here.completion()) {
                    found = Some(seed);
                    break 'search;
                }
            }
        }
    }
    assert!(found.is_some(), "no mixed-length counterexample found");
}
