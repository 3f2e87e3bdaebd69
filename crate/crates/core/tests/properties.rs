use num_integer::Integer;
use proptest::prelude::*;

use icd::fractions::{
    case2_chain, enclosing_adjacent_pair, lower_bound_cuts, nearest_qp_ratio, qp_factor, qstar_member,
    upper_bound_cuts,
};
use icd::generators::{build_sat_solution, exactly1_solutions, gen_random, gen_sat_gadget, Formula};
use icd::measures::{circle_to_interval, measures_by_label, verify, Division, Domain, Instance, TargetSpec};
use icd::necklace::{necklace_to_instance, solve_necklace, Necklace, NecklaceOutcome};
use icd::pipelines::{more_cuts_solve, upper_bound_solve, PipelineOptions};
use icd::solver::{solve, PruneFlags, SearchConfig};
use icd::io::InstanceDocument;
use icd::Ratio;

fn r(n: i64, d: i64) -> Ratio {
    Ratio::frac(n, d)
}

fn proper_fraction() -> impl Strategy<Value = (i64, i64)> {
    (2i64..=400).prop_flat_map(|k| (1..k, Just(k))).prop_filter("reduced", |(l, k)| l.gcd(k) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn qstar_is_complement_symmetric((l, k) in proper_fraction()) {
        let a = r(l, k);
        prop_assert_eq!(qstar_member(&a).is_some(), qstar_member(&a.complement()).is_some());
    }

    #[test]
    fn enclosing_pair_is_the_mediant_split((l, k) in proper_fraction()) {
        let (lo, hi) = enclosing_adjacent_pair(&r(l, k)).unwrap();
        let (l1, k1) = lo.to_u64_pair().unwrap();
        let (l2, k2) = hi.to_u64_pair().unwrap();
        prop_assert_eq!((l1 + l2, k1 + k2), (l as u64, k as u64));
        prop_assert_eq!((l2 * k1) as i64 - (l1 * k2) as i64, 1);
    }

    #[test]
    fn remainder_chain_descends_into_qstar((l, k) in proper_fraction()) {
        let a = r(l, k);
        prop_assume!(qstar_member(&a).is_none());
        let chain = case2_chain(&a).unwrap();
        for w in chain.ratios.windows(2) {
            prop_assert!(w[1].numer() < w[0].numer());
        }
        prop_assert!(qstar_member(chain.last()).is_some());
        for (i, d) in chain.divisors.iter().enumerate() {
            prop_assert_eq!(chain.ratios[i + 1].complement(), Ratio::int(*d as i64) * &chain.ratios[i]);
        }
    }
}

#[test]
fn lower_bound_never_exceeds_upper_bound() {
    for k in 2..=12i64 {
        for l in 1..k {
            if l.gcd(&k) != 1 {
                continue;
            }
            for n in 1..=24u64 {
                let a = r(l, k);
                let lower = lower_bound_cuts(&a, n).unwrap();
                let upper = upper_bound_cuts(&a, n).unwrap();
                assert!(lower <= upper.value, "{a}, n={n}: {lower} > {}", upper.value);
            }
        }
    }
}

/// A random division of `[0, 1]` with cuts on a grid of 1/24.
fn division_strategy(label_count: usize) -> impl Strategy<Value = Division> {
    (prop::collection::btree_set(1i64..24, 0..6), prop::collection::vec(0..label_count, 7)).prop_map(move |(cuts, ls)| {
        let cuts: Vec<Ratio> = cuts.into_iter().map(|c| r(c, 24)).collect();
        let labels: Vec<usize> = ls.into_iter().take(cuts.len() + 1).collect();
        Division {
            cuts,
            labels,
            label_count,
            domain: Domain::Interval,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_agents_have_unit_mass(n in 1usize..4, blocks in 1usize..5, seed in 0u64..1000) {
        let inst = gen_random(n, blocks, seed).unwrap();
        for agent in &inst.agents {
            let whole = agent.measure_of(&[(Ratio::zero(), Ratio::one())]).unwrap();
            prop_assert!(whole.is_one());
        }
    }

    #[test]
    fn refining_a_piece_keeps_measures(seed in 0u64..500, div in division_strategy(2), at in 1i64..48) {
        let inst = gen_random(2, 3, seed).unwrap();
        let spec = TargetSpec::imbalanced(&r(1, 3)).unwrap();
        let base = verify(&inst, &div, &spec).unwrap();
        let point = r(at, 48);
        prop_assume!(!div.cuts.contains(&point));
        let idx = div.cuts.partition_point(|c| *c < point);
        let mut cuts = div.cuts.clone();
        cuts.insert(idx, point);
        let mut labels = div.labels.clone();
        labels.insert(idx, div.labels[idx]);
        let split = Division { cuts, labels, ..div.clone() };
        let again = verify(&inst, &split.canonicalize(), &spec).unwrap();
        prop_assert_eq!(&base.measures, &again.measures);
        prop_assert_eq!(base.pass, again.pass);
        prop_assert!(split.canonicalize().cut_count() <= split.cut_count());
        prop_assert!(div.canonicalize().cut_count() <= div.cut_count());
    }

    #[test]
    fn circle_unrolling_keeps_measures(seed in 0u64..500, div in division_strategy(2)) {
        prop_assume!(div.cuts.len() >= 2 && div.cuts.len() % 2 == 0);
        let inst = gen_random(2, 3, seed).unwrap().with_domain(Domain::Circle);
        let labels: Vec<usize> = (0..div.cuts.len()).map(|i| i % 2).collect();
        let circle = Division { cuts: div.cuts.clone(), labels, label_count: 2, domain: Domain::Circle };
        prop_assume!(circle.validate().is_ok());
        let unrolled = circle_to_interval(&circle);
        let a = measures_by_label(&inst, &circle).unwrap();
        let b = measures_by_label(&inst.with_domain(Domain::Interval), &unrolled).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn documents_round_trip(seed in 0u64..1000, div in division_strategy(3)) {
        let inst = gen_random(2, 2, seed).unwrap();
        let doc = InstanceDocument::new(&inst, Some(r(2, 5)));
        let text = serde_json::to_string(&doc).unwrap();
        let back: InstanceDocument = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_instance().unwrap().agents, inst.agents);
        let d = Division { label_count: 3, ..div };
        let back: Division = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }
}

/// Brute force over cut positions on a grid of `1/grid`, labels alternating.
fn grid_feasible(inst: &Instance, spec: &TargetSpec, t: usize, grid: i64) -> bool {
    fn rec(
        inst: &Instance,
        spec: &TargetSpec,
        cuts: &mut Vec<Ratio>,
        t: usize,
        next: i64,
        grid: i64,
    ) -> bool {
        if cuts.len() == t {
            return (0..2).any(|first| {
                let labels = (0..=t).map(|i| (first + i) % 2).collect();
                let div = Division { cuts: cuts.clone(), labels, label_count: 2, domain: Domain::Interval };
                verify(inst, &div, spec).unwrap().pass
            });
        }
        for c in next..grid {
            cuts.push(r(c, grid));
            if rec(inst, spec, cuts, t, c + 1, grid) {
                return true;
            }
            cuts.pop();
        }
        false
    }
    (0..=t).any(|k| rec(inst, spec, &mut Vec::new(), k, 1, grid))
}

fn alpha_strategy() -> impl Strategy<Value = Ratio> {
    prop::sample::select(vec![r(1, 2), r(1, 3), r(2, 3), r(1, 4), r(2, 5), r(3, 8)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_is_sound_and_matches_the_grid(seed in 0u64..10_000, n in 1usize..3, t in 0usize..4, alpha in alpha_strategy()) {
        let inst = gen_random(n, 2, seed).unwrap();
        let spec = TargetSpec::imbalanced(&alpha).unwrap();
        let cfg = SearchConfig::new(t, spec.clone(), Domain::Interval);
        let cert = solve(&inst, &cfg).unwrap();
        prop_assert!(!cert.is_inconclusive());
        if let Some(div) = cert.division() {
            prop_assert!(verify(&inst, div, &spec).unwrap().pass);
        }
        if grid_feasible(&inst, &spec, t, 48) {
            prop_assert!(cert.is_feasible());
        }
    }

    #[test]
    fn pruning_never_changes_the_verdict(seed in 0u64..10_000, t in 0usize..4, alpha in alpha_strategy()) {
        let inst = gen_random(2, 2, seed).unwrap();
        let spec = TargetSpec::imbalanced(&alpha).unwrap();
        let with = solve(&inst, &SearchConfig::new(t, spec.clone(), Domain::Interval)).unwrap();
        let without = solve(&inst, &SearchConfig::new(t, spec, Domain::Interval).with_prune(PruneFlags::none())).unwrap();
        prop_assert_eq!(with.is_feasible(), without.is_feasible());
        prop_assert_eq!(with.is_infeasible(), without.is_infeasible());
    }

    #[test]
    fn budgets_are_monotone_and_runs_deterministic(seed in 0u64..10_000, t in 0usize..4, alpha in alpha_strategy()) {
        let inst = gen_random(2, 3, seed).unwrap();
        let spec = TargetSpec::imbalanced(&alpha).unwrap();
        let cfg = SearchConfig::new(t, spec.clone(), Domain::Interval);
        let one = solve(&inst, &cfg.clone().with_threads(1)).unwrap();
        let many = solve(&inst, &cfg.with_threads(3)).unwrap();
        prop_assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
        if one.is_feasible() {
            let next = solve(&inst, &SearchConfig::new(t + 1, spec, Domain::Interval)).unwrap();
            prop_assert!(next.is_feasible());
        }
    }
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    (3usize..=5, 1usize..=2).prop_flat_map(|(vars, m)| {
        let clause = prop::sample::subsequence((1..=vars as i64).collect::<Vec<_>>(), 3)
            .prop_flat_map(|vs| (Just(vs), prop::collection::vec(any::<bool>(), 3)))
            .prop_map(|(vs, signs)| vs.into_iter().zip(signs).map(|(v, s)| if s { v } else { -v }).collect::<Vec<_>>());
        prop::collection::vec(clause, m).prop_map(move |cs| Formula::new(vars, cs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gadget_solutions_verify(formula in formula_strategy(), alpha in prop::sample::select(vec![r(1, 3), r(2, 5), r(1, 4), r(3, 10), r(1, 5)])) {
        let solutions = exactly1_solutions(&formula, 20).unwrap();
        prop_assume!(!solutions.is_empty());
        let layout = gen_sat_gadget(&formula, &alpha).unwrap();
        for s in &solutions {
            let div = build_sat_solution(&layout, s).unwrap();
            prop_assert!(verify(&layout.instance, &div, &TargetSpec::imbalanced(&alpha).unwrap()).unwrap().pass);
            prop_assert_eq!(div.cut_count(), layout.target_cuts);
        }
    }

    #[test]
    fn necklace_splits_map_to_divisions(beads in prop::collection::vec(1usize..=2, 2..=12)) {
        let Ok(neck) = Necklace::new(2, beads) else { return Ok(()) };
        let counts = neck.color_counts();
        prop_assume!(counts.iter().all(|a| a % 2 == 0));
        let alpha = r(1, 2);
        if let NecklaceOutcome::Split { split } = solve_necklace(&neck, &alpha, 11).unwrap() {
            let inst = necklace_to_instance(&neck).unwrap();
            let div = split.to_division(&neck);
            prop_assert!(div.cut_count() <= split.cuts.len());
            prop_assert!(verify(&inst, &div, &TargetSpec::imbalanced(&alpha).unwrap()).unwrap().pass);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pipeline_traces_keep_their_ledgers(seed in 0u64..1000, alpha in prop::sample::select(vec![r(1, 2), r(1, 3), r(2, 3), r(2, 5), r(1, 6)])) {
        let inst = gen_random(2, 2, seed).unwrap();
        let res = upper_bound_solve(&inst, &alpha, &PipelineOptions::default()).unwrap();
        prop_assert!(res.report.pass);
        let trace = &res.trace;
        prop_assert_eq!(trace.total_cuts, res.division.canonicalize().cut_count());
        prop_assert!(trace.within_bound);
        prop_assert!(trace.total_cuts as u64 <= trace.bound_claimed.unwrap());
        for step in &trace.steps {
            prop_assert!(step.averaging_holds, "{:?}", step);
            if step.labels > 1 {
                let n = inst.agent_count();
                let cap = (step.arcs_before + (step.labels - 1) * n) / step.labels;
                let kept: usize = step.kept.iter().map(|&i| step.label_arcs[i]).sum();
                prop_assert!(kept <= cap);
            }
        }
    }

    #[test]
    fn snapping_error_follows_the_hole_law(seed in 0u64..1000, num in 1i64..20) {
        let alpha = r(num, 20);
        let accuracy = r(1, 8);
        let approx = nearest_qp_ratio(&alpha, 3, &accuracy).unwrap();
        let mut hole = Ratio::one();
        for _ in 0..approx.level {
            hole = hole * qp_factor(3);
        }
        prop_assert!(approx.error() <= hole);
        prop_assert!(hole <= accuracy);
        let inst = gen_random(2, 2, seed).unwrap();
        let out = more_cuts_solve(&inst, &alpha, 3, &accuracy, &PipelineOptions::default()).unwrap();
        prop_assert!(out.result.report.pass);
        prop_assert!(out.result.division.cut_count() as u64 <= out.bound);
    }
}
