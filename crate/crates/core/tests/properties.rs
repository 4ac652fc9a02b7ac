//! Property tests: shortest-path optimality against exhaustive
//! enumeration, weight monotonicity, weak duality, and the tau-option
//! identities.

mod common;

use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use sve_core::cut::{
    duality_gap, lp1_objective, make_tau, support, valuation, ExplanationInstance, ExtValue,
    TauOption,
};
use sve_core::flow::{apply_modify, build_residual, find_positive_cycle, init_flow, CycleSearch};
use sve_core::graph::{
    path_weight, shortest_distances, shortest_path, ArcId, GraphBuilder, Path, RoadGraph,
    VertexId, WeightVector,
};
use sve_core::oracle::enumerate_paths;
use sve_core::weight::Weight;

use common::{index, random_digraph, range};

fn small_graph(seed: u64) -> RoadGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = range(&mut rng, 3, 10);
    let extra = range(&mut rng, 0, 18);
    random_digraph(&mut rng, n, extra)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn shortest_path_is_optimal_among_all_simple_paths(seed in any::<u64>()) {
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1e);
        let w = g.free_flow_weights();
        let s = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        let t = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        prop_assume!(s != t);
        let all = enumerate_paths(&g, &w, s, t, 1_000_000).unwrap();
        match shortest_path(&g, &w, s, t) {
            None => prop_assert!(all.iter().all(|(_, pw)| !pw.is_finite())),
            Some((p, total)) => {
                prop_assert_eq!(path_weight(&p, &w), Weight::Finite(total));
                for (q, qw) in &all {
                    prop_assert!(Weight::Finite(total) <= *qw,
                        "returned {} but {:?} costs {}", total, q.arcs(), qw);
                }
            }
        }
    }

    #[test]
    fn raising_one_weight_never_shortens_the_route(seed in any::<u64>(), bump in 1u64..500) {
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
        let mut w = g.free_flow_weights();
        let s = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        let t = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        prop_assume!(s != t);
        let before = shortest_path(&g, &w, s, t);
        // Identical inputs give identical results.
        prop_assert_eq!(&before, &shortest_path(&g, &w, s, t));
        let a = ArcId(index(&mut rng, g.num_arcs() as u64) as u32);
        w.set(a, w[a] + Weight::Finite(bump));
        let after = shortest_path(&g, &w, s, t);
        match (before, after) {
            (Some((_, b)), Some((_, c))) => prop_assert!(c >= b),
            (Some(_), None) => prop_assert!(false, "raising a finite weight cannot disconnect"),
            (None, any) => prop_assert!(any.is_none()),
        }
    }

    #[test]
    fn duality_gap_is_nonnegative_for_feasible_pairs(seed in any::<u64>(), rounds in 0usize..3) {
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0a1);
        let ell = g.free_flow_weights();
        // Sampled upper bounds and a primal w inside them.
        let mut upper = ell.clone();
        let mut w = ell.clone();
        for (a, _) in g.arcs() {
            let lo = ell[a].expect_finite("ell");
            match index(&mut rng, 10) {
                0..=3 => {}
                4..=8 => {
                    upper.set(a, Weight::Finite(lo + range(&mut rng, 1, 2 * lo)));
                    let hi = upper[a].expect_finite("upper");
                    w.set(a, Weight::Finite(range(&mut rng, lo, hi)));
                }
                _ => {
                    upper.set(a, Weight::Infinite);
                    w.set(a, Weight::Finite(lo + index(&mut rng, 2 * lo)));
                }
            }
        }
        let s = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        let t = VertexId(index(&mut rng, g.num_vertices() as u64) as u32);
        prop_assume!(s != t);
        // The explained path is w-shortest, so (w, d) is primal feasible.
        let (path, _) = shortest_path(&g, &w, s, t).unwrap();
        let dists = shortest_distances(&g, &w, s, false);
        let far = dists.iter().flatten().max().copied().unwrap_or(0) as i128;
        let d: Vec<i128> = dists
            .iter()
            .map(|x| x.map_or(far, |v| v as i128))
            .collect();
        let tau = make_tau(&g, &ell, &upper, TauOption::ScaleInvariant { c0: 10 });
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        // Dual side: the zero start plus a few cycle cancellations.
        let mut sol = init_flow(&inst);
        for _ in 0..rounds {
            let res = build_residual(&inst, &sol).unwrap();
            match find_positive_cycle(&res) {
                CycleSearch::Found(c) => {
                    let mut df = vec![0u64; res.arcs().len()];
                    for &ri in &c.arcs {
                        df[ri as usize] = c.bottleneck;
                    }
                    sol = apply_modify(&inst, &sol, &res, &df).unwrap();
                }
                _ => break,
            }
        }
        let gap = duality_gap(&w, &d, &sol, &inst);
        match (gap, lp1_objective(&w, &inst), sol.objective(&inst)) {
            (ExtValue::Finite(gv), ExtValue::Finite(p), ExtValue::Finite(q)) => {
                prop_assert!(gv >= 0, "gap {gv}");
                prop_assert_eq!(gv, p - q, "five-term sum must match the objective difference");
            }
            (gap, lp1, lp2) => prop_assert!(false, "unexpected infinities: {gap} {lp1} {lp2}"),
        }
    }

    #[test]
    fn valuation_is_zero_exactly_when_support_is_empty(seed in any::<u64>()) {
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        let mut w = ell.clone();
        for (a, _) in g.arcs() {
            let lo = ell[a].expect_finite("ell");
            if index(&mut rng, 2) == 0 {
                upper.set(a, Weight::Finite(2 * lo));
                if index(&mut rng, 2) == 0 {
                    w.set(a, Weight::Finite(lo + range(&mut rng, 1, lo)));
                }
            }
        }
        // Option 1 keeps tau positive on every pliable arc.
        let tau = make_tau(&g, &ell, &upper, TauOption::One);
        let path = Path::empty(VertexId(0));
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let v = valuation(&w, &inst);
        let s = support(&w, &inst);
        prop_assert_eq!(v == Weight::ZERO, s.is_empty());
    }

    #[test]
    fn inverse_gap_at_lcm_scale_counts_the_support(seed in any::<u64>()) {
        // Two-point weights with S = lcm of the gaps: the valuation is
        // exactly S times the support size.
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        let mut gaps = Vec::new();
        for (a, _) in g.arcs() {
            if index(&mut rng, 2) == 0 {
                let gap = range(&mut rng, 1, 20);
                let lo = ell[a].expect_finite("ell");
                upper.set(a, Weight::Finite(lo + gap));
                gaps.push(gap);
            }
        }
        prop_assume!(!gaps.is_empty());
        let lcm = gaps.iter().fold(1u64, |acc, &g| num_lcm(acc, g));
        let tau = make_tau(&g, &ell, &upper, TauOption::InverseGap { scale: lcm });
        // Exact ratios: round(lcm / gap) = lcm / gap with no clamping.
        let mut w = ell.clone();
        for (a, _) in g.arcs() {
            if upper[a] > ell[a] && index(&mut rng, 2) == 0 {
                w.set(a, upper[a]);
            }
        }
        let path = Path::empty(VertexId(0));
        let inst = ExplanationInstance::new(&g, ell, upper, path, tau).unwrap();
        let v = valuation(&w, &inst).expect_finite("valuation");
        let s = support(&w, &inst).len() as u64;
        prop_assert_eq!(v, lcm * s);
    }

    #[test]
    fn scale_invariant_with_unit_constant_matches_option_one(seed in any::<u64>()) {
        let g = small_graph(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
        let ell = g.free_flow_weights();
        let mut upper = ell.clone();
        for (a, _) in g.arcs() {
            let lo = ell[a].expect_finite("ell");
            match index(&mut rng, 3) {
                0 => {}
                1 => upper.set(a, Weight::Finite(lo + range(&mut rng, 1, 3 * lo))),
                _ => upper.set(a, Weight::Infinite),
            }
        }
        let one = make_tau(&g, &ell, &upper, TauOption::One);
        let si = make_tau(&g, &ell, &upper, TauOption::ScaleInvariant { c0: 1 });
        for (a, _) in g.arcs() {
            prop_assert!(si.get(a) <= 1);
            // ell < upper implies floor(ell / upper) = 0, so both agree.
            prop_assert_eq!(si.get(a), one.get(a));
        }
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / num_gcd(a, b) * b
}
