#![allow(dead_code)]

//! Shared generators for randomized tests: small graphs and solvable
//! instances with known-seed reproducibility.

use rand_core::RngCore;

use sve_core::cut::{make_tau, CutError, ExplanationInstance, TauOption};
use sve_core::graph::{shortest_path, GraphBuilder, Path, RoadGraph, VertexId, WeightVector};
use sve_core::weight::Weight;

pub fn index(rng: &mut dyn RngCore, n: u64) -> u64 {
    assert!(n > 0);
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

pub fn range(rng: &mut dyn RngCore, lo: u64, hi: u64) -> u64 {
    lo + index(rng, hi - lo + 1)
}

/// Four-neighbor grid, both directions, with jittered weights so shortest
/// paths are mostly unique. Vertex (r, c) has external id `r * width + c`.
pub fn grid_graph(rng: &mut dyn RngCore, width: u64, height: u64) -> RoadGraph {
    let mut b = GraphBuilder::new();
    for r in 0..height {
        for c in 0..width {
            let pos = (c as f64 * 0.012, 47.0 + r as f64 * 0.009);
            b.add_vertex(r * width + c, Some(pos)).unwrap();
        }
    }
    let mut ext = 0u64;
    let mut link = |b: &mut GraphBuilder, x: u64, y: u64, rng: &mut dyn RngCore| {
        let ms = range(rng, 900, 1100);
        b.add_arc(ext, x, y, ms, 5, 1, 1000).unwrap();
        ext += 1;
        let ms = range(rng, 900, 1100);
        b.add_arc(ext, y, x, ms, 5, 1, 1000).unwrap();
        ext += 1;
    };
    for r in 0..height {
        for c in 0..width {
            let v = r * width + c;
            if c + 1 < width {
                link(&mut b, v, v + 1, rng);
            }
            if r + 1 < height {
                link(&mut b, v, v + width, rng);
            }
        }
    }
    b.build()
}

/// Random digraph: a two-way Hamiltonian backbone (so everything is
/// reachable) plus random extra arcs, parallels included.
pub fn random_digraph(rng: &mut dyn RngCore, vertices: u64, extra_arcs: u64) -> RoadGraph {
    let mut b = GraphBuilder::new();
    for i in 0..vertices {
        let pos = (i as f64 * 0.01, 47.0 + (i % 7) as f64 * 0.01);
        b.add_vertex(i, Some(pos)).unwrap();
    }
    let mut ext = 0u64;
    for i in 0..vertices - 1 {
        b.add_arc(ext, i, i + 1, range(rng, 50, 150), 5, 1, 100).unwrap();
        ext += 1;
        b.add_arc(ext, i + 1, i, range(rng, 50, 150), 5, 1, 100).unwrap();
        ext += 1;
    }
    for _ in 0..extra_arcs {
        let x = index(rng, vertices);
        let y = index(rng, vertices);
        if x == y {
            continue;
        }
        b.add_arc(ext, x, y, range(rng, 20, 200), 5, 1, 100).unwrap();
        ext += 1;
    }
    b.build()
}

/// Uppers for a solvable instance. `pliable_budget` caps how many arcs
/// are pliable (sparse instances keep the brute-force oracle fast).
pub fn random_upper(
    rng: &mut dyn RngCore,
    g: &RoadGraph,
    pliable_budget: Option<usize>,
) -> WeightVector {
    let ell = g.free_flow_weights();
    let mut upper = ell.clone();
    match pliable_budget {
        Some(budget) => {
            for _ in 0..budget {
                let a = sve_core::graph::ArcId(index(rng, g.num_arcs() as u64) as u32);
                let lo = ell[a].expect_finite("ell");
                upper.set(a, Weight::Finite(lo + range(rng, 1, 3 * lo.max(1))));
            }
        }
        None => {
            for (a, _) in g.arcs() {
                let lo = ell[a].expect_finite("ell");
                let roll = index(rng, 10);
                let hi = if roll < 4 {
                    Weight::Finite(lo) // non-pliable
                } else if roll < 9 {
                    Weight::Finite(lo + range(rng, 1, 3 * lo.max(1)))
                } else {
                    Weight::Infinite
                };
                upper.set(a, hi);
            }
        }
    }
    upper
}

/// A random solvable instance: the explained path is the shortest path
/// under the sampled uppers between random distinct endpoints.
pub fn random_instance<'g>(
    rng: &mut dyn RngCore,
    g: &'g RoadGraph,
    option: TauOption,
    pliable_budget: Option<usize>,
) -> Result<ExplanationInstance<'g>, CutError> {
    let ell = g.free_flow_weights();
    let upper = random_upper(rng, g, pliable_budget);
    let n = g.num_vertices() as u64;
    let (s, t, path) = loop {
        let s = VertexId(index(rng, n) as u32);
        let t = VertexId(index(rng, n) as u32);
        if s == t {
            continue;
        }
        match shortest_path(g, &upper, s, t) {
            Some((p, _)) => break (s, t, p),
            None => continue,
        }
    };
    let _ = (s, t);
    let tau = make_tau(g, &ell, &upper, option);
    ExplanationInstance::new(g, ell, upper, path, tau)
}

pub fn ell_weight_of(g: &RoadGraph, p: &Path) -> u64 {
    let ell = g.free_flow_weights();
    sve_core::graph::path_weight(p, &ell).expect_finite("free-flow path weight")
}
