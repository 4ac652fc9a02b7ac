//! Synthetic grid fixtures: a four-neighbor street grid (both directions
//! per edge) with optional arterial rows that are faster, wider, and more
//! attractive to the closure heuristic. Travel times carry a seeded
//! jitter of a few percent so shortest paths are mostly unique.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sve_core::graph::{GraphBuilder, RoadGraph};

#[derive(Clone, Debug)]
pub struct GridParams {
    pub width: u64,
    pub height: u64,
    pub spacing_m: u64,
    /// Row indices whose horizontal arcs are arterial.
    pub arterial_rows: Vec<u64>,
    pub seed: u64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            width: 10,
            height: 10,
            spacing_m: 200,
            arterial_rows: Vec::new(),
            seed: 0,
        }
    }
}

// Street speed 10 m/s, arterial speed 25 m/s.
const STREET_MS_PER_M: u64 = 100;
const ARTERIAL_MS_PER_M: u64 = 40;

fn jitter(rng: &mut ChaCha8Rng, base: u64) -> u64 {
    let spread = (base / 20).max(1);
    base - spread + rng.next_u64() % (2 * spread + 1)
}

pub fn build_grid(params: &GridParams) -> RoadGraph {
    assert!(params.width >= 2 && params.height >= 2, "grid too small");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut b = GraphBuilder::new();
    let lat0: f64 = 47.2;
    let lon_step = params.spacing_m as f64 / (111_320.0 * f64::cos(lat0.to_radians()));
    let lat_step = params.spacing_m as f64 / 111_320.0;
    for r in 0..params.height {
        for c in 0..params.width {
            let pos = (-122.3 + c as f64 * lon_step, lat0 + r as f64 * lat_step);
            b.add_vertex(r * params.width + c, Some(pos)).unwrap();
        }
    }
    let mut next_arc = 0u64;
    let mut add_pair = |b: &mut GraphBuilder,
                        rng: &mut ChaCha8Rng,
                        x: u64,
                        y: u64,
                        arterial: bool| {
        let (ms_per_m, road_type, lanes) = if arterial {
            (ARTERIAL_MS_PER_M, 1, 3)
        } else {
            (STREET_MS_PER_M, 5, 1)
        };
        let base = params.spacing_m * ms_per_m;
        for (from, to) in [(x, y), (y, x)] {
            b.add_arc(
                next_arc,
                from,
                to,
                jitter(rng, base),
                road_type,
                lanes,
                params.spacing_m,
            )
            .unwrap();
            next_arc += 1;
        }
    };
    for r in 0..params.height {
        let arterial = params.arterial_rows.contains(&r);
        for c in 0..params.width {
            let v = r * params.width + c;
            if c + 1 < params.width {
                add_pair(&mut b, &mut rng, v, v + 1, arterial);
            }
            if r + 1 < params.height {
                add_pair(&mut b, &mut rng, v, v + params.width, false);
            }
        }
    }
    b.build()
}
