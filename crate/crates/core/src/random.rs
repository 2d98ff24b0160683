//! Seeded generators for test inputs: functions, weights, symbols and families.
//!
//! Every generator draws from a caller-owned [`ChaCha8Rng`], so a suite is
//! reproducible from its seed alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicCube, Geometry, Placement};
use crate::gridfn::{GridFunction, Weight};
use crate::sparse::SparseFamily;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly chosen cube inside the base cube, any system, level in `levels`.
pub fn random_cube(geom: Geometry, rng: &mut SeededRng, levels: std::ops::RangeInclusive<i32>) -> DyadicCube {
    loop {
        let level = rng.gen_range(levels.clone());
        let u = rng.gen_range(0..geom.num_systems());
        let cubes = geom.cubes_at(u, level, Placement::Inside);
        if !cubes.is_empty() {
            return cubes[rng.gen_range(0..cubes.len())].0;
        }
    }
}

fn log_uniform(rng: &mut SeededRng, decades: f64) -> f64 {
    10f64.powf(rng.gen_range(-decades..=decades))
}

/// `a` on one unshifted cube of level 1 to 3 and `b` elsewhere, `a, b ∈ [10^{-d}, 10^d]`.
pub fn two_step_weight(geom: Geometry, rng: &mut SeededRng, decades: f64) -> Weight {
    let top = 3.min(geom.resolution() as i32);
    let level = rng.gen_range(1..=top);
    let cubes = geom.cubes_at(0, level, Placement::Inside);
    let b = cubes[rng.gen_range(0..cubes.len())].1;
    let (hi, lo) = (log_uniform(rng, decades), log_uniform(rng, decades));
    let mut v = vec![lo; geom.num_cells()];
    geom.for_each_cell(&b, |i| v[i] = hi);
    Weight::from_values(geom, v).expect("positive step values")
}

/// The two-step weight `ratio` on a fixed level-1 cube and 1 elsewhere.
pub fn step_weight(geom: Geometry, ratio: f64) -> Weight {
    let b = geom.cell_box(&geom.cube(0, 1, &vec![0; geom.dim()]).expect("level 1")).expect("level 1");
    let mut v = vec![1.0; geom.num_cells()];
    geom.for_each_cell(&b, |i| v[i] = ratio);
    Weight::from_values(geom, v).expect("positive step values")
}

fn combination(geom: Geometry, rng: &mut SeededRng, signed: bool) -> GridFunction {
    let mut v = vec![0.0; geom.num_cells()];
    let terms = rng.gen_range(1..=4);
    let finest = geom.resolution() as i32 - 1;
    for _ in 0..terms {
        let q = random_cube(geom, rng, 0..=finest.max(0));
        let mut c = rng.gen_range(0.1..2.0);
        if signed && rng.gen_bool(0.5) {
            c = -c;
        }
        let b = geom.cell_box(&q).expect("inside");
        geom.for_each_cell(&b, |i| v[i] += c);
    }
    GridFunction::new(geom, v).expect("finite")
}

/// A positive combination of one to four cube indicators.
pub fn random_nonnegative(geom: Geometry, rng: &mut SeededRng) -> GridFunction {
    combination(geom, rng, false)
}

/// A signed combination of one to four cube indicators.
pub fn random_signed(geom: Geometry, rng: &mut SeededRng) -> GridFunction {
    combination(geom, rng, true)
}

/// Nonnegative values `0..=max`, each cell nonzero with probability `density`.
pub fn random_integer(geom: Geometry, rng: &mut SeededRng, max: u32, density: f64) -> GridFunction {
    let v = (0..geom.num_cells())
        .map(|_| if rng.gen_bool(density) { rng.gen_range(1..=max) as f64 } else { 0.0 })
        .collect();
    GridFunction::new(geom, v).expect("finite")
}

/// `α log(|x - x0| + h) + β 1_Q` with random centre, cube and coefficients.
pub fn random_bmo(geom: Geometry, rng: &mut SeededRng) -> GridFunction {
    let x0: Vec<f64> = (0..geom.dim()).map(|_| rng.gen_range(0.0..1.0)).collect();
    let alpha = rng.gen_range(-1.0..1.0);
    let beta = rng.gen_range(-1.0..1.0);
    let h = geom.cell_side();
    let q = random_cube(geom, rng, 0..=geom.resolution() as i32);
    let b = geom.cell_box(&q).expect("inside");
    let mut f = GridFunction::from_midpoints(geom, |x| {
        let r = x.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        alpha * (r + h).ln()
    })
    .expect("finite")
    .into_values();
    geom.for_each_cell(&b, |i| f[i] += beta);
    GridFunction::new(geom, f).expect("finite")
}

/// A ½-sparse family of one system: disjoint level-1 or level-2 tops, each
/// member refined by at most half of its grandchildren, down to level `K - 1`.
pub fn random_sparse_family(geom: Geometry, rng: &mut SeededRng, system: u32) -> SparseFamily {
    let k = geom.resolution() as i32;
    let start = rng.gen_range(1..=2.min(k.max(1)));
    let mut cubes: Vec<DyadicCube> = Vec::new();
    let mut frontier: Vec<DyadicCube> = geom
        .cubes_at(system, start, Placement::Inside)
        .into_iter()
        .map(|c| c.0)
        .filter(|_| rng.gen_bool(0.7))
        .collect();
    while let Some(q) = frontier.pop() {
        cubes.push(q);
        if q.level + 2 > k - 1 {
            continue;
        }
        let grand: Vec<DyadicCube> = q.children().into_iter().flat_map(|c| c.children()).collect();
        let cap = grand.len() / 2;
        let want = rng.gen_range(0..=cap);
        let mut picked: Vec<DyadicCube> = Vec::with_capacity(want);
        let mut pool = grand;
        for _ in 0..want {
            let i = rng.gen_range(0..pool.len());
            picked.push(pool.swap_remove(i));
        }
        frontier.extend(picked);
    }
    SparseFamily::new(geom, cubes, 0.5).expect("valid cubes")
}
