//! Benchmark fixtures shared by the criterion targets.

use sparsedom::random::{random_nonnegative, seeded};
use sparsedom::{Geometry, GridFunction};

/// Two seeded nonnegative inputs on `n` dimensions at resolution `k`.
pub fn input_pair(n: usize, k: u32, seed: u64) -> (GridFunction, GridFunction) {
    let g = Geometry::new(n, k).expect("desk geometry");
    let mut rng = seeded(seed);
    (random_nonnegative(g, &mut rng), random_nonnegative(g, &mut rng))
}
