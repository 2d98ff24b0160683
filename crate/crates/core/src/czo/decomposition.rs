//! Calderón–Zygmund decomposition on the unshifted system.

use crate::dyadic::{CellBox, DyadicCube, Geometry};
use crate::error::{Error, Result};
use crate::gridfn::{box_sum, GridFunction};

#[derive(Clone, Debug)]
pub struct BadPart {
    pub cube: DyadicCube,
    pub part: GridFunction,
}

#[derive(Clone, Debug)]
pub struct CZDecomposition {
    pub good: GridFunction,
    pub bad: Vec<BadPart>,
    pub height: f64,
    /// Set when the base cube itself exceeds the height.
    pub whole_base: bool,
}

/// Maximal cubes of system 0 (levels `0..=K`) with `⟨f⟩_Q > height`;
/// `good = f` off the cubes and `⟨f⟩_Q` on them, `b_Q = (f - ⟨f⟩_Q) 1_Q`.
pub fn cz_decomposition(f: &GridFunction, height: f64) -> Result<CZDecomposition> {
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::Precondition("height must be positive".into()));
    }
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("decomposition needs f >= 0".into()));
    }
    let geom = f.geometry();
    let mut selected: Vec<(DyadicCube, CellBox, f64)> = Vec::new();
    let mut stack = vec![geom.base_cube()];
    while let Some(q) = stack.pop() {
        let b = geom.cell_box(&q)?;
        let avg = box_sum(&geom, f.values(), &b) / b.measure_cells() as f64;
        if avg > height {
            selected.push((q, b, avg));
        } else if q.level < geom.resolution() as i32 {
            let mut ch = q.children();
            ch.reverse();
            stack.extend(ch);
        }
    }
    selected.sort_by_key(|s| s.0);
    let mut good = f.values().to_vec();
    let mut bad = Vec::with_capacity(selected.len());
    for (q, b, avg) in &selected {
        let mut part = vec![0.0; geom.num_cells()];
        geom.for_each_cell(b, |i| {
            part[i] = f.values()[i] - avg;
            good[i] = *avg;
        });
        bad.push(BadPart {
            cube: *q,
            part: GridFunction::new(geom, part)?,
        });
    }
    Ok(CZDecomposition {
        good: GridFunction::new(geom, good)?,
        whole_base: selected.first().is_some_and(|s| s.0.level == 0),
        bad,
        height,
    })
}

impl CZDecomposition {
    /// `good + Σ_k b_k`.
    pub fn reconstruct(&self) -> GridFunction {
        let geom: Geometry = self.good.geometry();
        let mut v = self.good.values().to_vec();
        for b in &self.bad {
            for (acc, x) in v.iter_mut().zip(b.part.values()) {
                *acc += x;
            }
        }
        GridFunction::new(geom, v).expect("finite")
    }

    /// `Σ_k |Q_k|`.
    pub fn bad_measure(&self) -> f64 {
        self.bad.iter().map(|b| b.cube.volume()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_selects_quarter() {
        let geom = Geometry::new(1, 6).unwrap();
        let f = GridFunction::from_midpoints(geom, |x| if x[0] < 0.125 { 8.0 } else { 0.0 }).unwrap();
        let d = cz_decomposition(&f, 2.0).unwrap();
        assert_eq!(d.bad.len(), 1);
        assert_eq!(d.bad[0].cube, geom.cube(0, 2, &[0]).unwrap());
        assert_eq!(d.reconstruct().values(), f.values());
    }

    #[test]
    fn constant_below_height_is_all_good() {
        let geom = Geometry::new(2, 3).unwrap();
        let f = GridFunction::constant(geom, 1.5);
        let d = cz_decomposition(&f, 2.0).unwrap();
        assert!(d.bad.is_empty() && !d.whole_base);
        assert_eq!(d.good.values(), f.values());
    }
}
