//! Maximal operators. Suprema over "all cubes" run over the cubes of every
//! shifted system at levels `0..=K` that contain the cell.

use rayon::prelude::*;

use crate::dyadic::{CellBox, Geometry, Placement};
use crate::error::{Error, Result};
use crate::gridfn::{box_log_average, box_sum, box_weighted_average, GridFunction, Weight};

/// Per-cell supremum of `value(cube)` over the given cube list.
pub(crate) fn sup_over_cubes(geom: &Geometry, cubes: &[CellBox], value: impl Fn(&CellBox) -> f64 + Sync) -> Vec<f64> {
    let vals: Vec<f64> = cubes.par_iter().map(&value).collect();
    let mut out = vec![f64::NEG_INFINITY; geom.num_cells()];
    for (b, v) in cubes.iter().zip(vals) {
        geom.for_each_cell(b, |i| {
            if v > out[i] {
                out[i] = v;
            }
        });
    }
    out
}

pub(crate) fn boxes(geom: &Geometry, placement: Placement) -> Vec<CellBox> {
    geom.sup_cubes(placement).into_iter().map(|(_, b)| b).collect()
}

fn same_geometry(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if a.geometry() != b.geometry() {
        return Err(Error::GeometryMismatch);
    }
    Ok(())
}

/// Hardy–Littlewood maximal function `sup_{Q∋x} ⟨|f|⟩_Q`.
pub fn hl_maximal(f: &GridFunction) -> GridFunction {
    let geom = f.geometry();
    let a = f.abs();
    let bs = boxes(&geom, Placement::Intersecting);
    let out = sup_over_cubes(&geom, &bs, |b| box_sum(&geom, a.values(), b) / b.measure_cells() as f64);
    GridFunction::new(geom, out).expect("finite")
}

/// `M(|f|^η)^{1/η}`.
pub fn eta_maximal(f: &GridFunction, eta: f64) -> Result<GridFunction> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Precondition("eta must lie in (0,1)".into()));
    }
    let p = f.abs().map(|v| v.powf(eta))?;
    hl_maximal(&p).map(|v| v.powf(1.0 / eta))
}

/// `sup_{Q∋x} ⟨|f1|⟩_Q ⟨|f2|⟩_Q`.
pub fn multilinear_maximal(f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    same_geometry(f1, f2)?;
    let geom = f1.geometry();
    let (a1, a2) = (f1.abs(), f2.abs());
    let bs = boxes(&geom, Placement::Intersecting);
    let out = sup_over_cubes(&geom, &bs, |b| {
        let n = b.measure_cells() as f64;
        (box_sum(&geom, a1.values(), b) / n) * (box_sum(&geom, a2.values(), b) / n)
    });
    GridFunction::new(geom, out)
}

/// Ball levels needed before a centered ball `S < 2^j` covers the base cube.
pub(crate) fn ball_levels(geom: &Geometry) -> usize {
    let n1 = geom.side() as u64 - 1;
    let smax = geom.dim() as u64 * n1 * n1;
    (64 - smax.leading_zeros()) as usize + 1
}

/// `⟨|f1|⟩_{B_j} ⟨|f2|⟩_{B_j}` for `j < levels`, where `B_j` is the set of
/// cells whose midpoints lie within `r_j = h 2^{j/2}` of the midpoint of `x`
/// (integer squared distance `S < 2^j`), clipped to the base cube.
pub(crate) fn ball_products(geom: &Geometry, f1: &[f64], f2: &[f64], x: usize, levels: usize) -> Vec<f64> {
    let c = geom.coords(x);
    let n = geom.side() as i64;
    let mut cells: Vec<(u64, usize)> = Vec::new();
    let (y1lo, y1hi) = if geom.dim() == 2 { (0, n - 1) } else { (0, 0) };
    for y1 in y1lo..=y1hi {
        for y0 in 0..n {
            let d = [y0 - c[0], y1 - c[1]];
            cells.push(((d[0] * d[0] + d[1] * d[1]) as u64, geom.index([y0, y1])));
        }
    }
    cells.sort_unstable();
    let mut out = vec![0.0; levels];
    let (mut s1, mut s2, mut count) = (0.0, 0.0, 0usize);
    let mut it = cells.iter().peekable();
    for (j, slot) in out.iter_mut().enumerate() {
        let bound = 1u64 << j.min(63);
        while let Some(&&(s, i)) = it.peek() {
            if s >= bound {
                break;
            }
            s1 += f1[i].abs();
            s2 += f2[i].abs();
            count += 1;
            it.next();
        }
        if count > 0 {
            let m = count as f64;
            *slot = (s1 / m) * (s2 / m);
        }
    }
    out
}

/// `sup_r ⟨|f1|⟩_{B(x,r)} ⟨|f2|⟩_{B(x,r)}` over radii `r = 2^{-K + j/2}`
/// with `eps < r < delta`. A ball is the set of cells whose midpoints lie in
/// it, clipped to the base cube; averages divide by the measure of that set.
pub fn truncated_centered_maximal(f1: &GridFunction, f2: &GridFunction, x: usize, eps: f64, delta: f64) -> Result<f64> {
    same_geometry(f1, f2)?;
    if !(eps > 0.0 && eps <= delta) {
        return Err(Error::Precondition("need 0 < eps <= delta".into()));
    }
    let geom = f1.geometry();
    if x >= geom.num_cells() {
        return Err(Error::Precondition(format!("cell {x} out of range")));
    }
    let h = geom.cell_side();
    let levels = ball_levels(&geom);
    let prods = ball_products(&geom, f1.values(), f2.values(), x, levels);
    let radius = |j: usize| h * 2f64.powf(j as f64 / 2.0);
    let mut best = 0.0f64;
    let mut j = 0usize;
    while radius(j) < delta {
        if radius(j) > eps {
            // past `levels` every ball is the whole base cube
            best = best.max(prods[j.min(levels - 1)]);
            if j >= levels {
                break;
            }
        }
        j += 1;
    }
    Ok(best)
}

/// `M^σ_{D^u} f = sup_{Q∈D^u, Q∋x} σ(Q)^{-1} ∫_Q |f| σ`.
pub fn weighted_dyadic_maximal(f: &GridFunction, s: &Weight, system: u32) -> Result<GridFunction> {
    let geom = f.geometry();
    if geom != s.geometry() {
        return Err(Error::GeometryMismatch);
    }
    if system >= geom.num_systems() {
        return Err(Error::Precondition(format!("system {system} out of range")));
    }
    let a = f.abs();
    let bs: Vec<CellBox> = (0..=geom.resolution() as i32)
        .flat_map(|k| geom.cubes_at(system, k, Placement::Intersecting))
        .map(|(_, b)| b)
        .collect();
    let out = sup_over_cubes(&geom, &bs, |b| box_weighted_average(&geom, a.values(), s.values(), b).unwrap_or(0.0));
    GridFunction::new(geom, out)
}

/// Logarithmic maximal function `sup_{Q∋x} exp(⨍_Q log w)` over cubes inside
/// the base cube.
pub fn log_maximal(w: &Weight) -> GridFunction {
    let geom = w.geometry();
    let bs = boxes(&geom, Placement::Inside);
    let out = sup_over_cubes(&geom, &bs, |b| box_log_average(&geom, w.values(), b).unwrap_or(0.0));
    GridFunction::new(geom, out).expect("finite")
}

/// `M(1_Q f)` evaluated on the base cells of `q`, in the order of
/// [`Geometry::cells_of`].
pub(crate) fn local_maximal(geom: &Geometry, values: &[f64], q: &CellBox) -> Vec<f64> {
    let qc = q.intersect(&geom.base_box());
    if qc.is_empty() {
        return Vec::new();
    }
    let width = (qc.hi[0] - qc.lo[0]) as usize;
    let mut out = vec![0.0f64; qc.measure_cells() as usize];
    for u in 0..geom.num_systems() {
        for k in 0..=geom.resolution() as i32 {
            let len = geom.cells_per_side(k);
            let shift = geom.shift_cells(u, k);
            let mut rng = [(0i64, 0i64); 2];
            for d in 0..geom.dim() {
                rng[d] = (
                    (qc.lo[d] - shift[d]).div_euclid(len),
                    (qc.hi[d] - 1 - shift[d]).div_euclid(len),
                );
            }
            let (r1lo, r1hi) = if geom.dim() == 2 { rng[1] } else { (0, 0) };
            for m1 in r1lo..=r1hi {
                for m0 in rng[0].0..=rng[0].1 {
                    let r = geom.cell_box_unchecked(u, k, [m0, m1]);
                    let inter = r.intersect(&qc);
                    if inter.is_empty() {
                        continue;
                    }
                    let v = box_sum(geom, values, &inter) / r.measure_cells() as f64;
                    for y in inter.lo[1]..inter.hi[1] {
                        let prow = (y - qc.lo[1]) as usize * width;
                        for x in inter.lo[0]..inter.hi[0] {
                            let p = prow + (x - qc.lo[0]) as usize;
                            if v > out[p] {
                                out[p] = v;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_fixed_points() {
        let g = Geometry::new(1, 5).unwrap();
        let f = GridFunction::constant(g, -2.0);
        assert!(hl_maximal(&f).values().iter().all(|&v| (v - 2.0).abs() < 1e-15));
        assert!(eta_maximal(&f, 0.5).unwrap().values().iter().all(|&v| (v - 2.0).abs() < 1e-12));
        let one = GridFunction::constant(g, 1.0);
        assert!(multilinear_maximal(&one, &one).unwrap().values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let w = Weight::constant(g, 3.0).unwrap();
        assert!(log_maximal(&w).values().iter().all(|&v| (v - 3.0).abs() < 1e-14));
        assert!(weighted_dyadic_maximal(&f, &w, 1).unwrap().values().iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn centered_maximal_constant_and_empty() {
        let g = Geometry::new(1, 6).unwrap();
        let one = GridFunction::constant(g, 1.0);
        for x in [0usize, 10, 63] {
            let v = truncated_centered_maximal(&one, &one, x, 1e-3, 0.5).unwrap();
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert_eq!(truncated_centered_maximal(&one, &one, 5, 0.1, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn local_maximal_matches_global_on_base() {
        let g = Geometry::new(1, 5).unwrap();
        let f = GridFunction::from_midpoints(g, |x| (x[0] * 9.0).sin().abs()).unwrap();
        let loc = local_maximal(&g, f.values(), &g.base_box());
        let glob = hl_maximal(&f);
        for (a, b) in loc.iter().zip(glob.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
