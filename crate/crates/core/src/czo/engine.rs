//! Midpoint-rule evaluation of truncated bilinear singular integrals.
//!
//! For a cell `x` every pair of cells `(y,z)` has an integer squared distance
//! `S = |x-y|² + |x-z|²` in cell units. Truncation radii live on the grid
//! `r_j = h 2^{j/2}`, so `r_j² = 2^j h²` and a pair lies strictly between
//! `r_a` and `r_b` iff `2^a < S < 2^b`. Contributions are therefore binned
//! once per cell into open bins `2^j < S < 2^{j+1}` and sphere bins
//! `S = 2^j`; every grid truncation is then a sum of bins.

use std::sync::Arc;

use rayon::prelude::*;

use super::kernel::Kernel;
use crate::dyadic::{CellBox, DyadicCube, Geometry};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;

/// Radius `r_j = h 2^{j/2}` of the truncation grid.
pub fn grid_radius(geom: &Geometry, j: usize) -> f64 {
    geom.cell_side() * 2f64.powf(j as f64 / 2.0)
}

/// Index `j` with `r_j` equal to one cell diameter `h√n`.
pub fn cell_diameter_index(geom: &Geometry) -> usize {
    geom.dim() - 1
}

/// Largest `b` with `r_b < ½ dist(x, ∂P)` when `x` sits `c` whole cells from
/// the boundary, i.e. `16·2^b < (2c+1)²`; `None` when no radius qualifies.
pub fn admissible_top(c: i64) -> Option<usize> {
    let q = (2 * c + 1) * (2 * c + 1);
    let mut b: Option<usize> = None;
    let mut j = 0usize;
    while j < 62 && 16i128 * (1i128 << j) < q as i128 {
        b = Some(j);
        j += 1;
    }
    b
}

pub(crate) struct PairScan {
    geom: Geometry,
    kernel: Kernel,
    table: Option<Arc<Vec<f64>>>,
    width: usize,
    reach: i64,
    weight: f64,
}

impl PairScan {
    pub(crate) fn new(kernel: &Kernel, geom: Geometry) -> Result<Self> {
        if kernel.dim() != geom.dim() {
            return Err(Error::Kernel(format!(
                "kernel dimension {} differs from geometry dimension {}",
                kernel.dim(),
                geom.dim()
            )));
        }
        let n = geom.side() as i64;
        let reach = match kernel.support_radius() {
            Some(r) => ((r / geom.cell_side()).ceil() as i64).min(n - 1),
            None => n - 1,
        };
        let weight = geom.cell_volume() * geom.cell_volume();
        Ok(PairScan {
            geom,
            kernel: kernel.clone(),
            table: kernel.table(&geom),
            width: 2 * geom.side() - 1,
            reach,
            weight,
        })
    }

    fn window(&self, c: i64) -> (i64, i64) {
        let n = self.geom.side() as i64;
        ((c - self.reach).max(0), (c + self.reach).min(n - 1))
    }

    /// Calls `visit(S, K·h^{2n}, y, z)` for every pair with `S > 0`,
    /// `f1[y] ≠ 0` and `f2[z] ≠ 0`, in a fixed order.
    pub(crate) fn for_each_pair(&self, x: usize, f1: &[f64], f2: &[f64], mut visit: impl FnMut(u64, f64, usize, usize)) {
        let geom = &self.geom;
        let dim = geom.dim();
        let cx = geom.coords(x);
        let (x0lo, x0hi) = self.window(cx[0]);
        let (x1lo, x1hi) = if dim == 2 { self.window(cx[1]) } else { (0, 0) };
        let off = geom.side() as i64 - 1;
        let w = self.width;
        let h = geom.cell_side();
        let mut ys: Vec<(usize, [i64; 2], u64)> = Vec::new();
        for y1 in x1lo..=x1hi {
            for y0 in x0lo..=x0hi {
                let c = [y0, y1];
                let i = geom.index(c);
                if f1[i] != 0.0 {
                    let d = [cx[0] - y0, cx[1] - y1];
                    ys.push((i, d, (d[0] * d[0] + d[1] * d[1]) as u64));
                }
            }
        }
        let mut zs: Vec<(usize, [i64; 2], u64)> = Vec::new();
        for z1 in x1lo..=x1hi {
            for z0 in x0lo..=x0hi {
                let c = [z0, z1];
                let i = geom.index(c);
                if f2[i] != 0.0 {
                    let d = [cx[0] - z0, cx[1] - z1];
                    zs.push((i, d, (d[0] * d[0] + d[1] * d[1]) as u64));
                }
            }
        }
        for &(iy, dy, sy) in &ys {
            let ybase = match dim {
                1 => (dy[0] + off) as usize,
                _ => (dy[0] + off) as usize + (dy[1] + off) as usize * w,
            };
            for &(iz, dz, sz) in &zs {
                let s = sy + sz;
                if s == 0 {
                    continue;
                }
                let k = match &self.table {
                    Some(t) => {
                        let flat = match dim {
                            1 => ybase + (dz[0] + off) as usize * w,
                            _ => ybase + ((dz[0] + off) as usize + (dz[1] + off) as usize * w) * w * w,
                        };
                        t[flat]
                    }
                    None => {
                        let a = [dy[0] as f64 * h, dy[1] as f64 * h];
                        let b = [dz[0] as f64 * h, dz[1] as f64 * h];
                        self.kernel.eval_displacement(&a[..dim], &b[..dim])
                    }
                };
                if k != 0.0 {
                    visit(s, k * self.weight, iy, iz);
                }
            }
        }
    }
}

fn check_pair(f1: &GridFunction, f2: &GridFunction) -> Result<Geometry> {
    if f1.geometry() != f2.geometry() {
        return Err(Error::GeometryMismatch);
    }
    Ok(f1.geometry())
}

/// Number of radius levels needed so that every pair distance is below
/// `r_levels`.
fn level_count(geom: &Geometry) -> usize {
    let n1 = geom.side() as u64 - 1;
    let smax = (2 * geom.dim() as u64 * n1 * n1).max(1);
    (64 - smax.leading_zeros()) as usize
}

#[inline]
fn bin_of(s: u64) -> (usize, bool) {
    let j = 63 - s.leading_zeros() as usize;
    (j, s == 1u64 << j)
}

/// Per-cell open and sphere bins of `K f1 f2`.
#[derive(Clone, Debug)]
pub struct Bins {
    geom: Geometry,
    levels: usize,
    open: Vec<f64>,
    sphere: Vec<f64>,
}

impl Bins {
    pub fn compute(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction) -> Result<Self> {
        let geom = check_pair(f1, f2)?;
        let scan = PairScan::new(kernel, geom)?;
        let levels = level_count(&geom);
        let cells = geom.num_cells();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..cells)
            .into_par_iter()
            .map(|x| {
                let mut open = vec![0.0; levels];
                let mut sphere = vec![0.0; levels];
                if !kernel.is_zero() {
                    scan.for_each_pair(x, f1.values(), f2.values(), |s, k, y, z| {
                        let v = k * f1.values()[y] * f2.values()[z];
                        let (j, exact) = bin_of(s);
                        if exact {
                            sphere[j] += v;
                        } else {
                            open[j] += v;
                        }
                    });
                }
                (open, sphere)
            })
            .collect();
        let mut open = Vec::with_capacity(cells * levels);
        let mut sphere = Vec::with_capacity(cells * levels);
        for (o, s) in rows {
            open.extend(o);
            sphere.extend(s);
        }
        Ok(Bins {
            geom,
            levels,
            open,
            sphere,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    /// Number of radius levels `J`; `r_J` exceeds every pair distance.
    pub fn levels(&self) -> usize {
        self.levels
    }

    fn row(&self, x: usize) -> (&[f64], &[f64]) {
        let r = x * self.levels..(x + 1) * self.levels;
        (&self.open[r.clone()], &self.sphere[r])
    }

    /// `T_{r_a, r_b}(x)`; `b ≥ J` means no outer truncation.
    pub fn annulus(&self, x: usize, a: usize, b: usize) -> f64 {
        let (open, sphere) = self.row(x);
        let b = b.min(self.levels);
        let mut s = 0.0;
        for j in a..b {
            if j > a {
                s += sphere[j];
            }
            s += open[j];
        }
        s
    }

    /// Same annulus with the inner sphere `S = 2^a` included.
    pub fn annulus_closed(&self, x: usize, a: usize, b: usize) -> f64 {
        let (_, sphere) = self.row(x);
        let inner = if a < self.levels && a < b { sphere[a] } else { 0.0 };
        inner + self.annulus(x, a, b)
    }

    /// `sup_{a ≥ 0} |T_{r_a, ∞}(x)|`.
    pub fn maximal(&self, x: usize) -> f64 {
        let (open, sphere) = self.row(x);
        let mut best = 0.0f64;
        let mut tail = 0.0;
        // tail(a) = Σ_{j≥a} open_j + Σ_{j>a} sphere_j, built from the outside in.
        for a in (0..self.levels).rev() {
            if a + 1 < self.levels {
                tail += sphere[a + 1];
            }
            tail += open[a];
            best = best.max(tail.abs());
        }
        best
    }

    /// `sup_{0 ≤ a < b ≤ top} |T_{r_a, r_b}(x)|`.
    pub fn localized(&self, x: usize, top: usize) -> f64 {
        let (open, sphere) = self.row(x);
        let top = top.min(self.levels);
        let mut best = 0.0f64;
        for a in 0..top {
            let mut s = 0.0;
            for b in a + 1..=top {
                let j = b - 1;
                if j > a {
                    s += sphere[j];
                }
                s += open[j];
                best = best.max(s.abs());
            }
        }
        best
    }
}

impl Bins {
    /// Least `s ≤ top` such that `|T_{r_a,r_b}(x)| ≤ thr` and the same with the
    /// inner sphere included, for every `s ≤ a < b ≤ top`.
    pub(crate) fn stopping_index(&self, x: usize, top: usize, thr: f64) -> usize {
        let (open, sphere) = self.row(x);
        let top = top.min(self.levels);
        let mut s = top;
        for a in (0..top).rev() {
            let mut acc = 0.0;
            for b in a + 1..=top {
                let j = b - 1;
                if j > a {
                    acc += sphere[j];
                }
                acc += open[j];
                if acc.abs() > thr || (acc + sphere[a]).abs() > thr {
                    return s;
                }
            }
            s = a;
        }
        s
    }
}

fn snap_square(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= 1e-9 * t.max(1.0) {
        r
    } else {
        t
    }
}

/// `T_{ε,δ}(f1,f2)` by direct summation over cell pairs with
/// `ε² < |x-y|² + |x-z|² < δ²`; `δ = ∞` is allowed.
pub fn truncated_apply(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, eps: f64, delta: f64) -> Result<GridFunction> {
    let geom = check_pair(f1, f2)?;
    if !(eps > 0.0) {
        return Err(Error::Precondition("eps must be positive".into()));
    }
    if eps >= delta || kernel.is_zero() {
        return Ok(GridFunction::zeros(geom));
    }
    let h = geom.cell_side();
    let lo = snap_square((eps / h) * (eps / h));
    let hi = if delta.is_finite() {
        snap_square((delta / h) * (delta / h))
    } else {
        f64::INFINITY
    };
    let scan = PairScan::new(kernel, geom)?;
    let out: Vec<f64> = (0..geom.num_cells())
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            scan.for_each_pair(x, f1.values(), f2.values(), |s, k, y, z| {
                let s = s as f64;
                if s > lo && s < hi {
                    acc += k * f1.values()[y] * f2.values()[z];
                }
            });
            acc
        })
        .collect();
    GridFunction::new(geom, out)
}

/// The discretized operator `T = T_{h√n, ∞}`: only pairs closer than one
/// cell diameter are excluded.
pub fn apply(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    let geom = check_pair(f1, f2)?;
    truncated_apply(kernel, f1, f2, grid_radius(&geom, cell_diameter_index(&geom)), f64::INFINITY)
}

/// `T_♯ = sup_ε |T_{ε,∞}|` over the radius grid `ε = r_j`, `j ≥ 0`.
pub fn maximal_truncation(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    let bins = Bins::compute(kernel, f1, f2)?;
    Ok(maximal_from_bins(&bins))
}

pub(crate) fn maximal_from_bins(bins: &Bins) -> GridFunction {
    let geom = bins.geometry();
    let out = (0..geom.num_cells()).map(|x| bins.maximal(x)).collect();
    GridFunction::new(geom, out).expect("finite")
}

/// `T_{♯,P}` on the cells of the box `p`.
pub(crate) fn localized_from_bins(bins: &Bins, p: &CellBox) -> Vec<(usize, f64)> {
    let geom = bins.geometry();
    geom.cells_of(p)
        .into_iter()
        .map(|x| {
            let c = p.cells_to_boundary(geom.coords(x));
            let v = admissible_top(c).map_or(0.0, |top| bins.localized(x, top));
            (x, v)
        })
        .collect()
}

/// `T_{♯,P}(f1,f2) = sup_{0<ε<δ<½dist(x,∂P)} |T_{ε,δ}| 1_P` on the radius grid.
pub fn localized_maximal_truncation(kernel: &Kernel, p: &DyadicCube, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    let bins = Bins::compute(kernel, f1, f2)?;
    let geom = bins.geometry();
    let pb = geom.cell_box(p)?;
    let mut out = vec![0.0; geom.num_cells()];
    for (x, v) in localized_from_bins(&bins, &pb) {
        out[x] = v;
    }
    GridFunction::new(geom, out)
}

/// `[b,T]_i(f1,f2) = b_i T(f1,f2) - T(…, b_i f_i, …)` for slot `i ∈ {0,1}`,
/// summed in kernel form `Σ K (b_i(x) - b_i(y_i)) f1(y) f2(z)`.
pub fn commutator(kernel: &Kernel, b_list: &[GridFunction], f1: &GridFunction, f2: &GridFunction, i: usize) -> Result<GridFunction> {
    let geom = check_pair(f1, f2)?;
    if i > 1 || b_list.len() != 2 {
        return Err(Error::Precondition("commutators take two symbols and slot 0 or 1".into()));
    }
    let b = &b_list[i];
    if b.geometry() != geom {
        return Err(Error::GeometryMismatch);
    }
    if kernel.is_zero() {
        return Ok(GridFunction::zeros(geom));
    }
    let lo = 1u64 << cell_diameter_index(&geom);
    let scan = PairScan::new(kernel, geom)?;
    let bv = b.values();
    let out: Vec<f64> = (0..geom.num_cells())
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            scan.for_each_pair(x, f1.values(), f2.values(), |s, k, y, z| {
                if s > lo {
                    let other = if i == 0 { bv[y] } else { bv[z] };
                    acc += k * (bv[x] - other) * f1.values()[y] * f2.values()[z];
                }
            });
            acc
        })
        .collect();
    GridFunction::new(geom, out)
}

/// `Σ_i [b,T]_i(f1,f2)`.
pub fn full_commutator(kernel: &Kernel, b_list: &[GridFunction], f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    commutator(kernel, b_list, f1, f2, 0)?.add(&commutator(kernel, b_list, f1, f2, 1)?)
}
