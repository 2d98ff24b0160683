//! Shifted dyadic systems on a discretized base cube `[0,1)^n`.
//!
//! A cube is addressed by `(system, level, offset)`. The system index `u` in
//! `0..3^n` encodes a digit vector in `{0,1,2}^n` lexicographically (first axis
//! most significant). The exact realization of a cube is
//! `2^{-k}([0,1)^n + m + (-1)^k u/3)`; for computation the shift is snapped to
//! the cell lattice of the geometry so every cube is a union of cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarsest level any computation accepts (cubes four times the base side).
pub const MIN_LEVEL: i32 = -2;
/// Finest supported resolution.
pub const MAX_RESOLUTION: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Geometry {
    dim: usize,
    resolution: u32,
}

/// Which cubes of a level to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Cubes contained in the base cube.
    Inside,
    /// Cubes meeting the base cube (clipped for integration).
    Intersecting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "CubeRecord", into = "CubeRecord")]
pub struct DyadicCube {
    pub system: u32,
    pub level: i32,
    pub offset: [i64; 2],
    dim: u8,
}

#[derive(Serialize, Deserialize)]
struct CubeRecord {
    system: u32,
    level: i32,
    offset: Vec<i64>,
}

impl TryFrom<CubeRecord> for DyadicCube {
    type Error = Error;
    fn try_from(r: CubeRecord) -> Result<Self> {
        DyadicCube::new(r.offset.len(), r.system, r.level, &r.offset)
    }
}

impl From<DyadicCube> for CubeRecord {
    fn from(c: DyadicCube) -> Self {
        CubeRecord {
            system: c.system,
            level: c.level,
            offset: c.offset[..c.dim as usize].to_vec(),
        }
    }
}

/// Half-open box of cells `[lo, hi)` per axis, in cell units. Unused axes of a
/// one-dimensional box are `[0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellBox {
    pub lo: [i64; 2],
    pub hi: [i64; 2],
    dim: u8,
}

pub fn num_systems(dim: usize) -> u32 {
    3u32.pow(dim as u32)
}

/// Digit `u_d` of system `u` on axis `d`.
pub fn system_digit(dim: usize, system: u32, axis: usize) -> u32 {
    let power = 3u32.pow((dim - 1 - axis) as u32);
    (system / power) % 3
}

fn level_sign(level: i32) -> i64 {
    if level.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl DyadicCube {
    pub fn new(dim: usize, system: u32, level: i32, offset: &[i64]) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Geometry(format!("dimension {dim} not in {{1,2}}")));
        }
        if offset.len() != dim {
            return Err(Error::Geometry(format!(
                "offset has {} entries, dimension is {dim}",
                offset.len()
            )));
        }
        if system >= num_systems(dim) {
            return Err(Error::Geometry(format!("system {system} >= 3^{dim}")));
        }
        let mut off = [0i64; 2];
        off[..dim].copy_from_slice(offset);
        Ok(DyadicCube {
            system,
            level,
            offset: off,
            dim: dim as u8,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn sidelength(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn volume(&self) -> f64 {
        self.sidelength().powi(self.dim as i32)
    }

    pub fn digit(&self, axis: usize) -> u32 {
        system_digit(self.dim(), self.system, axis)
    }

    /// Exact half-open interval per axis.
    pub fn realize(&self) -> Vec<(f64, f64)> {
        let side = self.sidelength();
        let sign = level_sign(self.level) as f64;
        (0..self.dim())
            .map(|d| {
                let lo = side * (self.offset[d] as f64 + sign * self.digit(d) as f64 / 3.0);
                (lo, lo + side)
            })
            .collect()
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let dim = self.dim();
        let sign = level_sign(self.level);
        (0..(1usize << dim))
            .map(|j| {
                let mut off = [0i64; 2];
                for (d, o) in off.iter_mut().enumerate().take(dim) {
                    *o = 2 * self.offset[d] + sign * self.digit(d) as i64 + ((j >> d) & 1) as i64;
                }
                DyadicCube {
                    system: self.system,
                    level: self.level + 1,
                    offset: off,
                    dim: self.dim,
                }
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        let sign = level_sign(self.level - 1);
        let mut off = [0i64; 2];
        for (d, o) in off.iter_mut().enumerate().take(self.dim()) {
            *o = (self.offset[d] - sign * self.digit(d) as i64).div_euclid(2);
        }
        DyadicCube {
            system: self.system,
            level: self.level - 1,
            offset: off,
            dim: self.dim,
        }
    }
}

impl CellBox {
    pub fn new(dim: usize, lo: [i64; 2], hi: [i64; 2]) -> Self {
        let mut lo = lo;
        let mut hi = hi;
        if dim == 1 {
            lo[1] = 0;
            hi[1] = 1;
        }
        CellBox { lo, hi, dim: dim as u8 }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Unclipped number of cells.
    pub fn measure_cells(&self) -> i64 {
        (0..self.dim()).map(|d| self.hi[d] - self.lo[d]).product()
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim()).any(|d| self.hi[d] <= self.lo[d])
    }

    pub fn intersect(&self, other: &CellBox) -> CellBox {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for d in 0..self.dim() {
            lo[d] = lo[d].max(other.lo[d]);
            hi[d] = hi[d].min(other.hi[d]).max(lo[d]);
        }
        CellBox::new(self.dim(), lo, hi)
    }

    pub fn contains_box(&self, other: &CellBox) -> bool {
        (0..self.dim()).all(|d| self.lo[d] <= other.lo[d] && other.hi[d] <= self.hi[d])
    }

    pub fn contains_cell(&self, c: [i64; 2]) -> bool {
        (0..self.dim()).all(|d| self.lo[d] <= c[d] && c[d] < self.hi[d])
    }

    /// Number of whole cells between cell `c` and the box boundary,
    /// minimized over axes and sides. Requires `c` inside the box.
    pub fn cells_to_boundary(&self, c: [i64; 2]) -> i64 {
        (0..self.dim())
            .map(|d| (c[d] - self.lo[d]).min(self.hi[d] - 1 - c[d]))
            .min()
            .unwrap_or(0)
    }
}

impl Geometry {
    pub fn new(dim: usize, resolution: u32) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Geometry(format!("dimension {dim} not in {{1,2}}")));
        }
        if resolution == 0 || resolution > MAX_RESOLUTION {
            return Err(Error::Geometry(format!(
                "resolution {resolution} not in 1..={MAX_RESOLUTION}"
            )));
        }
        Ok(Geometry { dim, resolution })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Cells per axis.
    pub fn side(&self) -> usize {
        1usize << self.resolution
    }

    pub fn num_cells(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn cell_side(&self) -> f64 {
        2f64.powi(-(self.resolution as i32))
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_side().powi(self.dim as i32)
    }

    pub fn num_systems(&self) -> u32 {
        num_systems(self.dim)
    }

    pub fn coords(&self, index: usize) -> [i64; 2] {
        let s = self.side();
        if self.dim == 1 {
            [index as i64, 0]
        } else {
            [(index % s) as i64, (index / s) as i64]
        }
    }

    pub fn index(&self, c: [i64; 2]) -> usize {
        c[0] as usize + if self.dim == 2 { c[1] as usize * self.side() } else { 0 }
    }

    pub fn midpoint(&self, index: usize) -> [f64; 2] {
        let c = self.coords(index);
        let h = self.cell_side();
        let mut m = [0.0; 2];
        for d in 0..self.dim {
            m[d] = (c[d] as f64 + 0.5) * h;
        }
        m
    }

    pub fn base_cube(&self) -> DyadicCube {
        DyadicCube::new(self.dim, 0, 0, &vec![0; self.dim]).expect("base cube")
    }

    pub fn base_box(&self) -> CellBox {
        let n = self.side() as i64;
        CellBox::new(self.dim, [0, 0], [n, n])
    }

    pub fn cube(&self, system: u32, level: i32, offset: &[i64]) -> Result<DyadicCube> {
        DyadicCube::new(self.dim, system, level, offset)
    }

    pub fn check_level(&self, level: i32) -> Result<()> {
        if level < MIN_LEVEL || level > self.resolution as i32 {
            return Err(Error::LevelOutOfRange {
                level,
                min: MIN_LEVEL,
                max: self.resolution as i32,
            });
        }
        Ok(())
    }

    /// Snapped shift of a system at a level, in cells.
    pub fn shift_cells(&self, system: u32, level: i32) -> [i64; 2] {
        let sign = level_sign(level);
        let scale = 1i64 << (self.resolution as i32 - level);
        let mut s = [0i64; 2];
        for (d, sd) in s.iter_mut().enumerate().take(self.dim) {
            let num = system_digit(self.dim, system, d) as i64 * scale;
            *sd = sign * ((num + 1) / 3);
        }
        s
    }

    pub fn cells_per_side(&self, level: i32) -> i64 {
        1i64 << (self.resolution as i32 - level)
    }

    /// Snapped cell box of a cube (not clipped to the base).
    pub fn cell_box(&self, cube: &DyadicCube) -> Result<CellBox> {
        if cube.dim() != self.dim {
            return Err(Error::GeometryMismatch);
        }
        self.check_level(cube.level)?;
        Ok(self.cell_box_unchecked(cube.system, cube.level, cube.offset))
    }

    pub(crate) fn cell_box_unchecked(&self, system: u32, level: i32, offset: [i64; 2]) -> CellBox {
        let len = self.cells_per_side(level);
        let shift = self.shift_cells(system, level);
        let mut lo = [0i64; 2];
        let mut hi = [0i64; 2];
        for d in 0..self.dim {
            lo[d] = offset[d] * len + shift[d];
            hi[d] = lo[d] + len;
        }
        CellBox::new(self.dim, lo, hi)
    }

    /// The cube of `system` at `level` containing the cell with coordinates `c`.
    pub fn containing_cube(&self, system: u32, level: i32, c: [i64; 2]) -> DyadicCube {
        let len = self.cells_per_side(level);
        let shift = self.shift_cells(system, level);
        let mut off = [0i64; 2];
        for d in 0..self.dim {
            off[d] = (c[d] - shift[d]).div_euclid(len);
        }
        DyadicCube {
            system,
            level,
            offset: off,
            dim: self.dim as u8,
        }
    }

    /// Cubes of one system and level, in lexicographic offset order (last
    /// axis slowest), with their cell boxes.
    pub fn cubes_at(&self, system: u32, level: i32, placement: Placement) -> Vec<(DyadicCube, CellBox)> {
        let n = self.side() as i64;
        let len = self.cells_per_side(level);
        let shift = self.shift_cells(system, level);
        let mut ranges = [(0i64, 0i64); 2];
        for d in 0..self.dim {
            let s = shift[d];
            ranges[d] = match placement {
                Placement::Intersecting => ((-s).div_euclid(len), (n - s - 1).div_euclid(len)),
                Placement::Inside => (-(s.div_euclid(len)), (n - s).div_euclid(len) - 1),
            };
        }
        let (r1lo, r1hi) = if self.dim == 2 { ranges[1] } else { (0, 0) };
        let mut out = Vec::new();
        for m1 in r1lo..=r1hi {
            for m0 in ranges[0].0..=ranges[0].1 {
                let off = [m0, m1];
                let b = self.cell_box_unchecked(system, level, off);
                out.push((
                    DyadicCube {
                        system,
                        level,
                        offset: off,
                        dim: self.dim as u8,
                    },
                    b,
                ));
            }
        }
        out
    }

    /// All cubes over every system and the given levels, ordered by system,
    /// then level, then offset.
    pub fn all_cubes(&self, levels: std::ops::RangeInclusive<i32>, placement: Placement) -> Vec<(DyadicCube, CellBox)> {
        let mut out = Vec::new();
        for u in 0..self.num_systems() {
            for k in levels.clone() {
                out.extend(self.cubes_at(u, k, placement));
            }
        }
        out
    }

    /// Cubes used for suprema "over all cubes": every system, levels `0..=K`.
    pub fn sup_cubes(&self, placement: Placement) -> Vec<(DyadicCube, CellBox)> {
        self.all_cubes(0..=self.resolution as i32, placement)
    }

    /// Indices of the cells of `b` that lie in the base cube, in index order.
    pub fn cells_of(&self, b: &CellBox) -> Vec<usize> {
        let c = b.intersect(&self.base_box());
        let mut out = Vec::with_capacity(c.measure_cells().max(0) as usize);
        if c.is_empty() {
            return out;
        }
        let s = self.side();
        for y in c.lo[1]..c.hi[1] {
            for x in c.lo[0]..c.hi[0] {
                out.push(x as usize + if self.dim == 2 { y as usize * s } else { 0 });
            }
        }
        out
    }

    /// Calls `f` on every base cell index of `b`.
    #[inline]
    pub fn for_each_cell(&self, b: &CellBox, mut f: impl FnMut(usize)) {
        let c = b.intersect(&self.base_box());
        if c.is_empty() {
            return;
        }
        let s = self.side();
        for y in c.lo[1]..c.hi[1] {
            let row = if self.dim == 2 { y as usize * s } else { 0 };
            for x in c.lo[0]..c.hi[0] {
                f(row + x as usize);
            }
        }
    }

    /// Real-coordinate bounds of a cell box.
    pub fn box_bounds(&self, b: &CellBox) -> Vec<(f64, f64)> {
        let h = self.cell_side();
        (0..self.dim).map(|d| (b.lo[d] as f64 * h, b.hi[d] as f64 * h)).collect()
    }

    fn ball_in_box(&self, b: &CellBox, center: &[f64], r: f64) -> bool {
        self.box_bounds(b)
            .iter()
            .zip(center)
            .all(|(&(lo, hi), &c)| lo <= c - r && c + r <= hi)
    }

    fn containing_cube_real(&self, system: u32, level: i32, center: &[f64]) -> DyadicCube {
        let h = self.cell_side();
        let len = self.cells_per_side(level) as f64;
        let shift = self.shift_cells(system, level);
        let mut off = [0i64; 2];
        for d in 0..self.dim {
            off[d] = ((center[d] / h - shift[d] as f64) / len).floor() as i64;
        }
        DyadicCube {
            system,
            level,
            offset: off,
            dim: self.dim as u8,
        }
    }

    /// A cube `Q_B` containing the ball `B(center, r)` with `6r < l(Q_B) < 12r`.
    pub fn cube_for_ball(&self, center: &[f64], r: f64) -> Result<DyadicCube> {
        if !(r > 0.0) || center.len() != self.dim {
            return Err(Error::Precondition("ball needs r > 0 and a center of the right dimension".into()));
        }
        if center.iter().any(|&c| c - r < -1.0 || c + r > 2.0) {
            return Err(Error::NoCube("ball leaves the representable region [-1,2)^n".into()));
        }
        let mut level = (-(12.0 * r).log2()).ceil() as i32;
        if 2f64.powi(-level) >= 12.0 * r {
            level += 1;
        }
        let side = 2f64.powi(-level);
        if !(6.0 * r < side && side < 12.0 * r) {
            return Err(Error::NoCube(format!("no dyadic sidelength strictly inside (6r, 12r) for r = {r}")));
        }
        self.check_level(level)?;
        for u in 0..self.num_systems() {
            let q = self.containing_cube_real(u, level, center);
            let b = self.cell_box_unchecked(u, level, q.offset);
            if self.ball_in_box(&b, center, r) {
                return Ok(q);
            }
        }
        Err(Error::NoCube(format!("no system at level {level} contains the ball")))
    }

    /// A cube `Q_B` with `B ⊂ Q_B ⊆ q0` and `l(Q_B) ≤ 12r`; the finest such cube
    /// is returned, ties broken by the lowest system index.
    pub fn cube_for_ball_within(&self, q0: &DyadicCube, center: &[f64], r: f64) -> Result<DyadicCube> {
        let b0 = self.cell_box(q0)?;
        if !(r > 0.0) || center.len() != self.dim || !self.ball_in_box(&b0, center, r) {
            return Err(Error::Precondition("ball must lie inside q0".into()));
        }
        for level in (q0.level..=self.resolution as i32).rev() {
            if 2f64.powi(-level) > 12.0 * r {
                break;
            }
            for u in 0..self.num_systems() {
                let q = self.containing_cube_real(u, level, center);
                let b = self.cell_box_unchecked(u, level, q.offset);
                if b0.contains_box(&b) && self.ball_in_box(&b, center, r) {
                    return Ok(q);
                }
            }
        }
        Err(Error::NoCube("no admissible cube inside q0".into()))
    }
}
