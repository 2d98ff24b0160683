//! Recursive stopping-cube construction behind pointwise sparse domination.
//!
//! At a node `Q0` with `A = Π⟨|f_j|⟩_{Q0}` and threshold `C0·A`, every cell `x`
//! of `E = {T_{♯,Q0} > C0·A}` gets a stopping radius index `s(x)`: the least
//! `s` with every grid annulus `r_a < |·| < r_b` (and its inner-sphere-closed
//! variant) for `s ≤ a < b` inside `Q0` bounded by the threshold. `x` is then
//! covered by the finest cube `Q_x ⊆ Q0`, over all shifted systems, on which
//! `r_s` is still admissible. Splitting any annulus at `r_s` gives
//! `T_{♯,Q0}(x) ≤ C0·A + T_{♯,Q_x}(x)`. The maximal `Q_x` are selected; `C0`
//! doubles until they cover at most `selection_ratio·|Q0|`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::czo::{admissible_top, localized_from_bins, maximal_from_bins, Bins, Kernel};
use crate::dyadic::{CellBox, DyadicCube, Geometry};
use crate::error::{Error, Result};
use crate::gridfn::{box_sum, GridFunction};
use crate::report::VerificationReport;
use crate::sparse::family::{sparse_apply, verify_sparseness, SparseFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DominationConfig {
    /// Declared sparseness of the output families.
    pub eps_n: f64,
    /// Measure bound `Σ|Q| ≤ selection_ratio·|Q0|` enforced at each node.
    pub selection_ratio: f64,
    pub max_doublings: u32,
    /// Nodes at level `≥ K - terminal_margin` are not refined.
    pub terminal_margin: u32,
    /// Starting `C0`; defaults to `2^{-8}` times the operator scale.
    pub initial_c0: Option<f64>,
    /// Relative tolerance of the cellwise property check.
    pub tolerance: f64,
}

impl Default for DominationConfig {
    fn default() -> Self {
        DominationConfig {
            eps_n: 0.5,
            selection_ratio: 1.0 / 3.0,
            max_doublings: 30,
            terminal_margin: 2,
            initial_c0: None,
            tolerance: 1e-12,
        }
    }
}

impl DominationConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps_n > 0.0 && self.eps_n < 1.0) || !(self.selection_ratio > 0.0 && self.selection_ratio <= self.eps_n) {
            return Err(Error::Precondition("need 0 < selection_ratio <= eps_n < 1".into()));
        }
        if let Some(c) = self.initial_c0 {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Precondition("initial_c0 must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// One recursion node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRecord {
    pub cube: DyadicCube,
    pub average_product: f64,
    pub c0: f64,
    pub doublings: u32,
    pub terminal: bool,
    pub selected: Vec<DyadicCube>,
    /// `Σ|Q| / |Q0|` over the selection.
    pub measure_ratio: f64,
    pub measure_ok: bool,
    pub non_nested: bool,
    /// Cellwise `T_{♯,Q0} ≤ C0·A + max_Q T_{♯,Q}` on `Q0`.
    pub pointwise_ok: bool,
    /// Largest `lhs / rhs` in that check.
    pub pointwise_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub cubes: Vec<DyadicCube>,
    pub c0: f64,
    pub record: NodeRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationResult {
    /// `S^u` for `u = 0..3^n`.
    pub families: Vec<SparseFamily>,
    /// `max T_♯ / Σ_u A_{S^u}` over cells with positive denominator.
    pub constant: f64,
    pub trace: Vec<NodeRecord>,
    #[serde(skip)]
    pub sparseness: Vec<VerificationReport>,
    /// Cells with `T_♯ > 0` and vanishing denominator.
    #[serde(skip)]
    pub uncovered: Vec<usize>,
    #[serde(skip)]
    pub maximal_truncation: GridFunction,
    #[serde(skip)]
    pub sparse_sum: GridFunction,
}

impl DominationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domination result serializes")
    }

    /// Every node satisfies the measure bound, non-nesting and the cellwise property.
    pub fn node_properties_hold(&self) -> bool {
        self.trace.iter().all(|r| r.measure_ok && r.non_nested && r.pointwise_ok)
    }

    pub fn all_sparse(&self) -> bool {
        self.sparseness.iter().all(|r| r.pass)
    }

    /// `T_♯ ≤ C·Σ_u A_{S^u}` at every cell, at the stored constant.
    pub fn pointwise_holds(&self) -> bool {
        self.uncovered.is_empty()
            && self
                .maximal_truncation
                .values()
                .iter()
                .zip(self.sparse_sum.values())
                .all(|(t, a)| *t <= self.constant * a * (1.0 + 1e-12))
    }
}

struct Ctx<'a> {
    geom: Geometry,
    bins: &'a Bins,
    abs1: Vec<f64>,
    abs2: Vec<f64>,
    scale: f64,
    cfg: &'a DominationConfig,
}

fn check_inputs(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction) -> Result<Geometry> {
    let geom = f1.geometry();
    if f2.geometry() != geom {
        return Err(Error::GeometryMismatch);
    }
    if kernel.dim() != geom.dim() {
        return Err(Error::Kernel("kernel and geometry dimensions differ".into()));
    }
    Ok(geom)
}

impl Ctx<'_> {
    fn average_product(&self, b: &CellBox) -> f64 {
        let n = b.measure_cells() as f64;
        (box_sum(&self.geom, &self.abs1, b) / n) * (box_sum(&self.geom, &self.abs2, b) / n)
    }

    /// Finest cube over all systems containing `c`, inside `q0b`, with `r_s` admissible.
    fn cover(&self, q0: &DyadicCube, q0b: &CellBox, c: [i64; 2], s: usize) -> DyadicCube {
        for level in (q0.level..=self.geom.resolution() as i32).rev() {
            for u in 0..self.geom.num_systems() {
                let q = self.geom.containing_cube(u, level, c);
                let b = self.geom.cell_box(&q).expect("level in range");
                if q0b.contains_box(&b) && admissible_top(b.cells_to_boundary(c)).is_some_and(|t| t >= s) {
                    return q;
                }
            }
        }
        *q0
    }

    fn node(&self, q0: &DyadicCube) -> Result<Selection> {
        let geom = self.geom;
        let q0b = geom.cell_box(q0)?;
        let a = self.average_product(&q0b);
        let mut record = NodeRecord {
            cube: *q0,
            average_product: a,
            c0: 0.0,
            doublings: 0,
            terminal: q0.level >= geom.resolution() as i32 - self.cfg.terminal_margin as i32,
            selected: Vec::new(),
            measure_ratio: 0.0,
            measure_ok: true,
            non_nested: true,
            pointwise_ok: true,
            pointwise_ratio: 0.0,
        };
        if record.terminal {
            return Ok(Selection {
                cubes: Vec::new(),
                c0: 0.0,
                record,
            });
        }
        let local = localized_from_bins(self.bins, &q0b);
        let mut c0 = self.cfg.initial_c0.unwrap_or(self.scale / 256.0);
        for doubling in 0..=self.cfg.max_doublings {
            let thr = c0 * a;
            let mut by_box: HashMap<CellBox, DyadicCube> = HashMap::new();
            for &(x, v) in &local {
                if v <= thr {
                    continue;
                }
                let c = geom.coords(x);
                let top = admissible_top(q0b.cells_to_boundary(c)).expect("positive value needs a radius");
                let s = self.bins.stopping_index(x, top, thr);
                let q = self.cover(q0, &q0b, c, s);
                let b = geom.cell_box(&q)?;
                by_box.entry(b).and_modify(|e| *e = (*e).min(q)).or_insert(q);
            }
            let boxes: Vec<CellBox> = by_box.keys().copied().collect();
            let mut chosen: Vec<(DyadicCube, CellBox)> = by_box
                .iter()
                .filter(|(b, _)| !boxes.iter().any(|o| o != *b && o.contains_box(b)))
                .map(|(b, q)| (*q, *b))
                .collect();
            chosen.sort_by_key(|c| c.0);
            let measure: i64 = chosen.iter().map(|c| c.1.measure_cells()).sum();
            let ratio = measure as f64 / q0b.measure_cells() as f64;
            if ratio <= self.cfg.selection_ratio {
                let non_nested = chosen
                    .iter()
                    .all(|(_, b)| !chosen.iter().any(|(_, o)| o != b && o.contains_box(b)));
                let mut best = vec![0.0f64; geom.num_cells()];
                for (_, b) in &chosen {
                    for (x, v) in localized_from_bins(self.bins, b) {
                        best[x] = best[x].max(v);
                    }
                }
                let mut ok = true;
                let mut worst = 0.0f64;
                for &(x, v) in &local {
                    let rhs = thr + best[x];
                    if v > rhs + self.cfg.tolerance * v.max(rhs) {
                        ok = false;
                    }
                    if v > 0.0 {
                        worst = worst.max(if rhs > 0.0 { v / rhs } else { f64::INFINITY });
                    }
                }
                record.c0 = c0;
                record.doublings = doubling;
                record.selected = chosen.iter().map(|c| c.0).collect();
                record.measure_ratio = ratio;
                record.measure_ok = ratio <= self.cfg.eps_n;
                record.non_nested = non_nested;
                record.pointwise_ok = ok;
                record.pointwise_ratio = worst;
                return Ok(Selection {
                    cubes: record.selected.clone(),
                    c0,
                    record,
                });
            }
            if c0 == 0.0 {
                break;
            }
            c0 *= 2.0;
        }
        Err(Error::Calibration(self.cfg.max_doublings))
    }
}

fn context<'a>(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, bins: &'a Bins, cfg: &'a DominationConfig) -> Ctx<'a> {
    Ctx {
        geom: f1.geometry(),
        bins,
        abs1: f1.abs().into_values(),
        abs2: f2.abs().into_values(),
        scale: kernel.operator_scale(),
        cfg,
    }
}

/// One recursion step at `q0`: the selected cubes and the `C0` that validated them.
pub fn dominate_cube(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, q0: &DyadicCube, cfg: &DominationConfig) -> Result<Selection> {
    cfg.validate()?;
    check_inputs(kernel, f1, f2)?;
    let bins = Bins::compute(kernel, f1, f2)?;
    context(kernel, f1, f2, &bins, cfg).node(q0)
}

/// Runs the recursion from the base cube, splits the nodes by system and
/// measures the achieved constant.
pub fn sparse_domination(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, cfg: &DominationConfig) -> Result<DominationResult> {
    cfg.validate()?;
    let geom = check_inputs(kernel, f1, f2)?;
    let bins = Bins::compute(kernel, f1, f2)?;
    let ctx = context(kernel, f1, f2, &bins, cfg);
    let mut seen: HashSet<CellBox> = HashSet::new();
    let mut nodes: Vec<DyadicCube> = Vec::new();
    let mut trace: Vec<NodeRecord> = Vec::new();
    let mut frontier = vec![geom.base_cube()];
    seen.insert(geom.base_box());
    while !frontier.is_empty() {
        let results: Vec<Result<Selection>> = frontier.par_iter().map(|q| ctx.node(q)).collect();
        let mut next: Vec<DyadicCube> = Vec::new();
        for r in results {
            let sel = r?;
            next.extend(sel.cubes.iter().copied());
            nodes.push(sel.record.cube);
            trace.push(sel.record);
        }
        next.sort();
        next.dedup();
        frontier = next
            .into_iter()
            .filter(|q| seen.insert(geom.cell_box(q).expect("selected cubes are valid")))
            .collect();
    }
    let families = (0..geom.num_systems())
        .map(|u| SparseFamily::new(geom, nodes.iter().copied().filter(|q| q.system == u), cfg.eps_n))
        .collect::<Result<Vec<_>>>()?;
    let sparseness = families.iter().map(|f| verify_sparseness(f, cfg.eps_n)).collect();
    let all = SparseFamily::new(geom, nodes.iter().copied(), cfg.eps_n)?;
    let sparse_sum = sparse_apply(&all, &f1.abs(), &f2.abs())?;
    let sharp = maximal_from_bins(&bins);
    let mut constant = 0.0f64;
    let mut uncovered = Vec::new();
    for (x, (t, d)) in sharp.values().iter().zip(sparse_sum.values()).enumerate() {
        if *d > 0.0 {
            constant = constant.max(t / d);
        } else if *t > 0.0 {
            uncovered.push(x);
        }
    }
    Ok(DominationResult {
        families,
        constant,
        trace,
        sparseness,
        uncovered,
        maximal_truncation: sharp,
        sparse_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_inputs_select_nothing() {
        let geom = Geometry::new(1, 6).unwrap();
        let k = Kernel::smooth_tensor(1, 1.0, 0.25).unwrap();
        let cfg = DominationConfig::default();
        let z = GridFunction::zeros(geom);
        let s = dominate_cube(&k, &z, &z, &geom.base_cube(), &cfg).unwrap();
        assert!(s.cubes.is_empty() && s.record.doublings == 0);
        let one = GridFunction::constant(geom, 1.0);
        let s = dominate_cube(&Kernel::zero(1).unwrap(), &one, &one, &geom.base_cube(), &cfg).unwrap();
        assert!(s.cubes.is_empty());
        let r = sparse_domination(&Kernel::zero(1).unwrap(), &one, &one, &cfg).unwrap();
        assert_eq!(r.constant, 0.0);
        assert_eq!(r.families[0].cubes(), &[geom.base_cube()]);
    }

    #[test]
    fn constant_inputs_give_valid_selection() {
        let geom = Geometry::new(1, 8).unwrap();
        let k = Kernel::smooth_tensor(1, 1.0, 0.25).unwrap();
        let one = GridFunction::constant(geom, 1.0);
        let s = dominate_cube(&k, &one, &one, &geom.base_cube(), &DominationConfig::default()).unwrap();
        assert!(s.record.measure_ratio <= 0.5 && s.record.non_nested && s.record.pointwise_ok);
    }

    #[test]
    fn concentrated_inputs_select_cubes() {
        let geom = Geometry::new(1, 8).unwrap();
        let k = Kernel::homogeneous(1, 1.0, 0.5).unwrap();
        let f = GridFunction::from_midpoints(geom, |x| if (0.5..0.5625).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let s = dominate_cube(&k, &f, &f, &geom.base_cube(), &DominationConfig::default()).unwrap();
        assert!(!s.cubes.is_empty());
        assert!(s.record.measure_ratio <= 1.0 / 3.0 && s.record.non_nested && s.record.pointwise_ok);
        let b = geom.cell_box(&s.cubes[0]).unwrap();
        assert!(geom.base_box().contains_box(&b));
    }

    #[test]
    fn domination_end_to_end() {
        let geom = Geometry::new(1, 7).unwrap();
        let k = Kernel::smooth_tensor(1, 1.0, 0.25).unwrap();
        let f1 = GridFunction::from_midpoints(geom, |x| if x[0] < 0.6 { 1.0 } else { 0.5 }).unwrap();
        let f2 = GridFunction::from_midpoints(geom, |x| 1.0 + x[0]).unwrap();
        let r = sparse_domination(&k, &f1, &f2, &DominationConfig::default()).unwrap();
        assert!(r.node_properties_hold());
        assert!(r.pointwise_holds());
        assert!(r.constant > 0.0 && r.constant.is_finite());
    }
}
