//! Stopping cubes of a sparse family relative to a weighted average.

use std::collections::BTreeMap;

use crate::dyadic::{CellBox, DyadicCube};
use crate::error::{Error, Result};
use crate::gridfn::{box_sum, box_weighted_average, GridFunction, Weight};
use crate::sparse::family::SparseFamily;

#[derive(Clone, Debug)]
pub struct StoppingFamily {
    pub top: DyadicCube,
    /// Stopping cubes in processing order, `top` first.
    pub stopping: Vec<DyadicCube>,
    /// `π(Q)`: the minimal stopping cube containing `Q`, for every processed
    /// member (stopping cubes map to themselves).
    pub pi: BTreeMap<DyadicCube, DyadicCube>,
    /// For each stopping cube other than `top`, the stopping cube it was found under.
    pub parent: BTreeMap<DyadicCube, DyadicCube>,
    /// `⟨|f|⟩^σ_Q` of every processed member.
    pub averages: BTreeMap<DyadicCube, f64>,
    /// Members inside `top` with `σ(Q) = 0`, left out.
    pub excluded: Vec<DyadicCube>,
}

/// Walks the members of `family` inside `top` from coarse to fine; `Q` becomes a
/// stopping cube when `⟨|f|⟩^σ_Q > 2⟨|f|⟩^σ_{π(Q)}`.
pub fn stopping_family(f: &GridFunction, s: &Weight, family: &SparseFamily, top: &DyadicCube) -> Result<StoppingFamily> {
    let geom = family.geometry();
    if f.geometry() != geom || s.geometry() != geom {
        return Err(Error::GeometryMismatch);
    }
    if !family.cubes().contains(top) {
        return Err(Error::Precondition("top must belong to the family".into()));
    }
    let abs = f.abs().into_values();
    let top_box = geom.cell_box(top)?;
    let top_avg = box_weighted_average(&geom, &abs, s.values(), &top_box).ok_or(Error::ZeroMass)?;
    let mut members: Vec<(DyadicCube, CellBox)> = family
        .cubes()
        .iter()
        .zip(family.boxes())
        .filter(|(q, b)| *q != top && top_box.contains_box(b))
        .map(|(q, b)| (*q, *b))
        .collect();
    members.sort_by_key(|(q, _)| (q.level, *q));
    let mut out = StoppingFamily {
        top: *top,
        stopping: vec![*top],
        pi: BTreeMap::from([(*top, *top)]),
        parent: BTreeMap::new(),
        averages: BTreeMap::from([(*top, top_avg)]),
        excluded: Vec::new(),
    };
    let mut stop_boxes: Vec<(DyadicCube, CellBox, f64)> = vec![(*top, top_box, top_avg)];
    for (q, b) in members {
        let Some(avg) = box_weighted_average(&geom, &abs, s.values(), &b) else {
            out.excluded.push(q);
            continue;
        };
        // Finest containing stopping cube; lowest system among equal levels.
        let (pq, _, pavg) = stop_boxes
            .iter()
            .filter(|(_, sb, _)| sb.contains_box(&b))
            .min_by_key(|(sq, _, _)| (-sq.level, *sq))
            .copied()
            .expect("top contains every member");
        out.averages.insert(q, avg);
        if avg > 2.0 * pavg {
            out.stopping.push(q);
            out.parent.insert(q, pq);
            out.pi.insert(q, q);
            stop_boxes.push((q, b, avg));
        } else {
            out.pi.insert(q, pq);
        }
    }
    Ok(out)
}

impl StoppingFamily {
    /// Stopping cubes found directly under `f`.
    pub fn children(&self, f: &DyadicCube) -> Vec<DyadicCube> {
        self.parent.iter().filter(|(_, p)| *p == f).map(|(c, _)| *c).collect()
    }

    /// `max_F Σ_{children F'} σ(F') / σ(F)`.
    pub fn sigma_sparseness(&self, s: &Weight) -> Result<f64> {
        let geom = s.geometry();
        let mass = |q: &DyadicCube| -> Result<f64> { Ok(box_sum(&geom, s.values(), &geom.cell_box(q)?)) };
        let mut worst = 0.0f64;
        for f in &self.stopping {
            let kids = self.children(f);
            if kids.is_empty() {
                continue;
            }
            let mut num = 0.0;
            for k in &kids {
                num += mass(k)?;
            }
            worst = worst.max(num / mass(f)?);
        }
        Ok(worst)
    }

    /// `max_Q ⟨|f|⟩^σ_Q / ⟨|f|⟩^σ_{π(Q)}` over processed members.
    pub fn stopping_bound(&self) -> f64 {
        self.pi
            .iter()
            .map(|(q, p)| {
                let (a, b) = (self.averages[q], self.averages[p]);
                if b > 0.0 {
                    a / b
                } else if a > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}
