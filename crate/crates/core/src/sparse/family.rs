//! Sparse families and the sparse operators built on them.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::dyadic::{CellBox, DyadicCube, Geometry};
use crate::error::{Error, Result};
use crate::gridfn::{box_p_average, box_sum, GridFunction};
use crate::report::{digest, VerificationReport};

/// A finite set of dyadic cubes, possibly from several shifted systems.
///
/// `ch(S)` are the maximal members strictly inside `S`; the family is
/// `γ`-sparse when `Σ_{S' ∈ ch(S)} |S'| ≤ γ|S|` for every member.
#[derive(Clone, Debug)]
pub struct SparseFamily {
    geom: Geometry,
    cubes: Vec<DyadicCube>,
    boxes: Vec<CellBox>,
    gamma: f64,
    ratios: OnceLock<Vec<f64>>,
}

impl Serialize for SparseFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.cubes.serialize(s)
    }
}

impl PartialEq for SparseFamily {
    fn eq(&self, other: &Self) -> bool {
        self.geom == other.geom && self.cubes == other.cubes && self.gamma == other.gamma
    }
}

impl SparseFamily {
    pub fn new(geom: Geometry, cubes: impl IntoIterator<Item = DyadicCube>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Precondition("sparseness target must lie in (0,1)".into()));
        }
        let mut cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        cubes.sort();
        cubes.dedup();
        let boxes = cubes.iter().map(|q| geom.cell_box(q)).collect::<Result<Vec<_>>>()?;
        Ok(SparseFamily {
            geom,
            cubes,
            boxes,
            gamma,
            ratios: OnceLock::new(),
        })
    }

    pub fn empty(geom: Geometry, gamma: f64) -> Result<Self> {
        Self::new(geom, std::iter::empty(), gamma)
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn boxes(&self) -> &[CellBox] {
        &self.boxes
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Indices of `ch(S)` for member `i`; identical boxes count once.
    pub fn children(&self, i: usize) -> Vec<usize> {
        let s = &self.boxes[i];
        let inside: Vec<usize> = (0..self.len())
            .filter(|&j| self.boxes[j] != *s && s.contains_box(&self.boxes[j]))
            .collect();
        let mut out: Vec<usize> = Vec::new();
        for &j in &inside {
            let b = &self.boxes[j];
            let covered = inside
                .iter()
                .any(|&k| self.boxes[k] != *b && self.boxes[k].contains_box(b));
            if !covered && !out.iter().any(|&k| self.boxes[k] == *b) {
                out.push(j);
            }
        }
        out
    }

    /// `Σ_{ch(S)} |S'| / |S|` per member, cached.
    pub fn child_ratios(&self) -> &[f64] {
        self.ratios.get_or_init(|| {
            (0..self.len())
                .into_par_iter()
                .map(|i| {
                    let m: i64 = self.children(i).iter().map(|&j| self.boxes[j].measure_cells()).sum();
                    m as f64 / self.boxes[i].measure_cells() as f64
                })
                .collect()
        })
    }

    pub fn max_child_ratio(&self) -> f64 {
        self.child_ratios().iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.cubes).expect("cubes serialize")
    }

    pub fn from_json(geom: Geometry, text: &str, gamma: f64) -> Result<Self> {
        let cubes: Vec<DyadicCube> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(geom, cubes, gamma)
    }
}

/// Maximal child-mass ratio against `gamma_s`; passes iff the ratio is at most `gamma_s`.
pub fn verify_sparseness(family: &SparseFamily, gamma_s: f64) -> VerificationReport {
    let r = family.max_child_ratio();
    let d: Vec<f64> = family
        .cubes()
        .iter()
        .flat_map(|q| [q.system as f64, q.level as f64, q.offset[0] as f64, q.offset[1] as f64])
        .collect();
    VerificationReport::new("sparseness", r, gamma_s, 1.0, digest(&[&d]))
}

fn check_inputs(family: &SparseFamily, f1: &GridFunction, f2: &GridFunction) -> Result<()> {
    if f1.geometry() != family.geometry() || f2.geometry() != family.geometry() {
        return Err(Error::GeometryMismatch);
    }
    Ok(())
}

pub(crate) fn scatter(geom: &Geometry, boxes: &[CellBox], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; geom.num_cells()];
    for (b, c) in boxes.iter().zip(coeffs) {
        if *c != 0.0 {
            geom.for_each_cell(b, |i| out[i] += c);
        }
    }
    out
}

/// `A_S(f1,f2) = Σ_{Q∈S} ⟨f1⟩_Q ⟨f2⟩_Q 1_Q`.
pub fn sparse_apply(family: &SparseFamily, f1: &GridFunction, f2: &GridFunction) -> Result<GridFunction> {
    check_inputs(family, f1, f2)?;
    let geom = family.geometry();
    let coeffs: Vec<f64> = family
        .boxes()
        .par_iter()
        .map(|b| {
            let n = b.measure_cells() as f64;
            (box_sum(&geom, f1.values(), b) / n) * (box_sum(&geom, f2.values(), b) / n)
        })
        .collect();
    GridFunction::new(geom, scatter(&geom, family.boxes(), &coeffs))
}

/// `A_{p0,γ,S}(f1,f2) = (Σ_{Q∈S} [⟨f1⟩_{Q,p0} ⟨f2⟩_{Q,p0}]^γ 1_Q)^{1/γ}`.
pub fn general_sparse_apply(family: &SparseFamily, f1: &GridFunction, f2: &GridFunction, p0: f64, gamma: f64) -> Result<GridFunction> {
    check_inputs(family, f1, f2)?;
    if !(p0 >= 1.0) || !(gamma > 0.0) {
        return Err(Error::Precondition("need p0 >= 1 and gamma > 0".into()));
    }
    let geom = family.geometry();
    let coeffs: Vec<f64> = family
        .boxes()
        .par_iter()
        .map(|b| {
            let v = box_p_average(&geom, f1.values(), b, p0) * box_p_average(&geom, f2.values(), b, p0);
            if gamma == 1.0 {
                v
            } else {
                v.powf(gamma)
            }
        })
        .collect();
    let s = scatter(&geom, family.boxes(), &coeffs);
    let out = if gamma == 1.0 {
        s
    } else {
        s.into_iter().map(|v| v.powf(1.0 / gamma)).collect()
    };
    GridFunction::new(geom, out)
}
