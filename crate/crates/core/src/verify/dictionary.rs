//! Test-function dictionaries and dictionary lower bounds for operator norms.

use rayon::prelude::*;

use crate::dyadic::{CellBox, Geometry, Placement};
use crate::error::{Error, Result};
use crate::gridfn::{lp_norm, GridFunction, Weight};
use crate::weights::ExponentTuple;

/// Pairs of test functions: cube indicators of the unshifted system,
/// signed sibling combinations and single-cell spikes.
#[derive(Clone, Debug)]
pub struct TestDictionary {
    geom: Geometry,
    pairs: Vec<(GridFunction, GridFunction)>,
}

fn indicators(geom: Geometry, top: i32) -> Vec<(GridFunction, CellBox)> {
    (0..=top.min(geom.resolution() as i32))
        .flat_map(|k| geom.cubes_at(0, k, Placement::Inside))
        .map(|(_, b)| (GridFunction::indicator_box(geom, &b, 1.0), b))
        .collect()
}

/// `1_Q - 1_{Q'}` for the first two children of each cube at levels `0..top`.
fn signed_pairs(geom: Geometry, top: i32) -> Vec<GridFunction> {
    let mut out = Vec::new();
    for k in 0..top.min(geom.resolution() as i32) {
        for (q, _) in geom.cubes_at(0, k, Placement::Inside) {
            let ch = q.children();
            let a = geom.cell_box(&ch[0]).expect("inside");
            let b = geom.cell_box(&ch[ch.len() - 1]).expect("inside");
            let mut v = vec![0.0; geom.num_cells()];
            geom.for_each_cell(&a, |i| v[i] = 1.0);
            geom.for_each_cell(&b, |i| v[i] = -1.0);
            out.push(GridFunction::new(geom, v).expect("finite"));
        }
    }
    out
}

/// Spikes at the first, the central and the last cell.
fn spikes(geom: Geometry) -> Vec<GridFunction> {
    let n = geom.num_cells();
    let mut centre = [0i64; 2];
    for c in centre.iter_mut().take(geom.dim()) {
        *c = geom.side() as i64 / 2;
    }
    let mut idx = vec![0, geom.index(centre), n - 1];
    idx.dedup();
    idx.into_iter()
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            GridFunction::new(geom, v).expect("finite")
        })
        .collect()
}

impl TestDictionary {
    /// Every ordered pair of indicators at levels `0..=3` (1D) or `0..=2` (2D),
    /// plus diagonal signed combinations and spikes, and each of those against `1`.
    pub fn standard(geom: Geometry) -> Self {
        let top = if geom.dim() == 1 { 3 } else { 2 };
        let ind: Vec<GridFunction> = indicators(geom, top).into_iter().map(|c| c.0).collect();
        let mut pairs = Vec::new();
        for a in &ind {
            for b in &ind {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let one = GridFunction::constant(geom, 1.0);
        for f in signed_pairs(geom, top).into_iter().chain(spikes(geom)) {
            pairs.push((f.clone(), f.clone()));
            pairs.push((f.clone(), one.clone()));
            pairs.push((one.clone(), f));
        }
        TestDictionary { geom, pairs }
    }

    /// A short dictionary for expensive operators: diagonal indicator pairs at
    /// levels `0..=2`, indicators against `1`, one signed combination, one spike.
    pub fn small(geom: Geometry) -> Self {
        let ind: Vec<GridFunction> = indicators(geom, 2).into_iter().map(|c| c.0).collect();
        let one = GridFunction::constant(geom, 1.0);
        let mut pairs = Vec::new();
        for (i, a) in ind.iter().enumerate() {
            pairs.push((a.clone(), a.clone()));
            if i > 0 {
                pairs.push((a.clone(), one.clone()));
            }
        }
        if let Some(s) = signed_pairs(geom, 1).into_iter().next() {
            pairs.push((s.clone(), one.clone()));
        }
        let spike = spikes(geom).swap_remove(1.min(geom.num_cells() - 1));
        pairs.push((spike.clone(), spike));
        TestDictionary { geom, pairs }
    }

    pub fn from_pairs(geom: Geometry, pairs: Vec<(GridFunction, GridFunction)>) -> Result<Self> {
        if pairs.iter().any(|(a, b)| a.geometry() != geom || b.geometry() != geom) {
            return Err(Error::GeometryMismatch);
        }
        Ok(TestDictionary { geom, pairs })
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    pub fn pairs(&self) -> &[(GridFunction, GridFunction)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Rescales every entry to unit `L^{p_i}(u_i)` norm; null entries are dropped.
    pub fn normalized(&self, pt: &ExponentTuple, u: [&Weight; 2]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (a, b) in &self.pairs {
            let na = lp_norm(a, pt.p_i(0), Some(u[0]))?;
            let nb = lp_norm(b, pt.p_i(1), Some(u[1]))?;
            if na > 0.0 && nb > 0.0 {
                pairs.push((a.scale(1.0 / na), b.scale(1.0 / nb)));
            }
        }
        Ok(TestDictionary { geom: self.geom, pairs })
    }
}

/// Measures for a norm ratio `‖op(g1,g2)‖_{L^p(w)} / Π ‖f_i‖_{L^{p_i}(u_i)}`.
///
/// With `multiply` set, `g_i = f_i u_i` (the `op(·σ1,·σ2)` form); otherwise `g_i = f_i`.
#[derive(Clone, Copy, Debug)]
pub struct NormProblem<'a> {
    pub pt: &'a ExponentTuple,
    pub output: &'a Weight,
    pub inputs: [&'a Weight; 2],
    pub multiply: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Dictionary index attaining the value, if any entry was admissible.
    pub entry: Option<usize>,
    /// Entries with a zero input norm, left out.
    pub excluded: usize,
}

/// Largest norm ratio over the dictionary: a lower bound for the operator norm.
pub fn norm_lower_estimate<F>(op: F, problem: &NormProblem, dict: &TestDictionary) -> Result<NormEstimate>
where
    F: Fn(&GridFunction, &GridFunction) -> Result<GridFunction> + Sync,
{
    let geom = dict.geometry();
    if problem.output.geometry() != geom || problem.inputs.iter().any(|w| w.geometry() != geom) {
        return Err(Error::GeometryMismatch);
    }
    if problem.pt.len() != 2 {
        return Err(Error::Precondition("bilinear operators need two exponents".into()));
    }
    let ratios: Vec<Option<f64>> = dict
        .pairs()
        .par_iter()
        .map(|(f1, f2)| -> Result<Option<f64>> {
            let n1 = lp_norm(f1, problem.pt.p_i(0), Some(problem.inputs[0]))?;
            let n2 = lp_norm(f2, problem.pt.p_i(1), Some(problem.inputs[1]))?;
            if !(n1 > 0.0 && n2 > 0.0) {
                return Ok(None);
            }
            let g = if problem.multiply {
                op(&f1.mul(problem.inputs[0].function())?, &f2.mul(problem.inputs[1].function())?)?
            } else {
                op(f1, f2)?
            };
            Ok(Some(lp_norm(&g, problem.pt.p(), Some(problem.output))? / (n1 * n2)))
        })
        .collect::<Result<_>>()?;
    let mut est = NormEstimate {
        value: 0.0,
        entry: None,
        excluded: 0,
    };
    for (i, r) in ratios.into_iter().enumerate() {
        match r {
            None => est.excluded += 1,
            Some(v) => {
                if est.entry.is_none() || v > est.value {
                    est.value = v;
                    est.entry = Some(i);
                }
            }
        }
    }
    Ok(est)
}
