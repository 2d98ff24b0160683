//! Weight characteristics, generators and the reverse-Hölder check.
//!
//! Every characteristic is a supremum over the cubes contained in the base
//! cube, over all shifted systems and levels `0..=K`. The witness is the first
//! cube (system, then level, then offset order) attaining the maximum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CellBox, DyadicCube, Geometry, Placement};
use crate::error::{Error, Result};
use crate::gridfn::{GridFunction, Weight};
use crate::maximal::local_maximal;
use crate::report::{digest, VerificationReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExponentTuple {
    p_list: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ExponentTuple {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ExponentTuple::new(v)
    }
}

impl From<ExponentTuple> for Vec<f64> {
    fn from(e: ExponentTuple) -> Self {
        e.p_list
    }
}

impl ExponentTuple {
    pub fn new(p_list: Vec<f64>) -> Result<Self> {
        if p_list.is_empty() || p_list.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
            return Err(Error::Precondition("every exponent must be finite and > 1".into()));
        }
        Ok(ExponentTuple { p_list })
    }

    pub fn len(&self) -> usize {
        self.p_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_list.is_empty()
    }

    pub fn p_list(&self) -> &[f64] {
        &self.p_list
    }

    pub fn p_i(&self, i: usize) -> f64 {
        self.p_list[i]
    }

    /// `p` with `1/p = Σ 1/p_i`.
    pub fn p(&self) -> f64 {
        1.0 / self.p_list.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    /// Dual exponent `p_i' = p_i/(p_i - 1)`.
    pub fn dual(&self, i: usize) -> f64 {
        conjugate(self.p_list[i])
    }

    /// The tuple `P/p0`; every entry must stay above 1.
    pub fn divided(&self, p0: f64) -> Result<Self> {
        ExponentTuple::new(self.p_list.iter().map(|p| p / p0).collect())
    }
}

/// Hölder conjugate `s/(s-1)`.
pub fn conjugate(s: f64) -> f64 {
    s / (s - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub name: String,
    pub value: f64,
    pub witness: Option<DyadicCube>,
}

fn check_geometries(ws: &[&Weight]) -> Result<Geometry> {
    let g = ws.first().ok_or_else(|| Error::Precondition("no weights".into()))?.geometry();
    if ws.iter().any(|w| w.geometry() != g) {
        return Err(Error::GeometryMismatch);
    }
    Ok(g)
}

/// Supremum of `value` over inside cubes with a first-attained witness.
pub(crate) fn sup_report(geom: &Geometry, name: &str, value: impl Fn(&CellBox) -> f64 + Sync) -> ConstantsReport {
    let cubes = geom.sup_cubes(Placement::Inside);
    let vals: Vec<f64> = cubes.par_iter().map(|(_, b)| value(b)).collect();
    let mut best = (f64::NEG_INFINITY, None);
    for ((q, _), v) in cubes.iter().zip(vals) {
        if v > best.0 {
            best = (v, Some(*q));
        }
    }
    ConstantsReport {
        name: name.to_string(),
        value: best.0,
        witness: best.1,
    }
}

fn one_report(name: &str) -> ConstantsReport {
    ConstantsReport {
        name: name.to_string(),
        value: 1.0,
        witness: None,
    }
}

#[inline]
fn mean_pow(geom: &Geometry, w: &[f64], b: &CellBox, e: f64) -> f64 {
    let mut s = 0.0;
    if e == 1.0 {
        geom.for_each_cell(b, |i| s += w[i]);
    } else {
        geom.for_each_cell(b, |i| s += w[i].powf(e));
    }
    s / b.measure_cells() as f64
}

#[inline]
fn mean_log(geom: &Geometry, w: &[f64], b: &CellBox) -> f64 {
    let mut s = 0.0;
    geom.for_each_cell(b, |i| s += w[i].ln());
    s / b.measure_cells() as f64
}

/// `[w]_{A_p} = sup_Q ⟨w⟩_Q ⟨w^{1-p'}⟩_Q^{p-1}`.
pub fn ap_constant(w: &Weight, p: f64) -> Result<ConstantsReport> {
    if !(p > 1.0) {
        return Err(Error::Precondition("p must exceed 1".into()));
    }
    let geom = w.geometry();
    let e = 1.0 - conjugate(p);
    let v = w.values();
    Ok(sup_report(&geom, "ap", |b| mean_pow(&geom, v, b, 1.0) * mean_pow(&geom, v, b, e).powf(p - 1.0)))
}

/// `[w,σ⃗]_{A_P} = sup_Q ⟨w⟩_Q Π ⟨σ_i⟩_Q^{p/p_i'}`.
pub fn multilinear_ap_constant(w: &Weight, sigmas: &[Weight], pt: &ExponentTuple) -> Result<ConstantsReport> {
    if sigmas.len() != pt.len() {
        return Err(Error::Precondition("one sigma per exponent".into()));
    }
    let mut all: Vec<&Weight> = vec![w];
    all.extend(sigmas.iter());
    let geom = check_geometries(&all)?;
    let p = pt.p();
    let exps: Vec<f64> = (0..pt.len()).map(|i| p / pt.dual(i)).collect();
    Ok(sup_report(&geom, "multilinear_ap", |b| {
        let mut v = mean_pow(&geom, w.values(), b, 1.0);
        for (s, e) in sigmas.iter().zip(&exps) {
            v *= mean_pow(&geom, s.values(), b, 1.0).powf(*e);
        }
        v
    }))
}

/// Fujii–Wilson `[w]_{A_∞} = sup_Q w(Q)^{-1} ∫_Q M(1_Q w)`.
pub fn fujii_wilson(w: &Weight) -> ConstantsReport {
    let geom = w.geometry();
    let v = w.values();
    sup_report(&geom, "fujii_wilson", |b| {
        let m: f64 = local_maximal(&geom, v, b).iter().sum();
        let mut s = 0.0;
        geom.for_each_cell(b, |i| s += v[i]);
        m / s
    })
}

/// Ratio `∫_Q Π M(1_Q u_j)^{e_j} / ∫_Q Π u_j^{e_j}` on one cube.
fn mixed_maximal_ratio(geom: &Geometry, ws: &[&[f64]], exps: &[f64], b: &CellBox) -> f64 {
    let cells = geom.cells_of(b);
    let mut num = vec![1.0f64; cells.len()];
    for (w, &e) in ws.iter().zip(exps) {
        let m = local_maximal(geom, w, b);
        for (acc, mv) in num.iter_mut().zip(&m) {
            *acc *= mv.powf(e);
        }
    }
    let n: f64 = num.iter().sum();
    let d: f64 = cells
        .iter()
        .map(|&i| ws.iter().zip(exps).map(|(w, &e)| w[i].powf(e)).product::<f64>())
        .sum();
    n / d
}

/// `[w⃗]_{W_P^∞} = sup_Q ∫_Q Π M(w_i 1_Q)^{p/p_i} / ∫_Q Π w_i^{p/p_i}`.
pub fn multilinear_w_infty(ws: &[Weight], pt: &ExponentTuple) -> Result<ConstantsReport> {
    if ws.len() != pt.len() {
        return Err(Error::Precondition("one weight per exponent".into()));
    }
    let geom = check_geometries(&ws.iter().collect::<Vec<_>>())?;
    let p = pt.p();
    let exps: Vec<f64> = pt.p_list().iter().map(|pi| p / pi).collect();
    let vals: Vec<&[f64]> = ws.iter().map(|w| w.values()).collect();
    Ok(sup_report(&geom, "multilinear_w_infty", |b| mixed_maximal_ratio(&geom, &vals, &exps, b)))
}

fn dual_index_check(sigmas: &[Weight], pt: &ExponentTuple, gamma: f64, i: usize) -> Result<()> {
    if sigmas.len() != pt.len() || i >= pt.len() {
        return Err(Error::Precondition("index or weight count mismatch".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Precondition("gamma must be positive".into()));
    }
    Ok(())
}

/// The dual Fujii–Wilson type constant attached to slot `i` (0-based):
/// 1 when `p ≤ γ`; otherwise, with `q = p/γ` and `a = (p_i/γ)'`,
/// `sup_Q ∫_Q M(1_Q w)^{a/q'} Π_{j≠i} M(1_Q σ_j)^{a/(p_j/γ)} / ∫_Q w^{a/q'} Π_{j≠i} σ_j^{a/(p_j/γ)}`.
pub fn dual_w_infty(w: &Weight, sigmas: &[Weight], pt: &ExponentTuple, gamma: f64, i: usize) -> Result<ConstantsReport> {
    dual_index_check(sigmas, pt, gamma, i)?;
    let p = pt.p();
    if p <= gamma {
        return Ok(one_report("dual_w_infty"));
    }
    let mut all: Vec<&Weight> = vec![w];
    all.extend(sigmas.iter());
    let geom = check_geometries(&all)?;
    let q = p / gamma;
    let a = conjugate(pt.p_i(i) / gamma);
    let mut vals: Vec<&[f64]> = vec![w.values()];
    let mut exps = vec![a / conjugate(q)];
    for (j, s) in sigmas.iter().enumerate() {
        if j != i {
            vals.push(s.values());
            exps.push(a / (pt.p_i(j) / gamma));
        }
    }
    Ok(sup_report(&geom, "dual_w_infty", |b| mixed_maximal_ratio(&geom, &vals, &exps, b)))
}

/// `[w⃗]_{H_P^∞} = sup_Q Π ⟨w_i⟩_Q^{p/p_i} exp(⨍_Q log w_i^{-1})^{p/p_i}`.
pub fn hruscev(ws: &[Weight], pt: &ExponentTuple) -> Result<ConstantsReport> {
    if ws.len() != pt.len() {
        return Err(Error::Precondition("one weight per exponent".into()));
    }
    let geom = check_geometries(&ws.iter().collect::<Vec<_>>())?;
    let p = pt.p();
    let exps: Vec<f64> = pt.p_list().iter().map(|pi| p / pi).collect();
    Ok(sup_report(&geom, "hruscev", |b| {
        ws.iter()
            .zip(&exps)
            .map(|(w, &e)| (mean_pow(&geom, w.values(), b, 1.0) * (-mean_log(&geom, w.values(), b)).exp()).powf(e))
            .product()
    }))
}

/// The dual Hruščev type constant attached to slot `i` (0-based): 1 when
/// `p ≤ γ`; otherwise
/// `sup_Q (⟨w⟩ exp(⨍ log w^{-1}))^{p_i'(1/γ-1/p)_+} Π_{j≠i} (⟨σ_j⟩ exp(⨍ log σ_j^{-1}))^{p_i'/p_j}`.
pub fn dual_h_infty(w: &Weight, sigmas: &[Weight], pt: &ExponentTuple, gamma: f64, i: usize) -> Result<ConstantsReport> {
    dual_index_check(sigmas, pt, gamma, i)?;
    let p = pt.p();
    if p <= gamma {
        return Ok(one_report("dual_h_infty"));
    }
    let mut all: Vec<&Weight> = vec![w];
    all.extend(sigmas.iter());
    let geom = check_geometries(&all)?;
    let pid = pt.dual(i);
    let ew = pid * (1.0 / gamma - 1.0 / p).max(0.0);
    let mut vals: Vec<&[f64]> = vec![w.values()];
    let mut exps = vec![ew];
    for (j, s) in sigmas.iter().enumerate() {
        if j != i {
            vals.push(s.values());
            exps.push(pid / pt.p_i(j));
        }
    }
    Ok(sup_report(&geom, "dual_h_infty", |b| {
        vals.iter()
            .zip(&exps)
            .map(|(v, &e)| (mean_pow(&geom, v, b, 1.0) * (-mean_log(&geom, v, b)).exp()).powf(e))
            .product()
    }))
}

/// `ν_w⃗ = Π w_i^{p/p_i}`.
pub fn nu_weight(ws: &[Weight], pt: &ExponentTuple) -> Result<Weight> {
    if ws.len() != pt.len() {
        return Err(Error::Precondition("one weight per exponent".into()));
    }
    let geom = check_geometries(&ws.iter().collect::<Vec<_>>())?;
    let p = pt.p();
    let values = (0..geom.num_cells())
        .map(|c| ws.iter().zip(pt.p_list()).map(|(w, pi)| w.values()[c].powf(p / pi)).product())
        .collect();
    Weight::from_values(geom, values)
}

/// `σ = w^{1-p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    w.powf(1.0 - conjugate(p))
}

/// Checks `⟨w^r⟩_Q^{1/r} ≤ 2⟨w⟩_Q` on every cube with `r = 1 + 1/(c_n [w]_{A_∞})`;
/// the report carries the worst cube.
pub fn reverse_holder_check(w: &Weight, c_n: f64) -> Result<VerificationReport> {
    if !(c_n > 0.0) {
        return Err(Error::Precondition("c_n must be positive".into()));
    }
    let geom = w.geometry();
    let a = fujii_wilson(w).value;
    let r = 1.0 + 1.0 / (c_n * a);
    let v = w.values();
    let cubes = geom.sup_cubes(Placement::Inside);
    let pairs: Vec<(f64, f64)> = cubes
        .par_iter()
        .map(|(_, b)| (mean_pow(&geom, v, b, r).powf(1.0 / r), mean_pow(&geom, v, b, 1.0)))
        .collect();
    let mut worst = (0.0, 1.0, f64::NEG_INFINITY);
    for (l, rr) in pairs {
        if l / rr > worst.2 {
            worst = (l, rr, l / rr);
        }
    }
    Ok(VerificationReport::new("reverse_holder", worst.0, worst.1, 2.0, digest(&[v, &[c_n]]))
        .with_note(format!("r = {r}, [w]_A_inf = {a}")))
}

/// `|x|^a` sampled at cell midpoints (distance from the base-cube corner).
pub fn power_weight(a: f64, geom: Geometry) -> Result<Weight> {
    if !(a > -(geom.dim() as f64)) {
        return Err(Error::Precondition("power weight needs a > -n".into()));
    }
    Weight::new(GridFunction::from_midpoints(geom, |x| {
        x.iter().map(|t| t * t).sum::<f64>().sqrt().powf(a)
    })?)
}

/// `e^{s b}` cellwise.
pub fn exp_weight(b: &GridFunction, s: f64) -> Result<Weight> {
    Weight::new(b.map(|v| (s * v).exp())?)
}
