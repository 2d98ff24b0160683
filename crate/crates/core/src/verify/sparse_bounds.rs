//! Weighted bounds for sparse operators and the lemmas behind them.

use std::collections::BTreeMap;

use crate::calib::CalibrationConstants;
use crate::dyadic::{CellBox, DyadicCube};
use crate::error::{Error, Result};
use crate::gridfn::{box_sum, box_weighted_average, lp_norm, GridFunction, Weight};
use crate::maximal::weighted_dyadic_maximal;
use crate::report::{digest, PointwiseCheck, VerificationReport};
use crate::sparse::{general_sparse_apply, scatter, SparseFamily};
use crate::verify::dictionary::{norm_lower_estimate, NormProblem, TestDictionary};
use crate::weights::{
    conjugate, dual_h_infty, dual_w_infty, fujii_wilson, hruscev, multilinear_ap_constant, multilinear_w_infty, ExponentTuple,
};

/// `⟨u⟩_Q` per member with the unclipped cell count as denominator.
fn means(family: &SparseFamily, u: &Weight) -> Vec<f64> {
    let geom = family.geometry();
    family
        .boxes()
        .iter()
        .map(|b| box_sum(&geom, u.values(), b) / b.measure_cells() as f64)
        .collect()
}

fn volumes(family: &SparseFamily) -> Vec<f64> {
    let h = family.geometry().cell_volume();
    family.boxes().iter().map(|b| b.measure_cells() as f64 * h).collect()
}

fn same_geometry(family: &SparseFamily, ws: &[&Weight]) -> Result<()> {
    if ws.iter().any(|w| w.geometry() != family.geometry()) {
        return Err(Error::GeometryMismatch);
    }
    Ok(())
}

fn weights_digest(ws: &[&Weight], extra: &[f64]) -> String {
    let mut parts: Vec<&[f64]> = ws.iter().map(|w| w.values()).collect();
    parts.push(extra);
    digest(&parts)
}

/// The testing inequality and its two dual forms on `family`:
///
/// * `‖(Σ ⟨σ1⟩^γ⟨σ2⟩^γ 1_Q)^{1/γ}‖_{L^p(w)} ≤ [w,σ⃗]^{1/p} (Σ ⟨σ1⟩^{p/p1}⟨σ2⟩^{p/p2}|Q|)^{1/p}`;
/// * with `r = (p_2/γ)'`, `‖Σ ⟨σ1⟩^γ⟨σ2⟩^{γ-1}⟨w⟩ 1_Q‖_{L^r(σ2)} ≤
///   [w,σ⃗]^{γ/p} (Σ ⟨σ1⟩^{γr/p1}⟨w⟩^{r(1-γ/p)}|Q|)^{1/r}`, and the same with the
///   slots exchanged.
///
/// The dual forms need `p > γ` and are skipped otherwise.
pub fn check_testing_lemma(
    family: &SparseFamily,
    w: &Weight,
    sigmas: &[Weight; 2],
    pt: &ExponentTuple,
    gamma: f64,
    calib: &CalibrationConstants,
) -> Result<Vec<VerificationReport>> {
    if !(gamma > 0.0) {
        return Err(Error::Precondition("gamma must be positive".into()));
    }
    if pt.len() != 2 {
        return Err(Error::Precondition("two exponents expected".into()));
    }
    same_geometry(family, &[w, &sigmas[0], &sigmas[1]])?;
    let geom = family.geometry();
    let p = pt.p();
    let ap = multilinear_ap_constant(w, sigmas, pt)?.value;
    let mw = means(family, w);
    let ms = [means(family, &sigmas[0]), means(family, &sigmas[1])];
    let vol = volumes(family);
    let dg = weights_digest(&[w, &sigmas[0], &sigmas[1]], &[pt.p_i(0), pt.p_i(1), gamma, family.len() as f64]);

    let coeffs: Vec<f64> = ms[0].iter().zip(&ms[1]).map(|(a, b)| (a * b).powf(gamma)).collect();
    let g = GridFunction::new(geom, scatter(&geom, family.boxes(), &coeffs))?.map(|v| v.powf(1.0 / gamma))?;
    let lhs = lp_norm(&g, p, Some(w))?;
    let sum: f64 = (0..family.len())
        .map(|k| ms[0][k].powf(p / pt.p_i(0)) * ms[1][k].powf(p / pt.p_i(1)) * vol[k])
        .sum();
    let rhs = ap.powf(1.0 / p) * sum.powf(1.0 / p);
    let mut out = vec![VerificationReport::new("testing", lhs, rhs, calib.slacks.testing, dg.clone())];

    for i in [1usize, 0] {
        let name = if i == 1 { "dual_testing" } else { "dual_testing_1" };
        if p <= gamma {
            out.push(VerificationReport::skipped(name, "dual forms need p > gamma", dg.clone()));
            continue;
        }
        let j = 1 - i;
        let r = conjugate(pt.p_i(i) / gamma);
        let coeffs: Vec<f64> = (0..family.len())
            .map(|k| ms[j][k].powf(gamma) * ms[i][k].powf(gamma - 1.0) * mw[k])
            .collect();
        let g = GridFunction::new(geom, scatter(&geom, family.boxes(), &coeffs))?;
        let lhs = lp_norm(&g, r, Some(&sigmas[i]))?;
        let sum: f64 = (0..family.len())
            .map(|k| ms[j][k].powf(gamma * r / pt.p_i(j)) * mw[k].powf(r * (1.0 - gamma / p)) * vol[k])
            .sum();
        let rhs = ap.powf(gamma / p) * sum.powf(1.0 / r);
        out.push(VerificationReport::new(name, lhs, rhs, calib.slacks.dual_testing, dg.clone()));
    }
    Ok(out)
}

/// Both sides of `‖φ‖_{L^s(σ)} ≂ (Σ α_Q (⟨φ_Q⟩^σ_Q)^{s-1} σ(Q))^{1/s}` with
/// `φ = Σ α_Q 1_Q` and `φ_Q = Σ_{Q' ⊆ Q} α_{Q'} 1_{Q'}`. The report's LHS is the
/// two-sided ratio `max(a/b, b/a)` against 1, so the slack is the
/// comparability window.
pub fn check_dyadic_sum(coeffs: &[(DyadicCube, f64)], s: f64, sigma: &Weight, calib: &CalibrationConstants) -> Result<VerificationReport> {
    if !(s > 1.0) {
        return Err(Error::Precondition("s must exceed 1".into()));
    }
    if coeffs.iter().any(|(_, a)| !(*a >= 0.0)) {
        return Err(Error::Precondition("coefficients must be nonnegative".into()));
    }
    let geom = sigma.geometry();
    let mut merged: BTreeMap<DyadicCube, f64> = BTreeMap::new();
    for (q, a) in coeffs {
        *merged.entry(*q).or_insert(0.0) += a;
    }
    let list: Vec<(CellBox, f64)> = merged
        .iter()
        .filter(|(_, a)| **a > 0.0)
        .map(|(q, a)| Ok((geom.cell_box(q)?, *a)))
        .collect::<Result<_>>()?;
    let boxes: Vec<CellBox> = list.iter().map(|c| c.0).collect();
    let alphas: Vec<f64> = list.iter().map(|c| c.1).collect();
    let phi = GridFunction::new(geom, scatter(&geom, &boxes, &alphas))?;
    let a = lp_norm(&phi, s, Some(sigma))?;
    let h = geom.cell_volume();
    let mut sum = 0.0;
    for (b, alpha) in &list {
        let inner: Vec<f64> = list
            .iter()
            .map(|(b2, a2)| if b.contains_box(b2) { *a2 } else { 0.0 })
            .collect();
        let phi_q = scatter(&geom, &boxes, &inner);
        let avg = box_weighted_average(&geom, &phi_q, sigma.values(), b).ok_or(Error::ZeroMass)?;
        let mass = box_sum(&geom, sigma.values(), b) * h;
        sum += alpha * avg.powf(s - 1.0) * mass;
    }
    let b = sum.powf(1.0 / s);
    let two_sided = if a == 0.0 && b == 0.0 {
        1.0
    } else if a == 0.0 || b == 0.0 {
        f64::INFINITY
    } else {
        (a / b).max(b / a)
    };
    let flat: Vec<f64> = merged.iter().flat_map(|(q, a)| [q.system as f64, q.level as f64, q.offset[0] as f64, q.offset[1] as f64, *a]).collect();
    Ok(VerificationReport::new("dyadic_sum", two_sided, 1.0, calib.slacks.dyadic_sum, digest(&[&flat, sigma.values(), &[s]]))
        .with_note(format!("norm {a:e}, sum form {b:e}")))
}

/// `Σ_{Q∈F, Q⊆R} ⟨u⟩_Q^g ⟨v⟩_Q^e |Q| ≤ slack · ⟨u⟩_R^g ⟨v⟩_R^e |R|`.
pub fn check_sparse_kolmogorov(
    family: &SparseFamily,
    u: &Weight,
    v: &Weight,
    g: f64,
    e: f64,
    r: &DyadicCube,
    calib: &CalibrationConstants,
) -> Result<VerificationReport> {
    if !(g >= 0.0 && e >= 0.0 && g + e < 1.0) {
        return Err(Error::Precondition("need g, e >= 0 and g + e < 1".into()));
    }
    same_geometry(family, &[u, v])?;
    let geom = family.geometry();
    let rb = geom.cell_box(r)?;
    let mu = means(family, u);
    let mv = means(family, v);
    let vol = volumes(family);
    let lhs: f64 = (0..family.len())
        .filter(|&k| rb.contains_box(&family.boxes()[k]))
        .map(|k| mu[k].powf(g) * mv[k].powf(e) * vol[k])
        .sum();
    let n = rb.measure_cells() as f64;
    let rhs = (box_sum(&geom, u.values(), &rb) / n).powf(g) * (box_sum(&geom, v.values(), &rb) / n).powf(e) * n * geom.cell_volume();
    Ok(VerificationReport::new(
        "kolmogorov",
        lhs,
        rhs,
        calib.slacks.kolmogorov,
        weights_digest(&[u, v], &[g, e, r.level as f64, family.len() as f64]),
    ))
}

/// Which mixed bound [`check_theorem`] assembles on its right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedBound {
    /// `A_P⃗`–`A_∞` with Fujii–Wilson constants of the single weights.
    ApAinfty,
    /// Multilinear Fujii–Wilson constants `W_P⃗^∞`.
    FujiiWilson,
    /// Multilinear Hruščev constants `H_P⃗^∞`.
    Hrushchev,
}

impl MixedBound {
    pub fn name(&self) -> &'static str {
        match self {
            MixedBound::ApAinfty => "theorem_ap_ainfty",
            MixedBound::FujiiWilson => "theorem_fujii_wilson",
            MixedBound::Hrushchev => "theorem_hruscev",
        }
    }

    fn slack(&self, calib: &CalibrationConstants) -> f64 {
        match self {
            MixedBound::ApAinfty => calib.slacks.theorem_ap_ainfty,
            MixedBound::FujiiWilson => calib.slacks.theorem_fujii_wilson,
            MixedBound::Hrushchev => calib.slacks.theorem_hruscev,
        }
    }
}

/// Rejects exponents outside `p0 < p_i` with `p0 ≥ 1`, and `γ < p0` unless `p > γ`.
pub fn check_regime(pt: &ExponentTuple, p0: f64, gamma: f64) -> Result<()> {
    if !(p0 >= 1.0) {
        return Err(Error::Regime(format!("p0 = {p0} must be at least 1")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Regime("gamma must be positive".into()));
    }
    if pt.p_list().iter().any(|&pi| pi <= p0) {
        return Err(Error::Regime(format!("need p0 < p_i, got p0 = {p0}, P = {:?}", pt.p_list())));
    }
    if gamma < p0 && pt.p() <= gamma {
        return Err(Error::Regime(format!("gamma < p0 needs p > gamma, got p = {}", pt.p())));
    }
    Ok(())
}

/// The right-hand side of the selected mixed bound (without slack).
pub fn mixed_bound_rhs(w: &Weight, sigmas: &[Weight; 2], pt: &ExponentTuple, p0: f64, gamma: f64, which: MixedBound) -> Result<f64> {
    check_regime(pt, p0, gamma)?;
    let p = pt.p();
    let ap = multilinear_ap_constant(w, sigmas, &pt.divided(p0)?)?.value.powf(1.0 / p);
    let tail = match which {
        MixedBound::ApAinfty => {
            let a = [fujii_wilson(&sigmas[0]).value, fujii_wilson(&sigmas[1]).value];
            let aw = fujii_wilson(w).value;
            let lead = a[0].powf(1.0 / pt.p_i(0)) * a[1].powf(1.0 / pt.p_i(1));
            let cross = a[1].powf(1.0 / pt.p_i(1)) + a[0].powf(1.0 / pt.p_i(0));
            lead + aw.powf((1.0 / gamma - 1.0 / p).max(0.0)) * cross
        }
        MixedBound::FujiiWilson => {
            let mut t = multilinear_w_infty(sigmas, pt)?.value.powf(1.0 / p);
            for i in 0..2 {
                let d = dual_w_infty(w, sigmas, pt, gamma, i)?.value;
                t += if p <= gamma { d } else { d.powf(1.0 / (gamma * conjugate(pt.p_i(i) / gamma))) };
            }
            t
        }
        MixedBound::Hrushchev => {
            let mut t = hruscev(sigmas, pt)?.value.powf(1.0 / p);
            for i in 0..2 {
                t += dual_h_infty(w, sigmas, pt, gamma, i)?.value.powf(1.0 / pt.dual(i));
            }
            t
        }
    };
    Ok(ap * tail)
}

/// Dictionary lower bound of `‖A_{p0,γ,S}(·σ1,·σ2)‖_{L^{p1}(σ1)×L^{p2}(σ2)→L^p(w)}`
/// against the selected mixed bound.
#[allow(clippy::too_many_arguments)]
pub fn check_theorem(
    family: &SparseFamily,
    w: &Weight,
    sigmas: &[Weight; 2],
    pt: &ExponentTuple,
    p0: f64,
    gamma: f64,
    dict: &TestDictionary,
    which: MixedBound,
    calib: &CalibrationConstants,
) -> Result<VerificationReport> {
    same_geometry(family, &[w, &sigmas[0], &sigmas[1]])?;
    let rhs = mixed_bound_rhs(w, sigmas, pt, p0, gamma, which)?;
    let problem = NormProblem {
        pt,
        output: w,
        inputs: [&sigmas[0], &sigmas[1]],
        multiply: true,
    };
    let est = norm_lower_estimate(|a, b| general_sparse_apply(family, a, b, p0, gamma), &problem, dict)?;
    let dg = weights_digest(&[w, &sigmas[0], &sigmas[1]], &[pt.p_i(0), pt.p_i(1), p0, gamma, family.len() as f64]);
    let mut rep = VerificationReport::new(which.name(), est.value, rhs, which.slack(calib), dg);
    if let Some(e) = est.entry {
        rep = rep.with_note(format!("dictionary entry {e}"));
    }
    Ok(rep)
}

/// Largest relative deviation between `A_{p0,γ,S}(f1,f2)` and
/// `A_{1,γ/p0,S}(|f1|^{p0},|f2|^{p0})^{1/p0}`; passes iff at most `tol`.
pub fn check_p0_reduction(family: &SparseFamily, f1: &GridFunction, f2: &GridFunction, p0: f64, gamma: f64, tol: f64) -> Result<VerificationReport> {
    let direct = general_sparse_apply(family, f1, f2, p0, gamma)?;
    let g1 = f1.map(|v| v.abs().powf(p0))?;
    let g2 = f2.map(|v| v.abs().powf(p0))?;
    let reduced = general_sparse_apply(family, &g1, &g2, 1.0, gamma / p0)?.map(|v| v.powf(1.0 / p0))?;
    let dev = direct
        .values()
        .iter()
        .zip(reduced.values())
        .map(|(a, b)| {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                (a - b).abs() / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(VerificationReport::new("p0_reduction", dev, tol, 1.0, digest(&[f1.values(), f2.values(), &[p0, gamma]])))
}

/// Cellwise `A_{1,γ,S}(f1σ1,f2σ2) ≤ (Σ_Q ⟨(M^{σ1}f1)^γ⟩^{σ1}_Q ⟨(M^{σ2}f2)^γ⟩^{σ2}_Q
/// ⟨σ1⟩_Q^γ⟨σ2⟩_Q^γ 1_Q)^{1/γ}`, with `M^σ` the weighted maximal function of
/// each member's own system. Holds with slack 1.
pub fn check_maximal_reduction(
    family: &SparseFamily,
    f1: &GridFunction,
    f2: &GridFunction,
    sigmas: &[Weight; 2],
    gamma: f64,
) -> Result<PointwiseCheck> {
    if !(gamma > 0.0) {
        return Err(Error::Precondition("gamma must be positive".into()));
    }
    same_geometry(family, &[&sigmas[0], &sigmas[1]])?;
    let geom = family.geometry();
    let g1 = f1.mul(sigmas[0].function())?;
    let g2 = f2.mul(sigmas[1].function())?;
    let lhs = general_sparse_apply(family, &g1, &g2, 1.0, gamma)?;
    let mut maxes: BTreeMap<u32, [GridFunction; 2]> = BTreeMap::new();
    for q in family.cubes() {
        if let std::collections::btree_map::Entry::Vacant(e) = maxes.entry(q.system) {
            let m1 = weighted_dyadic_maximal(f1, &sigmas[0], q.system)?.map(|v| v.powf(gamma))?;
            let m2 = weighted_dyadic_maximal(f2, &sigmas[1], q.system)?.map(|v| v.powf(gamma))?;
            e.insert([m1, m2]);
        }
    }
    let ms = [means(family, &sigmas[0]), means(family, &sigmas[1])];
    let coeffs: Vec<f64> = family
        .cubes()
        .iter()
        .zip(family.boxes())
        .enumerate()
        .map(|(k, (q, b))| {
            let m = &maxes[&q.system];
            let a1 = box_weighted_average(&geom, m[0].values(), sigmas[0].values(), b).unwrap_or(0.0);
            let a2 = box_weighted_average(&geom, m[1].values(), sigmas[1].values(), b).unwrap_or(0.0);
            a1 * a2 * (ms[0][k] * ms[1][k]).powf(gamma)
        })
        .collect();
    let rhs: Vec<f64> = scatter(&geom, family.boxes(), &coeffs).into_iter().map(|v| v.powf(1.0 / gamma)).collect();
    Ok(PointwiseCheck::new(
        "maximal_reduction",
        lhs.into_values(),
        rhs,
        1.0 + 1e-12,
        digest(&[f1.values(), f2.values(), sigmas[0].values(), sigmas[1].values(), &[gamma]]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Geometry;
    use crate::random::{random_nonnegative, random_sparse_family, seeded, two_step_weight};

    fn ones(geom: Geometry) -> Weight {
        Weight::constant(geom, 1.0).unwrap()
    }

    #[test]
    fn testing_lemma_single_cube_is_tight() {
        let geom = Geometry::new(1, 5).unwrap();
        let fam = SparseFamily::new(geom, [geom.base_cube()], 0.5).unwrap();
        let pt = ExponentTuple::new(vec![4.0, 4.0]).unwrap();
        let one = ones(geom);
        let reps = check_testing_lemma(&fam, &one, &[one.clone(), one.clone()], &pt, 1.0, &CalibrationConstants::default()).unwrap();
        assert_eq!(reps.len(), 3);
        for r in &reps {
            assert!((r.lhs - 1.0).abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12, "{r:?}");
        }
        let low = ExponentTuple::new(vec![1.5, 1.5]).unwrap();
        let reps = check_testing_lemma(&fam, &one, &[one.clone(), one.clone()], &low, 1.0, &CalibrationConstants::default()).unwrap();
        assert!(reps[1].skipped && reps[2].skipped);
        let empty = SparseFamily::empty(geom, 0.5).unwrap();
        let reps = check_testing_lemma(&empty, &one, &[one.clone(), one.clone()], &pt, 1.0, &CalibrationConstants::default()).unwrap();
        assert!(reps.iter().all(|r| r.lhs == 0.0 && r.pass));
    }

    /// Brute-force oracle for the testing display: evaluates each cube's
    /// indicator directly at every cell.
    #[test]
    fn testing_lhs_matches_direct_summation() {
        let geom = Geometry::new(1, 6).unwrap();
        let mut rng = seeded(4);
        let fam = random_sparse_family(geom, &mut rng, 1);
        let w = two_step_weight(geom, &mut rng, 1.0);
        let s = [two_step_weight(geom, &mut rng, 1.0), two_step_weight(geom, &mut rng, 1.0)];
        let pt = ExponentTuple::new(vec![3.0, 2.5]).unwrap();
        let gamma = 0.7;
        let rep = &check_testing_lemma(&fam, &w, &s, &pt, gamma, &CalibrationConstants::default()).unwrap()[0];
        let avg = |u: &Weight, lo: f64, hi: f64| {
            let (mut t, mut n) = (0.0, 0.0);
            for i in 0..geom.num_cells() {
                let x = geom.midpoint(i)[0];
                if x >= lo && x < hi {
                    t += u.values()[i];
                    n += 1.0;
                }
            }
            t / n
        };
        let mut total = 0.0;
        for i in 0..geom.num_cells() {
            let x = geom.midpoint(i)[0];
            let mut g = 0.0;
            for q in fam.cubes() {
                let r = q.realize()[0];
                if x >= r.0 && x < r.1 {
                    g += (avg(&s[0], r.0, r.1) * avg(&s[1], r.0, r.1)).powf(gamma);
                }
            }
            total += g.powf(pt.p() / gamma) * w.values()[i] * geom.cell_volume();
        }
        let direct = total.powf(1.0 / pt.p());
        assert!((rep.lhs - direct).abs() <= 1e-12 * direct.max(1.0), "{} vs {direct}", rep.lhs);
    }

    #[test]
    fn dyadic_sum_examples() {
        let geom = Geometry::new(1, 5).unwrap();
        let one = ones(geom);
        let cal = CalibrationConstants::default();
        let r = check_dyadic_sum(&[(geom.base_cube(), 1.0)], 2.0, &one, &cal).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-12);
        let r = check_dyadic_sum(&[(geom.base_cube(), 0.0)], 2.0, &one, &cal).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn kolmogorov_examples() {
        let geom = Geometry::new(1, 6).unwrap();
        let one = ones(geom);
        let cal = CalibrationConstants::default();
        let r = geom.base_cube();
        let single = SparseFamily::new(geom, [r], 0.5).unwrap();
        let rep = check_sparse_kolmogorov(&single, &one, &one, 0.3, 0.2, &r, &cal).unwrap();
        assert!((rep.lhs - rep.rhs).abs() < 1e-15);
        let mut rng = seeded(2);
        for _ in 0..10 {
            let fam = random_sparse_family(geom, &mut rng, 0);
            let rep = check_sparse_kolmogorov(&fam, &one, &one, 0.0, 0.0, &r, &cal).unwrap();
            assert!(rep.lhs <= 2.0 * rep.rhs);
        }
        assert!(check_sparse_kolmogorov(&single, &one, &one, 0.6, 0.5, &r, &cal).is_err());
    }

    #[test]
    fn theorem_constant_weights_and_regimes() {
        let geom = Geometry::new(1, 5).unwrap();
        let one = ones(geom);
        let s = [one.clone(), one.clone()];
        let pt = ExponentTuple::new(vec![4.0, 4.0]).unwrap();
        let dict = TestDictionary::standard(geom);
        let fam = SparseFamily::new(geom, [geom.base_cube()], 0.5).unwrap();
        let cal = CalibrationConstants::default();
        for which in [MixedBound::ApAinfty, MixedBound::FujiiWilson, MixedBound::Hrushchev] {
            let rep = check_theorem(&fam, &one, &s, &pt, 1.0, 1.0, &dict, which, &cal).unwrap();
            assert!((rep.lhs - 1.0).abs() < 1e-12 && rep.rhs == 3.0 && rep.pass, "{rep:?}");
            let empty = SparseFamily::empty(geom, 0.5).unwrap();
            assert_eq!(check_theorem(&empty, &one, &s, &pt, 1.0, 1.0, &dict, which, &cal).unwrap().lhs, 0.0);
        }
        assert!(matches!(check_regime(&pt, 4.0, 1.0), Err(Error::Regime(_))));
        let low = ExponentTuple::new(vec![2.5, 2.5]).unwrap();
        assert!(check_regime(&low, 2.0, 1.25).is_err());
        assert!(check_regime(&low, 2.0, 1.0).is_ok());
    }

    #[test]
    fn reductions_hold() {
        let geom = Geometry::new(2, 4).unwrap();
        let mut rng = seeded(8);
        for _ in 0..5 {
            let fam = random_sparse_family(geom, &mut rng, 3);
            let f1 = random_nonnegative(geom, &mut rng);
            let f2 = random_nonnegative(geom, &mut rng);
            assert!(check_p0_reduction(&fam, &f1, &f2, 2.5, 1.5, 1e-10).unwrap().pass);
            let s = [two_step_weight(geom, &mut rng, 1.0), two_step_weight(geom, &mut rng, 1.0)];
            assert!(check_maximal_reduction(&fam, &f1, &f2, &s, 0.8).unwrap().report.pass);
        }
    }
}
