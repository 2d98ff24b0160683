//! Commutators with BMO symbols and the exponential-weight estimates behind them.

use crate::calib::CalibrationConstants;
use crate::czo::{full_commutator, geometric_grid, Kernel};
use crate::dyadic::Placement;
use crate::error::{Error, Result};
use crate::gridfn::{bmo_norm, GridFunction, Weight};
use crate::report::{digest, VerificationReport};
use crate::verify::dictionary::{norm_lower_estimate, NormProblem, TestDictionary};
use crate::weights::{ap_constant, conjugate, dual_weight, exp_weight, fujii_wilson, multilinear_ap_constant, nu_weight, ExponentTuple};

/// Points per sign in the default `s`/`z` grids.
pub const GRID_POINTS: usize = 32;

/// `0` and `±` [`geometric_grid`] points up to `cap`.
pub fn symmetric_grid(cap: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    for s in geometric_grid(cap, GRID_POINTS) {
        g.push(s);
        g.push(-s);
    }
    g
}

/// Dictionary lower bound of `‖Σ_i [b⃗,T]_i‖_{L^{p1}(w1)×L^{p2}(w2)→L^p(ν)}` against
/// `[ν,σ⃗]^{1/p}(Π[σ_i]^{1/p_i} + [ν]^{1/p'} Σ_j Π_{i≠j}[σ_i]^{1/p_i})([ν]+Σ[σ_i])Σ‖b_i‖ · scale`,
/// where `σ_i = w_i^{1-p_i'}`, `ν = Π w_i^{p/p_i}`, every bracket after the
/// first is Fujii–Wilson, and `scale` is the kernel's operator scale.
pub fn check_commutator_bound(
    kernel: &Kernel,
    b_list: &[GridFunction; 2],
    w_list: &[Weight; 2],
    pt: &ExponentTuple,
    dict: &TestDictionary,
    calib: &CalibrationConstants,
) -> Result<VerificationReport> {
    let p = pt.p();
    if p < 1.0 {
        return Err(Error::Precondition(format!("commutator bound needs p >= 1, got {p}")));
    }
    let sigmas = [dual_weight(&w_list[0], pt.p_i(0))?, dual_weight(&w_list[1], pt.p_i(1))?];
    let nu = nu_weight(w_list, pt)?;
    let ap = multilinear_ap_constant(&nu, &sigmas, pt)?.value;
    let a = [fujii_wilson(&sigmas[0]).value, fujii_wilson(&sigmas[1]).value];
    let aw = fujii_wilson(&nu).value;
    let e = if p > 1.0 { 1.0 / conjugate(p) } else { 0.0 };
    let lead = a[0].powf(1.0 / pt.p_i(0)) * a[1].powf(1.0 / pt.p_i(1));
    let cross = aw.powf(e) * (a[1].powf(1.0 / pt.p_i(1)) + a[0].powf(1.0 / pt.p_i(0)));
    let bmo: f64 = b_list.iter().map(bmo_norm).sum();
    let rhs = ap.powf(1.0 / p) * (lead + cross) * (aw + a[0] + a[1]) * bmo * kernel.operator_scale();
    let problem = NormProblem {
        pt,
        output: &nu,
        inputs: [&w_list[0], &w_list[1]],
        multiply: false,
    };
    let est = norm_lower_estimate(|f1, f2| full_commutator(kernel, b_list, f1, f2), &problem, dict)?;
    let dg = digest(&[b_list[0].values(), b_list[1].values(), w_list[0].values(), w_list[1].values(), pt.p_list()]);
    let mut rep = VerificationReport::new("commutator", est.value, rhs, calib.slacks.commutator, dg);
    if est.value == 0.0 && bmo == 0.0 {
        rep = rep.with_note("constant symbols");
    }
    Ok(rep)
}

/// `sup_Q ⨍_Q exp(α_n |b - ⟨b⟩_Q| / ‖b‖_BMO) ≤ β_n` over cubes inside the base.
pub fn check_john_nirenberg(b: &GridFunction, calib: &CalibrationConstants) -> VerificationReport {
    let geom = b.geometry();
    let norm = bmo_norm(b);
    let dg = digest(&[b.values(), &[calib.alpha_n, calib.beta_n]]);
    if norm == 0.0 {
        return VerificationReport::new("john_nirenberg", 1.0, calib.beta_n, 1.0, dg).with_note("constant symbol");
    }
    let c = calib.alpha_n / norm;
    let mut worst = 0.0f64;
    for (_, bx) in geom.sup_cubes(Placement::Inside) {
        let mut s = 0.0;
        geom.for_each_cell(&bx, |i| s += b.values()[i]);
        let n = bx.measure_cells() as f64;
        let avg = s / n;
        let mut e = 0.0;
        geom.for_each_cell(&bx, |i| e += (c * (b.values()[i] - avg).abs()).exp());
        worst = worst.max(e / n);
    }
    VerificationReport::new("john_nirenberg", worst, calib.beta_n, 1.0, dg)
}

/// `[e^{sb}]_{A_p} ≤ β_n^p` for every `s` in `s_grid` with
/// `|s| ≤ α_n / ‖b‖_BMO · min(1, 1/(p-1))`; grid points beyond the cap are skipped.
pub fn check_exp_ap(b: &GridFunction, s_grid: &[f64], p: f64, calib: &CalibrationConstants) -> Result<VerificationReport> {
    let norm = bmo_norm(b);
    let cap = if norm > 0.0 { calib.alpha_n / norm * (1.0f64).min(1.0 / (p - 1.0)) } else { f64::INFINITY };
    let mut worst = 1.0f64;
    let mut used = 0usize;
    for &s in s_grid.iter().filter(|s| s.abs() <= cap) {
        worst = worst.max(ap_constant(&exp_weight(b, s)?, p)?.value);
        used += 1;
    }
    Ok(VerificationReport::new("exp_ap", worst, calib.beta_n.powf(p), 1.0, digest(&[b.values(), s_grid, &[p]]))
        .with_note(format!("{used} of {} grid points within |s| <= {cap:e}", s_grid.len())))
}

/// The default grid for [`check_exp_ap`].
pub fn exp_ap_grid(b: &GridFunction, p: f64, calib: &CalibrationConstants) -> Vec<f64> {
    let norm = bmo_norm(b);
    if norm == 0.0 {
        return vec![0.0, 1.0, -1.0];
    }
    symmetric_grid(calib.alpha_n / norm * (1.0f64).min(1.0 / (p - 1.0)))
}

/// `[e^{Re z · b} w]_{A_∞} ≤ c_n [w]_{A_∞}` for real parts `z` in `z_grid` with
/// `|z| ≤ ε_n / (‖b‖_BMO [w]_{A_∞})`.
pub fn check_ainfty_stability(b: &GridFunction, w: &Weight, z_grid: &[f64], calib: &CalibrationConstants) -> Result<VerificationReport> {
    let base = fujii_wilson(w).value;
    let norm = bmo_norm(b);
    let cap = ainfty_cap(norm, base, calib);
    let mut worst = base;
    for &z in z_grid.iter().filter(|z| z.abs() <= cap) {
        worst = worst.max(fujii_wilson(&exp_weight(b, z)?.mul(w)?).value);
    }
    Ok(VerificationReport::new("ainfty_stability", worst, base, calib.c_n, digest(&[b.values(), w.values(), z_grid])))
}

fn ainfty_cap(norm: f64, a: f64, calib: &CalibrationConstants) -> f64 {
    if norm > 0.0 {
        calib.eps_n / (norm * a)
    } else {
        f64::INFINITY
    }
}

/// The default grid for [`check_ainfty_stability`].
pub fn ainfty_grid(b: &GridFunction, w: &Weight, calib: &CalibrationConstants) -> Vec<f64> {
    let cap = ainfty_cap(bmo_norm(b), fujii_wilson(w).value, calib);
    symmetric_grid(if cap.is_finite() { cap } else { 1.0 })
}

/// The radius `α_n min(1, p_i'/p) / (p (1 + max A_∞) ‖b‖_BMO)`.
pub fn prodweight_cap(w: &Weight, sigmas: &[Weight], pt: &ExponentTuple, b: &GridFunction, calib: &CalibrationConstants) -> f64 {
    let norm = bmo_norm(b);
    if norm == 0.0 {
        return f64::INFINITY;
    }
    let p = pt.p();
    let m = (0..pt.len()).map(|i| pt.dual(i) / p).fold(1.0f64, f64::min);
    let a = sigmas.iter().map(|s| fujii_wilson(s).value).fold(fujii_wilson(w).value, f64::max);
    calib.alpha_n * m / (p * (1.0 + a) * norm)
}

/// `[w e^{p b z}, …, σ_j e^{-p_j' b z}, …]_{A_P⃗} ≤ c_{n,P⃗} [w,σ⃗]_{A_P⃗}` for real
/// `z` in `z_grid` within [`prodweight_cap`]; `j` is 0-based.
pub fn check_prodweight(
    w: &Weight,
    sigmas: &[Weight],
    pt: &ExponentTuple,
    b: &GridFunction,
    z_grid: &[f64],
    j: usize,
    calib: &CalibrationConstants,
) -> Result<VerificationReport> {
    if j >= sigmas.len() {
        return Err(Error::Precondition("slot out of range".into()));
    }
    let base = multilinear_ap_constant(w, sigmas, pt)?.value;
    let cap = prodweight_cap(w, sigmas, pt, b, calib);
    let p = pt.p();
    let mut worst = base;
    for &z in z_grid.iter().filter(|z| z.abs() <= cap) {
        let wz = w.mul(&exp_weight(b, p * z)?)?;
        let mut sz = sigmas.to_vec();
        sz[j] = sigmas[j].mul(&exp_weight(b, -pt.dual(j) * z)?)?;
        worst = worst.max(multilinear_ap_constant(&wz, &sz, pt)?.value);
    }
    Ok(VerificationReport::new(
        "prodweight",
        worst,
        base,
        calib.slacks.prodweight,
        digest(&[w.values(), b.values(), z_grid, pt.p_list(), &[j as f64]]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Geometry;

    fn half(geom: Geometry) -> GridFunction {
        GridFunction::from_midpoints(geom, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn constant_symbols_give_zero() {
        let geom = Geometry::new(1, 5).unwrap();
        let k = Kernel::smooth_tensor(1, 1.0, 0.25).unwrap();
        let one = Weight::constant(geom, 1.0).unwrap();
        let c = GridFunction::constant(geom, 3.0);
        let pt = ExponentTuple::new(vec![2.0, 2.0]).unwrap();
        let rep = check_commutator_bound(&k, &[c.clone(), c.clone()], &[one.clone(), one.clone()], &pt, &TestDictionary::small(geom), &CalibrationConstants::default()).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
        let jn = check_john_nirenberg(&c, &CalibrationConstants::default());
        assert!(jn.pass && jn.lhs == 1.0);
    }

    /// Oracle: for `b = 1_{[0,1/2)}` the worst cube straddles the jump, and on a
    /// cube with fraction `θ` of ones `⨍ exp(c|b-θ|) = θe^{c(1-θ)} + (1-θ)e^{cθ}`.
    #[test]
    fn john_nirenberg_half_indicator() {
        let geom = Geometry::new(1, 8).unwrap();
        let cal = CalibrationConstants::for_dimension(1);
        assert_eq!(cal.alpha_n, 0.125);
        let b = half(geom);
        let rep = check_john_nirenberg(&b, &cal);
        let norm = bmo_norm(&b);
        assert!((norm - 0.5).abs() < 1e-12);
        let c = cal.alpha_n / norm;
        let best = (0..=200)
            .map(|k| k as f64 / 200.0)
            .map(|t| t * (c * (1.0 - t)).exp() + (1.0 - t) * (c * t).exp())
            .fold(0.0, f64::max);
        assert!(rep.lhs <= best + 1e-12 && rep.lhs >= (c * 0.5).exp() - 1e-12);
        assert!(rep.pass);
    }

    #[test]
    fn exp_ap_examples() {
        let geom = Geometry::new(1, 6).unwrap();
        let cal = CalibrationConstants::default();
        let b = half(geom);
        let z = check_exp_ap(&b, &[0.0], 2.0, &cal).unwrap();
        assert!((z.lhs - 1.0).abs() < 1e-12);
        let cap = cal.alpha_n / bmo_norm(&b);
        let a = ap_constant(&exp_weight(&b, cap).unwrap(), 2.0).unwrap().value;
        let m = ap_constant(&exp_weight(&b, -cap).unwrap(), 2.0).unwrap().value;
        assert!((a - m).abs() < 1e-12);
        assert!(check_exp_ap(&b, &exp_ap_grid(&b, 2.0, &cal), 2.0, &cal).unwrap().pass);
    }

    #[test]
    fn stability_and_prodweight_at_zero() {
        let geom = Geometry::new(1, 6).unwrap();
        let cal = CalibrationConstants::default();
        let b = half(geom);
        let w = crate::random::step_weight(geom, 5.0);
        let r = check_ainfty_stability(&b, &w, &[0.0], &cal).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let c = GridFunction::constant(geom, 2.0);
        let r = check_ainfty_stability(&c, &w, &[0.3, -0.7], &cal).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12 * r.rhs);
        let pt = ExponentTuple::new(vec![2.0, 3.0]).unwrap();
        let s = vec![w.clone(), crate::random::step_weight(geom, 0.5)];
        let r = check_prodweight(&w, &s, &pt, &b, &[0.0], 1, &cal).unwrap();
        assert_eq!(r.lhs, r.rhs);
        let r = check_prodweight(&w, &s, &pt, &c, &[0.4, -0.2], 0, &cal).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12 * r.rhs);
    }
}
