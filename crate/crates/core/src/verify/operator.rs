//! Weak-type, pointwise-domination and decomposition checks for one operator.

use crate::calib::CalibrationConstants;
use crate::czo::{apply, cz_decomposition, maximal_from_bins, weak_halfinfty_sup, Bins, Kernel};
use crate::error::Result;
use crate::gridfn::{box_sum, lp_norm, GridFunction};
use crate::report::{digest, PointwiseCheck, VerificationReport};
use crate::sparse::{sparse_domination, DominationConfig, DominationResult};

/// `sup λ|{|T f⃗| > λ}|² / (‖f1‖_1 ‖f2‖_1)` over the pairs and the λ grid,
/// for `T` and for `T_♯`, against the operator scale. Pairs with a null
/// input are excluded and counted in the notes.
pub fn check_weak_type(kernel: &Kernel, pairs: &[(GridFunction, GridFunction)], calib: &CalibrationConstants) -> Result<[VerificationReport; 2]> {
    let mut worst = [0.0f64; 2];
    let mut excluded = 0usize;
    let mut parts: Vec<&[f64]> = Vec::new();
    for (f1, f2) in pairs {
        parts.push(f1.values());
        parts.push(f2.values());
        let n = lp_norm(f1, 1.0, None)? * lp_norm(f2, 1.0, None)?;
        if n == 0.0 {
            excluded += 1;
            continue;
        }
        let t = apply(kernel, f1, f2)?;
        let sharp = maximal_from_bins(&Bins::compute(kernel, f1, f2)?);
        worst[0] = worst[0].max(weak_halfinfty_sup(&t) / n);
        worst[1] = worst[1].max(weak_halfinfty_sup(&sharp) / n);
    }
    let scale = kernel.operator_scale();
    let dg = digest(&parts);
    let note = format!("{} pairs, {excluded} excluded for a null input", pairs.len());
    Ok([
        VerificationReport::new("weak_type", worst[0], scale, calib.slacks.weak_type, dg.clone()).with_note(note.clone()),
        VerificationReport::new("weak_type_maximal", worst[1], scale, calib.slacks.weak_type_maximal, dg).with_note(note),
    ])
}

/// Runs the domination and checks `T_♯ ≤ slack · scale · Σ_u A_{S^u}` cellwise.
/// Cells the families leave uncovered while `T_♯ > 0` fail through an
/// infinite ratio.
pub fn check_pointwise_domination(
    kernel: &Kernel,
    f1: &GridFunction,
    f2: &GridFunction,
    cfg: &DominationConfig,
    calib: &CalibrationConstants,
) -> Result<(PointwiseCheck, DominationResult)> {
    let dom = sparse_domination(kernel, f1, f2, cfg)?;
    let scale = kernel.operator_scale();
    let rhs: Vec<f64> = dom.sparse_sum.values().iter().map(|v| scale * v).collect();
    let check = PointwiseCheck::new(
        "pointwise_domination",
        dom.maximal_truncation.values().to_vec(),
        rhs,
        calib.slacks.pointwise_domination,
        digest(&[f1.values(), f2.values(), &[scale]]),
    );
    Ok((check, dom))
}

/// Invariants of the decomposition of `f ≥ 0` at `height`: exact
/// reconstruction, `good ≤ 2^n · height`, mean-zero bad parts supported on
/// their cubes, disjoint cubes, `height < ⟨f⟩_Q ≤ 2^n · height` unless the base
/// cube itself is selected, and `Σ|Q| ≤ ‖f‖_1 / height`. The report counts
/// violated invariants against 0.
pub fn check_cz_decomposition(f: &GridFunction, height: f64) -> Result<VerificationReport> {
    let geom = f.geometry();
    let d = cz_decomposition(f, height)?;
    let top = 2f64.powi(geom.dim() as i32) * height;
    let mut failed: Vec<&str> = Vec::new();
    if d.reconstruct().values() != f.values() {
        failed.push("reconstruction");
    }
    if !d.whole_base && d.good.values().iter().any(|&v| v > top) {
        failed.push("good bound");
    }
    let boxes: Vec<_> = d.bad.iter().map(|b| geom.cell_box(&b.cube)).collect::<Result<_>>()?;
    for (b, bx) in d.bad.iter().zip(&boxes) {
        let total: f64 = b.part.values().iter().sum();
        let outside = b.part.values().iter().enumerate().any(|(i, v)| *v != 0.0 && !bx.contains_cell(geom.coords(i)));
        if total != 0.0 {
            failed.push("mean zero");
        }
        if outside {
            failed.push("support");
        }
        let avg = box_sum(&geom, f.values(), bx) / bx.measure_cells() as f64;
        if !(avg > height) || (!d.whole_base && avg > top) {
            failed.push("stopping average");
        }
    }
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if !boxes[i].intersect(&boxes[j]).is_empty() {
                failed.push("disjoint");
            }
        }
    }
    if d.bad_measure() > f.integral() / height {
        failed.push("measure");
    }
    failed.dedup();
    let rep = VerificationReport::new("cz_decomposition", failed.len() as f64, 0.0, 1.0, digest(&[f.values(), &[height]]));
    Ok(if failed.is_empty() { rep } else { rep.with_note(failed.join(", ")) })
}
