//! Pointwise and weak-type inequalities attached to a single operator.

use rayon::prelude::*;

use super::engine::{apply, maximal_from_bins, Bins};
use super::kernel::Kernel;
use crate::calib::CalibrationConstants;
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::maximal::{ball_levels, ball_products, eta_maximal, multilinear_maximal};
use crate::report::{digest, PointwiseCheck, VerificationReport};

/// Points in a λ grid.
pub const LAMBDA_POINTS: usize = 32;

/// `λ |{|g| > λ}|²`.
pub fn weak_halfinfty_functional(g: &GridFunction, lam: f64) -> f64 {
    assert!(lam > 0.0, "lambda must be positive");
    let count = g.values().iter().filter(|v| v.abs() > lam).count();
    let m = count as f64 * g.geometry().cell_volume();
    lam * m * m
}

/// `n` geometric points spanning four decades up to `top`.
pub fn geometric_grid(top: f64, n: usize) -> Vec<f64> {
    if !(top > 0.0) || n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![top];
    }
    (0..n).map(|i| top * 10f64.powf(-4.0 + 4.0 * i as f64 / (n - 1) as f64)).collect()
}

/// The λ grid for `g`: 32 points in `[max|g|·10^{-4}, max|g|]`.
pub fn lambda_grid(g: &GridFunction) -> Vec<f64> {
    geometric_grid(g.max_abs(), LAMBDA_POINTS)
}

/// `sup_λ λ|{|g|>λ}|²` over [`lambda_grid`].
pub fn weak_halfinfty_sup(g: &GridFunction) -> f64 {
    lambda_grid(g).into_iter().map(|l| weak_halfinfty_functional(g, l)).fold(0.0, f64::max)
}

/// Both sides of `T_♯ - M_η(|T f⃗|) ≤ c_η (C_K + ‖ω‖_Dini + ‖T‖) M(f⃗)` per cell.
pub fn cotlar_profile(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, eta: f64, calib: &CalibrationConstants) -> Result<PointwiseCheck> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::Precondition("eta must lie in (0, 1/2)".into()));
    }
    let bins = Bins::compute(kernel, f1, f2)?;
    let sharp = maximal_from_bins(&bins);
    let t = apply(kernel, f1, f2)?;
    let meta = eta_maximal(&t, eta)?;
    let m = multilinear_maximal(f1, f2)?;
    let scale = kernel.operator_scale();
    let lhs: Vec<f64> = sharp.values().iter().zip(meta.values()).map(|(s, e)| s - e).collect();
    let rhs: Vec<f64> = m.values().iter().map(|v| scale * v).collect();
    Ok(PointwiseCheck::new(
        "cotlar",
        lhs,
        rhs,
        calib.slacks.cotlar,
        digest(&[f1.values(), f2.values(), &[eta, scale]]),
    ))
}

pub fn cotlar_check(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, eta: f64, calib: &CalibrationConstants) -> Result<VerificationReport> {
    Ok(cotlar_profile(kernel, f1, f2, eta, calib)?.report)
}

/// `|T_{ε,δ}(x) - T_{ε,δ}(x')| ≤ c (C_K + ‖ω‖_Dini) M^c_{ε,2δ}(f⃗)(x)` for all
/// grid radii `ε = r_a < δ = r_b` and cells with `|x - x'| ≤ ε/4`; the report
/// carries the worst triple.
pub fn check_truncation_oscillation(kernel: &Kernel, f1: &GridFunction, f2: &GridFunction, calib: &CalibrationConstants) -> Result<VerificationReport> {
    let bins = Bins::compute(kernel, f1, f2)?;
    let geom = bins.geometry();
    let levels = bins.levels();
    let balls = ball_levels(&geom);
    let scale = kernel.size_constant() + kernel.modulus().dini();
    let cells = geom.num_cells();
    // T_{a,b}(x) for 0 ≤ a < b ≤ J, row-major in (a, b).
    let stride = (levels + 1) * (levels + 1);
    let table: Vec<f64> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut row = vec![0.0; stride];
            for a in 0..levels {
                for b in a + 1..=levels {
                    row[a * (levels + 1) + b] = bins.annulus(x, a, b);
                }
            }
            row
        })
        .collect();
    let worst: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|x| {
            let prods = ball_products(&geom, f1.values(), f2.values(), x, balls);
            let cx = geom.coords(x);
            let mut best = (0.0f64, 0.0f64, f64::NEG_INFINITY);
            for a in 4..levels {
                let reach2 = (1i64 << a) / 16;
                let reach = (reach2 as f64).sqrt().floor() as i64;
                let r1 = if geom.dim() == 2 { reach } else { 0 };
                for b in a + 1..=levels {
                    let m = (a + 1..=b + 1).map(|j| prods[j.min(balls - 1)]).fold(0.0, f64::max);
                    let rhs = scale * m;
                    let tx = table[x * stride + a * (levels + 1) + b];
                    let mut lhs = 0.0f64;
                    for d1 in -r1..=r1 {
                        for d0 in -reach..=reach {
                            if d0 * d0 + d1 * d1 > reach2 {
                                continue;
                            }
                            let c = [cx[0] + d0, cx[1] + d1];
                            let n = geom.side() as i64;
                            if c[0] < 0 || c[0] >= n || c[1] < 0 || (geom.dim() == 2 && c[1] >= n) {
                                continue;
                            }
                            let xp = geom.index(c);
                            lhs = lhs.max((tx - table[xp * stride + a * (levels + 1) + b]).abs());
                        }
                    }
                    let ratio = if rhs > 0.0 {
                        lhs / rhs
                    } else if lhs > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    if ratio > best.2 {
                        best = (lhs, rhs, ratio);
                    }
                }
            }
            (best.0, best.1)
        })
        .collect();
    let mut out: Option<VerificationReport> = None;
    for (l, r) in worst {
        out = Some(VerificationReport::worst(
            out,
            VerificationReport::new("truncation_oscillation", l, r, calib.slacks.truncation_oscillation, String::new()),
        ));
    }
    let mut rep = out.unwrap_or_else(|| VerificationReport::new("truncation_oscillation", 0.0, 0.0, 1.0, String::new()));
    rep.slack = calib.slacks.truncation_oscillation;
    rep.pass = rep.lhs <= rep.slack * rep.rhs;
    rep.digest = digest(&[f1.values(), f2.values(), &[scale]]);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Geometry;

    #[test]
    fn weak_functional_examples() {
        let g = Geometry::new(1, 5).unwrap();
        let one = GridFunction::constant(g, 1.0);
        assert_eq!(weak_halfinfty_functional(&one, 0.5), 0.5);
        assert_eq!(weak_halfinfty_functional(&GridFunction::zeros(g), 0.5), 0.0);
        let f = GridFunction::from_midpoints(g, |x| x[0]).unwrap();
        let a = weak_halfinfty_functional(&f.scale(3.0), 3.0 * 0.4);
        assert!((a - 3.0 * weak_halfinfty_functional(&f, 0.4)).abs() < 1e-15);
    }

    #[test]
    fn zero_inputs_pass_cotlar() {
        let g = Geometry::new(1, 5).unwrap();
        let k = Kernel::smooth_tensor(1, 1.0, 0.25).unwrap();
        let z = GridFunction::zeros(g);
        let calib = CalibrationConstants::default();
        assert!(cotlar_check(&k, &z, &z, 0.25, &calib).unwrap().pass);
        let one = GridFunction::constant(g, 1.0);
        let r = cotlar_check(&Kernel::zero(1).unwrap(), &one, &one, 0.25, &calib).unwrap();
        assert!(r.pass && r.lhs == 0.0);
    }
}
