//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- --calibrate` instead prints the worst
//! ratio of every slack-governed check on the calibration stream (master
//! seed 0); the acceptance run draws from master seed 1.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use sparsedom::czo::{check_truncation_oscillation, commutator, cotlar_check, Kernel, ModulusOfContinuity};
use sparsedom::dyadic::{DyadicCube, Geometry};
use sparsedom::gridfn::{average, GridFunction, Weight};
use sparsedom::maximal::{eta_maximal, hl_maximal, log_maximal, multilinear_maximal, truncated_centered_maximal, weighted_dyadic_maximal};
use sparsedom::random::{
    random_bmo, random_integer, random_nonnegative, random_signed, random_sparse_family, seeded, step_weight, two_step_weight, SeededRng,
};
use sparsedom::sparse::{general_sparse_apply, sparse_apply, sparse_domination, DominationConfig, SparseFamily};
use sparsedom::verify::{
    ainfty_grid, check_ainfty_stability, check_commutator_bound, check_cz_decomposition, check_dyadic_sum, check_exp_ap, check_john_nirenberg,
    check_p0_reduction, check_pointwise_domination, check_prodweight, check_sparse_kolmogorov, check_testing_lemma, check_theorem,
    check_weak_type, exp_ap_grid, prodweight_cap, symmetric_grid, MixedBound, TestDictionary,
};
use sparsedom::weights::{
    ap_constant, dual_h_infty, dual_w_infty, dual_weight, fujii_wilson, hruscev, multilinear_ap_constant, multilinear_w_infty, nu_weight,
    reverse_holder_check, ExponentTuple,
};
use sparsedom::{CalibrationConstants, VerificationReport};

/// Characteristics of constant tuples must equal 1 within this.
const CONSTANT_TOL: f64 = 1e-12;
/// Dini quadrature tolerance.
const DINI_TOL: f64 = 1e-6;
/// Largest allowed max/min of the domination constant across resolutions.
const RESOLUTION_SPREAD: f64 = 2.0;
/// Largest calibrated slack allowed for the testing displays.
const TESTING_SLACK_TARGET: f64 = 8.0;
/// Minimal growth of `[w,σ⃗]_{A_P⃗}` across the degeneracy sweep.
const DEGENERACY_GROWTH: f64 = 100.0;
/// p0-reduction and oracle tolerance.
const REDUCTION_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
/// Reverse-Hölder constant.
const REVERSE_HOLDER_CN: f64 = 4.0;

const CALIBRATION_SEED: u64 = 0;
const ACCEPTANCE_SEED: u64 = 1;

/// Worst ratio and verdict per check name.
#[derive(Default)]
struct Tally {
    worst: BTreeMap<String, f64>,
    failures: Vec<String>,
    count: usize,
}

impl Tally {
    fn add(&mut self, r: &VerificationReport) {
        self.count += 1;
        if !r.skipped {
            let e = self.worst.entry(r.check.clone()).or_insert(0.0);
            *e = e.max(r.ratio);
        }
        if !r.pass && self.failures.len() < 5 {
            self.failures.push(format!("{} ratio {:.4} slack {}", r.check, r.ratio, r.slack));
        }
    }

    fn fail(&mut self, what: String) {
        if self.failures.len() < 5 {
            self.failures.push(what);
        }
    }

    fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn summary(&self) -> String {
        let w: Vec<String> = self.worst.iter().map(|(k, v)| format!("{k} {v:.4e}")).collect();
        let mut s = format!("{} reports; worst ratios: {}", self.count, w.join(", "));
        if !self.failures.is_empty() {
            s.push_str(&format!("; failures: {}", self.failures.join("; ")));
        }
        s
    }
}

fn calib(n: usize) -> CalibrationConstants {
    CalibrationConstants::for_dimension(n)
}

fn suite_rng(master: u64, suite: u64) -> SeededRng {
    seeded(master * 1000 + suite)
}

fn tuple(rng: &mut SeededRng, lo: f64, hi: f64) -> ExponentTuple {
    ExponentTuple::new(vec![rng.gen_range(lo..hi), rng.gen_range(lo..hi)]).unwrap()
}

fn desk_geometry(i: usize, k1: u32, k2: u32) -> Geometry {
    if i.is_multiple_of(2) {
        Geometry::new(1, k1).unwrap()
    } else {
        Geometry::new(2, k2).unwrap()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

// ---------------------------------------------------------------------------
// Criterion 1

fn characteristics(w: &[Weight; 2], pt: &ExponentTuple) -> Vec<(&'static str, f64)> {
    let sig = [dual_weight(&w[0], pt.p_i(0)).unwrap(), dual_weight(&w[1], pt.p_i(1)).unwrap()];
    let nu = nu_weight(w, pt).unwrap();
    vec![
        ("ap(2)", ap_constant(&w[0], 2.0).unwrap().value),
        ("ap(3)", ap_constant(&w[1], 3.0).unwrap().value),
        ("multilinear_ap", multilinear_ap_constant(&nu, &sig, pt).unwrap().value),
        ("fujii_wilson", fujii_wilson(&w[0]).value),
        ("multilinear_w_infty", multilinear_w_infty(&sig, pt).unwrap().value),
        ("dual_w_infty", dual_w_infty(&nu, &sig, pt, 1.0, 0).unwrap().value),
        ("hruscev", hruscev(&sig, pt).unwrap().value),
        ("dual_h_infty", dual_h_infty(&nu, &sig, pt, 1.0, 1).unwrap().value),
    ]
}

fn criterion_1(master: u64) -> (bool, String) {
    let mut rng = suite_rng(master, 1);
    let mut bad = Vec::new();
    for (n, k) in [(1usize, 8u32), (2, 5)] {
        let geom = Geometry::new(n, k).unwrap();
        let c = [Weight::constant(geom, 2.5).unwrap(), Weight::constant(geom, 0.3).unwrap()];
        let pt = ExponentTuple::new(vec![3.0, 4.0]).unwrap();
        for (name, v) in characteristics(&c, &pt) {
            if (v - 1.0).abs() > CONSTANT_TOL {
                bad.push(format!("constant {name} = {v}"));
            }
        }
    }
    let mut min = f64::INFINITY;
    for i in 0..200 {
        let geom = desk_geometry(i, 8, 4);
        let w = [two_step_weight(geom, &mut rng, 2.0), two_step_weight(geom, &mut rng, 2.0)];
        let pt = tuple(&mut rng, 2.2, 6.0);
        for (name, v) in characteristics(&w, &pt) {
            min = min.min(v);
            if v < 1.0 - CONSTANT_TOL {
                bad.push(format!("weight {i} {name} = {v}"));
            }
        }
    }
    bad.truncate(5);
    let mut msg = format!("constants exact, random minimum {min:.6}");
    if !bad.is_empty() {
        msg.push_str(&format!("; failures: {}", bad.join("; ")));
    }
    (bad.is_empty(), msg)
}

// ---------------------------------------------------------------------------
// Criterion 2

fn criterion_2() -> (bool, String) {
    let cases = [
        ("t", ModulusOfContinuity::power(1.0, 1.0).unwrap(), 1.0),
        ("sqrt t", ModulusOfContinuity::power(1.0, 0.5).unwrap(), 2.0),
        ("(1+log 1/t)^-2", ModulusOfContinuity::inverse_log(1.0, 2.0).unwrap(), 1.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m, want) in cases {
        let got = m.dini();
        ok &= (got - want).abs() <= DINI_TOL;
        parts.push(format!("{name}: {got:.9}"));
    }
    (ok, parts.join(", "))
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4

fn smooth_kernel() -> Kernel {
    Kernel::smooth_tensor(1, 1.0, 0.25).unwrap()
}

fn fixture_pair(geom: Geometry) -> (GridFunction, GridFunction) {
    let f1 = GridFunction::from_midpoints(geom, |x| if x[0] < 0.5 { 1.0 } else { 0.25 }).unwrap();
    let f2 = GridFunction::from_midpoints(geom, |x| if (0.25..0.625).contains(&x[0]) { 2.0 } else { 0.0 }).unwrap();
    (f1, f2)
}

fn domination_suite(master: u64, tally: &mut Tally, nodes: &mut (usize, usize)) {
    let mut rng = suite_rng(master, 3);
    let geom = Geometry::new(1, 7).unwrap();
    let k = smooth_kernel();
    let cfg = DominationConfig::default();
    let cal = calib(1);
    for i in 0..50 {
        let (f1, f2) = if i % 2 == 0 {
            (random_nonnegative(geom, &mut rng), random_nonnegative(geom, &mut rng))
        } else {
            (random_signed(geom, &mut rng), random_signed(geom, &mut rng))
        };
        match check_pointwise_domination(&k, &f1, &f2, &cfg, &cal) {
            Ok((check, dom)) => {
                tally.add(&check.report);
                for r in &dom.sparseness {
                    tally.add(r);
                }
                if !dom.uncovered.is_empty() {
                    tally.fail(format!("pair {i}: {} uncovered cells", dom.uncovered.len()));
                }
                nodes.0 += dom.trace.len();
                nodes.1 += dom.trace.iter().filter(|r| r.measure_ok && r.non_nested && r.pointwise_ok).count();
            }
            Err(e) => tally.fail(format!("pair {i}: {e}")),
        }
    }
}

fn criterion_3_4(master: u64) -> ((bool, String), (bool, String)) {
    let mut tally = Tally::default();
    let mut nodes = (0usize, 0usize);
    domination_suite(master, &mut tally, &mut nodes);
    let k = smooth_kernel();
    let mut cs = Vec::new();
    for res in [6u32, 7, 8] {
        let geom = Geometry::new(1, res).unwrap();
        let (f1, f2) = fixture_pair(geom);
        match sparse_domination(&k, &f1, &f2, &DominationConfig::default()) {
            Ok(d) => cs.push(d.constant),
            Err(e) => tally.fail(format!("fixture K={res}: {e}")),
        }
    }
    let spread = cs.iter().copied().fold(0.0, f64::max) / cs.iter().copied().fold(f64::INFINITY, f64::min);
    let c3 = tally.ok() && cs.len() == 3 && spread < RESOLUTION_SPREAD;
    let d3 = format!("{}; fixture C over K=6,7,8: {:?}, spread {spread:.3}", tally.summary(), cs);
    let c4 = nodes.0 > 0 && nodes.0 == nodes.1;
    let d4 = format!("{} of {} nodes satisfy measure, non-nesting and cellwise bounds", nodes.1, nodes.0);
    ((c3, d3), (c4, d4))
}

// ---------------------------------------------------------------------------
// Criterion 5

fn testing_suite(master: u64, tally: &mut Tally) {
    let mut rng = suite_rng(master, 5);
    for i in 0..100 {
        let geom = desk_geometry(i, 6, 4);
        let cal = calib(geom.dim());
        let u = rng.gen_range(0..geom.num_systems());
        let fam = random_sparse_family(geom, &mut rng, u);
        let w = two_step_weight(geom, &mut rng, 1.0);
        let s = [two_step_weight(geom, &mut rng, 1.0), two_step_weight(geom, &mut rng, 1.0)];
        let pt = tuple(&mut rng, 2.2, 8.0);
        for gamma in [1.0, 2.0] {
            match check_testing_lemma(&fam, &w, &s, &pt, gamma, &cal) {
                Ok(reps) => reps.iter().for_each(|r| tally.add(r)),
                Err(e) => tally.fail(format!("triple {i}: {e}")),
            }
        }
    }
}

fn criterion_5(master: u64) -> (bool, String) {
    let mut tally = Tally::default();
    testing_suite(master, &mut tally);
    let s = &calib(1).slacks;
    let target = s.testing <= TESTING_SLACK_TARGET && s.dual_testing <= TESTING_SLACK_TARGET;
    (tally.ok() && target, format!("{}; slacks {} / {}", tally.summary(), s.testing, s.dual_testing))
}

// ---------------------------------------------------------------------------
// Criterion 6

fn theorem_suite(master: u64, tally: &mut Tally) -> f64 {
    let mut rng = suite_rng(master, 6);
    let kinds = [MixedBound::ApAinfty, MixedBound::FujiiWilson, MixedBound::Hrushchev];
    for i in 0..40 {
        let geom = desk_geometry(i, 6, 4);
        let cal = calib(geom.dim());
        let dict = TestDictionary::standard(geom);
        let u = rng.gen_range(0..geom.num_systems());
        let fam = random_sparse_family(geom, &mut rng, u);
        let w = two_step_weight(geom, &mut rng, 1.0);
        let s = [two_step_weight(geom, &mut rng, 1.0), two_step_weight(geom, &mut rng, 1.0)];
        let pt = tuple(&mut rng, 1.5, 6.0);
        let gamma = [0.5, 1.0, 2.0][i % 3];
        for which in kinds {
            match check_theorem(&fam, &w, &s, &pt, 1.0, gamma, &dict, which, &cal) {
                Ok(r) => tally.add(&r),
                Err(e) => tally.fail(format!("scenario {i}: {e}")),
            }
        }
    }
    // Degeneracy sweep: σ1 a step weight whose ratio runs over 4.5 decades.
    let geom = Geometry::new(1, 6).unwrap();
    let cal = calib(1);
    let dict = TestDictionary::standard(geom);
    let mut cubes: Vec<DyadicCube> = random_sparse_family(geom, &mut rng, 0).cubes().to_vec();
    cubes.push(geom.base_cube());
    let fam = SparseFamily::new(geom, cubes, 0.5).unwrap();
    let one = Weight::constant(geom, 1.0).unwrap();
    let pt = ExponentTuple::new(vec![2.0, 2.0]).unwrap();
    let mut aps = Vec::new();
    for j in 0..10 {
        let s = [step_weight(geom, 10f64.powf(0.5 * j as f64)), one.clone()];
        aps.push(multilinear_ap_constant(&one, &s, &pt).unwrap().value);
        for which in kinds {
            match check_theorem(&fam, &one, &s, &pt, 1.0, 1.0, &dict, which, &cal) {
                Ok(r) => tally.add(&r),
                Err(e) => tally.fail(format!("sweep {j}: {e}")),
            }
        }
    }
    aps.last().unwrap() / aps[0]
}

fn criterion_6(master: u64) -> (bool, String) {
    let mut tally = Tally::default();
    let growth = theorem_suite(master, &mut tally);
    (
        tally.ok() && growth >= DEGENERACY_GROWTH,
        format!("{}; A_P growth across sweep {growth:.1}", tally.summary()),
    )
}

// ---------------------------------------------------------------------------
// Criterion 7

fn criterion_7(master: u64) -> (bool, String) {
    let mut rng = suite_rng(master, 7);
    let mut tally = Tally::default();
    for i in 0..100 {
        let geom = desk_geometry(i, 7, 5);
        let u = rng.gen_range(0..geom.num_systems());
        let fam = random_sparse_family(geom, &mut rng, u);
        let f1 = random_signed(geom, &mut rng);
        let f2 = random_signed(geom, &mut rng);
        let p0 = rng.gen_range(1.0..4.0);
        let gamma = rng.gen_range(0.25..3.0);
        tally.add(&check_p0_reduction(&fam, &f1, &f2, p0, gamma, REDUCTION_TOL).unwrap());
    }
    (tally.ok(), tally.summary())
}

// ---------------------------------------------------------------------------
// Criterion 8

fn commutator_suite(master: u64, tally: &mut Tally, rh: &mut Tally) -> usize {
    let mut rng = suite_rng(master, 8);
    let geom = Geometry::new(1, 6).unwrap();
    let cal = calib(1);
    let k = smooth_kernel();
    let dict = TestDictionary::small(geom);
    let mut nonzero = 0usize;
    for i in 0..20 {
        let b = [random_bmo(geom, &mut rng), random_bmo(geom, &mut rng)];
        let w = [two_step_weight(geom, &mut rng, 0.5), two_step_weight(geom, &mut rng, 0.5)];
        let pt = tuple(&mut rng, 2.2, 5.0);
        let c = GridFunction::constant(geom, rng.gen_range(-3.0..3.0));
        let f1 = random_signed(geom, &mut rng);
        let f2 = random_signed(geom, &mut rng);
        for slot in 0..2 {
            let z = commutator(&k, &[c.clone(), c.clone()], &f1, &f2, slot).unwrap();
            nonzero += z.values().iter().filter(|v| **v != 0.0).count();
        }
        match check_commutator_bound(&k, &b, &w, &pt, &dict, &cal) {
            Ok(r) => tally.add(&r),
            Err(e) => tally.fail(format!("scenario {i}: {e}")),
        }
        let sig = [dual_weight(&w[0], pt.p_i(0)).unwrap(), dual_weight(&w[1], pt.p_i(1)).unwrap()];
        for v in w.iter().chain(sig.iter()).chain(std::iter::once(&nu_weight(&w, &pt).unwrap())) {
            rh.add(&reverse_holder_check(v, REVERSE_HOLDER_CN).unwrap());
        }
    }
    for i in 0..50 {
        let geom = desk_geometry(i, 8, 5);
        let cal = calib(geom.dim());
        let b = random_bmo(geom, &mut rng);
        tally.add(&check_john_nirenberg(&b, &cal));
        let s = rng.gen_range(-1.0..1.0) * cal.alpha_n / sparsedom::gridfn::bmo_norm(&b).max(1e-300);
        let w = sparsedom::weights::exp_weight(&b, s).unwrap();
        rh.add(&reverse_holder_check(&w, REVERSE_HOLDER_CN).unwrap());
    }
    nonzero
}

fn criterion_8(master: u64) -> (bool, String) {
    let mut tally = Tally::default();
    let mut rh = Tally::default();
    let nonzero = commutator_suite(master, &mut tally, &mut rh);
    (
        tally.ok() && rh.ok() && nonzero == 0,
        format!("{}; reverse Hölder: {}; nonzero constant-symbol cells {nonzero}", tally.summary(), rh.summary()),
    )
}

// ---------------------------------------------------------------------------
// Criterion 9

fn operator_suite(master: u64, tally: &mut Tally, cz: &mut Tally) {
    let mut rng = suite_rng(master, 9);
    let geom = Geometry::new(1, 7).unwrap();
    let cal = calib(1);
    let k = smooth_kernel();
    let mut pairs = Vec::new();
    for i in 0..50 {
        let (f1, f2) = if i % 2 == 0 {
            (random_nonnegative(geom, &mut rng), random_nonnegative(geom, &mut rng))
        } else {
            (random_signed(geom, &mut rng), random_signed(geom, &mut rng))
        };
        tally.add(&cotlar_check(&k, &f1, &f2, 0.25, &cal).unwrap());
        pairs.push((f1, f2));
    }
    for r in check_weak_type(&k, &pairs, &cal).unwrap() {
        tally.add(&r);
    }
    for i in 0..200 {
        let geom = desk_geometry(i, 8, 5);
        let density = rng.gen_range(0.02..0.5);
        let f = random_integer(geom, &mut rng, 16, density);
        let height = rng.gen_range(1..=8) as f64;
        cz.add(&check_cz_decomposition(&f, height).unwrap());
    }
}

fn criterion_9(master: u64) -> (bool, String) {
    let mut tally = Tally::default();
    let mut cz = Tally::default();
    operator_suite(master, &mut tally, &mut cz);
    (tally.ok() && cz.ok(), format!("{}; decomposition: {}", tally.summary(), cz.summary()))
}

// ---------------------------------------------------------------------------
// Criterion 10: brute-force oracles that regroup cells by their cube label.

/// Cells of each cube of system `u` at level `k`, keyed by offset, and the
/// unclipped cell count of such a cube.
fn groups(geom: Geometry, u: u32, k: i32) -> (BTreeMap<[i64; 2], Vec<usize>>, usize) {
    let len = 1i64 << (geom.resolution() as i32 - k);
    let shift = geom.shift_cells(u, k);
    let mut out: BTreeMap<[i64; 2], Vec<usize>> = BTreeMap::new();
    for i in 0..geom.num_cells() {
        let c = geom.coords(i);
        let mut key = [0i64; 2];
        for d in 0..geom.dim() {
            key[d] = (c[d] - shift[d]).div_euclid(len);
        }
        out.entry(key).or_default().push(i);
    }
    (out, (len as usize).pow(geom.dim() as u32))
}

fn all_groups(geom: Geometry, systems: std::ops::Range<u32>) -> Vec<(DyadicCube, Vec<usize>, usize)> {
    let mut v = Vec::new();
    for u in systems {
        for k in 0..=geom.resolution() as i32 {
            let (g, n) = groups(geom, u, k);
            for (key, cells) in g {
                v.push((geom.cube(u, k, &key[..geom.dim()]).unwrap(), cells, n));
            }
        }
    }
    v
}

fn sup_oracle(geom: Geometry, gs: &[(DyadicCube, Vec<usize>, usize)], inside_only: bool, val: impl Fn(&[usize], usize) -> f64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; geom.num_cells()];
    for (_, cells, n) in gs {
        if inside_only && cells.len() != *n {
            continue;
        }
        let v = val(cells, *n);
        for &c in cells {
            out[c] = out[c].max(v);
        }
    }
    out
}

fn near(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel_close(*x, *y, ORACLE_TOL))
}

fn oracle_case(geom: Geometry, rng: &mut SeededRng) -> Vec<&'static str> {
    let mut bad = Vec::new();
    let f1 = random_signed(geom, rng);
    let f2 = random_signed(geom, rng);
    let s = two_step_weight(geom, rng, 1.0);
    let a1: Vec<f64> = f1.values().iter().map(|v| v.abs()).collect();
    let a2: Vec<f64> = f2.values().iter().map(|v| v.abs()).collect();
    let gs = all_groups(geom, 0..geom.num_systems());
    let sum = |v: &[f64], cells: &[usize]| cells.iter().map(|&c| v[c]).sum::<f64>();

    let hl = sup_oracle(geom, &gs, false, |c, n| sum(&a1, c) / n as f64);
    if !near(hl_maximal(&f1).values(), &hl) {
        bad.push("hl_maximal");
    }
    let eta = 0.4;
    let pe: Vec<f64> = a1.iter().map(|v| v.powf(eta)).collect();
    let em: Vec<f64> = sup_oracle(geom, &gs, false, |c, n| sum(&pe, c) / n as f64).into_iter().map(|v| v.powf(1.0 / eta)).collect();
    if !near(eta_maximal(&f1, eta).unwrap().values(), &em) {
        bad.push("eta_maximal");
    }
    let mm = sup_oracle(geom, &gs, false, |c, n| (sum(&a1, c) / n as f64) * (sum(&a2, c) / n as f64));
    if !near(multilinear_maximal(&f1, &f2).unwrap().values(), &mm) {
        bad.push("multilinear_maximal");
    }
    let u = rng.gen_range(0..geom.num_systems());
    let gu = all_groups(geom, u..u + 1);
    let wm = sup_oracle(geom, &gu, false, |c, _| {
        c.iter().map(|&i| a1[i] * s.values()[i]).sum::<f64>() / sum(s.values(), c)
    });
    if !near(weighted_dyadic_maximal(&f1, &s, u).unwrap().values(), &wm) {
        bad.push("weighted_dyadic_maximal");
    }
    let lm = sup_oracle(geom, &gs, true, |c, n| (c.iter().map(|&i| s.values()[i].ln()).sum::<f64>() / n as f64).exp());
    if !near(log_maximal(&s).values(), &lm) {
        bad.push("log_maximal");
    }

    // Centered balls by integer squared cell distance.
    let h = geom.cell_side();
    let x = rng.gen_range(0..geom.num_cells());
    let eps = rng.gen_range(0.5 * h..0.5);
    let delta = rng.gen_range(eps..2.0);
    let cx = geom.coords(x);
    let mut best = 0.0f64;
    let mut j = 0u32;
    while h * 2f64.powf(j as f64 / 2.0) < delta {
        if h * 2f64.powf(j as f64 / 2.0) > eps {
            let ball: Vec<usize> = (0..geom.num_cells())
                .filter(|&i| {
                    let c = geom.coords(i);
                    let d: i64 = (0..geom.dim()).map(|a| (c[a] - cx[a]) * (c[a] - cx[a])).sum();
                    (d as u64) < (1u64 << j)
                })
                .collect();
            let m = ball.len() as f64;
            best = best.max((sum(&a1, &ball) / m) * (sum(&a2, &ball) / m));
        }
        j += 1;
    }
    if !rel_close(truncated_centered_maximal(&f1, &f2, x, eps, delta).unwrap(), best, ORACLE_TOL) {
        bad.push("truncated_centered_maximal");
    }

    // Averages and sparse operators.
    let (cube, cells, n) = &gs[rng.gen_range(0..gs.len())];
    if !rel_close(average(&f1, cube).unwrap(), sum(f1.values(), cells) / *n as f64, ORACLE_TOL) {
        bad.push("average");
    }
    let fam = random_sparse_family(geom, rng, u);
    let members: Vec<&(DyadicCube, Vec<usize>, usize)> = gu.iter().filter(|g| fam.cubes().contains(&g.0)).collect();
    let (p0, gamma) = (rng.gen_range(1.0..3.0), rng.gen_range(0.5..2.5));
    let mut lin = vec![0.0; geom.num_cells()];
    let mut gen = vec![0.0; geom.num_cells()];
    for (_, cells, n) in &members {
        let m = *n as f64;
        let c = (sum(f1.values(), cells) / m) * (sum(f2.values(), cells) / m);
        let pa = |v: &[f64]| (cells.iter().map(|&i| v[i].powf(p0)).sum::<f64>() / m).powf(1.0 / p0);
        let g = (pa(&a1) * pa(&a2)).powf(gamma);
        for &i in cells {
            lin[i] += c;
            gen[i] += g;
        }
    }
    let gen: Vec<f64> = gen.into_iter().map(|v| v.powf(1.0 / gamma)).collect();
    if members.len() != fam.len() {
        bad.push("family membership");
    }
    if !near(sparse_apply(&fam, &f1, &f2).unwrap().values(), &lin) {
        bad.push("sparse_apply");
    }
    if !near(general_sparse_apply(&fam, &f1, &f2, p0, gamma).unwrap().values(), &gen) {
        bad.push("general_sparse_apply");
    }
    bad
}

fn criterion_10(master: u64) -> (bool, String) {
    let mut rng = suite_rng(master, 10);
    let mut bad: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..100 {
        let geom = desk_geometry(i, 4, 4);
        for b in oracle_case(geom, &mut rng) {
            *bad.entry(b).or_insert(0) += 1;
        }
    }
    (bad.is_empty(), format!("100 inputs at K=4, 10 operations; mismatches {bad:?}"))
}

// ---------------------------------------------------------------------------
// Criterion 11

fn criterion_11() -> (bool, String) {
    let bin = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target");
    let exe = ["release", "debug"]
        .iter()
        .map(|p| bin.join(p).join("sparsedom"))
        .find(|p| p.exists());
    let scenario = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/scenarios/domination-smoke.toml");
    let Some(exe) = exe else {
        return (false, "sparsedom binary not built (run `cargo build -p sparsedom-cli`)".into());
    };
    let tmp = std::env::temp_dir().join(format!("sparsedom-acceptance-{}", std::process::id()));
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = tmp.join(format!("run{run}"));
        let status = std::process::Command::new(&exe)
            .args(["run", "--config"])
            .arg(&scenario)
            .arg("--out")
            .arg(&out)
            .status();
        match status {
            Ok(s) if s.success() => {}
            Ok(s) => return (false, format!("run {run} exited with {s}")),
            Err(e) => return (false, format!("run {run}: {e}")),
        }
        let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
        collect(&out, &out, &mut files);
        outputs.push(files);
    }
    let _ = std::fs::remove_dir_all(&tmp);
    let same = outputs[0] == outputs[1] && !outputs[0].is_empty();
    (same, format!("{} output files, byte-identical: {same}", outputs[0].len()))
}

fn collect(root: &std::path::Path, dir: &std::path::Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in std::fs::read_dir(dir).into_iter().flatten().flatten() {
        let p = e.path();
        if p.is_dir() {
            collect(root, &p, out);
        } else if let Ok(bytes) = std::fs::read(&p) {
            out.insert(p.strip_prefix(root).unwrap().display().to_string(), bytes);
        }
    }
}

// ---------------------------------------------------------------------------
// Frozen-slack checks outside the numbered criteria.

fn auxiliary_suite(master: u64, tally: &mut Tally) {
    let mut rng = suite_rng(master, 12);
    for i in 0..40 {
        let geom = desk_geometry(i, 6, 4);
        let cal = calib(geom.dim());
        let u = rng.gen_range(0..geom.num_systems());
        let fam = random_sparse_family(geom, &mut rng, u);
        let (a, b) = (two_step_weight(geom, &mut rng, 1.0), two_step_weight(geom, &mut rng, 1.0));
        let g = rng.gen_range(0.0..0.5);
        let e = rng.gen_range(0.0..0.45);
        for r in fam.cubes().iter().filter(|q| q.level <= 2) {
            tally.add(&check_sparse_kolmogorov(&fam, &a, &b, g, e, r, &cal).unwrap());
        }
        let coeffs: Vec<(DyadicCube, f64)> = (0..=3)
            .flat_map(|k| geom.cubes_at(u, k, sparsedom::dyadic::Placement::Inside))
            .map(|(q, _)| (q, if rng.gen_bool(0.5) { rng.gen_range(0.0..2.0) } else { 0.0 }))
            .collect();
        tally.add(&check_dyadic_sum(&coeffs, rng.gen_range(1.2..4.0), &a, &cal).unwrap());
        let bmo = random_bmo(geom, &mut rng);
        let pt = tuple(&mut rng, 1.5, 6.0);
        let sig = vec![dual_weight(&a, pt.p_i(0)).unwrap(), dual_weight(&b, pt.p_i(1)).unwrap()];
        let nu = nu_weight(&[a.clone(), b.clone()], &pt).unwrap();
        let cap = prodweight_cap(&nu, &sig, &pt, &bmo, &cal);
        let grid = symmetric_grid(if cap.is_finite() { cap } else { 1.0 });
        tally.add(&check_prodweight(&nu, &sig, &pt, &bmo, &grid, i % 2, &cal).unwrap());
        tally.add(&check_exp_ap(&bmo, &exp_ap_grid(&bmo, 2.0, &cal), 2.0, &cal).unwrap());
        tally.add(&check_ainfty_stability(&bmo, &a, &ainfty_grid(&bmo, &a, &cal), &cal).unwrap());
    }
    let geom = Geometry::new(1, 6).unwrap();
    let k = smooth_kernel();
    for _ in 0..20 {
        let f1 = random_signed(geom, &mut rng);
        let f2 = random_signed(geom, &mut rng);
        tally.add(&check_truncation_oscillation(&k, &f1, &f2, &calib(1)).unwrap());
    }
}

fn supplementary(master: u64) -> (bool, String) {
    let mut tally = Tally::default();
    auxiliary_suite(master, &mut tally);
    (tally.ok(), tally.summary())
}

// ---------------------------------------------------------------------------

fn calibrate() {
    let m = CALIBRATION_SEED;
    let mut t = Tally::default();
    domination_suite(m, &mut t, &mut (0, 0));
    testing_suite(m, &mut t);
    theorem_suite(m, &mut t);
    let mut rh = Tally::default();
    commutator_suite(m, &mut t, &mut rh);
    let mut cz = Tally::default();
    operator_suite(m, &mut t, &mut cz);
    auxiliary_suite(m, &mut t);
    for (k, v) in &t.worst {
        println!("calibration {k}: worst ratio {v:.6}");
    }
}

fn main() {
    if std::env::args().any(|a| a == "--calibrate") {
        calibrate();
        return;
    }
    let m = ACCEPTANCE_SEED;
    let mut all = true;
    let mut line = |n: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Vec<(bool, String)>| {
        let t = Instant::now();
        let res = f();
        let el = t.elapsed();
        for (i, (ok, detail)) in res.into_iter().enumerate() {
            let ok = ok && el <= budget;
            all &= ok;
            let label = if i == 0 { n } else { n + i as u32 };
            println!(
                "criterion {label:>2} [{name}]: {} ({detail}; {:.1} s, budget {} s)",
                if ok { "PASS" } else { "FAIL" },
                el.as_secs_f64(),
                budget.as_secs()
            );
        }
    };
    line(1, "characteristics", Duration::from_secs(30), &mut || vec![criterion_1(m)]);
    line(2, "dini quadrature", Duration::from_secs(1), &mut || vec![criterion_2()]);
    line(3, "sparse domination / recursion properties", Duration::from_secs(300), &mut || {
        let (a, b) = criterion_3_4(m);
        vec![a, b]
    });
    line(5, "testing inequalities", Duration::from_secs(120), &mut || vec![criterion_5(m)]);
    line(6, "mixed bounds", Duration::from_secs(600), &mut || vec![criterion_6(m)]);
    line(7, "p0 reduction", Duration::from_secs(30), &mut || vec![criterion_7(m)]);
    line(8, "commutators", Duration::from_secs(300), &mut || vec![criterion_8(m)]);
    line(9, "cotlar / weak type / decomposition", Duration::from_secs(180), &mut || vec![criterion_9(m)]);
    line(10, "oracle equivalence", Duration::from_secs(60), &mut || vec![criterion_10(m)]);
    line(11, "cli determinism", Duration::from_secs(120), &mut || vec![criterion_11()]);
    let t = Instant::now();
    let (ok, detail) = supplementary(m);
    all &= ok;
    println!(
        "supplementary [frozen-slack checks]: {} ({detail}; {:.1} s)",
        if ok { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );
    if !all {
        eprintln!("acceptance: at least one criterion failed");
        std::process::exit(1);
    }
}
