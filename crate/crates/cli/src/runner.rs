//! Evaluates the checks of a built scenario and writes the outputs.

use std::fs;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sparsedom::czo::{check_truncation_oscillation, cotlar_profile};
use sparsedom::report::digest;
use sparsedom::verify::{
    ainfty_grid, check_ainfty_stability, check_commutator_bound, check_cz_decomposition, check_exp_ap, check_john_nirenberg,
    check_pointwise_domination, check_prodweight, check_testing_lemma, check_theorem, check_weak_type, exp_ap_grid, prodweight_cap,
    symmetric_grid, TestDictionary,
};
use sparsedom::weights::{dual_h_infty, dual_w_infty, fujii_wilson, hruscev, multilinear_ap_constant, multilinear_w_infty, reverse_holder_check};
use sparsedom::{PointwiseCheck, VerificationReport};

use crate::scenario::{Built, CheckSpec};

/// Slack of the characteristic lower bounds `1 ≤ [·]`.
const CONSTANTS_SLACK: f64 = 1.0 + 1e-12;

/// One line of `report.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Sweep value, absent outside sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<f64>,
    /// Position of the check in the scenario.
    pub index: usize,
    pub kind: String,
    pub report: VerificationReport,
}

pub struct CheckOutput {
    pub reports: Vec<VerificationReport>,
    pub plot: Option<PointwiseCheck>,
}

pub fn kind_name(check: &CheckSpec) -> &'static str {
    match check {
        CheckSpec::Constants { .. } => "constants",
        CheckSpec::Domination { .. } => "domination",
        CheckSpec::Cotlar { .. } => "cotlar",
        CheckSpec::TruncationOscillation { .. } => "truncation_oscillation",
        CheckSpec::WeakType { .. } => "weak_type",
        CheckSpec::Testing { .. } => "testing",
        CheckSpec::Theorem { .. } => "theorem",
        CheckSpec::Commutator { .. } => "commutator",
        CheckSpec::JohnNirenberg { .. } => "john_nirenberg",
        CheckSpec::ExpAp { .. } => "exp_ap",
        CheckSpec::AinftyStability { .. } => "ainfty_stability",
        CheckSpec::Prodweight { .. } => "prodweight",
        CheckSpec::ReverseHolder { .. } => "reverse_holder",
        CheckSpec::CzDecomposition { .. } => "cz_decomposition",
    }
}

fn lower_bound(name: &str, value: f64, dg: &str) -> VerificationReport {
    VerificationReport::new(name, 1.0, value, CONSTANTS_SLACK, dg.to_string())
}

fn run_check(b: &Built, index: usize, check: &CheckSpec) -> anyhow::Result<CheckOutput> {
    let cal = &b.calib;
    let single = |r: VerificationReport| CheckOutput {
        reports: vec![r],
        plot: None,
    };
    Ok(match check {
        CheckSpec::Constants { w, sigmas } => {
            let w = b.weight(w)?;
            let s = b.weight_pair(sigmas)?;
            let dg = digest(&[w.values(), s[0].values(), s[1].values(), b.pt.p_list()]);
            let mut reports = vec![
                lower_bound("multilinear_ap", multilinear_ap_constant(w, &s, &b.pt)?.value, &dg),
                lower_bound("fujii_wilson", fujii_wilson(w).value, &dg),
                lower_bound("multilinear_w_infty", multilinear_w_infty(&s, &b.pt)?.value, &dg),
                lower_bound("hruscev", hruscev(&s, &b.pt)?.value, &dg),
            ];
            for i in 0..2 {
                reports.push(lower_bound(&format!("dual_w_infty_{i}"), dual_w_infty(w, &s, &b.pt, b.gamma, i)?.value, &dg));
                reports.push(lower_bound(&format!("dual_h_infty_{i}"), dual_h_infty(w, &s, &b.pt, b.gamma, i)?.value, &dg));
            }
            CheckOutput { reports, plot: None }
        }
        CheckSpec::Domination { f1, f2 } => {
            let (check, dom) = check_pointwise_domination(&b.kernel, b.function(f1)?, b.function(f2)?, &b.domination, cal)?;
            let bad = dom.trace.iter().filter(|r| !(r.measure_ok && r.non_nested && r.pointwise_ok)).count();
            let mut reports = vec![check.report.clone()];
            reports.extend(dom.sparseness.iter().cloned());
            reports.push(
                VerificationReport::new("domination_nodes", bad as f64, 0.0, 1.0, check.report.digest.clone())
                    .with_note(format!("{} nodes, constant {}", dom.trace.len(), dom.constant)),
            );
            CheckOutput {
                reports,
                plot: Some(check),
            }
        }
        CheckSpec::Cotlar { f1, f2, eta } => {
            let check = cotlar_profile(&b.kernel, b.function(f1)?, b.function(f2)?, *eta, cal)?;
            CheckOutput {
                reports: vec![check.report.clone()],
                plot: Some(check),
            }
        }
        CheckSpec::TruncationOscillation { f1, f2 } => single(check_truncation_oscillation(&b.kernel, b.function(f1)?, b.function(f2)?, cal)?),
        CheckSpec::WeakType { pairs } => {
            let pairs = pairs
                .iter()
                .map(|p| b.function_pair(p).map(|[a, c]| (a, c)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            CheckOutput {
                reports: check_weak_type(&b.kernel, &pairs, cal)?.to_vec(),
                plot: None,
            }
        }
        CheckSpec::Testing { w, sigmas, gamma, .. } => CheckOutput {
            reports: check_testing_lemma(&b.families[&index], b.weight(w)?, &b.weight_pair(sigmas)?, &b.pt, gamma.unwrap_or(b.gamma), cal)?,
            plot: None,
        },
        CheckSpec::Theorem {
            which, w, sigmas, p0, gamma, ..
        } => {
            let dict = TestDictionary::standard(b.geom);
            single(check_theorem(
                &b.families[&index],
                b.weight(w)?,
                &b.weight_pair(sigmas)?,
                &b.pt,
                p0.unwrap_or(b.p0),
                gamma.unwrap_or(b.gamma),
                &dict,
                *which,
                cal,
            )?)
        }
        CheckSpec::Commutator { b: syms, weights } => {
            let dict = TestDictionary::standard(b.geom);
            single(check_commutator_bound(&b.kernel, &b.function_pair(syms)?, &b.weight_pair(weights)?, &b.pt, &dict, cal)?)
        }
        CheckSpec::JohnNirenberg { b: f } => single(check_john_nirenberg(b.function(f)?, cal)),
        CheckSpec::ExpAp { b: f, p } => {
            let f = b.function(f)?;
            single(check_exp_ap(f, &exp_ap_grid(f, *p, cal), *p, cal)?)
        }
        CheckSpec::AinftyStability { b: f, w } => {
            let (f, w) = (b.function(f)?, b.weight(w)?);
            single(check_ainfty_stability(f, w, &ainfty_grid(f, w, cal), cal)?)
        }
        CheckSpec::Prodweight { w, sigmas, b: f, slot } => {
            let (f, w, s) = (b.function(f)?, b.weight(w)?, b.weight_pair(sigmas)?);
            let cap = prodweight_cap(w, &s, &b.pt, f, cal);
            let grid = symmetric_grid(if cap.is_finite() { cap } else { 1.0 });
            single(check_prodweight(w, &s, &b.pt, f, &grid, *slot, cal)?)
        }
        CheckSpec::ReverseHolder { w, c_n } => single(reverse_holder_check(b.weight(w)?, c_n.unwrap_or(cal.c_n))?),
        CheckSpec::CzDecomposition { f, height } => single(check_cz_decomposition(b.function(f)?, *height)?),
    })
}

/// Runs every check in scenario order. Checks run in parallel; outputs are
/// collected in order so results do not depend on scheduling.
pub fn run_checks(b: &Built) -> anyhow::Result<Vec<CheckOutput>> {
    b.checks
        .par_iter()
        .enumerate()
        .map(|(i, c)| run_check(b, i, c).with_context(|| format!("check {i} ({})", kind_name(c))))
        .collect()
}

pub fn rows(b: &Built, outputs: &[CheckOutput], point: Option<f64>) -> Vec<ReportRow> {
    outputs
        .iter()
        .enumerate()
        .flat_map(|(i, o)| {
            o.reports.iter().map(move |r| ReportRow {
                point,
                index: i,
                kind: kind_name(&b.checks[i]).to_string(),
                report: r.clone(),
            })
        })
        .collect()
}

pub fn write_jsonl(path: &Path, rows: &[ReportRow]) -> anyhow::Result<()> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&serde_json::to_string(r)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `check,lhs,rhs,ratio,slack,pass`, preceded by the sweep parameter column
/// when `parameter` is given.
pub fn write_summary(path: &Path, rows: &[ReportRow], parameter: Option<&str>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["check", "lhs", "rhs", "ratio", "slack", "pass"];
    if let Some(p) = parameter {
        header.insert(0, p);
    }
    w.write_record(&header)?;
    for r in rows {
        let rep = &r.report;
        let mut rec = vec![
            rep.check.clone(),
            rep.lhs.to_string(),
            rep.rhs.to_string(),
            rep.ratio.to_string(),
            rep.slack.to_string(),
            rep.pass.to_string(),
        ];
        if parameter.is_some() {
            rec.insert(0, r.point.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `plots/<index>_<kind>.csv` with `cell,lhs,rhs` per cell.
pub fn write_plots(dir: &Path, b: &Built, outputs: &[CheckOutput]) -> anyhow::Result<()> {
    let plots = dir.join("plots");
    for (i, o) in outputs.iter().enumerate() {
        let Some(p) = &o.plot else { continue };
        fs::create_dir_all(&plots)?;
        let path = plots.join(format!("{i}_{}.csv", kind_name(&b.checks[i])));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["cell", "lhs", "rhs"])?;
        for (c, (l, r)) in p.lhs.iter().zip(&p.rhs).enumerate() {
            w.write_record([c.to_string(), l.to_string(), r.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}
