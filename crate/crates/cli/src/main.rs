//! `sparsedom`: runs verification scenarios described in TOML files.
//!
//! Exit codes: 0 every check passed, 1 some check failed, 2 invalid
//! configuration, 3 runtime error. Diagnostics go to stderr as one JSON
//! object `{"error", "kind"}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod runner;
mod scenario;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sparsedom::sparse::sparse_domination;
use sparsedom::weights::{ap_constant, fujii_wilson};

use runner::{rows, run_checks, write_jsonl, write_plots, write_summary, ReportRow};
use scenario::{build, Built, Scenario};

#[derive(Parser)]
#[command(name = "sparsedom", version, about = "Sparse domination and weighted bound checks on dyadic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario.
    Run(Common),
    /// Run the checks once per value of the scenario's `[sweep]` table.
    Sweep(Common),
    /// Print the characteristics of every declared weight.
    Constants(Common),
    /// Run sparse domination on the `[dominate]` pair and write the families.
    Dominate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the scenario's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (kind, err, code) = match self {
            Failure::Config(e) => ("config", e, 2),
            Failure::Runtime(e) => ("runtime", e, 3),
        };
        eprintln!("{}", json!({ "error": format!("{err:#}"), "kind": kind }));
        ExitCode::from(code)
    }
}

fn runtime<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))
        .map_err(Failure::Config)?;
    let mut s = Scenario::parse(&text).map_err(Failure::Config)?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn build_checked(s: &Scenario) -> Result<Built, Failure> {
    build(s).map_err(Failure::Config)
}

fn out_dir(common: &Common, s: &Scenario) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .or_else(|| s.output.clone())
        .ok_or_else(|| Failure::Config(anyhow!("no output directory: pass --out or set `output`")))?;
    runtime(fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())))?;
    Ok(dir)
}

fn verdict(rows: &[ReportRow]) -> ExitCode {
    if rows.iter().all(|r| r.report.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(common: &Common) -> Result<ExitCode, Failure> {
    let s = load(common)?;
    let b = build_checked(&s)?;
    let dir = out_dir(common, &s)?;
    let outputs = runtime(run_checks(&b))?;
    let rows = rows(&b, &outputs, None);
    runtime(write_jsonl(&dir.join("report.jsonl"), &rows))?;
    runtime(write_summary(&dir.join("summary.csv"), &rows, None))?;
    runtime(write_plots(&dir, &b, &outputs))?;
    Ok(verdict(&rows))
}

fn sweep(common: &Common) -> Result<ExitCode, Failure> {
    let s = load(common)?;
    let spec = s.sweep.clone().ok_or_else(|| Failure::Config(anyhow!("scenario has no [sweep] table")))?;
    if spec.values.is_empty() {
        return Err(Failure::Config(anyhow!("sweep has no values")));
    }
    let mut built = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        let point = s.at_point(v).map_err(Failure::Config)?;
        built.push(build_checked(&point).map_err(|f| match f {
            Failure::Config(e) => Failure::Config(e.context(format!("sweep value {v}"))),
            other => other,
        })?);
    }
    let dir = out_dir(common, &s)?;
    let mut all = Vec::new();
    for (b, &v) in built.iter().zip(&spec.values) {
        let outputs = runtime(run_checks(b).with_context(|| format!("sweep value {v}")))?;
        all.extend(rows(b, &outputs, Some(v)));
    }
    runtime(write_jsonl(&dir.join("report.jsonl"), &all))?;
    runtime(write_summary(&dir.join("summary.csv"), &all, Some(spec.parameter.name())))?;
    Ok(verdict(&all))
}

fn constants(common: &Common) -> Result<ExitCode, Failure> {
    let s = load(common)?;
    let b = build_checked(&s)?;
    for (name, w) in &b.weights {
        let ap = runtime(
            b.pt.p_list()
                .iter()
                .map(|&p| ap_constant(w, p).map(|r| r.value))
                .collect::<sparsedom::Result<Vec<f64>>>()
                .map_err(anyhow::Error::from),
        )?;
        println!("{}", json!({ "weight": name, "fujii_wilson": fujii_wilson(w).value, "ap": ap, "p": b.pt.p_list() }));
    }
    Ok(ExitCode::SUCCESS)
}

fn dominate(common: &Common) -> Result<ExitCode, Failure> {
    let s = load(common)?;
    let b = build_checked(&s)?;
    let f1 = b.function(&b.dominate.f1).map_err(Failure::Config)?;
    let f2 = b.function(&b.dominate.f2).map_err(Failure::Config)?;
    let dir = out_dir(common, &s)?;
    let dom = runtime(sparse_domination(&b.kernel, f1, f2, &b.domination).map_err(anyhow::Error::from))?;
    let path = dir.join("domination.json");
    runtime(fs::write(&path, dom.to_json()).with_context(|| format!("writing {}", path.display())))?;
    let ok = dom.node_properties_hold() && dom.all_sparse() && dom.pointwise_holds();
    println!(
        "{}",
        json!({
            "constant": dom.constant,
            "nodes": dom.trace.len(),
            "cubes": dom.families.iter().map(|f| f.len()).sum::<usize>(),
            "node_properties": dom.node_properties_hold(),
            "sparse": dom.all_sparse(),
            "pointwise": dom.pointwise_holds(),
        })
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

type Verb = fn(&Common) -> Result<ExitCode, Failure>;

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config(anyhow!("--threads must be positive")));
        }
        runtime(rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(anyhow::Error::from))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, f): (&Common, Verb) = match &cli.command {
        Command::Run(c) => (c, run),
        Command::Sweep(c) => (c, sweep),
        Command::Constants(c) => (c, constants),
        Command::Dominate(c) => (c, dominate),
    };
    match set_threads(common.threads).and_then(|_| f(common)) {
        Ok(code) => code,
        Err(e) => e.exit(),
    }
}
