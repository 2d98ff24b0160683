//! Scenario files: schema, validation and construction of the inputs.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use sparsedom::czo::Kernel;
use sparsedom::dyadic::{DyadicCube, Geometry};
use sparsedom::random::{self, SeededRng};
use sparsedom::verify::{check_regime, MixedBound};
use sparsedom::weights::{exp_weight, power_weight, ExponentTuple};
use sparsedom::{CalibrationConstants, DominationConfig, GridFunction, Slacks, SparseFamily, Weight};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` overrides it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub exponents: ExponentSpec,
    #[serde(default)]
    pub weights: BTreeMap<String, WeightSpec>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    #[serde(default)]
    pub calibration: CalibrationSpec,
    #[serde(default)]
    pub domination: DominationConfig,
    #[serde(default)]
    pub dominate: DominateSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub dim: usize,
    pub resolution: u32,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    SmoothTensor {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "quarter")]
        radius: f64,
        #[serde(default)]
        norm_bound: Option<f64>,
    },
    Homogeneous {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "half")]
        delta: f64,
        #[serde(default)]
        norm_bound: Option<f64>,
    },
    Zero,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::SmoothTensor {
            amplitude: 1.0,
            radius: 0.25,
            norm_bound: None,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    pub p: Vec<f64>,
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default = "one")]
    pub gamma: f64,
}

impl Default for ExponentSpec {
    fn default() -> Self {
        ExponentSpec {
            p: vec![4.0, 4.0],
            p0: 1.0,
            gamma: 1.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: f64 },
    /// `ratio` on the first level-1 cube, 1 elsewhere.
    Step { ratio: f64 },
    /// Random two-step weight with values in `[10^-d, 10^d]`.
    TwoStep { decades: f64 },
    /// `|x|^exponent`.
    Power { exponent: f64 },
    /// `e^{s b}` for a declared function `b`.
    Exp { function: String, s: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        value: f64,
    },
    /// `value` on the box `[lo, hi)` (per axis), 0 elsewhere.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    Spike {
        cell: usize,
        #[serde(default = "one")]
        value: f64,
    },
    RandomNonnegative,
    RandomSigned,
    RandomBmo,
    RandomInteger {
        max: u32,
        density: f64,
    },
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub alpha_n: Option<f64>,
    pub beta_n: Option<f64>,
    pub c_n: Option<f64>,
    pub eps_n: Option<f64>,
    pub slacks: Option<Slacks>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DominateSpec {
    pub f1: String,
    pub f2: String,
}

impl Default for DominateSpec {
    fn default() -> Self {
        DominateSpec {
            f1: "f1".into(),
            f2: "f2".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// A random ½-sparse family of one system.
    Random { system: u32 },
    /// An explicit cube list.
    Cubes { cubes: Vec<DyadicCube> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum CheckSpec {
    /// Every characteristic of `(w, σ⃗)` is at least 1.
    Constants { w: String, sigmas: [String; 2] },
    Domination { f1: String, f2: String },
    Cotlar {
        f1: String,
        f2: String,
        #[serde(default = "quarter")]
        eta: f64,
    },
    TruncationOscillation { f1: String, f2: String },
    WeakType { pairs: Vec<[String; 2]> },
    Testing {
        family: FamilySpec,
        w: String,
        sigmas: [String; 2],
        #[serde(default)]
        gamma: Option<f64>,
    },
    Theorem {
        which: MixedBound,
        family: FamilySpec,
        w: String,
        sigmas: [String; 2],
        #[serde(default)]
        p0: Option<f64>,
        #[serde(default)]
        gamma: Option<f64>,
    },
    Commutator { b: [String; 2], weights: [String; 2] },
    JohnNirenberg { b: String },
    ExpAp { b: String, p: f64 },
    AinftyStability { b: String, w: String },
    Prodweight {
        w: String,
        sigmas: [String; 2],
        b: String,
        slot: usize,
    },
    ReverseHolder {
        w: String,
        #[serde(default)]
        c_n: Option<f64>,
    },
    CzDecomposition { f: String, height: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// The step weight whose ratio is swept.
    #[serde(default)]
    pub weight: Option<String>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Resolution,
    StepRatio,
    /// Both entries of the exponent tuple.
    Exponent,
    Seed,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Resolution => "resolution",
            SweepParameter::StepRatio => "step_ratio",
            SweepParameter::Exponent => "exponent",
            SweepParameter::Seed => "seed",
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| anyhow!("{e}"))
    }

    /// The scenario at one sweep point.
    pub fn at_point(&self, value: f64) -> anyhow::Result<Scenario> {
        let sweep = self.sweep.as_ref().ok_or_else(|| anyhow!("scenario has no [sweep] table"))?;
        let mut s = self.clone();
        s.sweep = None;
        match sweep.parameter {
            SweepParameter::Resolution => {
                if value.fract() != 0.0 || value < 1.0 {
                    bail!("resolution sweep values must be positive integers");
                }
                s.geometry.resolution = value as u32;
            }
            SweepParameter::Seed => {
                if value.fract() != 0.0 || value < 0.0 {
                    bail!("seed sweep values must be nonnegative integers");
                }
                s.seed = value as u64;
            }
            SweepParameter::Exponent => s.exponents.p = vec![value; s.exponents.p.len()],
            SweepParameter::StepRatio => {
                let name = sweep.weight.as_ref().ok_or_else(|| anyhow!("step_ratio sweep needs `weight`"))?;
                match s.weights.get_mut(name) {
                    Some(WeightSpec::Step { ratio }) => *ratio = value,
                    Some(_) => bail!("swept weight `{name}` is not a step weight"),
                    None => bail!("swept weight `{name}` is not declared"),
                }
            }
        }
        Ok(s)
    }
}

/// Everything a run needs, built and validated.
pub struct Built {
    pub geom: Geometry,
    pub kernel: Kernel,
    pub pt: ExponentTuple,
    pub p0: f64,
    pub gamma: f64,
    pub weights: BTreeMap<String, Weight>,
    pub functions: BTreeMap<String, GridFunction>,
    pub calib: CalibrationConstants,
    pub domination: DominationConfig,
    pub checks: Vec<CheckSpec>,
    /// One family per check that declares one, by check index.
    pub families: BTreeMap<usize, SparseFamily>,
    pub dominate: DominateSpec,
}

fn build_kernel(spec: &KernelSpec, dim: usize) -> anyhow::Result<Kernel> {
    let (k, nb) = match spec {
        KernelSpec::SmoothTensor {
            amplitude,
            radius,
            norm_bound,
        } => (Kernel::smooth_tensor(dim, *amplitude, *radius)?, *norm_bound),
        KernelSpec::Homogeneous {
            amplitude,
            delta,
            norm_bound,
        } => (Kernel::homogeneous(dim, *amplitude, *delta)?, *norm_bound),
        KernelSpec::Zero => (Kernel::zero(dim)?, None),
    };
    Ok(match nb {
        Some(b) => k.with_norm_bound(b)?,
        None => k,
    })
}

fn build_function(spec: &FunctionSpec, geom: Geometry, rng: &mut SeededRng) -> anyhow::Result<GridFunction> {
    Ok(match spec {
        FunctionSpec::Constant { value } => GridFunction::constant(geom, *value),
        FunctionSpec::Indicator { lo, hi, value } => {
            if lo.len() != geom.dim() || hi.len() != geom.dim() {
                bail!("indicator bounds need {} entries", geom.dim());
            }
            GridFunction::from_midpoints(geom, |x| {
                if (0..x.len()).all(|d| x[d] >= lo[d] && x[d] < hi[d]) {
                    *value
                } else {
                    0.0
                }
            })?
        }
        FunctionSpec::Spike { cell, value } => {
            if *cell >= geom.num_cells() {
                bail!("spike cell {cell} out of range");
            }
            let mut v = vec![0.0; geom.num_cells()];
            v[*cell] = *value;
            GridFunction::new(geom, v)?
        }
        FunctionSpec::RandomNonnegative => random::random_nonnegative(geom, rng),
        FunctionSpec::RandomSigned => random::random_signed(geom, rng),
        FunctionSpec::RandomBmo => random::random_bmo(geom, rng),
        FunctionSpec::RandomInteger { max, density } => {
            if !(0.0..=1.0).contains(density) {
                bail!("density must lie in [0,1]");
            }
            random::random_integer(geom, rng, *max, *density)
        }
    })
}

fn build_weight(spec: &WeightSpec, geom: Geometry, rng: &mut SeededRng, functions: &BTreeMap<String, GridFunction>) -> anyhow::Result<Weight> {
    Ok(match spec {
        WeightSpec::Constant { value } => Weight::constant(geom, *value)?,
        WeightSpec::Step { ratio } => {
            if !(*ratio > 0.0) {
                bail!("step ratio must be positive");
            }
            random::step_weight(geom, *ratio)
        }
        WeightSpec::TwoStep { decades } => {
            if !(*decades > 0.0) {
                bail!("decades must be positive");
            }
            random::two_step_weight(geom, rng, *decades)
        }
        WeightSpec::Power { exponent } => power_weight(*exponent, geom)?,
        WeightSpec::Exp { function, s } => exp_weight(lookup(functions, function, "function")?, *s)?,
    })
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, name: &str, what: &str) -> anyhow::Result<&'a T> {
    map.get(name).ok_or_else(|| anyhow!("unknown {what} `{name}`"))
}

impl Built {
    pub fn function(&self, name: &str) -> anyhow::Result<&GridFunction> {
        lookup(&self.functions, name, "function")
    }

    pub fn weight(&self, name: &str) -> anyhow::Result<&Weight> {
        lookup(&self.weights, name, "weight")
    }

    pub fn weight_pair(&self, names: &[String; 2]) -> anyhow::Result<[Weight; 2]> {
        Ok([self.weight(&names[0])?.clone(), self.weight(&names[1])?.clone()])
    }

    pub fn function_pair(&self, names: &[String; 2]) -> anyhow::Result<[GridFunction; 2]> {
        Ok([self.function(&names[0])?.clone(), self.function(&names[1])?.clone()])
    }
}

/// Builds all inputs and validates every reference and precondition that can
/// be checked before computing. Random functions are drawn first (in name
/// order), then random weights, then random families (in check order).
pub fn build(s: &Scenario) -> anyhow::Result<Built> {
    let geom = Geometry::new(s.geometry.dim, s.geometry.resolution)?;
    if s.geometry.resolution > 12 {
        bail!("resolution above 12 is not supported");
    }
    let kernel = build_kernel(&s.kernel, geom.dim())?;
    let pt = ExponentTuple::new(s.exponents.p.clone()).context("exponents")?;
    if pt.len() != 2 {
        bail!("the exponent tuple needs exactly two entries");
    }
    let mut rng = random::seeded(s.seed);
    let mut functions = BTreeMap::new();
    for (name, spec) in &s.functions {
        functions.insert(name.clone(), build_function(spec, geom, &mut rng).with_context(|| format!("function `{name}`"))?);
    }
    let mut weights = BTreeMap::new();
    for (name, spec) in &s.weights {
        weights.insert(name.clone(), build_weight(spec, geom, &mut rng, &functions).with_context(|| format!("weight `{name}`"))?);
    }
    let mut calib = CalibrationConstants::for_dimension(geom.dim());
    let c = &s.calibration;
    calib.alpha_n = c.alpha_n.unwrap_or(calib.alpha_n);
    calib.beta_n = c.beta_n.unwrap_or(calib.beta_n);
    calib.c_n = c.c_n.unwrap_or(calib.c_n);
    calib.eps_n = c.eps_n.unwrap_or(calib.eps_n);
    if let Some(sl) = &c.slacks {
        calib.slacks = sl.clone();
    }
    let mut built = Built {
        geom,
        kernel,
        pt,
        p0: s.exponents.p0,
        gamma: s.exponents.gamma,
        weights,
        functions,
        calib,
        domination: s.domination.clone(),
        checks: s.checks.clone(),
        families: BTreeMap::new(),
        dominate: s.dominate.clone(),
    };
    for (i, check) in s.checks.iter().enumerate() {
        validate(&built, check).with_context(|| format!("check {i}"))?;
        let fam = match check {
            CheckSpec::Testing { family, .. } | CheckSpec::Theorem { family, .. } => Some(family),
            _ => None,
        };
        if let Some(f) = fam {
            let family = match f {
                FamilySpec::Random { system } => {
                    if *system >= geom.num_systems() {
                        bail!("check {i}: system {system} out of range");
                    }
                    random::random_sparse_family(geom, &mut rng, *system)
                }
                FamilySpec::Cubes { cubes } => SparseFamily::new(geom, cubes.iter().copied(), 0.5).with_context(|| format!("check {i}"))?,
            };
            built.families.insert(i, family);
        }
    }
    Ok(built)
}

fn validate(b: &Built, check: &CheckSpec) -> anyhow::Result<()> {
    match check {
        CheckSpec::Constants { w, sigmas } => {
            b.weight(w)?;
            b.weight_pair(sigmas)?;
        }
        CheckSpec::Domination { f1, f2 } | CheckSpec::TruncationOscillation { f1, f2 } => {
            b.function(f1)?;
            b.function(f2)?;
        }
        CheckSpec::Cotlar { f1, f2, eta } => {
            b.function(f1)?;
            b.function(f2)?;
            if !(*eta > 0.0 && *eta < 0.5) {
                bail!("eta must lie in (0, 1/2)");
            }
        }
        CheckSpec::WeakType { pairs } => {
            for p in pairs {
                b.function_pair(p)?;
            }
        }
        CheckSpec::Testing { w, sigmas, gamma, .. } => {
            b.weight(w)?;
            b.weight_pair(sigmas)?;
            if !(gamma.unwrap_or(b.gamma) > 0.0) {
                bail!("gamma must be positive");
            }
        }
        CheckSpec::Theorem { w, sigmas, p0, gamma, .. } => {
            b.weight(w)?;
            b.weight_pair(sigmas)?;
            check_regime(&b.pt, p0.unwrap_or(b.p0), gamma.unwrap_or(b.gamma))?;
        }
        CheckSpec::Commutator { b: syms, weights } => {
            b.function_pair(syms)?;
            b.weight_pair(weights)?;
            if b.pt.p() < 1.0 {
                bail!("commutator bound needs p >= 1");
            }
        }
        CheckSpec::JohnNirenberg { b: f } => {
            b.function(f)?;
        }
        CheckSpec::ExpAp { b: f, p } => {
            b.function(f)?;
            if !(*p > 1.0) {
                bail!("p must exceed 1");
            }
        }
        CheckSpec::AinftyStability { b: f, w } => {
            b.function(f)?;
            b.weight(w)?;
        }
        CheckSpec::Prodweight { w, sigmas, b: f, slot } => {
            b.weight(w)?;
            b.weight_pair(sigmas)?;
            b.function(f)?;
            if *slot > 1 {
                bail!("slot must be 0 or 1");
            }
        }
        CheckSpec::ReverseHolder { w, c_n } => {
            b.weight(w)?;
            if c_n.is_some_and(|c| !(c > 0.0)) {
                bail!("c_n must be positive");
            }
        }
        CheckSpec::CzDecomposition { f, height } => {
            if b.function(f)?.values().iter().any(|v| *v < 0.0) {
                bail!("decomposition needs a nonnegative function");
            }
            if !(*height > 0.0) {
                bail!("height must be positive");
            }
        }
    }
    Ok(())
}
