//! Piecewise-constant functions on the cells of a geometry.
//!
//! Functions are extended by zero outside the base cube: integrals over a cube
//! run over its clipped cells while averages divide by the unclipped volume.

use serde::{Deserialize, Serialize};

use crate::dyadic::{CellBox, DyadicCube, Geometry, Placement};
use crate::error::{Error, Result};

/// Smallest admissible weight value.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    geom: Geometry,
    values: Vec<f64>,
}

/// A strictly positive grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight(GridFunction);

#[derive(Serialize, Deserialize)]
struct Envelope {
    dimension: usize,
    resolution: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(geom: Geometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.num_cells() {
            return Err(Error::Length {
                expected: geom.num_cells(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction { geom, values })
    }

    pub fn zeros(geom: Geometry) -> Self {
        GridFunction {
            geom,
            values: vec![0.0; geom.num_cells()],
        }
    }

    pub fn constant(geom: Geometry, c: f64) -> Self {
        GridFunction {
            geom,
            values: vec![c; geom.num_cells()],
        }
    }

    /// Samples `f` at cell midpoints.
    pub fn from_midpoints(geom: Geometry, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let d = geom.dim();
        let values = (0..geom.num_cells()).map(|i| f(&geom.midpoint(i)[..d])).collect();
        GridFunction::new(geom, values)
    }

    /// `c` on the base cells of `b`, zero elsewhere.
    pub fn indicator_box(geom: Geometry, b: &CellBox, c: f64) -> Self {
        let mut out = GridFunction::zeros(geom);
        geom.for_each_cell(b, |i| out.values[i] = c);
        out
    }

    pub fn indicator(geom: Geometry, q: &DyadicCube) -> Result<Self> {
        let b = geom.cell_box(q)?;
        Ok(GridFunction::indicator_box(geom, &b, 1.0))
    }

    pub fn geometry(&self) -> Geometry {
        self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.geom, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        GridFunction {
            geom: self.geom,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFunction {
            geom: self.geom,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.geom != other.geom {
            return Err(Error::GeometryMismatch);
        }
        GridFunction::new(
            self.geom,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f` over the base cube.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.geom.cell_volume()
    }

    /// Sum of cell values over the clipped box.
    pub fn box_sum(&self, b: &CellBox) -> f64 {
        box_sum(&self.geom, &self.values, b)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "value"]).expect("in-memory csv");
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:?}")]).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }

    pub fn from_csv(geom: Geometry, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut values = vec![f64::NAN; geom.num_cells()];
        let mut seen = 0usize;
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(Error::Parse("expected index,value rows".into()));
            }
            let i: usize = rec[0].trim().parse().map_err(|_| Error::Parse(format!("bad index {:?}", &rec[0])))?;
            let v: f64 = rec[1].trim().parse().map_err(|_| Error::Parse(format!("bad value {:?}", &rec[1])))?;
            if i >= values.len() {
                return Err(Error::Parse(format!("index {i} out of range")));
            }
            values[i] = v;
            seen += 1;
        }
        if seen != values.len() {
            return Err(Error::Length {
                expected: values.len(),
                got: seen,
            });
        }
        GridFunction::new(geom, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope {
            dimension: self.geom.dim(),
            resolution: self.geom.resolution(),
            values: self.values.clone(),
        })
        .expect("finite values serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Envelope = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        GridFunction::new(Geometry::new(e.dimension, e.resolution)?, e.values)
    }
}

#[inline]
pub(crate) fn box_sum(geom: &Geometry, values: &[f64], b: &CellBox) -> f64 {
    let mut s = 0.0;
    geom.for_each_cell(b, |i| s += values[i]);
    s
}

impl Weight {
    pub fn new(f: GridFunction) -> Result<Self> {
        if let Some((i, &v)) = f.values.iter().enumerate().find(|(_, &v)| !(v >= WEIGHT_FLOOR)) {
            return Err(Error::WeightFloor {
                cell: i,
                value: v,
                floor: WEIGHT_FLOOR,
            });
        }
        Ok(Weight(f))
    }

    pub fn from_values(geom: Geometry, values: Vec<f64>) -> Result<Self> {
        Weight::new(GridFunction::new(geom, values)?)
    }

    pub fn constant(geom: Geometry, c: f64) -> Result<Self> {
        Weight::new(GridFunction::constant(geom, c))
    }

    pub fn function(&self) -> &GridFunction {
        &self.0
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn geometry(&self) -> Geometry {
        self.0.geom
    }

    /// Cellwise power `w^e`.
    pub fn powf(&self, e: f64) -> Result<Self> {
        Weight::new(self.0.map(|v| v.powf(e))?)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Weight::new(self.0.scale(c))
    }

    pub fn mul(&self, other: &Weight) -> Result<Self> {
        Weight::new(self.0.mul(&other.0)?)
    }
}

impl AsRef<GridFunction> for Weight {
    fn as_ref(&self) -> &GridFunction {
        &self.0
    }
}

fn cube_box(f: &GridFunction, q: &DyadicCube) -> Result<CellBox> {
    f.geom.cell_box(q)
}

/// `⟨f⟩_Q = |Q|^{-1} ∫_Q f`, with zero extension outside the base cube.
pub fn average(f: &GridFunction, q: &DyadicCube) -> Result<f64> {
    let b = cube_box(f, q)?;
    Ok(f.box_sum(&b) / b.measure_cells() as f64)
}

/// `(|Q|^{-1} ∫_Q |f|^{p0})^{1/p0}`.
pub fn p_average(f: &GridFunction, q: &DyadicCube, p0: f64) -> Result<f64> {
    if !(p0 >= 1.0) {
        return Err(Error::Precondition("p0 must be at least 1".into()));
    }
    let b = cube_box(f, q)?;
    Ok(box_p_average(&f.geom, f.values(), &b, p0))
}

pub(crate) fn box_p_average(geom: &Geometry, values: &[f64], b: &CellBox, p0: f64) -> f64 {
    let mut s = 0.0;
    if p0 == 1.0 {
        geom.for_each_cell(b, |i| s += values[i].abs());
        s / b.measure_cells() as f64
    } else {
        geom.for_each_cell(b, |i| s += values[i].abs().powf(p0));
        (s / b.measure_cells() as f64).powf(1.0 / p0)
    }
}

/// `σ(Q)^{-1} ∫_Q f σ` over the clipped cube.
pub fn weighted_average(f: &GridFunction, q: &DyadicCube, s: &Weight) -> Result<f64> {
    if f.geom != s.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let b = cube_box(f, q)?;
    box_weighted_average(&f.geom, f.values(), s.values(), &b).ok_or(Error::ZeroMass)
}

pub(crate) fn box_weighted_average(geom: &Geometry, f: &[f64], s: &[f64], b: &CellBox) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    geom.for_each_cell(b, |i| {
        num += f[i] * s[i];
        den += s[i];
    });
    if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

/// `(∫ |f|^p w)^{1/p}`; Lebesgue measure when `w` is `None`.
pub fn lp_norm(f: &GridFunction, p: f64, w: Option<&Weight>) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Precondition("p must be positive".into()));
    }
    let vol = f.geom.cell_volume();
    let s: f64 = match w {
        None => f.values.iter().map(|v| v.abs().powf(p)).sum(),
        Some(w) => {
            if w.geometry() != f.geom {
                return Err(Error::GeometryMismatch);
            }
            f.values.iter().zip(w.values()).map(|(v, wv)| v.abs().powf(p) * wv).sum()
        }
    };
    Ok((s * vol).powf(1.0 / p))
}

pub(crate) fn box_mean_oscillation(geom: &Geometry, values: &[f64], b: &CellBox) -> f64 {
    let mut s = 0.0;
    geom.for_each_cell(b, |i| s += values[i]);
    let n = b.measure_cells() as f64;
    let avg = s / n;
    let mut osc = 0.0;
    geom.for_each_cell(b, |i| osc += (values[i] - avg).abs());
    osc / n
}

/// `sup_Q |Q|^{-1} ∫_Q |b - ⟨b⟩_Q|` over cubes inside the base cube, all
/// systems, levels `0..=K`.
pub fn bmo_norm(b: &GridFunction) -> f64 {
    bmo_norm_with_witness(b).0
}

pub fn bmo_norm_with_witness(b: &GridFunction) -> (f64, DyadicCube) {
    let geom = b.geom;
    let mut best = (0.0, geom.base_cube());
    for (q, bx) in geom.sup_cubes(Placement::Inside) {
        let v = box_mean_oscillation(&geom, b.values(), &bx);
        if v > best.0 {
            best = (v, q);
        }
    }
    best
}

/// `exp(⨍_Q log w)`; the mean runs over the clipped cells of `Q`.
pub fn log_average(w: &Weight, q: &DyadicCube) -> Result<f64> {
    let geom = w.geometry();
    let b = geom.cell_box(q)?;
    box_log_average(&geom, w.values(), &b).ok_or(Error::ZeroMass)
}

pub(crate) fn box_log_average(geom: &Geometry, w: &[f64], b: &CellBox) -> Option<f64> {
    let mut s = 0.0;
    let mut n = 0usize;
    geom.for_each_cell(b, |i| {
        s += w[i].ln();
        n += 1;
    });
    if n == 0 {
        None
    } else {
        Some((s / n as f64).exp())
    }
}
