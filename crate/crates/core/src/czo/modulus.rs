//! Moduli of continuity and their Dini-type integrals.
//!
//! A modulus is evaluated through `u = log(1/t)` so the quadrature can reach
//! values of `t` far below the smallest positive double.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone)]
pub enum ModulusKind {
    Zero,
    /// `scale · t^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `scale · (1 + log(1/t))^{-exponent}` for `t ≤ 1`, `scale` beyond.
    InverseLog { scale: f64, exponent: f64 },
    /// An arbitrary rule `t ↦ ω(t)`.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ModulusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusKind::Zero => write!(f, "Zero"),
            ModulusKind::Power { scale, exponent } => write!(f, "Power({scale} t^{exponent})"),
            ModulusKind::InverseLog { scale, exponent } => write!(f, "InverseLog({scale}, {exponent})"),
            ModulusKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModulusOfContinuity {
    kind: ModulusKind,
    dini: f64,
}

/// Sample grid on `[0,1]` used by the structural spot checks.
fn spot_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=40).map(|j| 2f64.powf(-(j as f64) / 2.0)).collect();
    g.extend((1..20).map(|j| j as f64 / 20.0));
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

impl ModulusOfContinuity {
    /// Builds a modulus after checking `ω(0) = 0` and monotonicity on a
    /// sample grid.
    pub fn new(kind: ModulusKind) -> Result<Self> {
        match &kind {
            ModulusKind::Power { scale, exponent } if !(*scale >= 0.0 && *exponent > 0.0) => {
                return Err(Error::Kernel("power modulus needs scale >= 0, exponent > 0".into()))
            }
            ModulusKind::InverseLog { scale, exponent } if !(*scale >= 0.0 && *exponent > 0.0) => {
                return Err(Error::Kernel("log modulus needs scale >= 0, exponent > 0".into()))
            }
            _ => {}
        }
        let mut m = ModulusOfContinuity { kind, dini: 0.0 };
        if m.eval(0.0) != 0.0 {
            return Err(Error::Kernel("modulus must vanish at 0".into()));
        }
        let grid = spot_grid();
        for w in grid.windows(2) {
            if m.eval(w[1]) < m.eval(w[0]) {
                return Err(Error::Kernel(format!("modulus decreases between {} and {}", w[0], w[1])));
            }
        }
        m.dini = dini_norm(&m, 1.0);
        Ok(m)
    }

    pub fn zero() -> Self {
        ModulusOfContinuity {
            kind: ModulusKind::Zero,
            dini: 0.0,
        }
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        Self::new(ModulusKind::Power { scale, exponent })
    }

    pub fn inverse_log(scale: f64, exponent: f64) -> Result<Self> {
        Self::new(ModulusKind::InverseLog { scale, exponent })
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    /// Cached `‖ω‖_Dini`.
    pub fn dini(&self) -> f64 {
        self.dini
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.kind {
            ModulusKind::Zero => 0.0,
            ModulusKind::Power { scale, exponent } => scale * t.powf(*exponent),
            ModulusKind::InverseLog { scale, exponent } => {
                if t == 0.0 {
                    0.0
                } else {
                    scale * (1.0 + (-t.ln()).max(0.0)).powf(-exponent)
                }
            }
            ModulusKind::Custom(f) => f(t),
        }
    }

    /// `ω(e^{-u})` for `u ≥ 0`, accurate when `e^{-u}` underflows.
    pub fn eval_log(&self, u: f64) -> f64 {
        match &self.kind {
            ModulusKind::Zero => 0.0,
            ModulusKind::Power { scale, exponent } => scale * (-exponent * u).exp(),
            ModulusKind::InverseLog { scale, exponent } => scale * (1.0 + u.max(0.0)).powf(-exponent),
            ModulusKind::Custom(f) => f((-u).exp()),
        }
    }

    /// Spot check of `ω(s+t) ≤ ω(s) + ω(t)` on the sample grid with `s+t ≤ 1`.
    pub fn is_subadditive(&self) -> bool {
        let grid = spot_grid();
        grid.iter().all(|&s| {
            grid.iter()
                .filter(|&&t| s + t <= 1.0)
                .all(|&t| self.eval(s + t) <= (self.eval(s) + self.eval(t)) * (1.0 + 1e-12))
        })
    }
}

/// Gauss–Legendre nodes and weights on `[-1,1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

const PANELS: usize = 60;
const ORDER: usize = 24;

/// `∫_0^∞ g(u) du` after the substitution `v = 1/(1+u)`, on dyadic panels in
/// `v` down to `2^{-60}`. Returns `+∞` when the tail panels fail a Cauchy test.
fn log_line_integral(g: impl Fn(f64) -> f64) -> f64 {
    let nodes = gauss_legendre(ORDER);
    let mut panels = Vec::with_capacity(PANELS);
    for j in 0..PANELS {
        let (a, b) = (2f64.powi(-(j as i32) - 1), 2f64.powi(-(j as i32)));
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        let s: f64 = nodes
            .iter()
            .map(|&(x, w)| {
                let v = mid + half * x;
                w * g(1.0 / v - 1.0) / (v * v)
            })
            .sum();
        panels.push(s * half);
    }
    let total: f64 = panels.iter().sum();
    let tail: f64 = panels[PANELS - 10..].iter().sum();
    if !total.is_finite() || tail.abs() > 1e-9 * (1.0 + total.abs()) {
        f64::INFINITY
    } else {
        total
    }
}

/// `‖ω‖_{Dini(a)} = ∫_0^1 ω(t)^a dt/t`.
pub fn dini_norm(omega: &ModulusOfContinuity, a: f64) -> f64 {
    assert!(a > 0.0, "Dini exponent must be positive");
    if matches!(omega.kind, ModulusKind::Zero) {
        return 0.0;
    }
    log_line_integral(|u| omega.eval_log(u).powf(a))
}

/// `‖ω‖_{log-Dini} = ∫_0^1 ω(t)(1 + log(1/t)) dt/t`.
pub fn log_dini_norm(omega: &ModulusOfContinuity) -> f64 {
    if matches!(omega.kind, ModulusKind::Zero) {
        return 0.0;
    }
    log_line_integral(|u| omega.eval_log(u) * (1.0 + u))
}
