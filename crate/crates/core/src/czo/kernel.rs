//! Translation-invariant bilinear kernels `K(x,y,z) = k(x-y, x-z)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::modulus::ModulusOfContinuity;
use crate::dyadic::Geometry;
use crate::error::{Error, Result};

/// Largest displacement table kept in memory, in entries.
const TABLE_LIMIT: usize = 1 << 22;
const CONSTRUCTION_SAMPLES: usize = 4000;
const CONSTRUCTION_SEED: u64 = 0x5eed_4b65_726e_656c;

#[derive(Clone, Debug, PartialEq)]
pub enum KernelKind {
    Zero,
    /// `A φ(x-y) φ(x-z)` with `φ(t) = (1 - |t|²/a²)³₊`.
    SmoothTensor { amplitude: f64, radius: f64 },
    /// `A Ω(x-y, x-z) / (|x-y| + |x-z|)^{2n}` with the odd Hölder profile
    /// `Ω = sgn(s)|s|^δ`, `s = Σ_d (x_d-y_d + x_d-z_d) / (√n (|x-y|+|x-z|))`.
    Homogeneous { amplitude: f64, delta: f64 },
}

type TableCache = Arc<Mutex<HashMap<u32, Arc<Vec<f64>>>>>;

#[derive(Clone, Debug)]
pub struct Kernel {
    kind: KernelKind,
    dim: usize,
    c_k: f64,
    tau: f64,
    modulus: ModulusOfContinuity,
    exponents: (f64, f64, f64),
    norm_bound: f64,
    tables: TableCache,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn bump(t2: f64, a2: f64) -> f64 {
    let s = 1.0 - t2 / a2;
    if s > 0.0 {
        s * s * s
    } else {
        0.0
    }
}

impl Kernel {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Kernel {
            kind: KernelKind::Zero,
            dim,
            c_k: 0.0,
            tau: 0.5,
            modulus: ModulusOfContinuity::zero(),
            exponents: (2.0, 2.0, 1.0),
            norm_bound: 0.0,
            tables: Default::default(),
        })
    }

    pub fn smooth_tensor(dim: usize, amplitude: f64, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(amplitude > 0.0 && radius > 0.0 && amplitude.is_finite() && radius.is_finite()) {
            return Err(Error::Kernel("smooth tensor kernel needs amplitude, radius > 0".into()));
        }
        let n = dim as f64;
        let c_k = amplitude * (2.0 * radius).powi(2 * dim as i32);
        // |φ'| ≤ 1.7173/a; the x-difference moves both factors, so four such terms.
        // Nonzero differences need max(|x-y|,|x-z|) < 2a; inside the base the sum
        // of distances is at most 2√n.
        let reach = (4.0 * radius).min(2.0 * n.sqrt());
        let lip = 6.87 * amplitude / radius * reach.powi(2 * dim as i32 + 1);
        let mut l1: f64 = 0.0;
        for k in 2..=10u32 {
            let g = Geometry::new(dim, k)?;
            let h = g.cell_side();
            let m = (radius / h).ceil() as i64;
            let r1 = if dim == 2 { m } else { 0 };
            let mut s = 0.0;
            for j in -r1..=r1 {
                for i in -m..=m {
                    s += bump(((i * i + j * j) as f64) * h * h, radius * radius);
                }
            }
            l1 = l1.max(s * g.cell_volume());
        }
        let k = Kernel {
            kind: KernelKind::SmoothTensor { amplitude, radius },
            dim,
            c_k,
            tau: 0.5,
            modulus: ModulusOfContinuity::power(lip, 1.0)?,
            exponents: (2.0, 2.0, 1.0),
            norm_bound: amplitude * l1 * l1,
            tables: Default::default(),
        };
        k.verify_samples(CONSTRUCTION_SAMPLES, CONSTRUCTION_SEED)?;
        Ok(k)
    }

    pub fn homogeneous(dim: usize, amplitude: f64, delta: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(amplitude > 0.0 && amplitude.is_finite() && delta > 0.0 && delta <= 1.0) {
            return Err(Error::Kernel("homogeneous kernel needs amplitude > 0, delta in (0,1]".into()));
        }
        let n = dim as f64;
        let e = 2 * dim as i32;
        let c = amplitude
            * (2f64.powf(1.0 - delta) * 10f64.powf(delta) * 4f64.powi(e)
                + 4.0 * n * 4f64.powi(e + 1) * 2f64.powf(delta - 1.0));
        let k = Kernel {
            kind: KernelKind::Homogeneous { amplitude, delta },
            dim,
            c_k: amplitude,
            tau: 0.5,
            modulus: ModulusOfContinuity::power(c, delta)?,
            exponents: (2.0, 2.0, 1.0),
            norm_bound: amplitude,
            tables: Default::default(),
        };
        k.verify_samples(CONSTRUCTION_SAMPLES, CONSTRUCTION_SEED)?;
        Ok(k)
    }

    /// Replaces the declared `L^{q1} × L^{q2} → L^q` norm bound.
    pub fn with_norm_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::Kernel("norm bound must be finite and >= 0".into()));
        }
        self.norm_bound = bound;
        Ok(self)
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size_constant(&self) -> f64 {
        self.c_k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn modulus(&self) -> &ModulusOfContinuity {
        &self.modulus
    }

    pub fn exponents(&self) -> (f64, f64, f64) {
        self.exponents
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `‖T‖ + C_K + ‖ω‖_Dini`, the scale every operator inequality carries.
    pub fn operator_scale(&self) -> f64 {
        self.norm_bound + self.c_k + self.modulus.dini()
    }

    pub fn is_zero(&self) -> bool {
        self.kind == KernelKind::Zero
    }

    /// Distance beyond which `K` vanishes in either variable.
    pub fn support_radius(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Zero => Some(0.0),
            KernelKind::SmoothTensor { radius, .. } => Some(radius),
            KernelKind::Homogeneous { .. } => None,
        }
    }

    /// `k(a, b)` with `a = x - y`, `b = x - z`.
    pub fn eval_displacement(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Zero => 0.0,
            KernelKind::SmoothTensor { amplitude, radius } => {
                let r2 = radius * radius;
                amplitude * bump(a.iter().map(|t| t * t).sum(), r2) * bump(b.iter().map(|t| t * t).sum(), r2)
            }
            KernelKind::Homogeneous { amplitude, delta } => {
                let r = norm(a) + norm(b);
                if r == 0.0 {
                    return 0.0;
                }
                let n = a.len() as f64;
                let s: f64 = a.iter().zip(b).map(|(p, q)| p + q).sum::<f64>() / (n.sqrt() * r);
                let omega = s.signum() * s.abs().powf(delta);
                amplitude * omega / r.powi(2 * a.len() as i32)
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let a: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
        let b: Vec<f64> = x.iter().zip(z).map(|(p, q)| p - q).collect();
        self.eval_displacement(&a, &b)
    }

    /// Checks the size bound and the three-difference smoothness bound on
    /// random triples in `[0,1]^n`.
    pub fn verify_samples(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.dim;
        let support = self.support_radius().unwrap_or(f64::INFINITY);
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen::<f64>()).collect() };
        for i in 0..samples {
            let x = point(&mut rng);
            let mut y = point(&mut rng);
            let mut z = point(&mut rng);
            // Half the samples concentrate near the support where differences matter.
            if i % 2 == 0 && support.is_finite() {
                for d in 0..n {
                    y[d] = x[d] + (rng.gen::<f64>() - 0.5) * 2.2 * support;
                    z[d] = x[d] + (rng.gen::<f64>() - 0.5) * 2.2 * support;
                }
            }
            let dxy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
            let dxz: Vec<f64> = x.iter().zip(&z).map(|(p, q)| p - q).collect();
            let r = norm(&dxy) + norm(&dxz);
            if r < 1e-9 {
                continue;
            }
            let k0 = self.eval(&x, &y, &z);
            let size = self.c_k / r.powi(2 * n as i32);
            if k0.abs() > size * (1.0 + 1e-9) {
                return Err(Error::Kernel(format!("size bound fails at sample {i}: |K| = {k0}, bound {size}")));
            }
            let hmax = self.tau * norm(&dxy).max(norm(&dxz));
            let dir: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let scale = hmax * rng.gen::<f64>() / norm(&dir).max(1e-300);
            let h: Vec<f64> = dir.iter().map(|d| d * scale).collect();
            let shift = |p: &[f64]| -> Vec<f64> { p.iter().zip(&h).map(|(a, b)| a + b).collect() };
            let diff = (self.eval(&shift(&x), &y, &z) - k0).abs()
                + (self.eval(&x, &shift(&y), &z) - k0).abs()
                + (self.eval(&x, &y, &shift(&z)) - k0).abs();
            let bound = self.modulus.eval(norm(&h) / r) / r.powi(2 * n as i32);
            if diff > bound * (1.0 + 1e-9) + 1e-12 * size {
                return Err(Error::Kernel(format!(
                    "smoothness bound fails at sample {i}: difference {diff}, bound {bound}"
                )));
            }
        }
        Ok(())
    }

    /// Values `k(a h, b h)` for integer displacement vectors with entries in
    /// `-(N-1)..=N-1`, flattened with the first component fastest; `None` when
    /// the table would exceed the memory limit.
    pub(crate) fn table(&self, geom: &Geometry) -> Option<Arc<Vec<f64>>> {
        let n = geom.dim();
        let width = 2 * geom.side() - 1;
        let len = width.checked_pow(2 * n as u32)?;
        if len > TABLE_LIMIT {
            return None;
        }
        let mut cache = self.tables.lock().expect("kernel table lock");
        if let Some(t) = cache.get(&geom.resolution()) {
            return Some(t.clone());
        }
        let h = geom.cell_side();
        let off = geom.side() as i64 - 1;
        let mut values = vec![0.0; len];
        let mut idx = [0i64; 4];
        for (flat, v) in values.iter_mut().enumerate() {
            let mut r = flat;
            for slot in idx.iter_mut().take(2 * n) {
                *slot = (r % width) as i64 - off;
                r /= width;
            }
            let a: Vec<f64> = idx[..n].iter().map(|&c| c as f64 * h).collect();
            let b: Vec<f64> = idx[n..2 * n].iter().map(|&c| c as f64 * h).collect();
            *v = self.eval_displacement(&a, &b);
        }
        let t = Arc::new(values);
        cache.insert(geom.resolution(), t.clone());
        Some(t)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::Kernel(format!("dimension {dim} not in {{1,2}}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_kernels_pass_their_own_samples() {
        for dim in [1, 2] {
            let s = Kernel::smooth_tensor(dim, 1.0, 0.25).unwrap();
            s.verify_samples(20_000, 7).unwrap();
            assert!(s.modulus().is_subadditive());
            let h = Kernel::homogeneous(dim, 1.0, 0.5).unwrap();
            h.verify_samples(20_000, 9).unwrap();
        }
    }

    #[test]
    fn homogeneous_kernel_is_odd() {
        let k = Kernel::homogeneous(1, 1.0, 0.5).unwrap();
        let v = k.eval_displacement(&[0.1], &[0.3]);
        let w = k.eval_displacement(&[-0.1], &[-0.3]);
        assert!(v > 0.0 && (v + w).abs() < 1e-12);
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let g = Geometry::new(1, 4).unwrap();
        let k = Kernel::smooth_tensor(1, 2.0, 0.3).unwrap();
        let t = k.table(&g).unwrap();
        let h = g.cell_side();
        let w = 2 * g.side() - 1;
        let (a, b) = (3i64, -2i64);
        let flat = (a + 15) as usize + (b + 15) as usize * w;
        assert_eq!(t[flat], k.eval_displacement(&[a as f64 * h], &[b as f64 * h]));
    }
}
