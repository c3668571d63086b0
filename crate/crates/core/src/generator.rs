//! Exact generation of IFBM on integer grids.
//!
//! A unilateral path `y(0..=T)` is rebuilt from the stationary second
//! increments `η_1..η_{T-1}` and `y(1)`, where `y(1)` is split into its
//! regression on `η` plus an independent residual:
//!
//! ```text
//! y(1) = Σ z_k η_k + σ ε₀,   [μ_{i-j}] z = m,   σ² = 1/q - Σ z_k m_k
//! ```
//!
//! A bilateral path re-centres a unilateral one at a pivot `k0`, subtracting
//! the tangent `y(k0) + y'(k0)(x - k0)`. The derivative `y'(k0)` is sampled
//! jointly with `η` and `ε₀` from a second regression on the same Toeplitz
//! factorization.

use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, HurstParams};
use crate::rng::SeedTag;
use crate::toeplitz::{self, dot, IncrementModel};

/// Conditional variances below `-VARIANCE_TOL · scale` are reported as errors;
/// smaller negative values are rounding and clamp to zero.
pub const VARIANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    Unilateral,
    Bilateral,
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interval::Unilateral => "unilateral",
            Interval::Bilateral => "bilateral",
        })
    }
}

impl std::str::FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unilateral" => Ok(Interval::Unilateral),
            "bilateral" => Ok(Interval::Bilateral),
            other => Err(Error::InvalidParameter(format!(
                "interval must be 'unilateral' or 'bilateral', got '{other}'"
            ))),
        }
    }
}

/// Default pivot `⌈T/2⌉`.
pub fn default_pivot(t: usize) -> usize {
    t.div_ceil(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilateralPart {
    pub k0: usize,
    pub m_prime: Vec<f64>,
    pub z_prime: Vec<f64>,
    pub a: f64,
    pub sigma_prime: f64,
}

/// Precomputed regression coefficients for exact generation. Immutable;
/// clone it cheaply or share it by reference across workers.
#[derive(Debug, Clone)]
pub struct GenPlan {
    params: HurstParams,
    len: usize,
    model: Arc<IncrementModel>,
    m: Vec<f64>,
    z: Vec<f64>,
    sigma: f64,
    bilateral: Option<BilateralPart>,
}

fn clamp_variance(what: &'static str, value: f64, scale: f64) -> Result<f64> {
    if value < -VARIANCE_TOL * scale {
        return Err(Error::NegativeVariance { what, value });
    }
    Ok(value.max(0.0))
}

/// Plan for unilateral paths `y(0), …, y(T)`.
pub fn plan_unilateral(params: HurstParams, t: usize) -> Result<GenPlan> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!("grid length T must be at least 2, got {t}")));
    }
    let n = t - 1;
    let model = toeplitz::factorize(&kernels::mu_vec(&params, n), n)?;
    let m = kernels::m_vec(&params, t);
    let z = model.solve(&m)?;
    let explained: f64 = z.iter().zip(&m).map(|(a, b)| a * b).sum();
    let sigma2 = clamp_variance("y(1) residual", 1.0 / params.q() - explained, 1.0)?;
    Ok(GenPlan {
        params,
        len: t,
        model: Arc::new(model),
        m,
        z,
        sigma: sigma2.sqrt(),
        bilateral: None,
    })
}

/// Plan for bilateral paths on `-k0, …, T-k0`, with `y(0) = y'(0) = 0`.
pub fn plan_bilateral(params: HurstParams, t: usize, k0: usize) -> Result<GenPlan> {
    if t < 2 || k0 < 1 || k0 >= t {
        return Err(Error::InvalidParameter(format!(
            "bilateral plan needs T >= 2 and 1 <= k0 <= T-1, got T={t}, k0={k0}"
        )));
    }
    let mut plan = plan_unilateral(params, t)?;
    let q = params.q();
    let m_prime = kernels::m_prime_vec(&params, t, k0);
    let z_prime = plan.model.solve(&m_prime)?;

    // E y(1) y'(k0) = σa + Σ z_k m'_k
    let k = k0 as f64;
    let cross = params.c_q() * q * ((q - 1.0) * k.powf(q - 2.0) + 1.0 - k.powf(q - 1.0) + (k - 1.0).powf(q - 1.0));
    let z_dot_mp: f64 = plan.z.iter().zip(&m_prime).map(|(a, b)| a * b).sum();
    let sigma_a = cross - z_dot_mp;
    if plan.sigma == 0.0 {
        return Err(Error::DegeneratePivot);
    }
    let a = sigma_a / plan.sigma;

    let deriv_var = k.powf(2.0 * params.h());
    let zp_dot_mp: f64 = z_prime.iter().zip(&m_prime).map(|(a, b)| a * b).sum();
    let sp2 = clamp_variance("y'(k0) residual", deriv_var - zp_dot_mp - a * a, deriv_var)?;

    plan.bilateral = Some(BilateralPart {
        k0,
        m_prime,
        z_prime,
        a,
        sigma_prime: sp2.sqrt(),
    });
    Ok(plan)
}

impl GenPlan {
    pub fn params(&self) -> HurstParams {
        self.params
    }

    /// Number of grid steps `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn model(&self) -> &IncrementModel {
        &self.model
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bilateral(&self) -> Option<&BilateralPart> {
        self.bilateral.as_ref()
    }

    pub fn interval(&self) -> Interval {
        if self.bilateral.is_some() {
            Interval::Bilateral
        } else {
            Interval::Unilateral
        }
    }

    /// Index of the grid origin within the value vector.
    pub fn origin(&self) -> usize {
        self.bilateral.as_ref().map_or(0, |b| b.k0)
    }

    /// Grid indices covered by generated paths, in storage order.
    pub fn grid(&self) -> Vec<i64> {
        let o = self.origin() as i64;
        (0..=self.len as i64).map(|i| i - o).collect()
    }

    /// Standard normals consumed per path: `T-1` for `η`, then `ε₀`, then
    /// `ε'` for bilateral plans.
    pub fn noise_len(&self) -> usize {
        self.len + usize::from(self.bilateral.is_some())
    }

    /// Deterministic linear map from white noise to path values.
    pub fn path_from_noise(&self, noise: &[f64]) -> Result<Vec<f64>> {
        if noise.len() != self.noise_len() {
            return Err(Error::DimensionMismatch { expected: self.noise_len(), got: noise.len() });
        }
        let mut eta = vec![0.0; self.len - 1];
        self.model.sample_into(&noise[..self.len - 1], &mut eta);
        Ok(self.assemble(&eta, noise))
    }

    fn assemble(&self, eta: &[f64], noise: &[f64]) -> Vec<f64> {
        let t = self.len;
        let eps0 = noise[t - 1];
        let mut y = vec![0.0; t + 1];
        y[1] = dot(&self.z, eta) + self.sigma * eps0;
        for k in 1..t {
            y[k + 1] = 2.0 * y[k] - y[k - 1] + eta[k - 1];
        }
        if let Some(b) = &self.bilateral {
            let slope = dot(&b.z_prime, eta) + b.a * eps0 + b.sigma_prime * noise[t];
            let base = y[b.k0];
            let k0 = b.k0 as f64;
            for (i, v) in y.iter_mut().enumerate() {
                *v = *v - base - slope * (i as f64 - k0);
            }
            y[b.k0] = 0.0;
        }
        y
    }

    pub fn generate(&self, seed: SeedTag) -> IfbmPath {
        let noise = seed.normals(self.noise_len());
        let values = self.path_from_noise(&noise).expect("noise length matches plan");
        self.wrap(values, Some(seed))
    }

    /// Generates one path per tag. Output is identical to calling
    /// [`generate`](Self::generate) on each tag.
    pub fn generate_batch(&self, seeds: &[SeedTag]) -> Vec<IfbmPath> {
        let noise: Vec<Vec<f64>> = seeds.iter().map(|s| s.normals(self.noise_len())).collect();
        let mut etas = vec![vec![0.0; self.len - 1]; seeds.len()];
        self.model.sample_batch(&noise, &mut etas);
        etas.iter()
            .zip(&noise)
            .zip(seeds)
            .map(|((eta, e), &s)| self.wrap(self.assemble(eta, e), Some(s)))
            .collect()
    }

    fn wrap(&self, values: Vec<f64>, seed: Option<SeedTag>) -> IfbmPath {
        IfbmPath {
            h: self.params.h(),
            len: self.len,
            origin: self.origin(),
            interval: self.interval(),
            values,
            seed,
        }
    }

    /// Dense noise-to-path matrix, row-major `(T+1) × noise_len`.
    pub fn noise_map(&self) -> Vec<f64> {
        let cols = self.noise_len();
        let rows = self.len + 1;
        let mut out = vec![0.0; rows * cols];
        let mut e = vec![0.0; cols];
        for j in 0..cols {
            e[j] = 1.0;
            let col = self.path_from_noise(&e).expect("noise length matches plan");
            e[j] = 0.0;
            for i in 0..rows {
                out[i * cols + j] = col[i];
            }
        }
        out
    }
}

/// Exact covariance matrix `E y(i) y(j)` over the given grid, row-major.
pub fn covariance_oracle(params: &HurstParams, grid: &[i64]) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; n * n];
    for (a, &i) in grid.iter().enumerate() {
        for (b, &j) in grid.iter().enumerate() {
            out[a * n + b] = kernels::gamma(params, i as f64, j as f64);
        }
    }
    out
}

/// Convenience entry point matching [`GenPlan::generate`].
pub fn gen_unilateral(plan: &GenPlan, seed: SeedTag) -> IfbmPath {
    plan.generate(seed)
}

/// Convenience entry point for bilateral plans.
pub fn gen_bilateral(plan: &GenPlan, seed: SeedTag) -> Result<IfbmPath> {
    if plan.bilateral.is_none() {
        return Err(Error::NotBilateral);
    }
    Ok(plan.generate(seed))
}

/// One sampled path on the grid `-origin, …, T - origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfbmPath {
    pub h: f64,
    pub len: usize,
    pub origin: usize,
    pub interval: Interval,
    pub values: Vec<f64>,
    pub seed: Option<SeedTag>,
}

impl IfbmPath {
    pub fn grid_index(&self, i: usize) -> i64 {
        i as i64 - self.origin as i64
    }

    /// Writes `index,value` rows preceded by a `#` metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (master, index) = self.seed.map_or((String::new(), String::new()), |s| {
            (s.master.to_string(), s.index.to_string())
        });
        writeln!(
            w,
            "# H={},T={},interval={},k0={},seed={},sample={}",
            self.h, self.len, self.interval, self.origin, master, index
        )?;
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid_index(i), v)?;
        }
        Ok(())
    }
}

/// Exact FBM sampler on `0..=T` from its stationary unit-step increments.
#[derive(Debug, Clone)]
pub struct FbmPlan {
    params: HurstParams,
    len: usize,
    model: Arc<IncrementModel>,
}

pub fn plan_fbm(params: HurstParams, t: usize) -> Result<FbmPlan> {
    if t < 1 {
        return Err(Error::InvalidParameter("FBM grid length must be positive".into()));
    }
    let model = toeplitz::factorize(&kernels::fgn_autocov(&params, t), t)?;
    Ok(FbmPlan { params, len: t, model: Arc::new(model) })
}

impl FbmPlan {
    pub fn params(&self) -> HurstParams {
        self.params
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Paths `b(0) = 0, b(1), …, b(T)` for each tag.
    pub fn generate_batch(&self, seeds: &[SeedTag]) -> Vec<Vec<f64>> {
        let noise: Vec<Vec<f64>> = seeds.iter().map(|s| s.normals(self.len)).collect();
        let mut incs = vec![vec![0.0; self.len]; seeds.len()];
        self.model.sample_batch(&noise, &mut incs);
        incs.into_iter()
            .map(|inc| {
                let mut b = Vec::with_capacity(self.len + 1);
                let mut acc = 0.0;
                b.push(0.0);
                for d in inc {
                    acc += d;
                    b.push(acc);
                }
                b
            })
            .collect()
    }
}
