//! Closed-form covariances of integrated fractional Brownian motion (IFBM).
//!
//! The FBM normalization is `E|b(x) - b(y)|^2 = |x - y|^{2H}`, so that
//! `y(x) = ∫_0^x b(s) ds` has `E y(1)^2 = 1/q` with `q = 2H + 2`.
//!
//! Every kernel here is a finite difference of a power `|x|^p`. For large
//! arguments the differences cancel catastrophically, so [`stencil_sum`]
//! switches to the binomial expansion of `(x + j)^p` around the centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Similarity parameter `H` together with the derived exponent `q = 2H + 2`
/// and constant `c_q = 1 / (2q(q - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstParams {
    h: f64,
}

impl HurstParams {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Hurst parameter must lie in (0, 1), got {h}"
            )));
        }
        Ok(Self { h })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn q(&self) -> f64 {
        2.0 * self.h + 2.0
    }

    #[inline]
    pub fn c_q(&self) -> f64 {
        let q = self.q();
        1.0 / (2.0 * q * (q - 1.0))
    }

    /// Self-similarity order of IFBM, `1 + H`.
    #[inline]
    pub fn order(&self) -> f64 {
        1.0 + self.h
    }
}

impl TryFrom<f64> for HurstParams {
    type Error = Error;

    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<HurstParams> for f64 {
    fn from(p: HurstParams) -> f64 {
        p.h
    }
}

const SECOND_DIFF: [(i64, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
const THIRD_DIFF: [(i64, f64); 4] = [(-2, 1.0), (-1, -3.0), (0, 3.0), (1, -1.0)];
const FOURTH_DIFF: [(i64, f64); 5] = [(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)];

/// `Σ_j w_j |x + j|^p`, or `Σ_j w_j sgn(x + j)|x + j|^p` when `signed`.
///
/// `sgn(0) = 0`. Requires `p > 0`.
pub(crate) fn stencil_sum(p: f64, x: f64, stencil: &[(i64, f64)], signed: bool) -> f64 {
    let reach = stencil.iter().map(|&(j, _)| j.unsigned_abs()).max().unwrap_or(0) as f64;
    if reach == 0.0 || x.abs() < 4.0 * reach {
        return stencil
            .iter()
            .map(|&(j, w)| {
                let u = x + j as f64;
                let v = w * u.abs().powf(p);
                if signed {
                    v * sign(u)
                } else {
                    v
                }
            })
            .sum();
    }

    // Mirror to x > 0: |x + j| = |(-x) + (-j)|, and the sign flips with it.
    let (x, flip) = if x < 0.0 { (-x, -1.0) } else { (x, 1.0) };
    let outer = if signed && flip < 0.0 { -1.0 } else { 1.0 };

    let inv = 1.0 / x;
    let abs_weight: f64 = stencil.iter().map(|&(_, w)| w.abs()).sum();
    let mut binom = 1.0;
    let mut inv_pow = 1.0;
    let mut reach_pow = 1.0;
    let mut acc = 0.0;
    for n in 0..200u32 {
        if n > 0 {
            binom *= (p - f64::from(n) + 1.0) / f64::from(n);
            inv_pow *= inv;
            reach_pow *= reach * inv;
        }
        let moment: f64 = stencil
            .iter()
            .map(|&(j, w)| w * (flip * j as f64).powi(n as i32))
            .sum();
        acc += binom * moment * inv_pow;
        let bound = binom.abs() * abs_weight * reach_pow;
        if bound == 0.0 || (n > 4 && bound <= 1e-17 * acc.abs()) {
            break;
        }
    }
    outer * x.powf(p) * acc
}

#[inline]
fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Autocovariance `μ_k = E η_j η_{j+k}` of the second increments
/// `η_k = y(k-1) - 2y(k) + y(k+1)`.
pub fn mu(p: &HurstParams, k: i64) -> f64 {
    let k = k.unsigned_abs() as f64;
    p.c_q() * stencil_sum(p.q(), k, &FOURTH_DIFF, false)
}

/// `μ_0, …, μ_{n-1}`.
pub fn mu_vec(p: &HurstParams, n: usize) -> Vec<f64> {
    (0..n as i64).map(|k| mu(p, k)).collect()
}

/// `m_k = E y(1) η_k` for `k = 1, …, T-1`.
pub fn m_vec(p: &HurstParams, t: usize) -> Vec<f64> {
    assert!(t >= 2, "grid length must be at least 2");
    let q = p.q();
    (1..t)
        .map(|k| {
            let k = k as f64;
            p.c_q() * (q * stencil_sum(q - 1.0, k, &SECOND_DIFF, false) + stencil_sum(q, k, &THIRD_DIFF, false))
        })
        .collect()
}

/// `m'_k = E y'(k0) η_k = E b(k0) η_k` for `k = 1, …, T-1`.
pub fn m_prime_vec(p: &HurstParams, t: usize, k0: usize) -> Vec<f64> {
    assert!(k0 >= 1 && k0 < t, "pivot must satisfy 1 <= k0 <= T-1");
    let q = p.q();
    let scale = q * p.c_q();
    (1..t)
        .map(|k| {
            let own = stencil_sum(q - 1.0, k as f64, &SECOND_DIFF, false);
            let pivot = stencil_sum(q - 1.0, k0 as f64 - k as f64, &SECOND_DIFF, true);
            scale * (own + pivot)
        })
        .collect()
}

/// IFBM covariance `E y(t) y(s)` for real `t`, `s` of any sign.
pub fn gamma(p: &HurstParams, t: f64, s: f64) -> f64 {
    let q = p.q();
    let c = p.c_q();
    if t == 0.0 || s == 0.0 {
        return 0.0;
    }
    if (t > 0.0) == (s > 0.0) {
        let (t, s) = (t.abs(), s.abs());
        (s * t.powf(q - 1.0) + t * s.powf(q - 1.0)) / (2.0 * (q - 1.0))
            - c * (t.powf(q) + s.powf(q) - (t - s).abs().powf(q))
    } else {
        let (a, s) = (t.abs(), s.abs());
        -(s * a.powf(q - 1.0) + a * s.powf(q - 1.0)) / (2.0 * (q - 1.0))
            + c * ((a + s).powf(q) - a.powf(q) - s.powf(q))
    }
}

/// FBM covariance `E b(t) b(s)`.
pub fn fbm_cov(p: &HurstParams, t: f64, s: f64) -> f64 {
    let a = 2.0 * p.h();
    0.5 * (t.abs().powf(a) + s.abs().powf(a) - (t - s).abs().powf(a))
}

/// Autocovariance of unit-step FBM increments (fractional Gaussian noise).
pub fn fgn_autocov(p: &HurstParams, n: usize) -> Vec<f64> {
    let a = 2.0 * p.h();
    (0..n)
        .map(|k| 0.5 * stencil_sum(a, k as f64, &SECOND_DIFF, false))
        .collect()
}
