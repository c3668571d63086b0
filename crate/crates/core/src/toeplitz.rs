//! Symmetric positive-definite Toeplitz systems.
//!
//! [`IncrementModel`] runs the Levinson–Durbin recursion once and keeps every
//! forward predictor, i.e. the unit lower-triangular `P` and diagonal `D`
//! with `P A Pᵀ = D`. Solving is then `A⁻¹ = Pᵀ D⁻¹ P` and sampling applies
//! `P⁻¹ D^{1/2}` to white noise, both without refactorizing.

use crate::error::{Error, Result};

/// Reflection coefficients at or beyond this magnitude are treated as singular.
pub const REFLECTION_LIMIT: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementModel {
    autocov: Vec<f64>,
    reflection: Vec<f64>,
    variance: Vec<f64>,
    sqrt_variance: Vec<f64>,
    // Row n (length n) at offset n(n-1)/2 holds c_{n,j}, the weight of x_j in
    // the best linear predictor of x_n from x_0..x_{n-1}.
    rows: Vec<f64>,
}

#[inline]
fn row_offset(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Levinson–Durbin factorization of the order-`n` Toeplitz matrix `[r_{|i-j|}]`.
pub fn factorize(autocov: &[f64], n: usize) -> Result<IncrementModel> {
    if n == 0 {
        return Err(Error::InvalidParameter("Toeplitz order must be positive".into()));
    }
    if autocov.len() < n {
        return Err(Error::DimensionMismatch { expected: n, got: autocov.len() });
    }
    let r = &autocov[..n];
    if !(r[0] > 0.0) || !r[0].is_finite() {
        return Err(Error::NotPositiveDefinite { order: 0, reflection: f64::NAN });
    }

    let mut reflection = Vec::with_capacity(n);
    let mut variance = Vec::with_capacity(n);
    let mut rows = vec![0.0; row_offset(n)];
    reflection.push(0.0);
    variance.push(r[0]);

    // phi[i-1] multiplies x_{m-i} in the order-m predictor.
    let mut phi: Vec<f64> = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    for m in 1..n {
        let mut acc = r[m];
        for (i, &c) in phi.iter().enumerate() {
            acc -= c * r[m - 1 - i];
        }
        let v_prev = variance[m - 1];
        let k = acc / v_prev;
        if !(k.abs() < REFLECTION_LIMIT) {
            return Err(Error::NotPositiveDefinite { order: m, reflection: k });
        }
        next.clear();
        for i in 0..phi.len() {
            next.push(phi[i] - k * phi[phi.len() - 1 - i]);
        }
        next.push(k);
        std::mem::swap(&mut phi, &mut next);

        let v = v_prev * (1.0 - k * k);
        if !(v > 0.0) {
            return Err(Error::NotPositiveDefinite { order: m, reflection: k });
        }
        reflection.push(k);
        variance.push(v);

        let row = &mut rows[row_offset(m)..row_offset(m) + m];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = phi[m - 1 - j];
        }
    }

    let sqrt_variance = variance.iter().map(|v| v.sqrt()).collect();
    Ok(IncrementModel {
        autocov: r.to_vec(),
        reflection,
        variance,
        sqrt_variance,
        rows,
    })
}

impl IncrementModel {
    pub fn order(&self) -> usize {
        self.variance.len()
    }

    pub fn autocov(&self) -> &[f64] {
        &self.autocov
    }

    /// Reflection coefficients; entry 0 is a placeholder zero.
    pub fn reflection(&self) -> &[f64] {
        &self.reflection
    }

    /// One-step prediction-error variances `v_0 = r_0, v_1, …`.
    pub fn variances(&self) -> &[f64] {
        &self.variance
    }

    pub fn predictor_row(&self, n: usize) -> &[f64] {
        &self.rows[row_offset(n)..row_offset(n) + n]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order() {
            return Err(Error::DimensionMismatch { expected: self.order(), got: len });
        }
        Ok(())
    }

    /// Solves `[r_{|i-j|}] z = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rhs.len())?;
        let n = self.order();
        // w = D⁻¹ P rhs
        let w: Vec<f64> = (0..n)
            .map(|i| (rhs[i] - dot(self.predictor_row(i), &rhs[..i])) / self.variance[i])
            .collect();
        // z = Pᵀ w
        let mut z = w.clone();
        for i in (1..n).rev() {
            let wi = w[i];
            for (zj, &c) in z[..i].iter_mut().zip(self.predictor_row(i)) {
                *zj -= c * wi;
            }
        }
        Ok(z)
    }

    /// Maps white noise to a sequence with covariance `[r_{|i-j|}]`.
    pub fn sample(&self, noise: &[f64]) -> Result<Vec<f64>> {
        self.check_len(noise.len())?;
        let mut out = vec![0.0; noise.len()];
        self.sample_into(noise, &mut out);
        Ok(out)
    }

    pub(crate) fn sample_into(&self, noise: &[f64], out: &mut [f64]) {
        for i in 0..self.order() {
            out[i] = dot(self.predictor_row(i), &out[..i]) + self.sqrt_variance[i] * noise[i];
        }
    }

    /// Batched [`sample_into`](Self::sample_into): each predictor row is read
    /// once per batch. Results are bit-identical to sampling one at a time.
    pub(crate) fn sample_batch(&self, noise: &[Vec<f64>], out: &mut [Vec<f64>]) {
        for i in 0..self.order() {
            let row = self.predictor_row(i);
            let sd = self.sqrt_variance[i];
            for (x, e) in out.iter_mut().zip(noise) {
                x[i] = dot(row, &x[..i]) + sd * e[i];
            }
        }
    }

    /// Product with the Toeplitz matrix by direct convolution.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(toeplitz_apply(&self.autocov, x))
    }

    /// Dense lower-triangular factor `L = P⁻¹ D^{1/2}` (row-major `n × n`).
    ///
    /// Column `j` is the response of [`sample`](Self::sample) to the unit
    /// vector `e_j`, so `L Lᵀ` is the implied covariance.
    pub fn dense_factor(&self) -> Vec<f64> {
        let n = self.order();
        let mut l = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.sample_into(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                l[i * n + j] = col[i];
            }
        }
        l
    }
}

pub(crate) fn toeplitz_apply(autocov: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| (0..n).map(|j| autocov[i.abs_diff(j)] * x[j]).sum())
        .collect()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four independent accumulators; the summation order is fixed so results
    // do not depend on batch layout.
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Dense Cholesky factor of the full Toeplitz matrix, row-major lower
/// triangle. Intended as an independent check on [`factorize`].
pub fn dense_oracle(autocov: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > 1024 {
        return Err(Error::InvalidParameter(format!("dense oracle order must be in 1..=1024, got {n}")));
    }
    if autocov.len() < n {
        return Err(Error::DimensionMismatch { expected: n, got: autocov.len() });
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = autocov[i - j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { order: i, reflection: f64::NAN });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}
