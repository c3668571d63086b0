//! Shared oracles for integration tests.
#![allow(dead_code)]

pub mod dd;

use ifbm::HurstParams;

pub fn hp(h: f64) -> HurstParams {
    HurstParams::new(h).unwrap()
}

/// Same closed form as `kernels::gamma`, evaluated in double-double so the
/// second differences taken by tests are not swamped by rounding.
pub fn gamma_dd(p: &HurstParams, t: f64, s: f64) -> f64 {
    use dd::Dd;
    if t == 0.0 || s == 0.0 {
        return 0.0;
    }
    let q = p.q();
    let two_q1 = Dd::from(2.0) * (Dd::from(q) - Dd::from(1.0));
    let c = Dd::from(1.0) / (Dd::from(q) * two_q1);
    let pw = |x: f64, e: f64| Dd::from(x.abs()).powf(e);
    let (a, b) = (t.abs(), s.abs());
    if (t > 0.0) == (s > 0.0) {
        let lin = (Dd::from(b) * pw(a, q - 1.0) + Dd::from(a) * pw(b, q - 1.0)) / two_q1;
        let d = Dd::from(a) - Dd::from(b);
        let diff = if d.hi == 0.0 { Dd::from(0.0) } else { d.abs().powf(q) };
        (lin - c * (pw(a, q) + pw(b, q) - diff)).hi
    } else {
        let lin = (Dd::from(b) * pw(a, q - 1.0) + Dd::from(a) * pw(b, q - 1.0)) / two_q1;
        let sum = (Dd::from(a) + Dd::from(b)).powf(q);
        (-lin + c * (sum - pw(a, q) - pw(b, q))).hi
    }
}

/// `∂_t E y(t) y(s) = E b(t) y(s)` by central difference of [`gamma_dd`].
pub fn gamma_dt(p: &HurstParams, t: f64, s: f64) -> f64 {
    let h = 1e-5;
    (gamma_dd(p, t + h, s) - gamma_dd(p, t - h, s)) / (2.0 * h)
}

/// Sample covariance of `data[i][a]` across `i`, plus per-entry standard
/// errors from the fourth-moment estimate.
pub fn covariance_with_se(data: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = data.len() as f64;
    let d = data[0].len();
    let mean: Vec<f64> = (0..d).map(|a| data.iter().map(|r| r[a]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    let mut se = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in a..d {
            let prods: Vec<f64> = data.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).collect();
            let c = prods.iter().sum::<f64>() / n;
            let v = prods.iter().map(|x| (x - c) * (x - c)).sum::<f64>() / (n - 1.0);
            cov[a][b] = c;
            cov[b][a] = c;
            se[a][b] = (v / n).sqrt();
            se[b][a] = se[a][b];
        }
    }
    (cov, se)
}
