//! Closed-form kernels against quadrature and finite-difference oracles.

use ifbm::kernels::{fbm_cov, gamma, m_prime_vec, m_vec, mu, mu_vec};
use ifbm::quad::{integrate_2d, integrate_pieces};
use ifbm::toeplitz::{dense_oracle, factorize};
use ifbm::HurstParams;

mod common;
use common::{gamma_dd, gamma_dt, hp};

const H_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// E y(t) y(s) = ∫_0^t ∫_0^s E b(u) b(v) dv du, oriented integrals.
fn gamma_quadrature(p: &HurstParams, t: f64, s: f64) -> f64 {
    integrate_2d(|u, v| fbm_cov(p, u, v), 0.0, t, 0.0, s, &[0.0], 1e-11)
}

/// E b(t) y(s) = ∫_0^s E b(t) b(v) dv.
fn deriv_cross_quadrature(p: &HurstParams, t: f64, s: f64) -> f64 {
    integrate_pieces(|v| fbm_cov(p, t, v), 0.0, s, &[0.0, t], 1e-12)
}

#[test]
fn double_double_oracle_is_accurate() {
    // 30^3.6 and 2^0.5 to 30 digits (mpmath).
    let v = common::dd::Dd::from(30.0).powf(3.6);
    assert!((v.hi - 207_795.681_199_604_18).abs() < 1e-9);
    let r = common::dd::Dd::from(2.0).powf(0.5);
    assert_eq!(r.hi, std::f64::consts::SQRT_2);
    assert!((r.lo - (-9.667_293_313_452_913e-17)).abs() < 1e-28);
    let p = hp(0.37);
    for (t, s) in [(1.5, 2.5), (-3.0, 7.0), (-2.0, -9.0)] {
        assert!((gamma_dd(&p, t, s) - gamma(&p, t, s)).abs() < 1e-12);
    }
}

#[test]
fn gamma_matches_double_integral() {
    let p = hp(0.5);
    assert!((gamma_quadrature(&p, 1.0, 1.0) - 1.0 / 3.0).abs() < 1e-9);
    assert!((gamma_quadrature(&p, 2.0, 1.0) - 5.0 / 6.0).abs() < 1e-9);

    for h in [0.15, 0.3, 0.5, 0.8] {
        let p = hp(h);
        for (t, s) in [(1.0, 1.0), (2.0, 1.0), (0.7, 3.0), (-1.5, 2.0), (2.5, -0.5), (-1.0, -2.0)] {
            let oracle = gamma_quadrature(&p, t, s);
            let closed = gamma(&p, t, s);
            assert!((oracle - closed).abs() < 1e-8, "H={h} t={t} s={s}: {oracle} vs {closed}");
        }
    }
}

#[test]
fn mu_is_second_difference_of_gamma() {
    for h in H_GRID {
        let p = hp(h);
        let g = |a: i64, b: i64| gamma_dd(&p, a as f64, b as f64);
        let eta_cov = |j: i64, k: i64| {
            let mut acc = 0.0;
            for (dj, wj) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
                for (dk, wk) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
                    acc += wj * wk * g(j + dj, k + dk);
                }
            }
            acc
        };
        for j in 1..=32 {
            for k in 1..=32 {
                let oracle = eta_cov(j, k);
                assert!((mu(&p, j - k) - oracle).abs() < 1e-10, "H={h} j={j} k={k}");
            }
        }
    }
}

#[test]
fn m_vectors_match_gamma_expectations() {
    for h in H_GRID {
        let p = hp(h);
        let t = 24;
        let m = m_vec(&p, t);
        assert_eq!(m.len(), t - 1);
        for (i, &mk) in m.iter().enumerate() {
            let k = (i + 1) as f64;
            let oracle = gamma_dd(&p, 1.0, k - 1.0) - 2.0 * gamma_dd(&p, 1.0, k) + gamma_dd(&p, 1.0, k + 1.0);
            assert!((mk - oracle).abs() < 1e-6, "H={h} k={k}");
        }
        for k0 in [1, 5, 12, 23] {
            let mp = m_prime_vec(&p, t, k0);
            assert_eq!(mp.len(), t - 1);
            for (i, &v) in mp.iter().enumerate() {
                let k = (i + 1) as f64;
                let c = k0 as f64;
                let oracle = gamma_dt(&p, c, k - 1.0) - 2.0 * gamma_dt(&p, c, k) + gamma_dt(&p, c, k + 1.0);
                assert!((v - oracle).abs() < 1e-6, "H={h} k0={k0} k={k}: {v} vs {oracle}");
            }
        }
    }
}

#[test]
fn m_prime_brownian_spot_value_by_quadrature() {
    let p = hp(0.5);
    let mp = m_prime_vec(&p, 4, 1);
    let oracle = deriv_cross_quadrature(&p, 1.0, 0.0) - 2.0 * deriv_cross_quadrature(&p, 1.0, 1.0)
        + deriv_cross_quadrature(&p, 1.0, 2.0);
    assert!((mp[0] - oracle).abs() < 1e-10, "{} vs {oracle}", mp[0]);
}

#[test]
fn m_prime_has_no_reflection_symmetry() {
    let p = hp(0.3);
    let k0 = 6;
    let mp = m_prime_vec(&p, 16, k0);
    // m'_{k0-d} vs m'_{k0+d}
    let asym = (mp[k0 - 1 - 2] - mp[k0 - 1 + 2]).abs();
    assert!(asym > 1e-3);
    for (i, &v) in mp.iter().enumerate() {
        let k = (i + 1) as f64;
        let c = k0 as f64;
        let oracle = deriv_cross_quadrature(&p, c, k - 1.0) - 2.0 * deriv_cross_quadrature(&p, c, k)
            + deriv_cross_quadrature(&p, c, k + 1.0);
        assert!((v - oracle).abs() < 1e-8, "k={k}: {v} vs {oracle}");
    }
}

#[test]
fn toeplitz_matrix_is_positive_definite_up_to_512() {
    for h in H_GRID {
        let p = hp(h);
        let r = mu_vec(&p, 512);
        factorize(&r, 512).unwrap_or_else(|e| panic!("H={h}: {e}"));
        dense_oracle(&r, 512).unwrap_or_else(|e| panic!("H={h}: {e}"));
    }
}

#[test]
fn variance_of_y1_is_inverse_q() {
    for h in H_GRID {
        let p = hp(h);
        assert!((gamma(&p, 1.0, 1.0) - 1.0 / p.q()).abs() < 1e-15);
    }
}
