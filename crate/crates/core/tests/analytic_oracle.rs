//! Comparison-theorem numerics against independent oracles.

use ifbm::analytic::{
    beta_q, fm_monotonicity_mc, psi_inequality_report, r2_integrand, r_terms, slepian_gap, TimeChangePair,
};
use ifbm::generator::plan_fbm;
use ifbm::kernels::gamma;
use ifbm::montecarlo::fbm_argmax;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::hp;

const PAIRS: [(f64, f64); 4] = [(0.7, 0.6), (0.9, 0.55), (0.8, 0.6), (0.95, 0.51)];

fn pair(h: f64, h0: f64) -> TimeChangePair {
    TimeChangePair::new(h, h0).unwrap()
}

#[test]
fn beta_is_time_changed_gamma() {
    for (h, h0) in PAIRS {
        let pr = pair(h, h0);
        let p = hp(h);
        for (t, s) in [(1.0, 0.3), (1.0, 0.9), (0.7, 0.05), (2.0, 1.1)] {
            let oracle = pr.q * gamma(&p, f64::powf(t, pr.theta), f64::powf(s, pr.theta));
            let closed = beta_q(&pr, t, s).unwrap();
            assert!((closed - oracle).abs() < 1e-10, "H={h} H0={h0} t={t} s={s}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn identity_time_change_is_scaled_gamma() {
    for h in [0.55, 0.7, 0.9] {
        let pr = pair(h, h);
        for (t, s) in [(1.0, 0.3), (0.4, 0.1), (3.0, 2.0)] {
            let scaled = pr.q * gamma(&hp(h), t, s);
            assert!((beta_q(&pr, t, s).unwrap() - scaled).abs() < 1e-13 * scaled.abs().max(1.0));
        }
    }
}

#[test]
fn slepian_gap_is_nonnegative() {
    for (h, h0) in PAIRS {
        let g = slepian_gap(&pair(h, h0), 100).unwrap();
        assert!(g.min_gap >= -1e-12, "H={h} H0={h0}: {g:?}");
    }
}

#[test]
fn gap_decomposes_into_remainders() {
    // 2[β_q - β_{q0}](1, ρ) = (q-q0)(1-ρ^θ)/(q0-1)·R1 + q0/(q0-1)·R2
    for (h, h0) in PAIRS {
        let pr = pair(h, h0);
        for rho in [0.01, 0.2, 0.5, 0.93] {
            let gap = beta_q(&pr, 1.0, rho).unwrap() - beta_q(&pr.reference(), 1.0, rho).unwrap();
            let r = r_terms(&pr, rho).unwrap();
            let y = rho.powf(pr.theta);
            let rhs = (pr.q - pr.q0) * (1.0 - y) / (pr.q0 - 1.0) * r.r1 + pr.q0 / (pr.q0 - 1.0) * r.r2;
            assert!((2.0 * gap - rhs).abs() < 1e-11, "H={h} H0={h0} rho={rho}: {} vs {rhs}", 2.0 * gap);
        }
    }
}

#[test]
fn remainders_match_high_precision_quadrature() {
    // mpmath at 30 digits.
    let pr = pair(0.8, 0.6);
    let r = r_terms(&pr, 1e-3).unwrap();
    assert!((r.r1 - 5.054_303_907_030_249e-6).abs() < 1e-15);
    assert!((r.r2 - 3.867_190_966_076_685e-6).abs() < 1e-15);
    let r = r_terms(&pr, 0.999).unwrap();
    assert!((r.r1 - 8.878_462_368_092_606e-4).abs() < 1e-15);
    assert!((r.r2 - 1.455_669_459_975_394_6e-7).abs() < 1e-15);
}

#[test]
fn remainders_are_nonnegative() {
    for (h, h0) in PAIRS {
        let pr = pair(h, h0);
        for i in 1..=1000 {
            let rho = i as f64 / 1001.0;
            let r = r_terms(&pr, rho).unwrap();
            assert!(r.r1 >= -1e-10 && r.r2 >= -1e-10, "H={h} H0={h0} rho={rho}: {r:?}");
        }
    }
}

#[test]
fn remainder_asymptotics() {
    for (h, h0) in PAIRS {
        let pr = pair(h, h0);
        let small = 1e-3;
        let y = f64::powf(small, pr.theta);
        let r1 = r_terms(&pr, small).unwrap().r1;
        assert!((r1 / (y * y * (pr.q0 - 1.0) / 2.0) - 1.0).abs() < 0.05, "H={h} H0={h0}");
        let near = 1.0 - 1e-3;
        let ybar = 1.0 - f64::powf(near, pr.theta);
        let r1 = r_terms(&pr, near).unwrap().r1;
        assert!((r1 / ybar - 1.0).abs() < 0.05, "H={h} H0={h0}");
    }
}

#[test]
fn r2_integrand_is_pointwise_nonnegative() {
    for (h, h0) in PAIRS {
        let pr = pair(h, h0);
        assert!(pr.q0 >= 3.0);
        for rho in [1e-4, 0.05, 0.3, 0.7, 0.99] {
            for i in 0..1000 {
                let alpha = pr.theta + (1.0 - pr.theta) * i as f64 / 999.0;
                let v = r2_integrand(&pr, rho, alpha);
                assert!(v >= -1e-15, "H={h} H0={h0} rho={rho} alpha={alpha}: {v}");
            }
        }
    }
}

#[test]
fn psi_check_on_uniform_density() {
    let samples: Vec<f64> = (0..20_000).map(|i| (i as f64 + 0.5) / 20_000.0).collect();
    let r = psi_inequality_report(&samples, 20).unwrap();
    assert!(r.worst_z >= 0.0, "{r:?}");
}

#[test]
fn psi_check_on_boundary_case_density() {
    // ψ(t) ∝ 1/t on (1e-3, 1) makes ψ(t)t constant, the equality case.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps: f64 = 1e-3;
    let samples: Vec<f64> = (0..100_000).map(|_| eps.powf(1.0 - rng.random::<f64>())).collect();
    let r = psi_inequality_report(&samples, 20).unwrap();
    assert!(r.worst_z >= -2.0, "{r:?}");
}

#[test]
fn psi_check_on_arcsine_law() {
    // Brownian argmax on [0, 1].
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples: Vec<f64> = (0..50_000)
        .map(|_| (std::f64::consts::FRAC_PI_2 * rng.random::<f64>()).sin().powi(2))
        .collect();
    let r = psi_inequality_report(&samples, 20).unwrap();
    assert!(r.worst_z >= -5.0, "{r:?}");
}

#[test]
fn psi_check_flags_a_violating_density() {
    // A bump in the middle breaks ψ(t) <= ψ(s)·max(s/t, (1-s)/(1-t)).
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples: Vec<f64> =
        (0..50_000).map(|i| if i % 2 == 0 { rng.random::<f64>() } else { 0.5 + 0.02 * rng.random::<f64>() }).collect();
    let r = psi_inequality_report(&samples, 20).unwrap();
    assert!(r.worst_z < -5.0, "{r:?}");
}

#[test]
fn fbm_argmax_follows_arcsine_at_half() {
    let plan = plan_fbm(hp(0.5), 512).unwrap();
    let mut g = fbm_argmax(&plan, 12, 5_000, 1).unwrap();
    g.sort_by(f64::total_cmp);
    let n = g.len() as f64;
    let arcsine = |x: f64| 2.0 / std::f64::consts::PI * x.sqrt().asin();
    // The walk puts atoms of order T^{-1/2} on both endpoints, so compare
    // the interior only.
    let d = g
        .iter()
        .enumerate()
        .filter(|&(_, &x)| (0.05..=0.95).contains(&x))
        .map(|(i, &x)| (i as f64 / n - arcsine(x)).abs().max(((i + 1) as f64 / n - arcsine(x)).abs()))
        .fold(0.0, f64::max);
    // 1% Kolmogorov critical value.
    assert!(d < 1.63 / n.sqrt(), "{d}");
}

#[test]
fn max_distribution_increases_with_h() {
    let t = fm_monotonicity_mc(&[0.6, 0.7, 0.8], &[0.25, 0.5, 1.0, 50.0], 10_000, 128, 3, 1).unwrap();
    assert!(t.violations.is_empty(), "{:?}", t.violations);
    for row in &t.cdf {
        assert!(row[3] > 0.999);
    }
    let single = fm_monotonicity_mc(&[0.7], &[0.5], 10_000, 64, 3, 1).unwrap();
    assert!(single.violations.is_empty());
}
