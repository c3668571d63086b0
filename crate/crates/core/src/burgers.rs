//! Hopf construction for inviscid Burgers flow at time 1.
//!
//! With velocity potential `U` the regular Lagrangian points are where the
//! convex minorant of `U(x) + x²/2` touches it and bends. On a grid these are
//! the extreme points of the lower convex hull.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{GenPlan, IfbmPath, Interval};
use crate::montecarlo;
use crate::powerlaw::least_squares;
use crate::rng::splitmix64;

/// Relative cross-product below which three hull points count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;
pub const MIN_BOX_POINTS: usize = 10;
const BOOTSTRAP_ROUNDS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantResult {
    /// Grid indices where the minorant touches `f` and bends.
    pub vertices: Vec<usize>,
    /// Minorant slope on each segment between consecutive vertices.
    pub slopes: Vec<f64>,
}

/// Lower convex hull of `{(k, f[k])}` by a monotone chain.
pub fn convex_minorant(f: &[f64]) -> MinorantResult {
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..f.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let (ax, ay) = ((a - o) as f64, f[a] - f[o]);
            let (bx, by) = ((k - o) as f64, f[k] - f[o]);
            let cross = ax * by - ay * bx;
            // Bound on the rounding carried in from the values themselves.
            let scale = ax * (f[k].abs() + f[o].abs()) + bx * (f[a].abs() + f[o].abs());
            if cross <= COLLINEAR_TOL * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let slopes = hull.windows(2).map(|w| (f[w[1]] - f[w[0]]) / (w[1] - w[0]) as f64).collect();
    MinorantResult { vertices: hull, slopes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianPoints {
    pub minorant: MinorantResult,
    /// Vertex positions `x = k/T` relative to the origin.
    pub positions: Vec<f64>,
}

/// Regular Lagrangian points of a bilateral path, with `λ` the grid scale
/// (normally `T`).
///
/// Forms `f(k) = y(k) + k²·λ^{H-1}/2`, which is `λ^{1+H}` times the
/// physical `U(x) + x²/2` at `x = k/λ` in law.
pub fn lagrangian_points(path: &IfbmPath, scale: f64) -> Result<LagrangianPoints> {
    if path.interval != Interval::Bilateral {
        return Err(Error::NotBilateral);
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let c = 0.5 * scale.powf(path.h - 1.0);
    let f: Vec<f64> = path
        .values
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let k = path.grid_index(i) as f64;
            y + c * k * k
        })
        .collect();
    let minorant = convex_minorant(&f);
    let positions = minorant.vertices.iter().map(|&i| path.grid_index(i) as f64 / scale).collect();
    Ok(LagrangianPoints { minorant, positions })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub delta: f64,
    pub n_boxes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountFit {
    pub dim: f64,
    pub stderr: f64,
    pub counts: Vec<ScaleCount>,
}

fn check_scales(scales: &[f64], domain: (f64, f64)) -> Result<()> {
    let width = domain.1 - domain.0;
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!("empty domain ({}, {})", domain.0, domain.1)));
    }
    if scales.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 scales, got {}", scales.len())));
    }
    if let Some(d) = scales.iter().find(|&&d| !(d > 0.0 && d < width)) {
        return Err(Error::InvalidParameter(format!("scale {d} outside (0, {width})")));
    }
    Ok(())
}

/// Boxes `[lo + jδ/2, lo + jδ/2 + δ)` meeting at least one point.
pub fn count_boxes(points: &[f64], delta: f64, domain: (f64, f64)) -> usize {
    let half = 0.5 * delta;
    let last = ((domain.1 - domain.0) / half).ceil() as i64;
    let mut ids: Vec<i64> = Vec::with_capacity(2 * points.len());
    for &p in points {
        let m = ((p - domain.0) / half).floor() as i64;
        for j in [m - 1, m] {
            if (0..last).contains(&j) {
                ids.push(j);
            }
        }
    }
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// Box-counting dimension: slope of `ln N(δ)` against `ln(1/δ)` with
/// half-overlapping boxes of length `δ` tiling `domain`.
pub fn box_count_dim(points: &[f64], scales: &[f64], domain: (f64, f64)) -> Result<BoxCountFit> {
    if points.len() < MIN_BOX_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_BOX_POINTS, found: points.len() });
    }
    check_scales(scales, domain)?;
    let counts: Vec<ScaleCount> =
        scales.iter().map(|&delta| ScaleCount { delta, n_boxes: count_boxes(points, delta, domain) }).collect();
    let xs: Vec<f64> = counts.iter().map(|c| -c.delta.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.n_boxes as f64).ln()).collect();
    let (dim, stderr) = least_squares(&xs, &ys);
    Ok(BoxCountFit { dim, stderr, counts })
}

/// Octaves `2^-j`, `j = 3..=⌊log₂T⌋-3`.
pub fn default_scales(len: usize) -> Vec<f64> {
    let top = len.ilog2() as i32 - 3;
    (3..=top).map(|j| 2f64.powi(-j)).collect()
}

/// Permitted `(min δ, max δ)` for a grid of `len` steps.
pub fn scale_range(len: usize) -> (f64, f64) {
    (2f64.powi(3 - len.ilog2() as i32), 0.125)
}

pub fn validate_scales(scales: &[f64], len: usize) -> Result<()> {
    let (lo, hi) = scale_range(len);
    if len < 64 {
        return Err(Error::InvalidParameter(format!("grid of {len} steps is too short for box counting (need >= 64)")));
    }
    if scales.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 scales, got {}", scales.len())));
    }
    for &d in scales {
        if !(d >= lo * (1.0 - 1e-12) && d <= hi * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "scale {d} outside the permitted range [{lo}, {hi}] for T = {len}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerScale {
    pub delta: f64,
    /// Boxes summed over paths.
    pub n_boxes: usize,
    pub n_paths: usize,
    pub mean_log_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub dim_hat: f64,
    pub stderr: f64,
    pub bootstrap_interval: (f64, f64),
    pub bootstrap_sd: f64,
    pub per_scale: Vec<PerScale>,
    pub paths_used: usize,
    pub mean_vertices: f64,
    pub low_confidence: bool,
}

fn slope_of_means(log_counts: &[Vec<f64>], rows: &[usize], scales: &[f64]) -> f64 {
    let xs: Vec<f64> = scales.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = (0..scales.len())
        .map(|s| rows.iter().map(|&r| log_counts[r][s]).sum::<f64>() / rows.len() as f64)
        .collect();
    least_squares(&xs, &ys).0
}

/// Box-counting dimension of the regular Lagrangian points over `n` paths
/// of `plan`. `ln N(δ)` is averaged over paths before the fit; the spread
/// comes from a path bootstrap.
pub fn dim_experiment(plan: &GenPlan, n: u64, scales: &[f64], master: u64, workers: usize) -> Result<DimReport> {
    if plan.interval() != Interval::Bilateral {
        return Err(Error::NotBilateral);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    validate_scales(scales, plan.len())?;
    let t = plan.len() as f64;
    let domain = (-(plan.origin() as f64) / t, (plan.len() - plan.origin()) as f64 / t);

    let per_path: Vec<(usize, Vec<usize>)> = montecarlo::map_ordered(master, n, workers, |seeds| {
        plan.generate_batch(seeds)
            .iter()
            .map(|path| {
                let pts = lagrangian_points(path, t).expect("plan is bilateral").positions;
                (pts.len(), scales.iter().map(|&d| count_boxes(&pts, d, domain)).collect())
            })
            .collect()
    })?;

    let log_counts: Vec<Vec<f64>> =
        per_path.iter().map(|(_, c)| c.iter().map(|&k| (k as f64).ln()).collect()).collect();
    let all: Vec<usize> = (0..per_path.len()).collect();
    let dim_hat = slope_of_means(&log_counts, &all, scales);

    let per_scale: Vec<PerScale> = scales
        .iter()
        .enumerate()
        .map(|(s, &delta)| PerScale {
            delta,
            n_boxes: per_path.iter().map(|(_, c)| c[s]).sum(),
            n_paths: per_path.len(),
            mean_log_count: log_counts.iter().map(|r| r[s]).sum::<f64>() / per_path.len() as f64,
        })
        .collect();
    let xs: Vec<f64> = scales.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = per_scale.iter().map(|p| p.mean_log_count).collect();
    let stderr = least_squares(&xs, &ys).1;
    let mean_vertices = per_path.iter().map(|(v, _)| *v as f64).sum::<f64>() / per_path.len() as f64;

    let low_confidence = per_path.len() < 2;
    let (bootstrap_interval, bootstrap_sd) = if low_confidence {
        ((0.0, 1.0), f64::NAN)
    } else {
        let mut state = master ^ 0xB007_57A9;
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(&mut state));
        let m = per_path.len();
        let mut boots: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
            .map(|_| {
                let rows: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
                slope_of_means(&log_counts, &rows, scales)
            })
            .collect();
        boots.sort_by(f64::total_cmp);
        let mean = boots.iter().sum::<f64>() / boots.len() as f64;
        let sd = (boots.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt();
        let pick = |p: f64| boots[((p * (boots.len() - 1) as f64).round()) as usize];
        ((pick(0.025), pick(0.975)), sd)
    };

    Ok(DimReport {
        dim_hat,
        stderr,
        bootstrap_interval,
        bootstrap_sd,
        per_scale,
        paths_used: per_path.len(),
        mean_vertices,
        low_confidence,
    })
}
