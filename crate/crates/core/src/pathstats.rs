//! Small-value functionals of sampled paths and their empirical distributions.
//!
//! Paths are rescaled to unit grid spacing `1/T`: a grid index `k` sits at
//! `x = k/T`, and by self-similarity values scale by `T^{-(1+H)}`. Unilateral
//! paths live on `[0, 1]`; bilateral ones on `[-k0/T, 1 - k0/T]`.
//!
//! On a grid a path can stay `<= 0` everywhere, which puts an atom at zero
//! into every statistic. Such paths are flagged so fits can exclude them.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{IfbmPath, Interval};
use crate::kernels::HurstParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    /// Rescaled maximum.
    pub m: f64,
    /// Leftmost argmax position.
    pub g: f64,
    /// Fraction of grid points strictly above zero.
    pub a_plus: f64,
    /// Rightmost zero (unilateral only).
    pub z: Option<f64>,
    /// No grid value away from the origin is positive.
    pub atom: bool,
    /// The maximum sits on a grid endpoint other than the origin.
    pub boundary: bool,
}

/// Which statistic to pull out of a [`PathStats`] row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stat {
    M,
    G,
    A,
    Z,
}

impl Stat {
    pub const ALL: [Stat; 4] = [Stat::M, Stat::G, Stat::A, Stat::Z];

    pub fn name(&self) -> &'static str {
        match self {
            Stat::M => "M",
            Stat::G => "G",
            Stat::A => "A",
            Stat::Z => "Z",
        }
    }

    /// CSV column holding this statistic.
    pub fn column(&self) -> &'static str {
        match self {
            Stat::A => "A_plus",
            other => other.name(),
        }
    }

    /// Value used for small-value fits: `|G|` for the argmax, the raw value
    /// otherwise. `None` when the statistic is undefined for the row.
    pub fn value(&self, s: &PathStats) -> Option<f64> {
        match self {
            Stat::M => Some(s.m),
            Stat::G => Some(s.g.abs()),
            Stat::A => Some(s.a_plus),
            Stat::Z => s.z,
        }
    }
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(Stat::M),
            "G" => Ok(Stat::G),
            "A" | "A_plus" => Ok(Stat::A),
            "Z" => Ok(Stat::Z),
            other => Err(Error::InvalidParameter(format!("unknown statistic '{other}' (expected M, G, A or Z)"))),
        }
    }
}

pub fn extract(path: &IfbmPath) -> Result<PathStats> {
    extract_values(&path.values, path.origin, path.len, path.h, path.interval)
}

/// [`extract`] on raw values; `values[origin]` is the grid origin and the
/// grid has `len` steps.
pub fn extract_values(values: &[f64], origin: usize, len: usize, h: f64, interval: Interval) -> Result<PathStats> {
    if values.is_empty() || len == 0 {
        return Err(Error::EmptyPath);
    }
    if values.len() != len + 1 || origin > len {
        return Err(Error::DimensionMismatch { expected: len + 1, got: values.len() });
    }
    let t = len as f64;

    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let max = values[best];
    let positive = values.iter().filter(|&&v| v > 0.0).count();
    let atom = values.iter().enumerate().all(|(i, &v)| i == origin || v <= 0.0);

    let z = match interval {
        Interval::Unilateral => Some(rightmost_zero(values) / t),
        Interval::Bilateral => None,
    };

    Ok(PathStats {
        m: max * t.powf(-(1.0 + h)),
        g: (best as f64 - origin as f64) / t,
        a_plus: positive as f64 / values.len() as f64,
        z,
        atom,
        boundary: (best == 0 || best == len) && best != origin,
    })
}

// Last sign change y(k)·y(k+1) <= 0 with k >= 1, linearly interpolated.
fn rightmost_zero(y: &[f64]) -> f64 {
    for k in (1..y.len().saturating_sub(1)).rev() {
        let (a, b) = (y[k], y[k + 1]);
        if a * b <= 0.0 {
            if a == b {
                return (k + 1) as f64;
            }
            return k as f64 + a / (a - b);
        }
    }
    0.0
}

/// Unit-grid bounds `[lo, hi]` of G for a path layout.
pub fn g_bounds(len: usize, origin: usize) -> (f64, f64) {
    let t = len as f64;
    (-(origin as f64) / t, (len - origin) as f64 / t)
}

/// Right-continuous empirical distribution function.
///
/// Atom-flagged samples are kept as a point mass at zero (their statistics
/// are all zero) and reported as [`atom_mass`](Ecdf::atom_mass).
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
    atoms: usize,
    total: usize,
}

impl Ecdf {
    pub fn new(samples: &[f64], atom_flags: Option<&[bool]>, exclude_atoms: bool) -> Result<Self> {
        if let Some(flags) = atom_flags {
            if flags.len() != samples.len() {
                return Err(Error::DimensionMismatch { expected: samples.len(), got: flags.len() });
            }
        }
        let is_atom = |i: usize| atom_flags.is_some_and(|f| f[i]);
        let total = samples.len();
        let atoms = (0..total).filter(|&i| is_atom(i)).count();
        let mut values: Vec<f64> = samples
            .iter()
            .enumerate()
            .filter(|&(i, _)| !(exclude_atoms && is_atom(i)))
            .map(|(_, &v)| v)
            .collect();
        let atom_mass = if total == 0 { 0.0 } else { atoms as f64 / total as f64 };
        if values.is_empty() {
            return Err(Error::NoData { atom_mass });
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            atoms: if exclude_atoms { atoms } else { 0 },
            total,
        })
    }

    /// Samples kept as steps (atoms removed when excluded), sorted.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms as f64 / self.total as f64
    }

    /// `P(X <= x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let steps = self.values.partition_point(|&v| v <= x);
        let atoms = if x >= 0.0 { self.atoms } else { 0 };
        (steps + atoms) as f64 / self.total as f64
    }

    /// `P(X < x)`, the left limit.
    pub fn eval_below(&self, x: f64) -> f64 {
        let steps = self.values.partition_point(|&v| v < x);
        let atoms = if x > 0.0 { self.atoms } else { 0 };
        (steps + atoms) as f64 / self.total as f64
    }

    /// Smallest `x` with `P(X <= x) >= prob`.
    pub fn quantile(&self, prob: f64) -> f64 {
        let need = (prob.clamp(0.0, 1.0) * self.total as f64).ceil() as usize;
        if need <= self.atoms && self.atoms > 0 {
            // The atom at zero covers it unless negative steps come first.
            let negatives = self.values.partition_point(|&v| v < 0.0);
            if need <= negatives {
                return self.values[need.saturating_sub(1)];
            }
            return 0.0;
        }
        let mut seen = 0;
        let mut atoms_left = self.atoms;
        for &v in &self.values {
            if atoms_left > 0 && v >= 0.0 {
                seen += atoms_left;
                atoms_left = 0;
                if seen >= need {
                    return 0.0;
                }
            }
            seen += 1;
            if seen >= need {
                return v;
            }
        }
        if atoms_left > 0 {
            return 0.0;
        }
        *self.values.last().expect("non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceProbs {
    /// `P(M < T^{-(1+H)})`
    pub p_a: f64,
    /// `P(|G| < 1/T)`
    pub p_c: f64,
    /// `P(A+ < 1/T, maximum off the far endpoints)`
    pub p_d: f64,
}

/// Persistence probabilities at horizon `t_eval` from per-path statistics.
pub fn persistence_probs(stats: &[PathStats], params: &HurstParams, t_eval: f64) -> Result<PersistenceProbs> {
    if stats.is_empty() {
        return Err(Error::NoData { atom_mass: 0.0 });
    }
    if !(t_eval >= 1.0) {
        return Err(Error::InvalidParameter(format!("evaluation horizon must be >= 1, got {t_eval}")));
    }
    let n = stats.len() as f64;
    let atoms = stats.iter().filter(|s| s.atom).count();
    let atom_mass = atoms as f64 / n;

    let x_m = t_eval.powf(-params.order());
    let p_a = if atoms == stats.len() {
        atom_mass
    } else {
        let m: Vec<f64> = stats.iter().map(|s| s.m).collect();
        let flags: Vec<bool> = stats.iter().map(|s| s.atom).collect();
        let ecdf = Ecdf::new(&m, Some(&flags), true)?;
        if x_m < ecdf.values()[0] {
            return Err(Error::OutOfSupport { x: x_m, atom_mass });
        }
        ecdf.eval_below(x_m)
    };

    let x = 1.0 / t_eval;
    let p_c = stats.iter().filter(|s| s.g.abs() < x).count() as f64 / n;
    let p_d = stats.iter().filter(|s| s.a_plus < x && !s.boundary).count() as f64 / n;
    Ok(PersistenceProbs { p_a, p_c, p_d })
}

/// Writes `sample_index,M,G,A_plus,Z,atom` rows.
pub fn write_stats_csv<'a, W, I>(mut w: W, rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a PathStats)>,
{
    writeln!(w, "{STATS_HEADER}")?;
    for (i, s) in rows {
        write_stats_row(&mut w, i, s)?;
    }
    Ok(())
}

pub const STATS_HEADER: &str = "sample_index,M,G,A_plus,Z,atom";

/// One row of [`write_stats_csv`], for streaming writers.
pub fn write_stats_row<W: Write>(mut w: W, index: u64, s: &PathStats) -> io::Result<()> {
    let z = s.z.map(|z| z.to_string()).unwrap_or_default();
    writeln!(w, "{},{},{},{},{},{}", index, s.m, s.g, s.a_plus, z, s.atom)
}
