//! Level-spacing, intensity and element-size statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::measures::{BandWeight, IntensityMatrix};
use crate::quantum::{EigenSolution, FMatrix};

/// Bounds on the fitted Brody parameter.
pub const Q_RANGE: (f64, f64) = (-0.2, 1.2);

/// Spacings `S_n = (E_{n+1} − E_n)/Δ₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub values: Vec<f64>,
}

pub fn spacings(eigenvalues: &[f64], delta0: f64) -> Result<SpacingSample> {
    if eigenvalues.len() < 10 {
        return Err(Error::Domain(format!("need at least 10 levels (got {})", eigenvalues.len())));
    }
    if !(delta0 > 0.0) {
        return Err(Error::Domain(format!("delta0 must be positive (got {delta0})")));
    }
    if let Some(i) = eigenvalues.windows(2).position(|w| !(w[1] >= w[0])) {
        return Err(Error::Unsorted(i + 1));
    }
    Ok(SpacingSample { values: eigenvalues.windows(2).map(|w| (w[1] - w[0]) / delta0).collect() })
}

/// Measured mean spacing `(E_last − E_first)/(n − 1)` of a sorted spectrum.
pub fn mean_spacing(eigenvalues: &[f64]) -> Result<f64> {
    let n = eigenvalues.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 levels (got {n})")));
    }
    if let Some(i) = eigenvalues.windows(2).position(|w| !(w[1] >= w[0])) {
        return Err(Error::Unsorted(i + 1));
    }
    let d = (eigenvalues[n - 1] - eigenvalues[0]) / (n - 1) as f64;
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::Degenerate("all levels coincide".into()))
    }
}

/// Spacings of a solved window with quasi-degenerate pairs removed.
pub fn solution_spacings(sol: &EigenSolution, delta0: f64) -> Result<SpacingSample> {
    let mut s = spacings(&sol.eigenvalues, delta0)?;
    let drop: Vec<usize> = sol.quasi_degenerate.iter().map(|&(i, _)| i).collect();
    s.values = s.values.into_iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, v)| v).collect();
    Ok(s)
}

fn brody_b(q: f64) -> f64 {
    gamma((q + 2.0) / (q + 1.0)).powf(q + 1.0)
}

/// Cumulative Brody distribution `1 − exp(−b S^{q+1})`.
pub fn brody_cdf(s: f64, q: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    -(-brody_b(q) * s.powf(q + 1.0)).exp_m1()
}

/// Inverse of [`brody_cdf`] for `p ∈ [0, 1)`.
pub fn brody_quantile(p: f64, q: f64) -> f64 {
    (-(-p).ln_1p() / brody_b(q)).powf(1.0 / (q + 1.0))
}

pub fn brody_sample(q: f64, n: usize, rng: &mut impl Rng) -> SpacingSample {
    SpacingSample { values: (0..n).map(|_| brody_quantile(rng.random::<f64>(), q)).collect() }
}

/// Points `(x, T(x))` with `x = ln S`, `T = ln[−ln(1 − F)]`, using the
/// midpoint empirical CDF restricted to `0.05 < F < 0.95`.
pub fn brody_transform(sample: &SpacingSample) -> Vec<(f64, f64)> {
    let mut s = sample.values.clone();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .filter_map(|(i, &v)| {
            let f = (i as f64 + 0.5) / n;
            (f > 0.05 && f < 0.95 && v > 0.0).then(|| (v.ln(), (-(-f).ln_1p()).ln()))
        })
        .collect()
}

/// Brody parameter from the least-squares slope of `T(x)`.
pub fn brody_fit(sample: &SpacingSample) -> Result<f64> {
    if sample.values.len() < 200 {
        return Err(Error::Domain(format!("brody fit needs at least 200 spacings (got {})", sample.values.len())));
    }
    let pts = brody_transform(sample);
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx == 0.0 {
        return Err(Error::Degenerate("spacing sample has no spread".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok((sxy / sxx - 1.0).clamp(Q_RANGE.0, Q_RANGE.1))
}

/// Integrated piston-wall intensity `I_n = −F_nn/(2E_n)`.
pub fn intensity(f: &FMatrix) -> Vec<f64> {
    f.diagonal().iter().zip(&f.energies).map(|(d, e)| -d / (2.0 * e)).collect()
}

/// Sorted values with cumulative fractions `(i + 1)/n`.
pub fn cumulative(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

/// Kolmogorov–Smirnov distance between a sample and a reference CDF.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// KS distance of a sample from the normal law with its own mean and variance.
pub fn gaussian_ks(values: &[f64]) -> Result<f64> {
    let n = values.len() as f64;
    if values.len() < 2 {
        return Err(Error::Empty("gaussian_ks needs at least two values"));
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::Degenerate("sample has zero variance".into()));
    }
    let normal = Normal::new(mean, sd).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(ks_distance(values, |x| normal.cdf(x)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges in `ln X`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Zero elements.
    pub underflow: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.underflow + self.counts.iter().sum::<u64>()
    }
}

/// Histogram of `ln X` over the in-band elements `1 ≤ |n − m| ≤ r_max`.
pub fn element_histogram(x: &IntensityMatrix, w: &BandWeight, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Domain("histogram needs at least one bin".into()));
    }
    let wp = w.profile(x.n.saturating_sub(1))?;
    let mut logs = Vec::new();
    let mut underflow = 0;
    for r in 1..=wp.r_max() {
        for v in x.diagonal(r) {
            if v > 0.0 {
                logs.push(v.ln());
            } else {
                underflow += 1;
            }
        }
    }
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if logs.is_empty() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    Ok(log_histogram(&logs, lo, hi, bins, underflow))
}

/// Histogram of already log-transformed values on fixed edges.
pub fn log_histogram(logs: &[f64], lo: f64, hi: f64, bins: usize, underflow: u64) -> Histogram {
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &y in logs {
        let k = (((y - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[k] += 1;
    }
    Histogram { edges, counts, underflow }
}
