//! Power spectrum of the piston force estimated from a spike train.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trajectory::CollisionSequence;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t_total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Number of equal-duration segments whose periodograms are averaged.
    pub segments: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { segments: 16 }
    }
}

/// `C̃(ω)` of the impulse train with parallel piston displacement.
pub fn spike_spectrum(c: &CollisionSequence, grid: &[f64]) -> Result<SpectrumEstimate> {
    spike_spectrum_with(&c.times(), &c.impulses(), c.t_total, grid, SpectrumOptions::default())
}

/// Segment-averaged periodogram of `Σ q_j δ(t − t_j)` on `[0, t_total]`.
///
/// Each segment contributes `|Σ q_j e^{iωt_j} − F̄ ∫ e^{iωt} dt|² / T_seg`
/// with the global mean force `F̄ = Σq / t_total`; removing the mean turns
/// the `ω = 0` bin into a variance estimate instead of a delta peak.
pub fn spike_spectrum_with(
    times: &[f64],
    q: &[f64],
    t_total: f64,
    grid: &[f64],
    opts: SpectrumOptions,
) -> Result<SpectrumEstimate> {
    if times.len() < 2 {
        return Err(Error::Empty("spike spectrum needs at least two collisions"));
    }
    if times.len() != q.len() {
        return Err(Error::Format(format!("{} times but {} impulses", times.len(), q.len())));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Unsorted(i + 1));
    }
    let segments = opts.segments.max(1);
    let t_seg = t_total / segments as f64;
    if !(t_seg > 0.0) {
        return Err(Error::Domain(format!("t_total {t_total} must be positive")));
    }
    let mean_force = q.iter().sum::<f64>() / t_total;
    let mut bounds = Vec::with_capacity(segments + 1);
    for k in 0..=segments {
        let edge = k as f64 * t_seg;
        bounds.push(times.partition_point(|&t| t < edge));
    }
    bounds[segments] = times.len();

    let values = grid
        .par_iter()
        .map(|&w| {
            let mut acc = 0.0;
            for k in 0..segments {
                let (lo, hi) = (bounds[k], bounds[k + 1]);
                let (mut re, mut im) = (0.0, 0.0);
                for j in lo..hi {
                    let (s, c) = (w * times[j]).sin_cos();
                    re += q[j] * c;
                    im += q[j] * s;
                }
                let a = k as f64 * t_seg;
                let b = a + t_seg;
                if w == 0.0 {
                    re -= mean_force * t_seg;
                } else {
                    let (sb, cb) = (w * b).sin_cos();
                    let (sa, ca) = (w * a).sin_cos();
                    // ∫_a^b e^{iωt} dt = (sin ωb − sin ωa)/ω + i (cos ωa − cos ωb)/ω
                    re -= mean_force * (sb - sa) / w;
                    im -= mean_force * (ca - cb) / w;
                }
                acc += (re * re + im * im) / t_seg;
            }
            acc / segments as f64
        })
        .collect();
    Ok(SpectrumEstimate { omega_grid: grid.to_vec(), values, t_total })
}

/// Weight carried by each collision in the counting estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountWeight {
    /// Count collisions, then restore units with `⟨q⟩²`.
    Unit,
    /// Sum the impulses in each window.
    Impulse,
}

/// Zero-frequency spectrum from the variance of windowed collision counts,
/// `C̃(0) ≈ Var[N(t)]/t`. Windows overlap by half.
pub fn number_variance_c0(c: &CollisionSequence, t_window: f64, weight: CountWeight) -> Result<f64> {
    let q = c.impulses();
    let times = c.times();
    let w: Vec<f64> = match weight {
        CountWeight::Unit => vec![1.0; q.len()],
        CountWeight::Impulse => q.clone(),
    };
    let est = windowed_variance(&times, &w, c.t_total, t_window)?;
    Ok(match weight {
        CountWeight::Unit => {
            let mean_q = q.iter().sum::<f64>() / q.len() as f64;
            est * mean_q * mean_q
        }
        CountWeight::Impulse => est,
    })
}

fn windowed_variance(times: &[f64], w: &[f64], t_total: f64, t_window: f64) -> Result<f64> {
    if !(t_window > 0.0) {
        return Err(Error::Domain(format!("t_window {t_window} must be positive")));
    }
    let disjoint = (t_total / t_window).floor() as usize;
    if disjoint < 100 {
        return Err(Error::Domain(format!("only {disjoint} windows fit; need at least 100")));
    }
    let mut prefix = Vec::with_capacity(w.len() + 1);
    prefix.push(0.0);
    for &x in w {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + x);
    }
    let sum_in = |a: f64, b: f64| {
        let lo = times.partition_point(|&t| t < a);
        let hi = times.partition_point(|&t| t < b);
        prefix[hi] - prefix[lo]
    };
    let stride = 0.5 * t_window;
    let n = ((t_total - t_window) / stride).floor() as usize + 1;
    let sums: Vec<f64> = (0..n)
        .map(|k| {
            let a = k as f64 * stride;
            sum_in(a, a + t_window)
        })
        .collect();
    let mean = sums.iter().sum::<f64>() / n as f64;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(var / t_window)
}
