//! Sparsity and texture measures of intensity matrices.

mod matrix;
mod network;
mod report;

pub use matrix::{
    band_average, band_bounds, band_profiles, median, sparsity_s, uniformize, untexture, BandProfile, BandWeight,
    Bounds, IntensityMatrix, WeightKind, WeightProfile,
};
pub use network::{network_average, network_average_detailed, solve_strip, Network, NetworkAverage, StripSolution};
pub use report::{intensity_matrix, measure_report, measure_report_for, MeasureOptions, MeasureReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GReport {
    pub g_c: f64,
    pub g_s: f64,
    pub g: f64,
    pub avg_a: f64,
    pub avg_s: f64,
}

pub fn g_report(x: &IntensityMatrix, w: &BandWeight, x_avg_inf: f64) -> Result<GReport> {
    if !(x_avg_inf > 0.0) {
        return Err(Error::Domain(format!("x_avg_inf must be positive (got {x_avg_inf})")));
    }
    let avg_a = band_average(x, w)?;
    if avg_a == 0.0 {
        return Err(Error::Degenerate("algebraic band average vanishes".into()));
    }
    let avg_s = network_average(x, w)?;
    let g_s = avg_s / avg_a;
    let g_c = avg_a / x_avg_inf;
    Ok(GReport { g_c, g_s, g: avg_s / x_avg_inf, avg_a, avg_s })
}

/// First minimum of the 3-point smoothed mean bandprofile, in level units.
/// A point counts only if it is the lowest within `±3` offsets, which
/// skips single-sample noise dips.
pub fn band_cutoff(profile: &BandProfile) -> Result<f64> {
    let m = &profile.mean;
    if m.len() < 3 {
        return Err(Error::Domain("band cutoff needs at least 3 offsets".into()));
    }
    let k = m.len();
    let smooth: Vec<f64> = (0..k)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(k - 1);
            m[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    const HALF: usize = 3;
    for i in 1..k - 1 {
        let lo = i.saturating_sub(HALF);
        let hi = (i + HALF).min(k - 1);
        if hi - i < HALF {
            break;
        }
        if smooth[lo..=hi].iter().all(|&v| smooth[i] <= v) && smooth[i] < smooth[lo] {
            return Ok(profile.r[i] as f64);
        }
    }
    Err(Error::Degenerate("mean bandprofile has no interior minimum".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrhResult {
    /// `min{1, raw}`.
    pub value: f64,
    /// `g · exp√(ln b · ln(1/g))`.
    pub raw: f64,
}

/// Variable-range-hopping lift of a typical-element estimate.
pub fn vrh_correct(g: f64, b: f64) -> Result<VrhResult> {
    if !(g > 0.0) || !(b >= 1.0) {
        return Err(Error::Domain(format!("vrh needs g > 0 and b >= 1 (got g = {g}, b = {b})")));
    }
    if g > 1.0 {
        log::warn!("vrh_correct called with g = {g} > 1; returned unchanged");
        return Ok(VrhResult { value: g, raw: g });
    }
    let raw = g * (b.ln() * (1.0 / g).ln()).sqrt().exp();
    Ok(VrhResult { value: raw.min(1.0), raw })
}

/// Weak-localization correction `[1 − ρ ln(2/ρ)] g_c`, `ρ = Δ₀/Δ_R`.
pub fn gc_weak_localization(gc_classical: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Domain(format!("delta0/delta_R must lie in (0, 1) (got {ratio})")));
    }
    let factor = 1.0 - ratio * (2.0 / ratio).ln();
    if factor < 0.0 {
        log::warn!("weak-localization factor {factor} negative at ratio {ratio}; clamped to 0");
        return Ok(0.0);
    }
    Ok(factor * gc_classical)
}

/// `g_s ≈ (1/ħ)^{6−4α} u²`.
pub fn gs_theory(u: f64, hbar_eff: f64, alpha: f64) -> f64 {
    hbar_eff.recip().powf(6.0 - 4.0 * alpha) * u * u
}
