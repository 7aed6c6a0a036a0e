//! One-point pipeline from a solved window to the sparsity measures.

use serde::{Deserialize, Serialize};

use super::matrix::{band_profiles, sparsity_s, BandProfile, BandWeight, IntensityMatrix, WeightKind};
use super::{band_cutoff, g_report};
use crate::error::Result;
use crate::quantum::{f_matrix, window_analytics, EigenSolution};
use crate::scales::{derive_scales, BilliardParams};
use crate::stats::mean_spacing;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureOptions {
    pub weight: WeightKind,
    /// Band cutoff in level units; defaults to `Δ_R/Δ`.
    pub b_c: Option<f64>,
    /// Exponent of the boundary-intensity estimate used by `g_s` theory.
    pub alpha: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self { weight: WeightKind::Exponential, b_c: None, alpha: 1.0 }
    }
}

impl MeasureOptions {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if let Some(b) = self.b_c {
            if !(b > 0.0 && b.is_finite()) {
                v.push(format!("measures.b_c must be positive (got {b})"));
            }
        }
        if !(self.alpha.is_finite()) {
            v.push(format!("measures.alpha must be finite (got {})", self.alpha));
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub u: f64,
    pub hbar_eff: f64,
    pub dim: usize,
    pub levels: usize,
    /// Measured mean level spacing of the window.
    pub spacing: f64,
    pub b_c: f64,
    /// First minimum of the mean bandprofile, when it has one.
    pub b_c_first_minimum: Option<f64>,
    pub s: f64,
    pub g_c: f64,
    pub g_s: f64,
    pub g: f64,
    pub avg_a: f64,
    pub avg_s: f64,
    pub x_avg_inf: f64,
    pub bandprofile: BandProfile,
}

/// Intensity matrix of a solved window on its measured level spacing.
pub fn intensity_matrix(sol: &EigenSolution, p: &BilliardParams) -> Result<IntensityMatrix> {
    let f = f_matrix(sol, p);
    Ok(IntensityMatrix::from_fmatrix(&f, mean_spacing(&sol.eigenvalues)?))
}

pub fn measure_report(sol: &EigenSolution, p: &BilliardParams, opts: &MeasureOptions) -> Result<MeasureReport> {
    let x = intensity_matrix(sol, p)?;
    measure_report_for(&x, sol, p, opts)
}

pub fn measure_report_for(
    x: &IntensityMatrix,
    sol: &EigenSolution,
    p: &BilliardParams,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    let scales = derive_scales(p);
    let profile = band_profiles(x)?;
    let first = band_cutoff(&profile).ok();
    let b_c = opts.b_c.unwrap_or(scales.delta_r / x.delta0);
    let weight = BandWeight { kind: opts.weight, b_c };
    let xa = window_analytics(&sol.window, p).x_avg_inf;
    let g = g_report(x, &weight, xa)?;
    Ok(MeasureReport {
        u: scales.u,
        hbar_eff: scales.hbar_eff,
        dim: sol.dim(),
        levels: sol.len(),
        spacing: x.delta0,
        b_c,
        b_c_first_minimum: first,
        s: sparsity_s(x)?,
        g_c: g.g_c,
        g_s: g.g_s,
        g: g.g,
        avg_a: g.avg_a,
        avg_s: g.avg_s,
        x_avg_inf: xa,
        bandprofile: profile,
    })
}
