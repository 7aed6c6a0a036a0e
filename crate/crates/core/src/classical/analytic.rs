//! Closed-form spectral content of the piston force.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::{derive_scales, BilliardParams};

/// θ-averaged impulse moments of the flat-piston train.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMoments {
    /// High-frequency plateau `⟨q²/τ⟩`.
    #[serde(rename = "C_inf")]
    pub c_plateau: f64,
    /// `⟨(q/τ)²⟩`.
    pub c0: f64,
    /// `⟨q/τ⟩²`.
    pub c_inf: f64,
    pub variance: f64,
}

pub fn analytic_moments(p: &BilliardParams) -> AnalyticMoments {
    let v = p.speed();
    let m2 = p.mass * p.mass;
    let scale = m2 * v.powi(4) / (p.lx * p.lx);
    let c0 = 0.375 * scale;
    let c_inf = 0.25 * scale;
    AnalyticMoments {
        c_plateau: 8.0 / (3.0 * PI) * m2 * v.powi(3) / p.lx,
        c0,
        c_inf,
        variance: c0 - c_inf,
    }
}

/// Ballistic comb of the undeformed box for `ω > 0`. Peaks sit at
/// `ω_n = π v n / Lx`, where the value is infinite.
pub fn comb_spectrum(omega: f64, p: &BilliardParams) -> f64 {
    let c = analytic_moments(p).c_plateau;
    if omega <= 0.0 {
        return 0.0;
    }
    let w1 = PI * p.speed() / p.lx;
    let mut n = (omega / w1).floor() as u64 + 1;
    let n0 = n;
    let mut sum = 0.0;
    loop {
        let x = omega / (w1 * n as f64);
        let term = 1.5 / n as f64 * x.powi(4) / (1.0 - x * x).sqrt();
        sum += term;
        if n > 2 * n0 && term < 1e-12 * sum {
            break;
        }
        n += 1;
    }
    c * sum
}

/// Small-frequency models of the broadened zero-frequency peak.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LowFrequencyMode {
    /// Single relaxation rate `γ`.
    Lorentzian { gamma: f64 },
    /// Lorentzian averaged over `γ_θ = v cosθ / R` (exact in ω).
    Bouncing,
    /// Small-ω logarithm, cut off below by `γ₀`.
    BouncingSmallOmega,
}

pub fn low_frequency_spectrum(omega: f64, p: &BilliardParams, mode: LowFrequencyMode) -> Result<f64> {
    if omega < 0.0 {
        return Err(Error::Domain(format!("omega {omega} < 0")));
    }
    let m = analytic_moments(p);
    let v = p.speed();
    let t_r = p.radius / v;
    match mode {
        LowFrequencyMode::Lorentzian { gamma } => {
            if gamma <= 0.0 {
                return Err(Error::Domain(format!("gamma {gamma} must be positive")));
            }
            let x = omega / gamma;
            Ok(m.variance * (2.0 / gamma) / (1.0 + x * x))
        }
        LowFrequencyMode::Bouncing => {
            if p.is_flat() {
                return Err(Error::Divergent("bouncing spectrum of the flat box".into()));
            }
            if omega == 0.0 {
                return Err(Error::Divergent("bouncing spectrum at omega = 0".into()));
            }
            let wt2 = (omega * t_r).powi(2);
            let s = (1.0 + wt2).sqrt();
            let pre = p.mass * p.mass * v.powi(4) / (4.0 * p.lx * p.lx);
            Ok(pre * t_r / s * ((2.0 + 2.0 * s) / wt2).ln_1p())
        }
        LowFrequencyMode::BouncingSmallOmega => {
            if p.is_flat() {
                return Err(Error::Divergent("bouncing spectrum of the flat box".into()));
            }
            let cutoff = omega.max(p.gamma0);
            if cutoff == 0.0 {
                return Err(Error::Divergent("omega = 0 with gamma0 = 0".into()));
            }
            let pre = p.mass * p.mass * v.powi(3) * p.radius / (2.0 * p.lx * p.lx);
            Ok(pre * (2.0 / (cutoff * t_r)).ln())
        }
    }
}

/// Classical enhancement `g_c = ln(2Δ_R/γ₀)/u` for vanishing driving frequency.
pub fn gc_classical(p: &BilliardParams) -> Result<f64> {
    let s = derive_scales(p);
    if s.integrable {
        return Err(Error::Divergent("g_c of the flat box".into()));
    }
    if p.gamma0 == 0.0 {
        return Err(Error::Divergent("g_c requires gamma0 > 0".into()));
    }
    let arg = 2.0 * s.delta_r / p.gamma0;
    if arg <= 1.0 {
        log::warn!("gamma0 {} exceeds 2*Delta_R {}; g_c set to 0", p.gamma0, 2.0 * s.delta_r);
        return Ok(0.0);
    }
    Ok(arg.ln() / s.u)
}

/// Lyapunov-type rate `γ_θ = γ₀ + (v/R) cosθ`.
pub fn instability_exponent(theta: f64, p: &BilliardParams) -> f64 {
    let curvature = if p.is_flat() { 0.0 } else { p.speed() / p.radius };
    p.gamma0 + curvature * theta.cos()
}
