//! Energy absorption: driving spectrum, Kubo diffusion, LRT and SLRT coefficients.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classical::analytic_moments;
use crate::error::{Error, Result};
use crate::measures::{solve_strip, BandProfile, IntensityMatrix, Network, WeightProfile};
use crate::quad;
use crate::scales::{derive_scales, BilliardParams};

/// Noisy wall vibration with exponential spectral support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivingSpec {
    /// RMS wall velocity.
    pub fdot_rms: f64,
    pub omega_c: f64,
    pub amplitude: f64,
}

impl DrivingSpec {
    /// Velocity set to `ω_c·A`.
    pub fn from_amplitude(omega_c: f64, amplitude: f64) -> Self {
        Self { fdot_rms: omega_c * amplitude, omega_c, amplitude }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, x) in [("fdot_rms", self.fdot_rms), ("omega_c", self.omega_c), ("amplitude", self.amplitude)] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("driving.{name} must be positive and finite (got {x})"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::InvalidParams(v));
        }
        let ratio = self.fdot_rms / (self.omega_c * self.amplitude);
        if !(1.0 / 3.0..=3.0).contains(&ratio) {
            log::warn!("fdot_rms is {ratio:.3} times omega_c*A");
        }
        Ok(())
    }
}

/// `S̃(ω) = ḟ² exp(−|ω|/ω_c) / (2ω_c)`.
pub fn driving_spectrum(omega: f64, d: &DrivingSpec) -> f64 {
    d.fdot_rms * d.fdot_rms / (2.0 * d.omega_c) * (-omega.abs() / d.omega_c).exp()
}

/// Piecewise-linear `C̃(ω)` on `ω ≥ 0`, flat beyond the tabulated range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Empty("tabulated spectrum has no points"));
        }
        if omega.len() != values.len() {
            return Err(Error::Format(format!("{} frequencies but {} values", omega.len(), values.len())));
        }
        if let Some(i) = omega.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Unsorted(i + 1));
        }
        if omega.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Domain("tabulated spectrum holds non-finite entries".into()));
        }
        Ok(Self { omega, values })
    }

    /// Quantum bandprofile as a spectrum: `ω = r·Δ`, `C̃ = (2π/Δ)·C̄(r)`.
    pub fn from_bandprofile(b: &BandProfile, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("level spacing {spacing} must be positive")));
        }
        let k = 2.0 * PI / spacing;
        Self::new(
            b.r.iter().map(|&r| r as f64 * spacing).collect(),
            b.mean.iter().map(|&c| k * c).collect(),
        )
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let w = &self.omega;
        let n = w.len();
        if omega <= w[0] {
            return self.values[0];
        }
        if omega >= w[n - 1] {
            return self.values[n - 1];
        }
        let i = w.partition_point(|&x| x <= omega) - 1;
        let t = (omega - w[i]) / (w[i + 1] - w[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

/// Kubo `D = ∫₀^∞ C̃(ω) S̃(ω) dω`.
pub fn diffusion_coefficient(c: impl Fn(f64) -> f64, d: &DrivingSpec) -> Result<f64> {
    d.validate()?;
    let v = quad::integrate_half_line(|w| c(w) * driving_spectrum(w, d), d.omega_c, 1e-8)?;
    if !v.is_finite() {
        return Err(Error::Divergent("Kubo integral".into()));
    }
    Ok(v)
}

/// Wall formula `G₀ = C_∞ / (2T)`.
pub fn wall_formula_g0(p: &BilliardParams, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature {temperature} must be positive")));
    }
    Ok(analytic_moments(p).c_plateau / (2.0 * temperature))
}

/// Dimensionless factors entering the absorption coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFactors {
    pub g_c: f64,
    pub g_s: f64,
}

impl MeasureFactors {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.g_c > 0.0 && self.g_c.is_finite()) {
            v.push(format!("g_c must be positive and finite (got {})", self.g_c));
        }
        if !(self.g_s >= 0.0 && self.g_s.is_finite()) {
            v.push(format!("g_s must be non-negative and finite (got {})", self.g_s));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgrCheck {
    pub power: u32,
    /// `D/Δ₀³`
    pub lhs: f64,
    /// `(ω_c/Δ₀)^power`
    pub rhs: f64,
    pub ok: bool,
    /// `rhs / lhs`; above one when the condition holds.
    pub margin: f64,
}

/// Strict (`power = 2`) or relaxed (`power = 3`) golden-rule condition.
pub fn fgr_check(d: f64, delta0: f64, omega_c: f64, power: u32) -> Result<FgrCheck> {
    if power != 2 && power != 3 {
        return Err(Error::Domain(format!("FGR power must be 2 or 3 (got {power})")));
    }
    if !(delta0 > 0.0) {
        return Err(Error::Domain(format!("level spacing {delta0} must be positive")));
    }
    let lhs = d / delta0.powi(3);
    let rhs = (omega_c / delta0).powi(power as i32);
    Ok(FgrCheck { power, lhs, rhs, ok: lhs < rhs, margin: rhs / lhs })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarReport {
    pub temperature: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    #[serde(rename = "G_lrt")]
    pub g_lrt: f64,
    #[serde(rename = "G_slrt")]
    pub g_slrt: f64,
    /// LRT energy diffusion `G_lrt·T·ḟ²`.
    #[serde(rename = "D")]
    pub d: f64,
    /// SLRT power `G_slrt·ḟ²`.
    pub edot: f64,
    pub edot_lrt: f64,
    pub dimensionless_ear: f64,
    /// `D/Δ₀³` from `D` above.
    pub d_scaled: f64,
    /// `(8/3π²)(Δ_L/Δ₀)³(ω_c/Δ₀)²(A/L)²`.
    pub d_scaled_estimate: f64,
    pub fgr_power2: FgrCheck,
    pub fgr_power3: FgrCheck,
}

/// `G_lrt = g_c G₀`, `G_slrt = g_s g_c G₀`.
pub fn ear_report(p: &BilliardParams, temperature: f64, d: &DrivingSpec, m: &MeasureFactors) -> Result<EarReport> {
    p.validate()?;
    d.validate()?;
    m.validate()?;
    let g0 = wall_formula_g0(p, temperature)?;
    let s = derive_scales(p);
    let g_lrt = m.g_c * g0;
    let g_slrt = m.g_s * g_lrt;
    let f2 = d.fdot_rms * d.fdot_rms;
    let diff = g_lrt * temperature * f2;
    let a_l = (d.amplitude / p.lx).powi(2);
    let dimensionless_ear = 8.0 / (3.0 * PI * PI) * (d.omega_c / s.delta_l).powi(2) * a_l;
    let d_scaled_estimate = 8.0 / (3.0 * PI * PI)
        * (s.delta_l / s.delta0).powi(3)
        * (d.omega_c / s.delta0).powi(2)
        * a_l;
    Ok(EarReport {
        temperature,
        g0,
        g_lrt,
        g_slrt,
        d: diff,
        edot: g_slrt * f2,
        edot_lrt: g_lrt * f2,
        dimensionless_ear,
        d_scaled: diff / s.delta0.powi(3),
        d_scaled_estimate,
        fgr_power2: fgr_check(diff, s.delta0, d.omega_c, 2)?,
        fgr_power3: fgr_check(diff, s.delta0, d.omega_c, 3)?,
    })
}

/// Range of `a² = (A/L)²` with measurable heating (`a² > 10⁻³`) inside the
/// golden-rule regime (`b⁵a² < b³`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeWindow {
    pub a2_min: f64,
    pub a2_max: f64,
}

impl AmplitudeWindow {
    pub fn is_empty(&self) -> bool {
        self.a2_max <= self.a2_min
    }
}

pub fn amplitude_window(b: f64) -> Result<AmplitudeWindow> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("bandwidth {b} must be positive")));
    }
    Ok(AmplitudeWindow { a2_min: 1e-3, a2_max: b.powi(-2) })
}

/// Unnormalized SLRT strip conductance for rates `w_r X_nm / r²`.
/// Homogeneous of degree one in `w` but not additive.
pub fn slrt_conductance(x: &IntensityMatrix, w: &WeightProfile) -> Result<f64> {
    let sol = solve_strip(&Network::from_intensity(x, w))?;
    Ok(sol.bulk)
}

/// LRT counterpart of [`slrt_conductance`]: `Σ_r w_r ⟨X⟩_r`, linear in `w`.
pub fn lrt_conductance(x: &IntensityMatrix, w: &WeightProfile) -> Result<f64> {
    if x.n < 2 {
        return Err(Error::Empty("matrix needs at least two levels"));
    }
    let mut total = 0.0;
    for r in 1..=w.r_max().min(x.n - 1) {
        let d = x.diagonal(r);
        total += w.at(r) * d.iter().sum::<f64>() / d.len() as f64;
    }
    Ok(total)
}

/// Offset weights `w_r ∝ S̃(r·Δ)` of a driving spectrum, summing to one.
pub fn driving_weights(d: &DrivingSpec, spacing: f64, r_max: usize) -> Result<WeightProfile> {
    if r_max == 0 || !(spacing > 0.0) {
        return Err(Error::Domain("driving weights need r_max >= 1 and a positive spacing".into()));
    }
    let raw: Vec<f64> = (1..=r_max).map(|r| driving_spectrum(r as f64 * spacing, d)).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("driving spectrum vanishes on every offset".into()));
    }
    Ok(WeightProfile { w: raw.into_iter().map(|x| x / total).collect() })
}
