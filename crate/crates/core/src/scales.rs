//! Billiard parameters, derived time and frequency scales, regime labels and
//! the unit conversion used for the cold-atom estimate.
//!
//! Internal units set ħ = 1. The only SI entry point is
//! [`experimental_scales`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and physical constants of one billiard instance.
///
/// The box is `lx × ly`; the left wall is a circular arc of radius `radius`
/// whose center is shifted up by `eps`. An infinite radius is the flat,
/// integrable rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilliardParams {
    pub lx: f64,
    pub ly: f64,
    #[serde(default = "infinite", with = "serde_radius")]
    pub radius: f64,
    #[serde(default)]
    pub eps: f64,
    pub mass: f64,
    pub energy: f64,
    #[serde(default)]
    pub gamma0: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

/// `radius` is written as `null` (or omitted) when the wall is flat.
pub(crate) mod serde_radius {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        if r.is_finite() {
            s.serialize_some(r)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl BilliardParams {
    /// The billiard used for the representative eigenstate: `Lx = 1.5`,
    /// `Ly = 1`, `R = 8`, `ε = 0.1`, `m = 1/2`, `E = 13618`.
    pub fn reference() -> Self {
        Self {
            lx: 1.5,
            ly: 1.0,
            radius: 8.0,
            eps: 0.1,
            mass: 0.5,
            energy: 13618.0,
            gamma0: 0.0,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }

    /// Every violated invariant, not just the first one.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let positive = |name: &str, x: f64, v: &mut Vec<String>| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} must be positive and finite (got {x})"));
            }
        };
        positive("lx", self.lx, &mut v);
        positive("ly", self.ly, &mut v);
        positive("mass", self.mass, &mut v);
        positive("energy", self.energy, &mut v);
        if !(self.eps >= 0.0 && self.eps < self.ly) {
            v.push(format!("eps must satisfy 0 <= eps < ly (got {})", self.eps));
        }
        // The arc must span the whole wall: |y - eps| < R for every y in [0, ly].
        let reach = self.eps.max(self.ly - self.eps);
        if self.radius.is_nan() || self.radius <= reach {
            v.push(format!(
                "radius must exceed max(eps, ly - eps) = {reach} (got {})",
                self.radius
            ));
        }
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            v.push(format!("gamma0 must be non-negative (got {})", self.gamma0));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    pub fn speed(&self) -> f64 {
        (2.0 * self.energy / self.mass).sqrt()
    }

    pub fn wavenumber(&self) -> f64 {
        self.mass * self.speed()
    }

    pub fn is_flat(&self) -> bool {
        self.radius.is_infinite()
    }

    /// Mean level spacing of the rectangle, `2π/(m·Lx·Ly)`.
    pub fn mean_level_spacing(&self) -> f64 {
        2.0 * PI / (self.mass * self.lx * self.ly)
    }
}

/// Which box side plays the role of the generic length `L` in `ħ = λ_E/L`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleLength {
    #[default]
    Lx,
    Ly,
    GeometricMean,
}

impl ScaleLength {
    pub fn length(self, p: &BilliardParams) -> f64 {
        match self {
            ScaleLength::Lx => p.lx,
            ScaleLength::Ly => p.ly,
            ScaleLength::GeometricMean => (p.lx * p.ly).sqrt(),
        }
    }
}

/// Derived scales of a billiard at its window energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    pub v_e: f64,
    pub k_e: f64,
    pub lambda_e: f64,
    /// Deformation `Ly/R`.
    pub u: f64,
    /// Scaled Planck constant `λ_E/L`.
    pub hbar_eff: f64,
    pub t_l: f64,
    #[serde(with = "serde_radius")]
    pub t_r: f64,
    pub delta_l: f64,
    pub delta_r: f64,
    pub delta0: f64,
    /// Dimensionless bandwidth `u/ħ`.
    pub b: f64,
    /// True for the flat (R = ∞) rectangle.
    pub integrable: bool,
}

pub fn derive_scales(p: &BilliardParams) -> ScaleSet {
    derive_scales_with(p, ScaleLength::Lx)
}

/// Scales with an explicit choice of the generic length entering `ħ`.
///
/// `Δ_L = 2π v/Lx` and `Δ_R = 2π v/R` are the ballistic and Lyapunov
/// frequencies, `Δ_0` is the mean level spacing of the box. With `ħ` built
/// from `Lx` the identity `Δ_R/Δ_0 = 2π·b` holds exactly.
pub fn derive_scales_with(p: &BilliardParams, length: ScaleLength) -> ScaleSet {
    let v_e = p.speed();
    let k_e = p.mass * v_e;
    let lambda_e = 2.0 * PI / k_e;
    let u = if p.is_flat() { 0.0 } else { p.ly / p.radius };
    let hbar_eff = lambda_e / length.length(p);
    let t_l = p.lx / v_e;
    let t_r = p.radius / v_e;
    let delta_l = 2.0 * PI / t_l;
    let delta_r = if p.is_flat() { 0.0 } else { 2.0 * PI / t_r };
    ScaleSet {
        v_e,
        k_e,
        lambda_e,
        u,
        hbar_eff,
        t_l,
        t_r,
        delta_l,
        delta_r,
        delta0: p.mean_level_spacing(),
        b: u / hbar_eff,
        integrable: p.is_flat(),
    }
}

/// Unperturbed level `E(nx, ny)` of the rectangle.
pub fn box_level(nx: u32, ny: u32, p: &BilliardParams) -> f64 {
    let kx = PI * f64::from(nx) / p.lx;
    let ky = PI * f64::from(ny) / p.ly;
    (kx * kx + ky * ky) / (2.0 * p.mass)
}

/// Energy at which the scaled Planck constant (built from `Lx`) equals `hbar`.
pub fn energy_for_hbar(hbar: f64, p: &BilliardParams) -> f64 {
    let k = 2.0 * PI / (hbar * p.lx);
    k * k / (2.0 * p.mass)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// First-order perturbation theory holds, `u < ħ²`.
    Fopt,
    /// Lorentzian level mixing, `ħ² ≤ u < ħ`.
    Wigner,
    /// Weak quantum chaos, `ħ ≤ u < √ħ`.
    Wqc,
    /// Hard quantum chaos, `u ≥ √ħ`.
    Hqc,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Fopt => "FOPT",
            Regime::Wigner => "WIGNER",
            Regime::Wqc => "WQC",
            Regime::Hqc => "HQC",
        };
        f.write_str(s)
    }
}

/// Regime label from the borders `u_c = ħ²`, `u_b = ħ`, `u_s = √ħ`.
/// A point on a border belongs to the upper regime.
pub fn classify_regime(u: f64, hbar_eff: f64) -> Regime {
    if u >= hbar_eff.sqrt() {
        Regime::Hqc
    } else if u >= hbar_eff {
        Regime::Wqc
    } else if u >= hbar_eff * hbar_eff {
        Regime::Wigner
    } else {
        Regime::Fopt
    }
}

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Cold atoms in an optical billiard, SI units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomParams {
    /// kg
    pub atom_mass: f64,
    /// K
    pub temperature: f64,
    /// m
    pub box_size: f64,
}

impl AtomParams {
    /// ⁸⁵Rb at 0.1 μK in a 10 μm box.
    pub fn rubidium85() -> Self {
        Self {
            atom_mass: 1.4e-25,
            temperature: 0.1e-6,
            box_size: 10e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalScales {
    /// m/s
    pub v_e: f64,
    /// Ballistic frequency in Hz.
    pub omega_l: f64,
    /// Mean level spacing in Hz.
    pub omega0: f64,
    pub hbar_eff: f64,
}

/// Frequencies in Hz (no 2π) for a thermal atom with `E = k_B·T`.
pub fn experimental_scales(a: &AtomParams) -> Result<ExperimentalScales> {
    if !(a.atom_mass > 0.0 && a.temperature > 0.0 && a.box_size > 0.0) {
        return Err(Error::InvalidParams(vec![
            "atom mass, temperature and box size must be positive".into(),
        ]));
    }
    let v_e = (2.0 * BOLTZMANN * a.temperature / a.atom_mass).sqrt();
    let lambda = PLANCK / (a.atom_mass * v_e);
    Ok(ExperimentalScales {
        v_e,
        omega_l: v_e / (2.0 * a.box_size),
        omega0: HBAR / (a.atom_mass * a.box_size * a.box_size),
        hbar_eff: lambda / a.box_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_billiard_scales() {
        let s = derive_scales(&BilliardParams::reference());
        assert!(rel(s.v_e, 233.39) < 1e-4, "{}", s.v_e);
        assert!(rel(s.k_e, 116.70) < 1e-4, "{}", s.k_e);
        assert_eq!(s.u, 0.125);
        assert!((1.0 / s.hbar_eff - 27.86).abs() < 0.01);
        assert_eq!(s.k_e, BilliardParams::reference().mass * s.v_e);
        assert_eq!(s.lambda_e, 2.0 * PI / s.k_e);
    }

    #[test]
    fn mean_level_spacing_value() {
        let s = derive_scales(&BilliardParams::reference());
        assert!((s.delta0 - 8.3776).abs() < 1e-4);
    }

    #[test]
    fn flat_wall_is_integrable() {
        let p = BilliardParams::reference().with_radius(f64::INFINITY);
        p.validate().unwrap();
        let s = derive_scales(&p);
        assert_eq!(s.u, 0.0);
        assert_eq!(s.delta_r, 0.0);
        assert!(s.t_r.is_infinite());
        assert!(s.integrable);
    }

    #[test]
    fn bandwidth_identity() {
        for &(lx, ly, r, e) in &[(1.5, 1.0, 8.0, 13618.0), (2.0, 0.7, 3.0, 50.0), (1.0, 1.0, 40.0, 1e5)] {
            let p = BilliardParams { lx, ly, radius: r, eps: 0.1 * ly, mass: 0.5, energy: e, gamma0: 0.0 };
            let s = derive_scales(&p);
            assert!(rel(s.delta_r / s.delta0, 2.0 * PI * s.b) < 1e-13);
            assert_eq!(s.b, s.u / s.hbar_eff);
        }
    }

    #[test]
    fn box_levels() {
        let p = BilliardParams::reference();
        assert!((box_level(1, 1, &p) - 14.2561).abs() < 1e-4);
        let unit = BilliardParams { lx: 1.0, ly: 1.0, ..p };
        assert!((box_level(3, 2, &unit) - 13.0 * PI * PI).abs() < 1e-12);
        assert!(box_level(4, 2, &p) > box_level(3, 2, &p));
        assert!(box_level(3, 3, &p) > box_level(3, 2, &p));
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(0.125, 0.036), Regime::Wqc);
        assert_eq!(classify_regime(0.0, 0.036), Regime::Fopt);
        assert_eq!(classify_regime(1.0, 0.1), Regime::Hqc);
        assert_eq!(classify_regime(0.1, 0.1), Regime::Wqc);
        assert_eq!(classify_regime(0.02, 0.1), Regime::Wigner);
    }

    #[test]
    fn rubidium_scales() {
        let x = experimental_scales(&AtomParams::rubidium85()).unwrap();
        assert!(rel(x.omega_l, 220.0) < 0.05, "{}", x.omega_l);
        assert!(rel(x.omega0, 7.5) < 0.05, "{}", x.omega0);
        assert!((x.hbar_eff - 0.1).abs() < 0.01, "{}", x.hbar_eff);
        assert!(rel(x.omega_l / x.omega0, 30.0) < 0.05);
    }

    #[test]
    fn violations_are_collected() {
        let p = BilliardParams { lx: -1.0, ly: 0.0, radius: 0.1, eps: 0.0, mass: 0.5, energy: -2.0, gamma0: -1.0 };
        let v = p.violations();
        assert!(v.len() >= 5, "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("lx")));
    }

    #[test]
    fn radius_roundtrips_through_json() {
        let p = BilliardParams::reference().with_radius(f64::INFINITY);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"radius\":null"));
        let q: BilliardParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    proptest::proptest! {
        #[test]
        fn regime_is_monotone_in_u(u1 in 0.0f64..2.0, du in 0.0f64..1.0, h in 0.001f64..0.999) {
            proptest::prop_assert!(classify_regime(u1 + du, h) >= classify_regime(u1, h));
        }

        #[test]
        fn derive_scales_is_pure(lx in 0.5f64..3.0, ly in 0.5f64..3.0, e in 1.0f64..1e5) {
            let p = BilliardParams { lx, ly, radius: 10.0, eps: 0.0, mass: 0.5, energy: e, gamma0: 0.0 };
            let a = derive_scales(&p);
            let b = derive_scales(&p);
            proptest::prop_assert_eq!(a.delta0.to_bits(), b.delta0.to_bits());
            proptest::prop_assert_eq!(a.hbar_eff.to_bits(), b.hbar_eff.to_bits());
            proptest::prop_assert!((a.delta_r / a.delta0 / (2.0 * PI * a.b) - 1.0).abs() < 1e-12);
        }
    }
}
