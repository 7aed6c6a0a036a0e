//! Deformation profile of the left wall, its cosine transform, and the
//! first-order wall perturbation `U` in the rectangle basis.

use std::f64::consts::PI;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::scales::BilliardParams;

/// Mode labels of the undeformed rectangle with their energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxState {
    pub nx: u32,
    pub ny: u32,
    pub energy: f64,
}

impl BoxState {
    pub fn new(nx: u32, ny: u32, p: &BilliardParams) -> Self {
        Self { nx, ny, energy: crate::scales::box_level(nx, ny, p) }
    }
}

/// `D_u(y) = √(R²−(y−ε)²) − √(R²−(Ly−ε)²)`.
pub fn deformation_profile(y: f64, p: &BilliardParams) -> Result<f64> {
    if p.is_flat() {
        return Ok(0.0);
    }
    if p.radius <= p.ly - p.eps || p.radius <= p.eps {
        return Err(Error::Domain(format!("radius {} does not span the wall", p.radius)));
    }
    Ok(profile_unchecked(y, p))
}

fn profile_unchecked(y: f64, p: &BilliardParams) -> f64 {
    let (a, b, r2) = (y - p.eps, p.ly - p.eps, p.radius * p.radius);
    (b * b - a * a) / ((r2 - a * a).sqrt() + (r2 - b * b).sqrt())
}

/// `(1/Ly) ∫_0^{Ly} f(y) cos(νπy/Ly) dy` to relative tolerance 1e-10.
pub fn fourier_coefficient(f: impl Fn(f64) -> f64, ly: f64, nu: u32) -> Result<f64> {
    let k = f64::from(nu) * PI / ly;
    let pieces = nu as usize / 2 + 4;
    let scale = quad::integrate(|y| f(y).abs(), 0.0, ly, pieces, 1e-10, 0.0)?;
    let v = quad::integrate(|y| f(y) * (k * y).cos(), 0.0, ly, pieces, 1e-10, 1e-14 * scale)?;
    Ok(v / ly)
}

/// Cosine coefficient `D_ν` of the deformation profile.
pub fn deformation_fourier(nu: u32, p: &BilliardParams) -> Result<f64> {
    if p.is_flat() {
        return Ok(0.0);
    }
    deformation_profile(0.0, p)?;
    fourier_coefficient(|y| profile_unchecked(y, p), p.ly, nu)
}

/// Memoized `D_ν` for one billiard.
#[derive(Debug)]
pub struct DeformationTable {
    params: BilliardParams,
    values: Mutex<Vec<f64>>,
}

impl DeformationTable {
    pub fn new(p: &BilliardParams) -> Result<Self> {
        if !p.is_flat() {
            deformation_profile(0.0, p)?;
        }
        Ok(Self { params: *p, values: Mutex::new(Vec::new()) })
    }

    /// Ensures coefficients `0..=nu_max` are cached.
    pub fn fill(&self, nu_max: u32) -> Result<()> {
        let have = self.values.lock().map_or(0, |v| v.len());
        if have > nu_max as usize {
            return Ok(());
        }
        use rayon::prelude::*;
        let fresh: Vec<f64> = (have as u32..=nu_max)
            .into_par_iter()
            .map(|nu| deformation_fourier(nu, &self.params))
            .collect::<Result<_>>()?;
        let mut v = self.values.lock().map_err(|_| Error::Numeric("poisoned cache".into()))?;
        if v.len() == have {
            v.extend(fresh);
        }
        Ok(())
    }

    pub fn get(&self, nu: u32) -> Result<f64> {
        self.fill(nu)?;
        let v = self.values.lock().map_err(|_| Error::Numeric("poisoned cache".into()))?;
        Ok(v[nu as usize])
    }

    /// `U` between two box states using cached coefficients.
    pub fn u_element(&self, n: &BoxState, m: &BoxState) -> Result<f64> {
        if self.params.is_flat() {
            return Ok(0.0);
        }
        let d_minus = self.get(n.ny.abs_diff(m.ny))?;
        let d_plus = self.get(n.ny + m.ny)?;
        Ok(u_prefactor(&self.params) * (d_minus - d_plus) * f64::from(n.nx * m.nx))
    }
}

fn u_prefactor(p: &BilliardParams) -> f64 {
    PI * PI / (p.mass * p.lx.powi(3))
}

/// First-order wall perturbation
/// `U = (π²/(m Lx³)) (D_{|ny−my|} − D_{ny+my}) nx mx`.
///
/// The bump shrinks the box, so diagonal elements are positive.
pub fn u_matrix_element(n: &BoxState, m: &BoxState, p: &BilliardParams) -> Result<f64> {
    DeformationTable::new(p)?.u_element(n, m)
}

/// Power-law model `(D_0/(m Lx³)) nx mx / (1 + |ny−my|^α)` of `|U|`.
pub fn u_magnitude_estimate(n: &BoxState, m: &BoxState, p: &BilliardParams, alpha: f64) -> Result<f64> {
    if alpha < 1.0 {
        return Err(Error::Domain(format!("alpha {alpha} < 1")));
    }
    let d0 = deformation_fourier(0, p)?;
    let dn = f64::from(n.ny.abs_diff(m.ny));
    Ok(d0 / (p.mass * p.lx.powi(3)) * f64::from(n.nx) * f64::from(m.nx) / (1.0 + dn.powf(alpha)))
}
