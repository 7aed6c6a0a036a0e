//! Matrix elements of the piston force in the perturbed eigenbasis.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::deformation::{BoxState, DeformationTable};
use super::hamiltonian::{EigenSolution, SpectralWindow};
use crate::error::{Error, Result};
use crate::scales::{derive_scales, BilliardParams};

/// Symmetric matrix `F_nm` over the reported eigenstates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMatrix {
    /// Positions of the rows in the full ordered spectrum.
    pub indices: Vec<usize>,
    pub energies: Vec<f64>,
    /// Row-major `n × n` values.
    pub values: Vec<f64>,
}

impl FMatrix {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i, i)).collect()
    }

    /// `X = {|F_nm|²}` in row-major order.
    pub fn intensities(&self) -> Vec<f64> {
        self.values.iter().map(|f| f * f).collect()
    }

    /// `Σ_m |F_nm|²` for every row.
    pub fn row_sums_sq(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| self.values[i * n..(i + 1) * n].iter().map(|f| f * f).sum()).collect()
    }
}

/// Prefactor `π²/(m Lx³)` of the zero-order elements.
fn f0_prefactor(p: &BilliardParams) -> f64 {
    PI * PI / (p.mass * p.lx.powi(3))
}

/// Zero-order element `−δ_{ny,my} (π²/(m Lx³)) nx mx`.
pub fn f0_element(n: &BoxState, m: &BoxState, p: &BilliardParams) -> f64 {
    if n.ny == m.ny {
        -f0_prefactor(p) * f64::from(n.nx) * f64::from(m.nx)
    } else {
        0.0
    }
}

/// `F = Vᵀ F⁰ V`. `F⁰` is a sum of rank-one blocks, one per `ny`, so the
/// rotation reduces to `−c BᵀB` with `B_{ny,j} = Σ_{k∈ny} nx_k V_kj`.
pub fn f_matrix(sol: &EigenSolution, p: &BilliardParams) -> FMatrix {
    let mut families: BTreeMap<u32, usize> = BTreeMap::new();
    for b in &sol.basis {
        let next = families.len();
        families.entry(b.ny).or_insert(next);
    }
    let d = sol.dim();
    let k = sol.len();
    let mut b = Mat::<f64>::zeros(families.len(), k);
    for j in 0..k {
        let v = sol.vector(j);
        for i in 0..d {
            let row = families[&sol.basis[i].ny];
            b[(row, j)] += f64::from(sol.basis[i].nx) * v[i];
        }
    }
    let f = b.transpose() * &b;
    let c = -f0_prefactor(p);
    let mut values = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            // Symmetrize the product exactly.
            let x = if j >= i { f[(i, j)] } else { f[(j, i)] };
            values.push(c * x);
        }
    }
    FMatrix {
        indices: (sol.offset..sol.offset + k).collect(),
        energies: sol.eigenvalues.clone(),
        values,
    }
}

/// Largest relative difference between `Σ_m |F_nm|²` of the rotated matrix
/// and `⟨v_n|(F⁰)²|v_n⟩` evaluated in the unperturbed basis. Requires the
/// complete eigenbasis (`report_all`).
pub fn sum_rule_deviation(sol: &EigenSolution, f: &FMatrix, p: &BilliardParams) -> Result<f64> {
    if sol.len() != sol.dim() {
        return Err(Error::Domain("sum rule needs the complete eigenbasis".into()));
    }
    let mut weight: BTreeMap<u32, f64> = BTreeMap::new();
    for b in &sol.basis {
        *weight.entry(b.ny).or_default() += f64::from(b.nx).powi(2);
    }
    let c2 = f0_prefactor(p).powi(2);
    let rows = f.row_sums_sq();
    let mut worst = 0.0f64;
    for (j, &row) in rows.iter().enumerate() {
        let v = sol.vector(j);
        let mut proj: BTreeMap<u32, f64> = BTreeMap::new();
        for (b, c) in sol.basis.iter().zip(v) {
            *proj.entry(b.ny).or_default() += f64::from(b.nx) * c;
        }
        let direct: f64 = proj.iter().map(|(ny, s)| c2 * weight[ny] * s * s).sum();
        worst = worst.max((row - direct).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoptEstimates {
    /// `⟨m̄|n⟩ = U_mn/(E_n − E_m)`.
    pub overlap: f64,
    /// Typical first-order element `(Δ_R/ω)(k_E L)^{3−α}/(m L³)`.
    pub f_small: f64,
    /// Zero-order scale `(k_E L)²/(m L³)`.
    pub f_large: f64,
}

/// Perturbative scales for the pair `(n, m)`, with `L = Lx` and `ω = |E_n − E_m|`.
pub fn fopt_estimates(n: &BoxState, m: &BoxState, p: &BilliardParams, alpha: f64) -> Result<FoptEstimates> {
    let gap = n.energy - m.energy;
    if gap == 0.0 {
        return Err(Error::Degenerate(format!(
            "({},{}) and ({},{}) share energy {}",
            n.nx, n.ny, m.nx, m.ny, n.energy
        )));
    }
    let s = derive_scales(p);
    let u = DeformationTable::new(p)?.u_element(m, n)?;
    let l = p.lx;
    let kl = s.k_e * l;
    let unit = 1.0 / (p.mass * l.powi(3));
    Ok(FoptEstimates {
        overlap: u / gap,
        f_small: s.delta_r / gap.abs() * kl.powf(3.0 - alpha) * unit,
        f_large: kl * kl * unit,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowAnalytics {
    pub k_e: f64,
    /// Bare fraction `2/(π k_E Ly)` of nonzero zero-order elements.
    pub p0: f64,
    /// `p0 · ln(2 k_E / δk)` for the window width.
    pub p0_log: f64,
    /// `(8/3π) k_E³/(m² Lx² Ly)`.
    pub x_avg_inf: f64,
}

pub fn window_analytics(w: &SpectralWindow, p: &BilliardParams) -> WindowAnalytics {
    let k_e = (2.0 * p.mass * w.center()).sqrt();
    let p0 = 2.0 / (PI * k_e * p.ly);
    let dk = p.mass * w.width() / k_e;
    WindowAnalytics {
        k_e,
        p0,
        p0_log: p0 * (2.0 * k_e / dk).ln(),
        x_avg_inf: 8.0 / (3.0 * PI) * k_e.powi(3) / (p.mass * p.mass * p.lx * p.lx * p.ly),
    }
}
