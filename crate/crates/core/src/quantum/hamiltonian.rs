//! Truncated-basis Hamiltonian of the deformed box and its eigenstates.

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deformation::{BoxState, DeformationTable};
use crate::error::{Error, Result};
use crate::scales::{box_level, BilliardParams};

/// Fraction of the window width added on each side by [`SpectralWindow::new`].
pub const DEFAULT_BUFFER_FRACTION: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralWindow {
    pub e_lo: f64,
    pub e_hi: f64,
    pub buffer: f64,
}

impl SpectralWindow {
    pub fn new(e_lo: f64, e_hi: f64) -> Self {
        Self { e_lo, e_hi, buffer: DEFAULT_BUFFER_FRACTION * (e_hi - e_lo) }
    }

    pub fn centered(center: f64, width: f64) -> Self {
        Self::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.e_lo + self.e_hi)
    }

    pub fn width(&self) -> f64 {
        self.e_hi - self.e_lo
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.e_lo > 0.0) {
            v.push(format!("window.e_lo must be > 0 (got {})", self.e_lo));
        }
        if !(self.e_hi > self.e_lo) {
            v.push(format!("window.e_hi must exceed e_lo (got {} <= {})", self.e_hi, self.e_lo));
        }
        if !(self.buffer >= 0.0) {
            v.push(format!("window.buffer must be >= 0 (got {})", self.buffer));
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
}

/// All box states with `lo ≤ E ≤ hi`, ordered by energy (ties by `nx`).
pub fn enumerate_basis(lo: f64, hi: f64, p: &BilliardParams) -> Vec<BoxState> {
    let mut out = Vec::new();
    let mut ny = 1;
    while box_level(1, ny, p) <= hi {
        let mut nx = 1;
        loop {
            let e = box_level(nx, ny, p);
            if e > hi {
                break;
            }
            if e >= lo {
                out.push(BoxState { nx, ny, energy: e });
            }
            nx += 1;
        }
        ny += 1;
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.nx.cmp(&b.nx)));
    out
}

/// Eigenpairs of the truncated Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub basis: Vec<BoxState>,
    /// Reported eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Column-major `basis.len() × eigenvalues.len()` coefficients on the
    /// box states `(−1)^nx sin(nxπx/Lx) sin(nyπy/Ly)`, whose normal
    /// derivative at the piston is positive for every `nx`.
    pub vectors: Vec<f64>,
    pub window: SpectralWindow,
    /// Index of the first reported eigenpair in the full spectrum.
    pub offset: usize,
    /// Neighbouring reported levels closer than `1e-9 Δ₀`.
    pub quasi_degenerate: Vec<(usize, usize)>,
    /// Set when the basis was not padded beyond the window.
    pub unbuffered: bool,
}

impl EigenSolution {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.vectors[j * d..(j + 1) * d]
    }

    pub fn vectors_mat(&self) -> Mat<f64> {
        let d = self.dim();
        Mat::from_fn(d, self.len(), |i, j| self.vectors[j * d + i])
    }

    /// Largest deviation of `VᵀV` from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = self.vectors_mat();
        let g = v.transpose() * &v;
        let mut worst = 0.0f64;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Spread `√(Σ|c|²(E_k − ⟨E⟩)²)` of eigenstate `j` over unperturbed
    /// energies, in units of `delta0`.
    pub fn energy_width(&self, j: usize, delta0: f64) -> f64 {
        let c = self.vector(j);
        let mean: f64 = c.iter().zip(&self.basis).map(|(a, b)| a * a * b.energy).sum();
        let var: f64 = c.iter().zip(&self.basis).map(|(a, b)| a * a * (b.energy - mean).powi(2)).sum();
        var.sqrt() / delta0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalizeOptions {
    /// Report every eigenpair of the truncated matrix, not only the window.
    pub report_all: bool,
}

pub fn build_and_diagonalize(w: &SpectralWindow, p: &BilliardParams) -> Result<EigenSolution> {
    build_and_diagonalize_with(w, p, DiagonalizeOptions::default())
}

pub fn build_and_diagonalize_with(
    w: &SpectralWindow,
    p: &BilliardParams,
    opts: DiagonalizeOptions,
) -> Result<EigenSolution> {
    w.validate()?;
    p.validate()?;
    let lo = (w.e_lo - w.buffer).max(0.0);
    let basis = enumerate_basis(lo, w.e_hi + w.buffer, p);
    let inside = basis.iter().filter(|b| b.energy >= w.e_lo && b.energy <= w.e_hi).count();
    if inside < 2 {
        return Err(Error::Empty("window holds fewer than two basis states"));
    }
    if w.buffer == 0.0 {
        log::warn!("unbuffered truncation biases levels near the window edges");
    }
    let n = basis.len();
    let table = DeformationTable::new(p)?;
    let ny_max = basis.iter().map(|b| b.ny).max().unwrap_or(1);
    table.fill(2 * ny_max)?;

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| {
                    let parity = if (basis[i].nx + basis[j].nx) % 2 == 0 { 1.0 } else { -1.0 };
                    Ok(parity * table.u_element(&basis[i], &basis[j])?)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let h = Mat::from_fn(n, n, |i, j| {
        let u = if j <= i { rows[i][j] } else { rows[j][i] };
        if i == j {
            basis[i].energy + u
        } else {
            u
        }
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));

    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| opts.report_all || (s[k] >= w.e_lo && s[k] <= w.e_hi))
        .collect();
    if keep.is_empty() {
        return Err(Error::Empty("no eigenvalues inside the window"));
    }
    let offset = order.iter().position(|&k| k == keep[0]).unwrap_or(0);
    let eigenvalues: Vec<f64> = keep.iter().map(|&k| s[k]).collect();
    let mut vectors = Vec::with_capacity(n * keep.len());
    for &k in &keep {
        vectors.extend((0..n).map(|i| u[(i, k)]));
    }
    let tol = 1e-9 * p.mean_level_spacing();
    let quasi_degenerate = eigenvalues
        .windows(2)
        .enumerate()
        .filter(|(_, e)| e[1] - e[0] < tol)
        .map(|(i, _)| (i, i + 1))
        .collect();
    Ok(EigenSolution {
        basis,
        eigenvalues,
        vectors,
        window: *w,
        offset,
        quasi_degenerate,
        unbuffered: w.buffer == 0.0,
    })
}

/// `PN = (Σ|c|²)² / Σ|c|⁴`.
pub fn participation_number(v: &[f64]) -> Result<f64> {
    let s2: f64 = v.iter().map(|c| c * c).sum();
    if s2 == 0.0 {
        return Err(Error::Degenerate("zero vector has no participation number".into()));
    }
    let s4: f64 = v.iter().map(|c| c.powi(4)).sum();
    Ok(s2 * s2 / s4)
}
