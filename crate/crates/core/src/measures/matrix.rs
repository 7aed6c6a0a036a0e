//! Intensity matrices, band weights and diagonal-wise statistics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::FMatrix;

/// Square symmetric matrix `X_nm = |F_nm|²` with its energy metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityMatrix {
    pub n: usize,
    /// Row-major values.
    pub values: Vec<f64>,
    pub delta0: f64,
    pub center: f64,
}

impl IntensityMatrix {
    /// Checks shape, symmetry and sign.
    pub fn new(n: usize, values: Vec<f64>, delta0: f64, center: f64) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Format(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if a != b {
                    return Err(Error::Domain(format!("X not symmetric at ({i},{j})")));
                }
            }
        }
        if let Some(k) = values.iter().position(|&x| !(x >= 0.0)) {
            return Err(Error::Domain(format!("X[{}] = {} is negative or NaN", k, values[k])));
        }
        Ok(Self { n, values, delta0, center })
    }

    /// Builds `X` from a function of the offset, `X_nm = f(|n−m|)`.
    pub fn toeplitz(n: usize, f: impl Fn(usize) -> f64) -> Self {
        let values = (0..n * n).map(|k| f((k / n).abs_diff(k % n))).collect();
        Self { n, values, delta0: 1.0, center: 0.0 }
    }

    pub fn from_fmatrix(f: &FMatrix, delta0: f64) -> Self {
        let center = if f.is_empty() {
            0.0
        } else {
            0.5 * (f.energies[0] + f.energies[f.len() - 1])
        };
        Self { n: f.len(), values: f.intensities(), delta0, center }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n + j] = v;
        self.values[j * self.n + i] = v;
    }

    /// Elements `X_{k+r, k}` of diagonal `r ≥ 0`.
    pub fn diagonal(&self, r: usize) -> Vec<f64> {
        (0..self.n.saturating_sub(r)).map(|k| self.get(k + r, k)).collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self { values: self.values.iter().map(|x| x * lambda).collect(), ..self.clone() }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Format(format!("size mismatch {} vs {}", self.n, other.n)));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { values, ..self.clone() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `F(r) ∝ e^{−|r|/b_c}`, truncated at `|r| ≤ 10 b_c`.
    Exponential,
    /// `F(r) ∝ 1` for `1 ≤ |r| ≤ b_c`.
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandWeight {
    pub kind: WeightKind,
    /// Half-width in level units.
    pub b_c: f64,
}

impl BandWeight {
    pub fn exponential(b_c: f64) -> Self {
        Self { kind: WeightKind::Exponential, b_c }
    }

    pub fn rectangular(b_c: f64) -> Self {
        Self { kind: WeightKind::Rectangular, b_c }
    }

    /// One-sided weights `w_r`, `r = 1..=r_max`, summing to one.
    /// `r_max` is additionally capped at `limit` (the largest offset present).
    pub fn profile(&self, limit: usize) -> Result<WeightProfile> {
        if !(self.b_c > 0.0) {
            return Err(Error::Domain(format!("b_c must be positive (got {})", self.b_c)));
        }
        let cut = match self.kind {
            WeightKind::Exponential => (10.0 * self.b_c).ceil(),
            WeightKind::Rectangular => self.b_c.floor(),
        };
        let r_max = (cut as usize).min(limit);
        if r_max == 0 {
            return Err(Error::Domain(format!("band weight with b_c = {} selects no offsets", self.b_c)));
        }
        let raw: Vec<f64> = (1..=r_max)
            .map(|r| match self.kind {
                WeightKind::Exponential => (-(r as f64) / self.b_c).exp(),
                WeightKind::Rectangular => 1.0,
            })
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(WeightProfile { w: raw.into_iter().map(|x| x / total).collect() })
    }
}

/// Normalized one-sided weights; `w[r-1]` belongs to offset `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    pub w: Vec<f64>,
}

impl WeightProfile {
    pub fn r_max(&self) -> usize {
        self.w.len()
    }

    pub fn at(&self, r: usize) -> f64 {
        if r == 0 || r > self.w.len() {
            0.0
        } else {
            self.w[r - 1]
        }
    }
}

/// Mean and median of each diagonal `r ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    pub r: Vec<usize>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
}

pub fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Mean that is exact for constant input and independent of element order.
pub(crate) fn robust_mean(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let base = v[0];
    base + v.iter().map(|x| x - base).sum::<f64>() / v.len() as f64
}

/// `Σ w_i v_i` for weights summing to one, exact when all `v_i` agree.
pub(crate) fn weighted_mean(w: &[f64], v: &[f64]) -> f64 {
    let base = v.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = w.iter().sum();
    base + w.iter().zip(v).map(|(a, x)| a * (x - base)).sum::<f64>() / total
}

pub fn band_profiles(x: &IntensityMatrix) -> Result<BandProfile> {
    if x.n < 3 {
        return Err(Error::Domain(format!("band profile needs n >= 3 (got {})", x.n)));
    }
    let mut out = BandProfile { r: Vec::new(), mean: Vec::new(), median: Vec::new() };
    for r in 1..x.n {
        let mut d = x.diagonal(r);
        out.r.push(r);
        out.mean.push(robust_mean(&mut d));
        out.median.push(median(&mut d));
    }
    Ok(out)
}

/// Replaces every element by the mean of its diagonal.
pub fn uniformize(x: &IntensityMatrix) -> IntensityMatrix {
    let mut out = x.clone();
    for r in 0..x.n {
        let mut d = x.diagonal(r);
        let m = robust_mean(&mut d);
        for k in 0..d.len() {
            out.set_sym(k + r, k, m);
        }
    }
    out
}

/// Randomly permutes the elements along every diagonal, keeping symmetry.
pub fn untexture(x: &IntensityMatrix, seed: u64) -> IntensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = x.clone();
    for r in 1..x.n {
        let mut d = x.diagonal(r);
        d.shuffle(&mut rng);
        for (k, v) in d.into_iter().enumerate() {
            out.set_sym(k + r, k, v);
        }
    }
    out
}

fn pn_off_diagonal(x: &IntensityMatrix) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    for r in 1..x.n {
        let mut d = x.diagonal(r);
        d.sort_by(f64::total_cmp);
        for v in d {
            s1 += v;
            s2 += v * v;
        }
    }
    if s2 == 0.0 {
        0.0
    } else {
        2.0 * s1 * s1 / s2
    }
}

/// `s = PN[X]/PN[X_unf]` over the off-diagonal elements.
pub fn sparsity_s(x: &IntensityMatrix) -> Result<f64> {
    let pn = pn_off_diagonal(x);
    if pn == 0.0 {
        return Err(Error::Degenerate("sparsity of an all-zero matrix".into()));
    }
    Ok(pn / pn_off_diagonal(&uniformize(x)))
}

/// Weighted mean over diagonals `Σ_r w_r mean_r`.
pub fn band_average(x: &IntensityMatrix, w: &BandWeight) -> Result<f64> {
    let wp = w.profile(x.n.saturating_sub(1))?;
    let means: Vec<f64> = (1..=wp.r_max()).map(|r| robust_mean(&mut x.diagonal(r))).collect();
    Ok(weighted_mean(&wp.w, &means))
}

/// Per-diagonal statistics combined with the band weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub harmonic: f64,
    pub geometric: f64,
    pub median: f64,
}

pub fn band_bounds(x: &IntensityMatrix, w: &BandWeight) -> Result<Bounds> {
    let wp = w.profile(x.n.saturating_sub(1))?;
    let mut b = Bounds { harmonic: 0.0, geometric: 0.0, median: 0.0 };
    for r in 1..=wp.r_max() {
        let mut d = x.diagonal(r);
        let k = d.len() as f64;
        let wr = wp.at(r);
        if d.iter().all(|&v| v > 0.0) {
            b.harmonic += wr * k / d.iter().map(|v| 1.0 / v).sum::<f64>();
            b.geometric += wr * (d.iter().map(|v| v.ln()).sum::<f64>() / k).exp();
        }
        b.median += wr * median(&mut d);
    }
    Ok(b)
}
