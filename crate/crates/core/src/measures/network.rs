//! Resistor-network (strip conductance) averages.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use super::matrix::{BandWeight, IntensityMatrix, WeightProfile};
use crate::error::{Error, Result};

/// Kirchhoff residual accepted without refinement, relative to the unit terminal current.
const RESIDUAL_TOL: f64 = 1e-10;

/// Symmetric conductance matrix on nodes `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub n: usize,
    g: Vec<f64>,
    /// Largest `|i − j|` with a nonzero conductance.
    reach: usize,
}

impl Network {
    pub fn zeros(n: usize) -> Self {
        Self { n, g: vec![0.0; n * n], reach: 0 }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.g[i * self.n + j] = v;
        self.g[j * self.n + i] = v;
        if v != 0.0 {
            self.reach = self.reach.max(i.abs_diff(j));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    /// `G_nm = w_r X_nm / r²` with `r = |n − m|`.
    pub fn from_intensity(x: &IntensityMatrix, w: &WeightProfile) -> Self {
        let mut net = Self::zeros(x.n);
        for r in 1..=w.r_max().min(x.n.saturating_sub(1)) {
            let c = w.at(r) / (r * r) as f64;
            for k in 0..x.n - r {
                net.set(k + r, k, c * x.get(k + r, k));
            }
        }
        // Same bulk criterion for X and its uniform reference.
        net.reach = w.r_max().min(x.n.saturating_sub(1));
        net
    }

    /// Translation-invariant network, `g[r-1]` between nodes `r` apart.
    pub fn toeplitz(n: usize, g: &[f64]) -> Self {
        let mut net = Self::zeros(n);
        for (i, &v) in g.iter().enumerate() {
            let r = i + 1;
            for k in 0..n.saturating_sub(r) {
                net.set(k + r, k, v);
            }
        }
        net
    }

    /// Nearest-neighbour chain with the given link conductances.
    pub fn chain(links: &[f64]) -> Self {
        let mut net = Self::zeros(links.len() + 1);
        for (k, &v) in links.iter().enumerate() {
            net.set(k + 1, k, v);
        }
        net
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = i.saturating_sub(self.reach);
        let hi = (i + self.reach + 1).min(self.n);
        (lo..hi).filter(move |&j| j != i).map(move |j| (j, self.get(i, j))).filter(|&(_, v)| v > 0.0)
    }

    fn component_of(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for (j, _) in self.neighbours(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen
    }
}

/// Voltages for unit current injected at node 0 and drawn at node `n − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSolution {
    /// Ground at node `n − 1`; NaN for nodes cut off from the terminals.
    pub voltages: Vec<f64>,
    pub connected: bool,
    /// `(n − 1)/(V_0 − V_{n−1})`.
    pub end_to_end: f64,
    /// `(b − a)/(V_a − V_b)` between the quarter points, free of contact
    /// effects; equals `end_to_end` when the strip is too short to have them.
    pub bulk: f64,
    /// Largest Kirchhoff current imbalance over all nodes.
    pub residual: f64,
}

pub fn solve_strip(net: &Network) -> Result<StripSolution> {
    let n = net.n;
    if n < 3 {
        return Err(Error::Domain(format!("strip needs at least 3 nodes (got {n})")));
    }
    let ground = n - 1;
    let inside = net.component_of(0);
    if !inside[ground] {
        log::warn!("network disconnected between terminals; conductance set to 0");
        return Ok(StripSolution {
            voltages: vec![f64::NAN; n],
            connected: false,
            end_to_end: 0.0,
            bulk: 0.0,
            residual: 0.0,
        });
    }
    let nodes: Vec<usize> = (0..ground).filter(|&i| inside[i]).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &i) in nodes.iter().enumerate() {
        index[i] = k;
    }
    let m = nodes.len();
    let mut lap = Mat::<f64>::zeros(m, m);
    for (k, &i) in nodes.iter().enumerate() {
        let mut diag = 0.0;
        for (j, v) in net.neighbours(i) {
            diag += v;
            if j != ground {
                lap[(k, index[j])] = -v;
            }
        }
        lap[(k, k)] = diag;
    }
    let mut rhs = Mat::<f64>::zeros(m, 1);
    rhs[(index[0], 0)] = 1.0;

    let mut v = match lap.llt(Side::Lower) {
        Ok(llt) => llt.solve(&rhs),
        Err(_) => {
            log::debug!("Cholesky failed; using LU");
            lap.partial_piv_lu().solve(&rhs)
        }
    };
    let mut residual = kirchhoff_residual(&lap, &v, &rhs);
    if residual > RESIDUAL_TOL {
        let lu = lap.partial_piv_lu();
        for _ in 0..3 {
            let r = &rhs - &lap * &v;
            v += lu.solve(&r);
            residual = kirchhoff_residual(&lap, &v, &rhs);
            if residual <= RESIDUAL_TOL {
                break;
            }
        }
        if residual > 1e2 * RESIDUAL_TOL {
            return Err(Error::Numeric(format!("Kirchhoff residual {residual:e} after refinement")));
        }
    }

    let mut voltages = vec![f64::NAN; n];
    voltages[ground] = 0.0;
    for (k, &i) in nodes.iter().enumerate() {
        voltages[i] = v[(k, 0)];
    }
    let residual = residual.max(full_residual(net, &voltages, &inside));
    let end_to_end = ground as f64 / voltages[0];
    let (a, b) = (nearest_inside(&inside, n / 4), nearest_inside(&inside, 3 * n / 4));
    let bulk = if b > a && voltages[a] > voltages[b] {
        (b - a) as f64 / (voltages[a] - voltages[b])
    } else {
        end_to_end
    };
    Ok(StripSolution { voltages, connected: true, end_to_end, bulk, residual })
}

fn kirchhoff_residual(lap: &Mat<f64>, v: &Mat<f64>, rhs: &Mat<f64>) -> f64 {
    let r = rhs - lap * v;
    (0..r.nrows()).map(|i| r[(i, 0)].abs()).fold(0.0, f64::max)
}

/// Current balance at every node including the grounded one.
fn full_residual(net: &Network, v: &[f64], inside: &[bool]) -> f64 {
    let n = net.n;
    let mut worst: f64 = 0.0;
    for i in (0..n).filter(|&i| inside[i]) {
        let out: f64 = net.neighbours(i).map(|(j, g)| g * (v[i] - v[j])).sum();
        let injected = if i == 0 {
            1.0
        } else if i == n - 1 {
            -1.0
        } else {
            0.0
        };
        worst = worst.max((out - injected).abs());
    }
    worst
}

fn nearest_inside(inside: &[bool], target: usize) -> usize {
    (0..inside.len())
        .filter(|&i| inside[i])
        .min_by_key(|&i| i.abs_diff(target))
        .unwrap_or(target)
}

/// Full breakdown of a network average.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkAverage {
    /// Bulk conductance normalized by the same strip with all `X = 1`.
    pub value: f64,
    pub bulk: f64,
    pub end_to_end: f64,
    pub reference_bulk: f64,
    pub residual: f64,
    pub connected: bool,
}

pub fn network_average_detailed(x: &IntensityMatrix, w: &BandWeight) -> Result<NetworkAverage> {
    let wp = w.profile(x.n.saturating_sub(1))?;
    // Work in units of the largest element: a uniform X then builds the
    // very same network as the reference and the ratio is exactly one.
    let scale = x.values.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Degenerate("network average of an all-zero matrix".into()));
    }
    let sol = solve_strip(&Network::from_intensity(&x.scaled(scale.recip()), &wp))?;
    let ones = IntensityMatrix::toeplitz(x.n, |_| 1.0);
    let reference = solve_strip(&Network::from_intensity(&ones, &wp))?;
    Ok(NetworkAverage {
        value: scale * (sol.bulk / reference.bulk),
        bulk: scale * sol.bulk,
        end_to_end: scale * sol.end_to_end,
        reference_bulk: reference.bulk,
        residual: sol.residual,
        connected: sol.connected,
    })
}

/// `⟨⟨X⟩⟩_s`: strip conductance with rates `w_r X_nm / r²`.
pub fn network_average(x: &IntensityMatrix, w: &BandWeight) -> Result<f64> {
    Ok(network_average_detailed(x, w)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::band_average;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn series_is_harmonic_mean() {
        let links: Vec<f64> = (0..499).map(|k| if k % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let s = solve_strip(&Network::chain(&links)).unwrap();
        let h = links.len() as f64 / links.iter().map(|g| 1.0 / g).sum::<f64>();
        assert!((s.end_to_end / h - 1.0).abs() < 1e-12, "{} {h}", s.end_to_end);
        let even: Vec<f64> = (0..500).map(|k| if k % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let s = solve_strip(&Network::chain(&even)).unwrap();
        assert!((s.end_to_end - 4.0 / 3.0).abs() < 1e-12);
        assert!((s.bulk - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_chain_is_harmonic_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let links: Vec<f64> = (0..499).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s = solve_strip(&Network::chain(&links)).unwrap();
        let h = links.len() as f64 / links.iter().map(|g| 1.0 / g).sum::<f64>();
        assert!((s.end_to_end / h - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_is_sum_of_r2_g() {
        let g: Vec<f64> = (1..=6).map(|r| 1.0 / (r as f64).powi(3)).collect();
        let s = solve_strip(&Network::toeplitz(500, &g)).unwrap();
        let expect: f64 = g.iter().enumerate().map(|(i, v)| ((i + 1) * (i + 1)) as f64 * v).sum();
        assert!((s.bulk / expect - 1.0).abs() < 1e-8, "{} {expect}", s.bulk);
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn toeplitz_matches_band_average() {
        let x = IntensityMatrix::toeplitz(300, |r| 1.0 + (r as f64 * 0.7).cos());
        for w in [BandWeight::exponential(2.0), BandWeight::rectangular(6.0)] {
            let a = band_average(&x, &w).unwrap();
            let s = network_average(&x, &w).unwrap();
            assert!((s / a - 1.0).abs() < 1e-8, "{s} {a}");
        }
    }

    #[test]
    fn uniform_returns_constant() {
        let x = IntensityMatrix::toeplitz(120, |_| 3.25);
        let s = network_average(&x, &BandWeight::exponential(4.0)).unwrap();
        assert_eq!(s, 3.25);
    }

    #[test]
    fn disconnected_gives_zero() {
        let mut links = vec![1.0; 20];
        links[10] = 0.0;
        let s = solve_strip(&Network::chain(&links)).unwrap();
        assert!(!s.connected);
        assert_eq!(s.end_to_end, 0.0);
    }

    #[test]
    fn isolated_interior_node_is_skipped() {
        // Node 5 detached, its neighbours bridged by a next-nearest link.
        let mut net = Network::chain(&[1.0; 10]);
        net.set(5, 4, 0.0);
        net.set(6, 5, 0.0);
        net.set(6, 4, 1.0);
        let s = solve_strip(&net).unwrap();
        assert!(s.connected && s.voltages[5].is_nan());
        assert!((s.end_to_end - 10.0 / 9.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn additivity_fails() {
        // Two chains with weak links in different places: in series each
        // is throttled, their sum is not.
        let n = 40;
        let w = BandWeight::rectangular(1.0);
        let mk = |weak: usize| {
            IntensityMatrix::toeplitz(n, |r| if r == 1 { 1.0 } else { 0.0 })
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| if (k / n).min(k % n) == weak && (k / n).abs_diff(k % n) == 1 { 1e-3 } else { v })
                .collect::<Vec<_>>()
        };
        let x = IntensityMatrix::new(n, mk(15), 1.0, 0.0).unwrap();
        let y = IntensityMatrix::new(n, mk(22), 1.0, 0.0).unwrap();
        let sx = network_average(&x, &w).unwrap();
        let sy = network_average(&y, &w).unwrap();
        let sxy = network_average(&x.sum(&y).unwrap(), &w).unwrap();
        assert!((sxy - sx - sy).abs() > 0.1 * sxy, "{sx} {sy} {sxy}");
    }

    fn random_banded(n: usize, seed: u64) -> IntensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let x = rng.random::<f64>().powi(4) + 1e-6;
                v[i * n + j] = x;
                v[j * n + i] = x;
            }
        }
        IntensityMatrix::new(n, v, 1.0, 0.0).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn scaling_is_exact(seed in 0u64..1000, lambda in 0.01f64..100.0) {
            let x = random_banded(60, seed);
            let w = BandWeight::exponential(2.0);
            let a = network_average(&x, &w).unwrap();
            let b = network_average(&x.scaled(lambda), &w).unwrap();
            prop_assert!((b / (lambda * a) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn bound_chain(seed in 0u64..1000) {
            let x = random_banded(80, seed);
            let w = BandWeight::exponential(2.0);
            let s = network_average(&x, &w).unwrap();
            let a = band_average(&x, &w).unwrap();
            let h = crate::measures::band_bounds(&x, &w).unwrap().harmonic;
            prop_assert!(h <= s * (1.0 + 1e-9) && s <= a * (1.0 + 1e-9), "{} {} {}", h, s, a);
        }

        #[test]
        fn current_is_conserved(seed in 0u64..1000) {
            let x = random_banded(50, seed);
            let wp = BandWeight::exponential(3.0).profile(49).unwrap();
            let s = solve_strip(&Network::from_intensity(&x, &wp)).unwrap();
            prop_assert!(s.residual < 1e-10);
        }
    }
}
