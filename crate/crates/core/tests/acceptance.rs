//! Acceptance gate. Each test prints one `CRITERION n ... PASS|FAIL` line
//! and fails when its criterion is not met.

use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wqc_core::classical::{
    analytic_moments, low_frequency_spectrum, simulate_trajectory, spike_spectrum, spike_spectrum_with,
    LowFrequencyMode, SpectrumOptions,
};
use wqc_core::measures::{
    band_profiles, g_report, gc_weak_localization, network_average, solve_strip, sparsity_s, vrh_correct,
    BandWeight, IntensityMatrix, Network,
};
use wqc_core::quantum::{
    build_and_diagonalize, build_and_diagonalize_with, f_matrix, sum_rule_deviation, window_analytics,
    DiagonalizeOptions, SpectralWindow,
};
use wqc_core::scales::{derive_scales, experimental_scales, AtomParams, BilliardParams};
use wqc_core::stats::{brody_fit, brody_sample, mean_spacing, solution_spacings};

fn report(n: u32, name: &str, pass: bool, detail: String) {
    println!("CRITERION {n:>2} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    sxy / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

fn interp(x: &[f64], y: &[f64], t: f64) -> f64 {
    let i = x.partition_point(|&v| v < t).clamp(1, x.len() - 1);
    let f = (t - x[i - 1]) / (x[i] - x[i - 1]);
    y[i - 1] * (1.0 - f) + y[i] * f
}

#[test]
fn criterion_01_network_closed_forms() {
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let links: Vec<f64> = (0..n - 1).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
    let series = solve_strip(&Network::chain(&links)).unwrap().end_to_end;
    let harmonic = (n - 1) as f64 / links.iter().map(|g| 1.0 / g).sum::<f64>();
    let e_series = rel(series, harmonic);

    let g: Vec<f64> = (1..=6).map(|r| 1.0 / (r * r) as f64 * rng.random_range(0.5..2.0)).collect();
    let parallel = solve_strip(&Network::toeplitz(n, &g)).unwrap().bulk;
    let expect: f64 = g.iter().enumerate().map(|(i, v)| ((i + 1) * (i + 1)) as f64 * v).sum();
    let e_parallel = rel(parallel, expect);
    report(
        1,
        "resistor-network oracles",
        e_series < 1e-8 && e_parallel < 1e-8,
        format!("series rel err {e_series:.2e}, parallel rel err {e_parallel:.2e}, N = {n}"),
    );
}

#[test]
fn criterion_02_uniform_matrix() {
    let c = 3.25;
    let x = IntensityMatrix::toeplitz(300, |_| c);
    let s = sparsity_s(&x).unwrap();
    let g = g_report(&x, &BandWeight::exponential(7.0), c).unwrap();
    report(
        2,
        "uniform matrix",
        s == 1.0 && g.g_s == 1.0 && g.g_c == 1.0,
        format!("s = {s:?}, g_s = {:?}, g_c = {:?}", g.g_s, g.g_c),
    );
}

#[test]
fn criterion_03_gaussian_band() {
    let (n, b) = (2001, 50usize);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut v = vec![0.0; n * n];
    let mut in_band = 0;
    for i in 0..n {
        for j in 0..i {
            if i - j <= b {
                let z: f64 = rng.sample(StandardNormal);
                v[i * n + j] = z * z;
                v[j * n + i] = z * z;
                in_band += 1;
            }
        }
    }
    let x = IntensityMatrix::new(n, v, 1.0, 0.0).unwrap();
    let s = sparsity_s(&x).unwrap();
    let g = g_report(&x, &BandWeight::rectangular(b as f64), 1.0).unwrap();
    report(
        3,
        "Gaussian banded ensemble",
        (s - 1.0 / 3.0).abs() <= 0.02 && (0.3..=1.0).contains(&g.g_s),
        format!("s = {s:.4}, g_s = {:.4}, in-band elements = {in_band}", g.g_s),
    );
}

#[test]
fn criterion_04_classical_plateau() {
    let p = BilliardParams::reference();
    let s = derive_scales(&p);
    let c = simulate_trajectory(&p, 100_000, 4).unwrap();
    let grid: Vec<f64> = (0..100).map(|k| (20.0 + 0.37 * k as f64) * s.delta_l).collect();
    let est = spike_spectrum(&c, &grid).unwrap();
    let ratio = est.values.iter().sum::<f64>() / grid.len() as f64 / analytic_moments(&p).c_plateau;
    report(
        4,
        "classical plateau",
        (ratio - 1.0).abs() < 0.05,
        format!("u = {}, plateau / C_inf = {ratio:.4} over 20-57 Delta_L, 1e5 hits", s.u),
    );
}

#[test]
fn criterion_05_zero_frequency_enhancement() {
    let p = BilliardParams::reference();
    let segments = 16;
    let c_inf = analytic_moments(&p).c_plateau;
    // Long bouncing flights make single-trajectory estimates heavy tailed;
    // average independent trajectories.
    let runs = 8;
    let (mut measured, mut predicted) = (0.0, 0.0);
    for seed in 1..=runs {
        let c = simulate_trajectory(&p, 1_000_000, seed).unwrap();
        let est =
            spike_spectrum_with(&c.times(), &c.impulses(), c.t_total, &[0.0], SpectrumOptions { segments }).unwrap();
        measured += est.values[0] / c_inf / runs as f64;
        // The ω = 0 bin of a segment periodogram resolves frequencies down to 2π/T_seg.
        let resolution = 2.0 * PI * segments as f64 / c.t_total;
        predicted +=
            low_frequency_spectrum(resolution, &p, LowFrequencyMode::BouncingSmallOmega).unwrap() / c_inf / runs as f64;
    }
    let ratio = measured / predicted;
    report(
        5,
        "zero-frequency enhancement",
        (0.5..=2.0).contains(&ratio),
        format!("C(0)/C_inf = {measured:.2}, log-law prediction = {predicted:.2}, ratio = {ratio:.3}, {runs} x 1e6 hits"),
    );
}

#[test]
fn criterion_06_qcc() {
    let (center, width) = (10375.0, 6750.0);
    let p = BilliardParams::reference().with_energy(center);
    let s = derive_scales(&p);
    let w = SpectralWindow::centered(center, width);
    let sol = build_and_diagonalize(&w, &p).unwrap();
    let d = mean_spacing(&sol.eigenvalues).unwrap();
    let x = IntensityMatrix::from_fmatrix(&f_matrix(&sol, &p), d);
    let prof = band_profiles(&x).unwrap();

    // Classical reference: spike spectrum at the window center, rescaled to
    // each energy (C_E(ω) = s³ C(ω/s), s = v_E/v) and averaged over the window.
    let grid: Vec<f64> = (1..).map(|k| k as f64 * d / 4.0).take_while(|&o| o < 1.6 * s.delta_l).collect();
    let runs = 6;
    let mut cl = vec![0.0; grid.len()];
    for seed in 1..=runs {
        let c = simulate_trajectory(&p, 1_000_000, seed).unwrap();
        for (acc, v) in cl.iter_mut().zip(spike_spectrum(&c, &grid).unwrap().values) {
            *acc += v / runs as f64;
        }
    }
    let ne = 21;
    let classical = |om: f64| {
        (0..ne)
            .map(|i| {
                let e = w.e_lo + (i as f64 + 0.5) / ne as f64 * width;
                let sc = (e / center).sqrt();
                sc.powi(3) * interp(&grid, &cl, om / sc)
            })
            .sum::<f64>()
            / ne as f64
    };

    let bin = 6;
    let k = 2.0 * PI / d;
    let (mut worst, mut bins, mut median_ratio) = (0.0f64, 0, 0.0f64);
    let mut r = 1;
    while r + bin - 1 <= prof.r.len() {
        let (lo, hi) = (r as f64 - 0.5, (r + bin) as f64 - 0.5);
        if lo * d > s.delta_r && hi * d < s.delta_l {
            let mean = (r..r + bin).map(|j| prof.mean[j - 1]).sum::<f64>() / bin as f64;
            let median = (r..r + bin).map(|j| prof.median[j - 1]).sum::<f64>() / bin as f64;
            let sub = 8 * bin;
            let cv = (0..sub).map(|j| classical((lo + (j as f64 + 0.5) / sub as f64 * bin as f64) * d)).sum::<f64>()
                / sub as f64;
            worst = worst.max((k * mean / cv - 1.0).abs());
            median_ratio = median_ratio.max(median / mean);
            bins += 1;
        }
        r += bin;
    }
    report(
        6,
        "quantum-classical correspondence",
        bins > 0 && worst <= 0.25 && median_ratio < 0.3,
        format!(
            "1/hbar = {:.1}, {} levels, {bins} bins of {bin} levels in (Delta_R, Delta_L): worst |ratio - 1| = {worst:.3}, max median/mean = {median_ratio:.3}",
            1.0 / s.hbar_eff,
            sol.len()
        ),
    );
}

#[test]
fn criterion_07_sparsity_trend() {
    let (center, width) = (13618.0, 4000.0);
    let w = SpectralWindow::centered(center, width);
    let us = [0.03, 0.05, 0.08, 0.125, 0.2, 0.3];
    let mut gs = Vec::new();
    let mut dim = 0;
    for &u in &us {
        let p = BilliardParams::reference().with_energy(center).with_radius(1.0 / u);
        let sol = build_and_diagonalize(&w, &p).unwrap();
        dim = dim.max(sol.dim());
        let d = mean_spacing(&sol.eigenvalues).unwrap();
        let x = IntensityMatrix::from_fmatrix(&f_matrix(&sol, &p), d);
        // Band-matched cutoff ω_c = Δ_R.
        let b_c = derive_scales(&p).delta_r / d;
        let g = g_report(&x, &BandWeight::exponential(b_c), window_analytics(&w, &p).x_avg_inf).unwrap();
        gs.push(g.g);
    }
    let slope = log_slope(&us, &gs);
    report(
        7,
        "sparsity trend",
        (slope - 2.0).abs() <= 0.4 && dim <= 3000,
        format!("log-log slope of g vs u = {slope:.3}, max dimension {dim}, g = {gs:.4?}"),
    );
}

#[test]
fn criterion_08_brody() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for q in [0.0, 0.2, 0.38, 0.6, 0.8, 1.0] {
        let q_hat = brody_fit(&brody_sample(q, 10_000, &mut rng)).unwrap();
        worst = worst.max((q_hat - q).abs());
    }
    let p = BilliardParams::reference();
    let sol = build_and_diagonalize(&SpectralWindow::centered(p.energy, 8000.0), &p).unwrap();
    let d = mean_spacing(&sol.eigenvalues).unwrap();
    let q_billiard = brody_fit(&solution_spacings(&sol, d).unwrap()).unwrap();
    report(
        8,
        "Brody statistics",
        worst <= 0.05 && (0.25..=0.5).contains(&q_billiard),
        format!("synthetic worst |q_hat - q| = {worst:.3}; billiard q_hat = {q_billiard:.3} over {} levels", sol.len()),
    );
}

#[test]
fn criterion_09_experimental_scales() {
    let x = experimental_scales(&AtomParams::rubidium85()).unwrap();
    report(
        9,
        "experimental scales",
        rel(x.omega_l, 220.0) < 0.05 && rel(x.omega0, 7.5) < 0.05,
        format!("omega_L = {:.1} Hz, omega_0 = {:.2} Hz", x.omega_l, x.omega0),
    );
}

#[test]
fn criterion_10_sum_rule() {
    let p = BilliardParams::reference().with_energy(3000.0);
    let w = SpectralWindow { e_lo: 2000.0, e_hi: 4000.0, buffer: 0.0 };
    let sol = build_and_diagonalize_with(&w, &p, DiagonalizeOptions { report_all: true }).unwrap();
    let dev = sum_rule_deviation(&sol, &f_matrix(&sol, &p), &p).unwrap();
    report(10, "sum-rule invariance", dev < 1e-8, format!("max relative deviation {dev:.2e} over {} states", sol.len()));
}

#[test]
fn criterion_11_vrh_and_weak_localization() {
    let ulps = |a: f64, b: f64| (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs();
    let v1 = vrh_correct(1.0, 10.0).unwrap().value;
    let v2 = vrh_correct(E.powi(-4), E.powi(4)).unwrap().raw;
    let v3 = vrh_correct(E.powi(-4), E).unwrap().value;
    let wl = gc_weak_localization(1.0, 0.1).unwrap();
    let wl0 = gc_weak_localization(1.0, 1e-12).unwrap();
    let pass = v1 == 1.0
        && ulps(v2, 1.0) <= 4
        && ulps(v3, E.powi(-2)) <= 4
        && format!("{v3:.4}") == "0.1353"
        && ulps(wl, 1.0 - 0.1 * 20f64.ln()) <= 4
        && format!("{wl:.4}") == "0.7004"
        && (wl0 - 1.0).abs() < 1e-9;
    report(
        11,
        "VRH and weak localization",
        pass,
        format!("vrh: {v1}, {v2}, {v3:.6}; weak localization: {wl:.6}, ratio -> 0: {wl0:.12}"),
    );
}

#[test]
fn network_average_is_linear_in_intensity() {
    // Companion check for criterion 2: scaling X scales ⟨⟨X⟩⟩ exactly.
    let x = IntensityMatrix::toeplitz(200, |r| 1.0 / (1 + r) as f64);
    let a = network_average(&x, &BandWeight::exponential(5.0)).unwrap();
    let b = network_average(&x.scaled(4.0), &BandWeight::exponential(5.0)).unwrap();
    assert_eq!(b, 4.0 * a);
}
