//! Subcommand pipelines and artifact emission.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use wqc_core::classical::{analytic_moments, simulate_trajectory, spike_spectrum_with, SpectrumOptions};
use wqc_core::measures::{
    gs_theory, intensity_matrix, measure_report_for, BandWeight, IntensityMatrix, MeasureReport,
};
use wqc_core::quantum::{build_and_diagonalize, f_matrix, EigenSolution, FMatrix};
use wqc_core::response::{amplitude_window, ear_report, MeasureFactors};
use wqc_core::scales::{classify_regime, derive_scales, energy_for_hbar, BilliardParams};
use wqc_core::stats::{brody_fit, element_histogram, intensity, solution_spacings};
use wqc_core::{Error, Result};

use crate::config::RunConfig;
use crate::io::{
    collision_rows, sha256_hex, stamped, write_csv_file, write_json, write_matrix, MatrixDump, Provenance,
    COLLISION_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    ClassicalSpectrum,
    QuantumSolve,
    Measures,
    Stats,
    Ear,
    Sweep,
}

/// Seed of sweep point `index`, derived from the master seed.
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut buf = [0u8; 16];
    buf[..8].copy_from_slice(&master.to_le_bytes());
    buf[8..].copy_from_slice(&index.to_le_bytes());
    let h = sha256_hex(&buf);
    u64::from_str_radix(&h[..16], 16).expect("hex digest")
}

/// Hash of the configuration with the output location left out.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.output = PathBuf::new();
    sha256_hex(&serde_json::to_vec(&c).expect("config serializes"))
}

pub struct Run {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub prov: Provenance,
    pub artifacts: Vec<PathBuf>,
}

impl Run {
    pub fn new(cfg: RunConfig, jobs: usize) -> Self {
        let prov = Provenance::new(config_hash(&cfg), cfg.seed);
        let out = cfg.output.clone();
        Self { cfg, out, jobs: jobs.max(1), prov, artifacts: Vec::new() }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.artifacts.push(p.clone());
        p
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let p = self.path(name);
        write_csv_file(&p, &self.prov.clone(), header, rows)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let v = stamped(value, &self.prov)?;
        let p = self.path(name);
        write_json(&p, &v)
    }

    fn matrix(&mut self, stem: &str, m: &MatrixDump, description: &str) -> Result<()> {
        let paths = write_matrix(&self.out, stem, m, description, &self.prov)?;
        self.artifacts.extend(paths);
        Ok(())
    }

    /// Writes `resolved_config.json` and runs one subcommand.
    pub fn execute(&mut self, cmd: Command) -> Result<()> {
        fs::create_dir_all(&self.out).map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", self.out.display()))))?;
        self.write_resolved()?;
        match cmd {
            Command::ClassicalSpectrum => self.classical_spectrum(),
            Command::QuantumSolve => self.quantum_solve(),
            Command::Measures => self.measures().map(|_| ()),
            Command::Stats => self.stats(),
            Command::Ear => self.ear(),
            Command::Sweep => self.sweep(),
        }
    }

    fn write_resolved(&mut self) -> Result<()> {
        let p = self.cfg.params();
        let w = self.cfg.window();
        let resolved = json!({
            "config": self.cfg,
            "resolved": {
                "params": p,
                "window": w,
                "driving": self.cfg.driving(),
                "temperature": self.cfg.temperature(),
                "scales": derive_scales(&p),
            },
        });
        self.json("resolved_config.json", &resolved)
    }

    fn classical_spectrum(&mut self) -> Result<()> {
        let p = self.cfg.params();
        let c = self.cfg.classical;
        let seq = simulate_trajectory(&p, c.hits, self.cfg.seed)?;
        let s = derive_scales(&p);
        let top = c.omega_max * s.delta_l;
        let grid: Vec<f64> = (0..c.grid_points).map(|k| top * k as f64 / (c.grid_points - 1) as f64).collect();
        let est = spike_spectrum_with(
            &seq.times(),
            &seq.impulses(),
            seq.t_total,
            &grid,
            SpectrumOptions { segments: c.segments },
        )?;
        let c_inf = analytic_moments(&p).c_plateau;
        self.csv("collisions.csv", &COLLISION_HEADER, &collision_rows(&seq))?;
        let rows: Vec<Vec<f64>> =
            est.omega_grid.iter().zip(&est.values).map(|(&w, &v)| vec![w, v, v / c_inf]).collect();
        self.csv("spectrum.csv", &["omega", "C", "C_over_C_inf"], &rows)?;
        let tail: Vec<f64> = rows.iter().filter(|r| r[0] > 0.5 * top).map(|r| r[2]).collect();
        let summary = json!({
            "hits": seq.len(),
            "t_total": seq.t_total,
            "C_inf": c_inf,
            "tail_ratio": tail.iter().sum::<f64>() / tail.len().max(1) as f64,
            "zero_frequency_ratio": rows[0][2],
            "delta_l": s.delta_l,
            "delta_r": s.delta_r,
        });
        self.json("spectrum_summary.json", &summary)
    }

    fn solve(&self, p: &BilliardParams) -> Result<EigenSolution> {
        build_and_diagonalize(&self.cfg.window_for(p, true), p)
    }

    fn quantum_solve(&mut self) -> Result<()> {
        let p = self.cfg.params();
        let sol = self.solve(&p)?;
        let f = f_matrix(&sol, &p);
        let basis: Vec<Vec<f64>> =
            sol.basis.iter().map(|b| vec![f64::from(b.nx), f64::from(b.ny), b.energy]).collect();
        self.csv("basis.csv", &["nx", "ny", "energy"], &basis)?;
        let delta0 = p.mean_level_spacing();
        let levels: Vec<Vec<f64>> = sol
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &e)| vec![(sol.offset + j) as f64, e, sol.energy_width(j, delta0)])
            .collect();
        self.csv("eigenvalues.csv", &["index", "energy", "width_over_delta0"], &levels)?;
        let vectors = MatrixDump {
            rows: sol.len(),
            cols: sol.dim(),
            data: sol.vectors.clone(),
        };
        self.matrix("eigenvectors", &vectors, "row j holds the basis coefficients of eigenstate j")?;
        self.matrix("fmatrix", &fmatrix_dump(&f), "F_nm between the reported eigenstates")?;
        let summary = json!({
            "dim": sol.dim(),
            "levels": sol.len(),
            "offset": sol.offset,
            "quasi_degenerate": sol.quasi_degenerate.len(),
            "orthonormality_residual": sol.orthonormality_residual(),
            "window": sol.window,
        });
        self.json("solution_summary.json", &summary)
    }

    fn analyze(&self, p: &BilliardParams, pinned: bool) -> Result<(EigenSolution, IntensityMatrix, MeasureReport)> {
        let sol = build_and_diagonalize(&self.cfg.window_for(p, pinned), p)?;
        let x = intensity_matrix(&sol, p)?;
        let r = measure_report_for(&x, &sol, p, &self.cfg.measures)?;
        Ok((sol, x, r))
    }

    fn measures(&mut self) -> Result<MeasureReport> {
        let p = self.cfg.params();
        let (_, _, r) = self.analyze(&p, true)?;
        let s = derive_scales(&p);
        let k = 2.0 * std::f64::consts::PI / r.spacing;
        let prof = &r.bandprofile;
        let rows: Vec<Vec<f64>> = (0..prof.r.len())
            .map(|i| {
                let rr = prof.r[i] as f64;
                vec![rr, rr * r.spacing, prof.mean[i], prof.median[i], k * prof.mean[i], k * prof.median[i]]
            })
            .collect();
        self.csv("bandprofile.csv", &["r", "omega", "mean", "median", "C_a", "C_s"], &rows)?;
        let report = json!({
            "report": r,
            "regime": classify_regime(s.u, s.hbar_eff),
            "g_s_theory": gs_theory(s.u, s.hbar_eff, self.cfg.measures.alpha),
            "C_inf": analytic_moments(&p).c_plateau,
        });
        self.json("measure_report.json", &report)?;
        Ok(r)
    }

    fn stats(&mut self) -> Result<()> {
        let p = self.cfg.params();
        let (sol, x, r) = self.analyze(&p, true)?;
        let sample = solution_spacings(&sol, r.spacing)?;
        self.csv("spacings.csv", &["s"], &sample.values.iter().map(|&v| vec![v]).collect::<Vec<_>>())?;
        let f: FMatrix = f_matrix(&sol, &p);
        let rows: Vec<Vec<f64>> =
            intensity(&f).iter().zip(&f.energies).map(|(&i, &e)| vec![e, i]).collect();
        self.csv("intensity.csv", &["energy", "intensity"], &rows)?;
        let h = element_histogram(&x, &BandWeight { kind: self.cfg.measures.weight, b_c: r.b_c }, self.cfg.stats.bins)?;
        let rows: Vec<Vec<f64>> = h
            .counts
            .iter()
            .enumerate()
            .map(|(k, &c)| vec![h.edges[k], h.edges[k + 1], c as f64])
            .collect();
        self.csv("element_histogram.csv", &["ln_x_lo", "ln_x_hi", "count"], &rows)?;
        let brody = brody_fit(&sample);
        if let Err(e) = &brody {
            log::warn!("Brody fit skipped: {e}");
        }
        let summary = json!({
            "spacings": sample.values.len(),
            "brody_q": brody.as_ref().ok(),
            "brody_error": brody.as_ref().err().map(|e| e.to_string()),
            "zero_elements": h.underflow,
            "spacing": r.spacing,
        });
        self.json("stats_summary.json", &summary)
    }

    fn ear(&mut self) -> Result<()> {
        let p = self.cfg.params();
        let (_, _, r) = self.analyze(&p, true)?;
        let d = self.cfg.driving();
        let rep = ear_report(&p, self.cfg.temperature(), &d, &MeasureFactors { g_c: r.g_c, g_s: r.g_s })?;
        let s = derive_scales(&p);
        let out = json!({
            "ear": rep,
            "driving": d,
            "measures": { "g_c": r.g_c, "g_s": r.g_s, "g": r.g, "b_c": r.b_c },
            "amplitude_window": amplitude_window(s.b)?,
            "b": s.b,
        });
        self.json("ear_report.json", &out)
    }

    fn sweep(&mut self) -> Result<()> {
        let base = self.cfg.params();
        let hbars = self.cfg.sweep.hbar.clone().unwrap_or_else(|| vec![derive_scales(&base).hbar_eff]);
        let mut points = Vec::new();
        for &h in &hbars {
            for &u in &self.cfg.sweep.u {
                let mut p = base;
                p.radius = p.ly / u;
                if self.cfg.sweep.hbar.is_some() {
                    p.energy = energy_for_hbar(h, &p);
                }
                points.push((h, u, p));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let this = &*self;
        let results: Vec<Result<MeasureReport>> = pool.install(|| {
            points.par_iter().map(|(_, _, p)| this.analyze(p, false).map(|(_, _, r)| r)).collect()
        });
        let mut rows = Vec::with_capacity(points.len());
        for (i, ((h, u, p), res)) in points.iter().zip(results).enumerate() {
            let r = res?;
            rows.push(vec![
                i as f64,
                *u,
                *h,
                p.energy,
                r.dim as f64,
                r.levels as f64,
                r.b_c,
                r.s,
                r.g_c,
                r.g_s,
                r.g,
            ]);
        }
        self.csv(
            "sweep.csv",
            &["point", "u", "hbar", "energy", "dim", "levels", "b_c", "s", "g_c", "g_s", "g"],
            &rows,
        )?;
        let slopes: Vec<serde_json::Value> = hbars
            .iter()
            .map(|&h| {
                let sel: Vec<&Vec<f64>> = rows.iter().filter(|r| r[2] == h).collect();
                json!({ "hbar": h, "slope_g_vs_u": log_slope(&sel, 1, 10) })
            })
            .collect();
        let seeds: Vec<u64> = (0..rows.len() as u64).map(|i| point_seed(self.cfg.seed, i)).collect();
        self.json("sweep_summary.json", &json!({ "points": rows.len(), "point_seeds": seeds, "trends": slopes }))
    }
}

fn fmatrix_dump(f: &FMatrix) -> MatrixDump {
    MatrixDump { rows: f.len(), cols: f.len(), data: f.values.clone() }
}

/// Least-squares slope of `ln y` against `ln x` over the given rows.
fn log_slope(rows: &[&Vec<f64>], xi: usize, yi: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r[xi] > 0.0 && r[yi] > 0.0).map(|r| (r[xi].ln(), r[yi].ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Exit status for an error: 2 for configuration problems, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

/// Machine-readable error report.
pub fn error_json(e: &Error) -> serde_json::Value {
    let details = match e {
        Error::Config(v) | Error::InvalidParams(v) => v.clone(),
        _ => Vec::new(),
    };
    json!({ "error": e.kind(), "message": e.to_string(), "details": details, "exit_code": exit_code(e) })
}
