//! Run configuration: strict schema, defaults, validation and `WQC_` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use wqc_core::measures::MeasureOptions;
use wqc_core::quantum::SpectralWindow;
use wqc_core::response::DrivingSpec;
use wqc_core::scales::{derive_scales, BilliardParams};
use wqc_core::{Error, Result};

/// Environment variables `WQC_<SECTION>__<KEY>` override config keys.
pub const ENV_PREFIX: &str = "WQC_";

fn reference() -> BilliardParams {
    BilliardParams::reference()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilliardSection {
    pub lx: f64,
    pub ly: f64,
    /// `null`, `inf` or omitted-with-`flat` give the rectangle.
    pub radius: Option<f64>,
    pub eps: f64,
    pub mass: f64,
    pub energy: f64,
    pub gamma0: f64,
}

impl Default for BilliardSection {
    fn default() -> Self {
        let p = reference();
        Self { lx: p.lx, ly: p.ly, radius: Some(p.radius), eps: p.eps, mass: p.mass, energy: p.energy, gamma0: p.gamma0 }
    }
}

impl BilliardSection {
    pub fn params(&self) -> BilliardParams {
        BilliardParams {
            lx: self.lx,
            ly: self.ly,
            radius: self.radius.unwrap_or(f64::INFINITY),
            eps: self.eps,
            mass: self.mass,
            energy: self.energy,
            gamma0: self.gamma0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    /// Defaults to the billiard energy.
    pub center: Option<f64>,
    /// Window width in mean level spacings.
    pub levels: f64,
    pub buffer_fraction: f64,
}

impl Default for WindowSection {
    fn default() -> Self {
        Self { center: None, levels: 400.0, buffer_fraction: 0.15 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DrivingSection {
    /// Defaults to `Δ_R` (band-matched), or `Δ_L` for the flat box.
    pub omega_c: Option<f64>,
    /// Defaults to `0.01·Lx`.
    pub amplitude: Option<f64>,
    /// Defaults to `ω_c·A`.
    pub fdot_rms: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSection {
    pub hits: usize,
    pub segments: usize,
    pub grid_points: usize,
    /// Upper end of the frequency grid in units of `Δ_L`.
    pub omega_max: f64,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self { hits: 100_000, segments: 16, grid_points: 400, omega_max: 3.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsSection {
    pub bins: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        Self { bins: 40 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub u: Vec<f64>,
    /// Defaults to the billiard's own `ħ`.
    pub hbar: Option<Vec<f64>>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { u: vec![0.03, 0.05, 0.08, 0.125, 0.2, 0.3], hbar: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub billiard: BilliardSection,
    pub window: WindowSection,
    pub driving: DrivingSection,
    pub measures: MeasureOptions,
    pub classical: ClassicalSection,
    pub stats: StatsSection,
    pub sweep: SweepSection,
    /// Preparation temperature; defaults to the billiard energy.
    pub temperature: Option<f64>,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            billiard: BilliardSection::default(),
            window: WindowSection::default(),
            driving: DrivingSection::default(),
            measures: MeasureOptions::default(),
            classical: ClassicalSection::default(),
            stats: StatsSection::default(),
            sweep: SweepSection::default(),
            temperature: None,
            seed: 1,
            output: PathBuf::from("wqc-out"),
        }
    }
}

fn positive(v: &mut Vec<String>, name: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        v.push(format!("{name} must be positive and finite (got {x})"));
    }
}

impl RunConfig {
    pub fn params(&self) -> BilliardParams {
        self.billiard.params()
    }

    pub fn temperature(&self) -> f64 {
        self.temperature.unwrap_or(self.billiard.energy)
    }

    /// Energy window for a billiard, centered on its energy unless pinned.
    pub fn window_for(&self, p: &BilliardParams, pinned: bool) -> SpectralWindow {
        let center = if pinned { self.window.center.unwrap_or(p.energy) } else { p.energy };
        let width = self.window.levels * p.mean_level_spacing();
        let mut w = SpectralWindow::centered(center, width);
        w.buffer = self.window.buffer_fraction * width;
        w
    }

    pub fn window(&self) -> SpectralWindow {
        self.window_for(&self.params(), true)
    }

    pub fn driving(&self) -> DrivingSpec {
        let p = self.params();
        let s = derive_scales(&p);
        let omega_c = self.driving.omega_c.unwrap_or(if s.integrable { s.delta_l } else { s.delta_r });
        let amplitude = self.driving.amplitude.unwrap_or(0.01 * p.lx);
        DrivingSpec { fdot_rms: self.driving.fdot_rms.unwrap_or(omega_c * amplitude), omega_c, amplitude }
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self.params().violations().into_iter().map(|m| format!("billiard.{m}")).collect();
        if let Some(r) = self.billiard.radius {
            if r.is_nan() {
                v.push("billiard.radius must not be NaN".into());
            }
        }
        if let Some(c) = self.window.center {
            positive(&mut v, "window.center", c);
        }
        positive(&mut v, "window.levels", self.window.levels);
        if !(self.window.buffer_fraction >= 0.0 && self.window.buffer_fraction.is_finite()) {
            v.push(format!("window.buffer_fraction must be >= 0 (got {})", self.window.buffer_fraction));
        }
        for (name, x) in [
            ("driving.omega_c", self.driving.omega_c),
            ("driving.amplitude", self.driving.amplitude),
            ("driving.fdot_rms", self.driving.fdot_rms),
            ("temperature", self.temperature),
        ] {
            if let Some(x) = x {
                positive(&mut v, name, x);
            }
        }
        v.extend(self.measures.violations());
        if self.classical.hits < 2 {
            v.push(format!("classical.hits must be >= 2 (got {})", self.classical.hits));
        }
        if self.classical.segments == 0 {
            v.push("classical.segments must be >= 1".into());
        }
        if self.classical.grid_points < 2 {
            v.push(format!("classical.grid_points must be >= 2 (got {})", self.classical.grid_points));
        }
        positive(&mut v, "classical.omega_max", self.classical.omega_max);
        if self.stats.bins == 0 {
            v.push("stats.bins must be >= 1".into());
        }
        if self.sweep.u.is_empty() {
            v.push("sweep.u must be nonempty".into());
        }
        for &u in &self.sweep.u {
            positive(&mut v, "sweep.u entries", u);
        }
        match &self.sweep.hbar {
            Some(h) if h.is_empty() => v.push("sweep.hbar must be nonempty when given".into()),
            Some(h) => {
                for &x in h {
                    positive(&mut v, "sweep.hbar entries", x);
                }
            }
            None => {}
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(vec![msg.into()])
}

/// Parses a document into an untyped tree; `inf` in TOML maps to `null`.
pub fn parse_tree(text: &str, format: Format) -> Result<Value> {
    let v = match format {
        Format::Json => serde_json::from_str::<Value>(text).map_err(|e| config_error(format!("json: {e}")))?,
        Format::Toml => {
            let t: toml::Table = toml::from_str(text).map_err(|e| config_error(format!("toml: {}", e.message())))?;
            serde_json::to_value(t).map_err(|e| config_error(format!("toml: {e}")))?
        }
    };
    if !v.is_object() {
        return Err(config_error("top level must be a table"));
    }
    Ok(v)
}

/// Applies `WQC_SECTION__KEY=value` pairs. Values are read as JSON and
/// fall back to plain strings.
pub fn apply_overrides<I, K, V>(tree: &mut Value, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    for (k, raw) in vars {
        let Some(rest) = k.as_ref().strip_prefix(ENV_PREFIX) else { continue };
        if !rest.contains("__") {
            continue;
        }
        let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
        if path.iter().any(|s| s.is_empty()) {
            return Err(config_error(format!("malformed override {}", k.as_ref())));
        }
        let value = serde_json::from_str::<Value>(raw.as_ref()).unwrap_or_else(|_| Value::String(raw.as_ref().into()));
        let mut node = &mut *tree;
        for key in &path[..path.len() - 1] {
            let obj = node.as_object_mut().ok_or_else(|| config_error(format!("override {} crosses a value", k.as_ref())))?;
            node = obj.entry(key.clone()).or_insert_with(|| Value::Object(Default::default()));
        }
        let obj = node.as_object_mut().ok_or_else(|| config_error(format!("override {} crosses a value", k.as_ref())))?;
        obj.insert(path[path.len() - 1].clone(), value);
    }
    Ok(())
}

/// Strict decode of a tree plus validation of every section.
pub fn from_tree(tree: Value) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_value(tree).map_err(|e| config_error(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config_str(text: &str, format: Format) -> Result<RunConfig> {
    from_tree(parse_tree(text, format)?)
}

/// Reads, overrides from the process environment and validates.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let mut tree = parse_tree(&text, Format::from_path(path))?;
    apply_overrides(&mut tree, std::env::vars())?;
    from_tree(tree)
}

/// Defaults plus environment overrides, for runs without a file.
pub fn default_config() -> Result<RunConfig> {
    let mut tree = Value::Object(Default::default());
    apply_overrides(&mut tree, std::env::vars())?;
    from_tree(tree)
}
