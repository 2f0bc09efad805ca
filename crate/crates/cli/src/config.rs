use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jostfit::fitting::{MinimizeOptions, ModelKind, WaveSpec};
use jostfit::jostmodel::{BasisLabel, PolyBasis};
use jostfit::oracle::{DeltaPolicy, GridPolicy, PotentialSpec};
use jostfit::poles::SearchRegion;
use jostfit::specfun::SheetSelector;
use serde::Deserialize;

/// Marks errors caused by the configuration rather than the numerics.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub dataset: DatasetConfig,
    pub fit: FitConfig,
    #[serde(default)]
    pub poles: PolesConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
    pub l_max: u32,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub delta: DeltaPolicy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub model: ModelKind,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Width guess for the resonance-seeded start.
    #[serde(default = "default_seed_width")]
    pub seed_width: f64,
    /// Half-width of the random cloud of starts, in scaled units.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub options: Option<MinimizeOptions>,
    #[serde(default)]
    pub jost: Vec<JostWave>,
    #[serde(default)]
    pub rmatrix: Vec<RMatrixWave>,
    #[serde(default)]
    pub jost_taylor: Vec<TaylorWave>,
}

fn default_starts() -> usize {
    32
}
fn default_seed() -> u64 {
    1
}
fn default_seed_width() -> f64 {
    0.1
}
fn default_half_width() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JostWave {
    pub energies: Vec<f64>,
    pub labels: Vec<BasisLabel>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RMatrixWave {
    pub energies: Vec<f64>,
    pub labels: Vec<BasisLabel>,
    pub a: f64,
    #[serde(default)]
    pub b_r: f64,
    /// Starting reduced widths; the fit draws its starts around them.
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorWave {
    pub order: usize,
    pub e0: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolesConfig {
    #[serde(default)]
    pub regions: Vec<RegionConfig>,
    /// Also locate the exact resonances of the potential.
    #[serde(default)]
    pub exact: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    /// Partial wave; all waves when omitted.
    pub l: Option<u32>,
    pub re: (f64, f64),
    pub im: (f64, f64),
    #[serde(default = "resonance_sheet")]
    pub sheet: SheetSelector,
}

fn resonance_sheet() -> SheetSelector {
    SheetSelector::RESONANCE
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_curve_points")]
    pub curve_points: usize,
    #[serde(default = "default_insert_points")]
    pub insert_points: usize,
    /// Resonance ground truth (CSV `l,E_r,Gamma,tol_E_r,tol_Gamma_rel`).
    pub ground_truth: Option<PathBuf>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { curve_points: default_curve_points(), insert_points: default_insert_points(), ground_truth: None }
    }
}

fn default_curve_points() -> usize {
    600
}
fn default_insert_points() -> usize {
    201
}

impl RunConfig {
    /// Reads and validates a config; relative paths inside it are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(gt) = &cfg.report.ground_truth {
            if gt.is_relative() {
                cfg.report.ground_truth = Some(base.join(gt));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.validate().map_err(|e| config_err(e.to_string()))?;
        let d = &self.dataset;
        if !(0.0 < d.e_min && d.e_min < d.e_max) || d.n_points < 1 {
            bail!(config_err(format!("dataset range ({}, {}) with {} points", d.e_min, d.e_max, d.n_points)));
        }
        if let Some(gt) = &self.report.ground_truth {
            if !gt.exists() {
                bail!(config_err(format!("ground truth file {} does not exist", gt.display())));
            }
        }
        for r in &self.poles.regions {
            self.region(r).map_err(|e| config_err(format!("pole region: {e}")))?;
        }
        Ok(())
    }

    pub fn region(&self, r: &RegionConfig) -> Result<SearchRegion> {
        Ok(SearchRegion::new(r.re, r.im, r.sheet)?)
    }

    /// Per-wave fixed specifications for `model`, checked against `l_max`.
    pub fn waves(&self, model: ModelKind) -> Result<Vec<WaveSpec>> {
        let n = self.dataset.l_max as usize + 1;
        let mismatch =
            |what: &str, got: usize| config_err(format!("{what} lists {got} partial waves but l_max + 1 = {n}"));
        let waves: Vec<WaveSpec> = match model {
            ModelKind::Jost => {
                if self.fit.jost.len() != n {
                    bail!(mismatch("[[fit.jost]]", self.fit.jost.len()));
                }
                self.fit
                    .jost
                    .iter()
                    .map(|w| {
                        PolyBasis::new(w.energies.clone(), w.labels.clone())
                            .map(|basis| WaveSpec::Jost { basis })
                            .map_err(|e| config_err(format!("jost basis: {e}")))
                    })
                    .collect::<Result<_>>()?
            }
            ModelKind::Rmatrix => {
                if self.fit.rmatrix.len() != n {
                    bail!(mismatch("[[fit.rmatrix]]", self.fit.rmatrix.len()));
                }
                for w in &self.fit.rmatrix {
                    if w.gammas.len() != w.energies.len() || w.labels.len() != w.energies.len() || !(w.a > 0.0) {
                        bail!(config_err("each [[fit.rmatrix]] entry needs matching energies/labels/gammas and a > 0"));
                    }
                }
                self.fit
                    .rmatrix
                    .iter()
                    .map(|w| WaveSpec::Rmatrix { energies: w.energies.clone(), labels: w.labels.clone(), a: w.a, b_r: w.b_r })
                    .collect()
            }
            ModelKind::JostTaylor => {
                if self.fit.jost_taylor.len() != n {
                    bail!(mismatch("[[fit.jost_taylor]]", self.fit.jost_taylor.len()));
                }
                self.fit.jost_taylor.iter().map(|w| WaveSpec::JostTaylor { order: w.order, e0: w.e0 }).collect()
            }
        };
        Ok(waves)
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        self.fit.options.unwrap_or_default()
    }
}

/// One expected resonance with its acceptance tolerances.
#[derive(Debug, Clone, Deserialize)]
pub struct TruthRow {
    pub l: u32,
    #[serde(rename = "E_r")]
    pub e_r: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub tol_e_r: f64,
    pub tol_gamma_rel: f64,
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading ground truth {}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| config_err("ground truth file is empty"))?;
    if header.trim() != "l,E_r,Gamma,tol_E_r,tol_Gamma_rel" {
        bail!(config_err(format!("unexpected ground truth header `{header}`")));
    }
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                bail!(config_err(format!("ground truth row `{line}` needs 5 fields")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| config_err(format!("ground truth `{s}`: {e}")));
            Ok(TruthRow {
                l: f[0].parse().map_err(|e| config_err(format!("ground truth ℓ `{}`: {e}", f[0])))?,
                e_r: num(f[1])?,
                gamma: num(f[2])?,
                tol_e_r: num(f[3])?,
                tol_gamma_rel: num(f[4])?,
            })
        })
        .collect()
}
