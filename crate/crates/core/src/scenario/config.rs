//! TOML scenario configuration.
//!
//! Unknown keys are rejected unless the file sets `strict = false`; the
//! command line `--strict` flag forces rejection regardless. All defaults
//! are filled in at parse time so the summary can echo the full config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplifier::{AngularGainModel, CellModel};
use crate::detection::TechnicalNoiseSpec;
use crate::error::{Error, Result};

pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    GainSweep,
    AngleSweep,
    HomodyneScan,
    ImageSubregion,
    ShapedLoEntanglement,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::GainSweep => "gain_sweep",
            ScenarioKind::AngleSweep => "angle_sweep",
            ScenarioKind::HomodyneScan => "homodyne_scan",
            ScenarioKind::ImageSubregion => "image_subregion",
            ScenarioKind::ShapedLoEntanglement => "shaped_lo_entanglement",
        }
    }
}

fn default_gain() -> f64 {
    2.0
}
fn default_seed_photons() -> f64 {
    1e4
}
fn default_one() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_slices() -> usize {
    CellModel::DEFAULT_SLICES
}
fn default_probe_transmission() -> f64 {
    CellModel::DEFAULT_PROBE_TRANSMISSION
}
fn default_conjugate_transmission() -> f64 {
    CellModel::DEFAULT_CONJUGATE_TRANSMISSION
}
fn default_phase_steps() -> usize {
    256
}
fn default_image_side() -> usize {
    32
}
fn default_pitch() -> f64 {
    0.25
}
fn default_budget() -> usize {
    crate::imaging::DEFAULT_MODE_BUDGET
}
fn default_mask() -> String {
    format!("{BUILTIN_PREFIX}uniform")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    #[serde(default = "default_slices")]
    pub n_slices: usize,
    #[serde(default = "default_probe_transmission")]
    pub probe_transmission: f64,
    #[serde(default = "default_conjugate_transmission")]
    pub conjugate_transmission: f64,
}

impl CellConfig {
    pub fn model(&self, total_gain: f64) -> Result<CellModel> {
        CellModel::new(
            self.n_slices,
            total_gain,
            self.probe_transmission,
            self.conjugate_transmission,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularConfig {
    pub peak_gain: f64,
    pub center_mrad: f64,
    pub fwhm_mrad: f64,
    pub spot_mrad: f64,
    pub cone_min_mrad: f64,
    pub cone_max_mrad: f64,
}

impl Default for AngularConfig {
    fn default() -> Self {
        let m = AngularGainModel::default();
        AngularConfig {
            peak_gain: m.peak_gain,
            center_mrad: m.center_mrad,
            fwhm_mrad: m.fwhm_mrad,
            spot_mrad: m.spot_mrad,
            cone_min_mrad: 2.0,
            cone_max_mrad: 10.0,
        }
    }
}

impl AngularConfig {
    pub fn model(&self) -> AngularGainModel {
        AngularGainModel {
            peak_gain: self.peak_gain,
            center_mrad: self.center_mrad,
            fwhm_mrad: self.fwhm_mrad,
            spot_mrad: self.spot_mrad,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierConfig {
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default)]
    pub cell: Option<CellConfig>,
    #[serde(default)]
    pub angular: Option<AngularConfig>,
}

impl Default for AmplifierConfig {
    fn default() -> Self {
        AmplifierConfig {
            gain: default_gain(),
            cell: None,
            angular: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepConfig {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.start + k as f64 * step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    #[serde(default = "default_phase_steps")]
    pub phase_steps: usize,
    #[serde(default = "default_true")]
    pub optimize_phase: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            phase_steps: default_phase_steps(),
            optimize_phase: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainProfile {
    #[default]
    Uniform,
    Angular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub name: String,
    pub probe: String,
    pub conjugate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoMaskConfig {
    pub name: String,
    pub mask: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageConfig {
    /// Seed mask: a P2 PGM path or `builtin:<name>`.
    #[serde(default = "default_mask")]
    pub mask: String,
    /// Grid size used for built-in masks; files define their own.
    #[serde(default = "default_image_side")]
    pub width: usize,
    #[serde(default = "default_image_side")]
    pub height: usize,
    #[serde(default = "default_pitch")]
    pub pitch_mrad: f64,
    #[serde(default = "default_budget")]
    pub mode_budget: usize,
    #[serde(default)]
    pub gain_profile: GainProfile,
    #[serde(default)]
    pub regions: Vec<RegionConfig>,
    #[serde(default)]
    pub lo_masks: Vec<LoMaskConfig>,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig {
            mask: default_mask(),
            width: default_image_side(),
            height: default_image_side(),
            pitch_mrad: default_pitch(),
            mode_budget: default_budget(),
            gain_profile: GainProfile::Uniform,
            regions: Vec::new(),
            lo_masks: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub amplifier: AmplifierConfig,
    /// Mean seed photon number `α²` (per pixel for image scenarios).
    #[serde(default = "default_seed_photons")]
    pub seed_photons: f64,
    #[serde(default = "default_one")]
    pub efficiency: f64,
    #[serde(default)]
    pub noise: TechnicalNoiseSpec,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub image: Option<ImageConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Reserved; the engine is deterministic.
    #[serde(default)]
    pub random_seed: u64,
    #[serde(default = "default_true")]
    pub strict: bool,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// A validated config plus any unknown keys that were tolerated.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub config: ScenarioConfig,
    pub ignored_keys: Vec<String>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Parses and validates a config held in memory. `source` names it in errors.
pub fn parse_config_str(text: &str, source: &str, base_dir: &Path, force_strict: bool) -> Result<ParsedConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        Error::Parse {
            path: source.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let mut ignored = Vec::new();
    let mut record = |path: serde_ignored::Path| ignored.push(path.to_string());
    let de = serde_ignored::Deserializer::new(table, &mut record);
    let mut config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        Error::config(
            if key == "." { "<root>".to_string() } else { key },
            e.into_inner().to_string(),
        )
    })?;

    if (force_strict || config.strict) && !ignored.is_empty() {
        return Err(Error::config(ignored[0].clone(), "unknown key"));
    }
    config.base_dir = base_dir.to_path_buf();
    config.materialize_defaults();
    config.validate()?;
    Ok(ParsedConfig {
        config,
        ignored_keys: ignored,
    })
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path, force_strict: bool) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &path.display().to_string(), &base, force_strict)
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("{v} is not finite")))
    }
}

impl ScenarioConfig {
    fn materialize_defaults(&mut self) {
        match self.kind {
            ScenarioKind::GainSweep => {
                self.sweep.get_or_insert(SweepConfig {
                    start: 1.0,
                    stop: 4.0,
                    steps: 31,
                });
            }
            ScenarioKind::AngleSweep => {
                self.amplifier.angular.get_or_insert_with(AngularConfig::default);
                self.sweep.get_or_insert(SweepConfig {
                    start: 0.0,
                    stop: 14.0,
                    steps: 141,
                });
            }
            ScenarioKind::HomodyneScan => {}
            ScenarioKind::ImageSubregion | ScenarioKind::ShapedLoEntanglement => {
                let image = self.image.get_or_insert_with(ImageConfig::default);
                if image.gain_profile == GainProfile::Angular {
                    self.amplifier.angular.get_or_insert_with(AngularConfig::default);
                }
                if self.kind == ScenarioKind::ImageSubregion && image.regions.is_empty() {
                    image.regions.push(RegionConfig {
                        name: "whole".into(),
                        probe: image.mask.clone(),
                        conjugate: image.mask.clone(),
                    });
                }
                if self.kind == ScenarioKind::ShapedLoEntanglement && image.lo_masks.is_empty() {
                    image.lo_masks.push(LoMaskConfig {
                        name: "uniform".into(),
                        mask: default_mask(),
                    });
                }
            }
        }
    }

    /// Resolves a file reference relative to the config file.
    pub fn resolve_path(&self, reference: &str) -> PathBuf {
        let p = Path::new(reference);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn check_file(&self, key: &str, reference: &str) -> Result<()> {
        if let Some(name) = reference.strip_prefix(BUILTIN_PREFIX) {
            if !crate::scenario::BUILTIN_MASKS.contains(&name) {
                return Err(Error::config(
                    key,
                    format!(
                        "unknown built-in mask `{name}` (available: {})",
                        crate::scenario::BUILTIN_MASKS.join(", ")
                    ),
                ));
            }
            return Ok(());
        }
        let path = self.resolve_path(reference);
        if !path.is_file() {
            return Err(Error::config(key, format!("file `{}` does not exist", path.display())));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let amp = &self.amplifier;
        check_finite("amplifier.gain", amp.gain)?;
        if amp.gain < 1.0 {
            return Err(Error::config(
                "amplifier.gain",
                format!("gain {} must be >= 1", amp.gain),
            ));
        }
        if let Some(cell) = &amp.cell {
            if cell.n_slices == 0 {
                return Err(Error::config("amplifier.cell.n_slices", "must be at least 1"));
            }
            for (key, t) in [
                ("amplifier.cell.probe_transmission", cell.probe_transmission),
                ("amplifier.cell.conjugate_transmission", cell.conjugate_transmission),
            ] {
                if !(t > 0.0 && t <= 1.0) {
                    return Err(Error::config(key, format!("transmission {t} outside (0, 1]")));
                }
            }
        }
        if let Some(a) = &amp.angular {
            a.model()
                .validate()
                .map_err(|e| Error::config("amplifier.angular", e.to_string()))?;
            if !(a.cone_min_mrad >= 0.0 && a.cone_min_mrad < a.cone_max_mrad) || !a.cone_max_mrad.is_finite() {
                return Err(Error::config(
                    "amplifier.angular.cone_max_mrad",
                    format!("invalid cone [{}, {}] mrad", a.cone_min_mrad, a.cone_max_mrad),
                ));
            }
        }
        check_finite("seed_photons", self.seed_photons)?;
        if self.seed_photons < 0.0 {
            return Err(Error::config("seed_photons", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::config(
                "efficiency",
                format!("efficiency {} outside [0, 1]", self.efficiency),
            ));
        }
        for (key, v) in [
            ("noise.electronic_floor_db", self.noise.electronic_floor_db),
            ("noise.pump_scatter_db", self.noise.pump_scatter_db),
        ] {
            if let Some(v) = v {
                check_finite(key, v)?;
            }
        }
        if let Some(sweep) = &self.sweep {
            check_finite("sweep.start", sweep.start)?;
            check_finite("sweep.stop", sweep.stop)?;
            if sweep.steps == 0 {
                return Err(Error::config("sweep.steps", "must be at least 1"));
            }
            if sweep.steps > 1 && !(sweep.stop > sweep.start) {
                return Err(Error::config("sweep.stop", "must be greater than sweep.start"));
            }
            match self.kind {
                ScenarioKind::GainSweep if sweep.start < 1.0 => {
                    return Err(Error::config("sweep.start", "gains must be >= 1"));
                }
                ScenarioKind::AngleSweep if sweep.start < 0.0 => {
                    return Err(Error::config("sweep.start", "angles must be >= 0"));
                }
                _ => {}
            }
        }
        if self.scan.phase_steps == 0 {
            return Err(Error::config("scan.phase_steps", "must be at least 1"));
        }
        if let Some(image) = &self.image {
            if image.width == 0 || image.height == 0 {
                return Err(Error::config("image.width", "image dimensions must be at least 1"));
            }
            if image.width.saturating_mul(image.height) > image.mode_budget {
                return Err(Error::config(
                    "image.mode_budget",
                    format!(
                        "{}x{} image exceeds the budget of {} pixels",
                        image.width, image.height, image.mode_budget
                    ),
                ));
            }
            if !(image.pitch_mrad > 0.0) || !image.pitch_mrad.is_finite() {
                return Err(Error::config("image.pitch_mrad", "must be positive"));
            }
            self.check_file("image.mask", &image.mask)?;
            for (i, r) in image.regions.iter().enumerate() {
                check_name(&format!("image.regions[{i}].name"), &r.name)?;
                self.check_file(&format!("image.regions[{i}].probe"), &r.probe)?;
                self.check_file(&format!("image.regions[{i}].conjugate"), &r.conjugate)?;
            }
            for (i, lo) in image.lo_masks.iter().enumerate() {
                check_name(&format!("image.lo_masks[{i}].name"), &lo.name)?;
                self.check_file(&format!("image.lo_masks[{i}].mask"), &lo.mask)?;
            }
        }
        Ok(())
    }
}

/// Names become file names, so keep them to a safe alphabet.
fn check_name(key: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(Error::config(
            key,
            format!("`{name}` must be nonempty and use only [A-Za-z0-9_-]"),
        ))
    }
}
