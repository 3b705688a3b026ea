use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AmplifierConfig, GainProfile, ImageConfig, ScenarioConfig, ScenarioKind, BUILTIN_PREFIX};
use super::summary::{emit_summary, to_json_bytes, ResultSummary, SUMMARY_FILE};
use crate::amplifier::{distributed_cell_output, estimate_mode_count, seeded_amplifier_output};
use crate::detection::{
    apply_technical_noise, intensity_difference_db, joint_phase_scan, phase_grid, to_db, HomodyneSpec, NoiseTrace,
};
use crate::entanglement::inseparability;
use crate::error::{Error, Result};
use crate::gaussian::{apply_channel, loss_channel, Beam, GaussianState, ModeLabel};
use crate::imaging::pgm::{intensity_image, write_pgm};
use crate::imaging::{
    amplify_image_with_budget, lo_profile_from_mask, load_mask, masked_seed, subregion_intensity_difference_db,
    GainMap, ImageState, Mask, MaskOptions, PixelGrid, REGION_THRESHOLD,
};

/// Runs one scenario, writes its outputs and `summary.json` into `out_dir`,
/// and returns the summary. Physics errors carry the scenario name.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<ResultSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let echo = serde_json::to_value(config).expect("config serializes");
    let mut out = Output {
        dir: out_dir,
        summary: ResultSummary::new(config.kind, echo),
    };
    let result = match config.kind {
        ScenarioKind::GainSweep => gain_sweep(config, &mut out),
        ScenarioKind::AngleSweep => angle_sweep(config, &mut out),
        ScenarioKind::HomodyneScan => homodyne_scan(config, &mut out),
        ScenarioKind::ImageSubregion => image_subregion(config, &mut out),
        ScenarioKind::ShapedLoEntanglement => shaped_lo(config, &mut out),
    };
    result.map_err(|e| match e {
        Error::Io { .. } | Error::Config { .. } | Error::Parse { .. } => e,
        other => Error::Scenario {
            scenario: config.kind.name().to_string(),
            source: Box::new(other),
        },
    })?;
    emit_summary(&out.summary, &out_dir.join(SUMMARY_FILE))?;
    Ok(out.summary)
}

struct Output<'a> {
    dir: &'a Path,
    summary: ResultSummary,
}

impl Output<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.summary.files.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, trace: &NoiseTrace) -> Result<()> {
        self.write(name, trace.to_csv().as_bytes())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, &to_json_bytes(value))
    }

    fn pgm(&mut self, name: &str, state: &ImageState, beam: Beam) -> Result<()> {
        let grid = state.grid();
        let image = intensity_image(grid.width, grid.height, &state.mean_intensity(beam));
        let path = self.dir.join(name);
        write_pgm(&path, &image)?;
        self.summary.files.push(name.to_string());
        Ok(())
    }
}

fn pair() -> (ModeLabel, ModeLabel) {
    (ModeLabel::probe(0), ModeLabel::conjugate(0))
}

/// Seeded single-pair output at `gain`, through the cell model if configured.
fn pair_state(amp: &AmplifierConfig, gain: f64, seed_photons: f64) -> Result<GaussianState> {
    let x = (2.0 * seed_photons).sqrt();
    match &amp.cell {
        Some(cell) => distributed_cell_output(&cell.model(gain)?, x, 0.0),
        None => seeded_amplifier_output(gain, x, 0.0),
    }
}

fn detect(state: GaussianState, efficiency: f64) -> Result<GaussianState> {
    if efficiency == 1.0 {
        return Ok(state);
    }
    apply_channel(&state, &loss_channel(efficiency, state.modes().to_vec())?)
}

fn pair_intensity_db(config: &ScenarioConfig, gain: f64) -> Result<f64> {
    let state = detect(
        pair_state(&config.amplifier, gain, config.seed_photons)?,
        config.efficiency,
    )?;
    let (p, c) = pair();
    intensity_difference_db(&state, &[p], &[c])
}

fn record_min(summary: &mut ResultSummary, trace: &NoiseTrace, value_key: &str, at_key: &str) {
    if let Some((x, v)) = trace.min() {
        summary.set_number(value_key, v);
        summary.set_number(at_key, x);
    }
}

fn gain_sweep(config: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let gains = config.sweep.as_ref().expect("materialized sweep").points();
    let values = gains
        .par_iter()
        .map(|&g| pair_intensity_db(config, g))
        .collect::<Result<Vec<_>>>()?;
    let trace = NoiseTrace::new(gains, values, "intensity_difference_db")?;
    let trace = apply_technical_noise(&trace, &config.noise);
    out.csv("intensity_difference.csv", &trace)?;
    record_min(&mut out.summary, &trace, "min_db", "min_db_gain");
    Ok(())
}

fn angle_sweep(config: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let angular = config.amplifier.angular.as_ref().expect("materialized angular model");
    let model = angular.model();
    let angles = config.sweep.as_ref().expect("materialized sweep").points();
    let gains: Vec<f64> = angles.iter().map(|&a| model.gain_at(a)).collect();
    let values = gains
        .par_iter()
        .map(|&g| pair_intensity_db(config, g))
        .collect::<Result<Vec<_>>>()?;

    let gain_trace = NoiseTrace::new(angles.clone(), gains.iter().map(|&g| to_db(g)).collect(), "gain_db")?;
    let trace = NoiseTrace::new(angles, values, "intensity_difference_db")?;
    let trace = apply_technical_noise(&trace, &config.noise);
    out.csv("gain.csv", &gain_trace)?;
    out.csv("intensity_difference.csv", &trace)?;

    record_min(&mut out.summary, &trace, "min_db", "min_db_angle_mrad");
    if let Some((x, v)) = gain_trace.max() {
        out.summary.set_number("peak_gain_db", v);
        out.summary.set_number("peak_angle_mrad", x);
    }
    let modes = estimate_mode_count(&model, angular.cone_min_mrad, angular.cone_max_mrad)?;
    out.summary.set("mode_count", modes);
    Ok(())
}

fn homodyne_scan(config: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let state = pair_state(&config.amplifier, config.amplifier.gain, 0.0)?;
    let spec = HomodyneSpec::single_pixel(0.0, config.efficiency)?;
    let phases = phase_grid(config.scan.phase_steps);
    let (diff, sum) = joint_phase_scan(&state, &spec, &spec, &phases)?;
    let diff = apply_technical_noise(&diff, &config.noise);
    let sum = apply_technical_noise(&sum, &config.noise);
    out.csv("difference.csv", &diff)?;
    out.csv("sum.csv", &sum)?;
    record_min(&mut out.summary, &diff, "min_diff_db", "min_diff_phase");
    if let Some((_, v)) = diff.max() {
        out.summary.set_number("max_diff_db", v);
    }

    let report = inseparability(&state, &spec, &spec, config.scan.optimize_phase)?;
    out.json("entanglement.json", &report)?;
    out.summary.set_number("inseparability", report.inseparability);
    out.summary.set("entangled", report.entangled);
    Ok(())
}

fn mask_options(image: &ImageConfig) -> MaskOptions {
    MaskOptions {
        threshold: None,
        angular_pitch_mrad: image.pitch_mrad,
        mode_budget: image.mode_budget,
    }
}

fn resolve_mask(config: &ScenarioConfig, image: &ImageConfig, reference: &str) -> Result<Mask> {
    match reference.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => {
            let grid = PixelGrid::with_budget(image.width, image.height, image.pitch_mrad, image.mode_budget)?;
            super::builtin_mask(name, grid)
        }
        None => load_mask(&config.resolve_path(reference), &mask_options(image)),
    }
}

fn check_shape(seed: &Mask, other: &Mask, what: &str) -> Result<()> {
    let (a, b) = (seed.grid(), other.grid());
    if a.width != b.width || a.height != b.height {
        return Err(Error::validation(format!(
            "{what} is {}x{} but the seed mask is {}x{}",
            b.width, b.height, a.width, a.height
        )));
    }
    Ok(())
}

fn image_state(config: &ScenarioConfig, image: &ImageConfig, seed_mask: &Mask) -> Result<ImageState> {
    let gain_map = match image.gain_profile {
        GainProfile::Uniform => GainMap::Uniform(config.amplifier.gain),
        GainProfile::Angular => {
            let angular = config.amplifier.angular.as_ref().expect("materialized angular model");
            GainMap::Angular {
                model: angular.model(),
                axis_mrad: angular.center_mrad,
            }
        }
    };
    let seed = masked_seed(seed_mask.grid(), seed_mask, config.seed_photons.sqrt())?;
    amplify_image_with_budget(&seed, &gain_map, image.mode_budget)?.with_loss(config.efficiency)
}

#[derive(Serialize)]
struct RegionResult<'a> {
    name: &'a str,
    probe: &'a str,
    conjugate: &'a str,
    intensity_difference_db: f64,
}

fn image_subregion(config: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let image = config.image.as_ref().expect("materialized image config");
    let seed_mask = resolve_mask(config, image, &image.mask)?;
    let state = image_state(config, image, &seed_mask)?;

    let mut results = Vec::with_capacity(image.regions.len());
    for r in &image.regions {
        let probe = resolve_mask(config, image, &r.probe)?;
        let conj = resolve_mask(config, image, &r.conjugate)?;
        check_shape(&seed_mask, &probe, &format!("region `{}` probe", r.name))?;
        check_shape(&seed_mask, &conj, &format!("region `{}` conjugate", r.name))?;
        let db = subregion_intensity_difference_db(
            &state,
            &probe.selector(REGION_THRESHOLD),
            &conj.selector(REGION_THRESHOLD),
        )?;
        let db = to_db(crate::detection::from_db(db) + noise_power(config));
        out.summary.set_number(format!("db_{}", r.name), db);
        results.push(RegionResult {
            name: &r.name,
            probe: &r.probe,
            conjugate: &r.conjugate,
            intensity_difference_db: db,
        });
    }
    out.json("regions.json", &results)?;
    out.pgm("probe.pgm", &state, Beam::Probe)?;
    out.pgm("conjugate.pgm", &state, Beam::Conjugate)?;
    Ok(())
}

/// Technical floors in linear power relative to the SQL, as added to traces.
fn noise_power(config: &ScenarioConfig) -> f64 {
    [config.noise.electronic_floor_db, config.noise.pump_scatter_db]
        .into_iter()
        .flatten()
        .map(crate::detection::from_db)
        .sum()
}

#[derive(Serialize)]
struct LoResult<'a> {
    name: &'a str,
    mask: &'a str,
    #[serde(flatten)]
    report: crate::entanglement::EntanglementReport,
}

fn shaped_lo(config: &ScenarioConfig, out: &mut Output) -> Result<()> {
    let image = config.image.as_ref().expect("materialized image config");
    let seed_mask = resolve_mask(config, image, &image.mask)?;
    // Detection loss enters through the LO efficiency, not the state.
    let lossless = ScenarioConfig {
        efficiency: 1.0,
        ..config.clone()
    };
    let state = image_state(&lossless, image, &seed_mask)?;

    let mut results = Vec::with_capacity(image.lo_masks.len());
    for lo in &image.lo_masks {
        let mask = resolve_mask(config, image, &lo.mask)?;
        check_shape(&seed_mask, &mask, &format!("LO mask `{}`", lo.name))?;
        let spec = lo_profile_from_mask(&mask, 0.0, config.efficiency)?;
        let report = inseparability(&state, &spec, &spec, config.scan.optimize_phase)?;
        out.summary
            .set_number(format!("inseparability_{}", lo.name), report.inseparability);
        results.push(LoResult {
            name: &lo.name,
            mask: &lo.mask,
            report,
        });
    }
    out.json("entanglement.json", &results)?;
    out.pgm("probe.pgm", &state, Beam::Probe)?;
    out.pgm("conjugate.pgm", &state, Beam::Conjugate)?;
    Ok(())
}
