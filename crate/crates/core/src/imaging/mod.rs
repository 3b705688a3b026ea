//! Pixel-basis multimode imaging.
//!
//! Every pixel is one amplifier eigenmode: probe pixel `k` pairs with
//! conjugate pixel `k` and nothing else, so the output covariance is block
//! diagonal in 4x4 pixel-pair blocks. [`ImageState`] stores only those
//! blocks. Mode `2k` is `probe[k]`, mode `2k + 1` is `conjugate[k]`.

pub mod glyphs;
pub mod pgm;

use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplifier::{tms_symplectic, AngularGainModel, TwoModeSqueezerSpec};
use crate::detection::{intensity_difference_db, HomodyneSpec};
use crate::error::{Error, Result};
use crate::gaussian::{
    mean_photons_with, photon_covariance_with, symplectic_eigenvalues, Beam, GaussianState, ModeLabel,
    PhotonDifference, QuadratureModel, VACUUM_VARIANCE,
};

pub use pgm::GrayImage;

/// Default limit on `width · height`.
pub const DEFAULT_MODE_BUDGET: usize = 4096;
/// Largest image converted to a dense [`GaussianState`].
pub const DENSE_PIXEL_LIMIT: usize = 256;
/// Gray level above which a region file marks a pixel as included.
pub const REGION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub width: usize,
    pub height: usize,
    /// Far-field angle per pixel, in mrad.
    pub angular_pitch_mrad: f64,
}

impl PixelGrid {
    pub fn new(width: usize, height: usize, angular_pitch_mrad: f64) -> Result<Self> {
        Self::with_budget(width, height, angular_pitch_mrad, DEFAULT_MODE_BUDGET)
    }

    pub fn with_budget(width: usize, height: usize, angular_pitch_mrad: f64, budget: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation(format!("grid {width}x{height} has no pixels")));
        }
        if !(angular_pitch_mrad > 0.0) || !angular_pitch_mrad.is_finite() {
            return Err(Error::validation("angular pitch must be positive"));
        }
        let requested = width.saturating_mul(height);
        if requested > budget {
            return Err(Error::ModeBudget { requested, budget });
        }
        Ok(PixelGrid {
            width,
            height,
            angular_pitch_mrad,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.width, k % self.width)
    }

    fn same_shape(&self, other: &PixelGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Far-field angle of pixel `k` from the pump when the image is centered
    /// on a probe axis `axis_mrad` away from it.
    pub fn pixel_angle_mrad(&self, k: usize, axis_mrad: f64) -> f64 {
        let (r, c) = self.coords(k);
        let dx = (c as f64 + 0.5 - self.width as f64 / 2.0) * self.angular_pitch_mrad;
        let dy = (r as f64 + 0.5 - self.height as f64 / 2.0) * self.angular_pitch_mrad;
        (axis_mrad + dx).hypot(dy)
    }
}

/// Intensity transmission per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    grid: PixelGrid,
    transmission: Vec<f64>,
}

impl Mask {
    pub fn new(grid: PixelGrid, transmission: Vec<f64>) -> Result<Self> {
        if transmission.len() != grid.pixel_count() {
            return Err(Error::validation(format!(
                "mask has {} values for a {}x{} grid",
                transmission.len(),
                grid.width,
                grid.height
            )));
        }
        if transmission.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::validation("mask transmission outside [0, 1]"));
        }
        Ok(Mask { grid, transmission })
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    /// Pixels with transmission above `threshold`.
    pub fn selector(&self, threshold: f64) -> RegionSelector {
        RegionSelector {
            grid: self.grid,
            included: self.transmission.iter().map(|&t| t > threshold).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskOptions {
    /// Binarize gray levels at this value after rescaling to `[0, 1]`.
    pub threshold: Option<f64>,
    pub angular_pitch_mrad: f64,
    pub mode_budget: usize,
}

impl Default for MaskOptions {
    fn default() -> Self {
        MaskOptions {
            threshold: None,
            angular_pitch_mrad: 0.25,
            mode_budget: DEFAULT_MODE_BUDGET,
        }
    }
}

pub fn mask_from_image(image: &GrayImage, options: &MaskOptions) -> Result<Mask> {
    let grid = PixelGrid::with_budget(
        image.width,
        image.height,
        options.angular_pitch_mrad,
        options.mode_budget,
    )?;
    let mut transmission = image.normalized();
    if let Some(t) = options.threshold {
        for v in &mut transmission {
            *v = if *v > t { 1.0 } else { 0.0 };
        }
    }
    Mask::new(grid, transmission)
}

/// Reads a P2 PGM as a mask; gray values are rescaled by the file's maximum.
pub fn load_mask(path: &Path, options: &MaskOptions) -> Result<Mask> {
    mask_from_image(&pgm::read_pgm(path)?, options)
}

/// Reads a P2 PGM as a region: pixels brighter than half scale are included.
pub fn load_region(path: &Path, options: &MaskOptions) -> Result<RegionSelector> {
    Ok(load_mask(path, options)?.selector(REGION_THRESHOLD))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionSelector {
    grid: PixelGrid,
    included: Vec<bool>,
}

impl RegionSelector {
    pub fn new(grid: PixelGrid, included: Vec<bool>) -> Result<Self> {
        if included.len() != grid.pixel_count() {
            return Err(Error::validation("region does not match grid"));
        }
        Ok(RegionSelector { grid, included })
    }

    pub fn all(grid: PixelGrid) -> Self {
        RegionSelector {
            grid,
            included: vec![true; grid.pixel_count()],
        }
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn included(&self) -> &[bool] {
        &self.included
    }

    pub fn pixels(&self) -> impl Iterator<Item = usize> + '_ {
        self.included
            .iter()
            .enumerate()
            .filter_map(|(k, &inc)| inc.then_some(k))
    }

    pub fn complement(&self) -> Self {
        RegionSelector {
            grid: self.grid,
            included: self.included.iter().map(|b| !b).collect(),
        }
    }
}

/// Mean quadratures `(x̄, p̄)` per pixel of a seed beam.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamImage {
    grid: PixelGrid,
    amplitude: Vec<(f64, f64)>,
}

impl BeamImage {
    pub fn new(grid: PixelGrid, amplitude: Vec<(f64, f64)>) -> Result<Self> {
        if amplitude.len() != grid.pixel_count() {
            return Err(Error::validation("seed image does not match grid"));
        }
        if amplitude.iter().any(|(x, p)| !x.is_finite() || !p.is_finite()) {
            return Err(Error::validation("seed image contains non-finite amplitudes"));
        }
        Ok(BeamImage { grid, amplitude })
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn amplitude(&self) -> &[(f64, f64)] {
        &self.amplitude
    }
}

/// Uniform coherent seed of `α²` photons per pixel, cut in intensity by the mask.
pub fn masked_seed(grid: PixelGrid, mask: &Mask, alpha: f64) -> Result<BeamImage> {
    if !grid.same_shape(&mask.grid) {
        return Err(Error::validation(format!(
            "mask is {}x{}, grid is {}x{}",
            mask.grid.width, mask.grid.height, grid.width, grid.height
        )));
    }
    let scale = std::f64::consts::SQRT_2 * alpha;
    let amplitude = mask.transmission.iter().map(|&t| (scale * t.sqrt(), 0.0)).collect();
    BeamImage::new(grid, amplitude)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GainMap {
    Uniform(f64),
    /// Gain from the angular profile; the image is centered on a probe axis
    /// at `axis_mrad` from the pump.
    Angular {
        model: AngularGainModel,
        axis_mrad: f64,
    },
    PerPixel(Vec<f64>),
}

impl GainMap {
    pub fn gains(&self, grid: &PixelGrid) -> Result<Vec<f64>> {
        let n = grid.pixel_count();
        let gains = match self {
            GainMap::Uniform(g) => vec![*g; n],
            GainMap::Angular { model, axis_mrad } => {
                model.validate()?;
                (0..n)
                    .map(|k| model.gain_at(grid.pixel_angle_mrad(k, *axis_mrad)))
                    .collect()
            }
            GainMap::PerPixel(g) => {
                if g.len() != n {
                    return Err(Error::validation("per-pixel gain map does not match grid"));
                }
                g.clone()
            }
        };
        if let Some(bad) = gains.iter().find(|g| !(**g >= 1.0) || !g.is_finite()) {
            return Err(Error::validation(format!(
                "pixel gain {bad} must be a finite value >= 1"
            )));
        }
        Ok(gains)
    }
}

/// First and second moments of one probe/conjugate pixel pair, ordered
/// `(x_probe, p_probe, x_conj, p_conj)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBlock {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl PairBlock {
    pub fn vacuum() -> Self {
        PairBlock {
            mean: Vector4::zeros(),
            cov: Matrix4::identity() * VACUUM_VARIANCE,
        }
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&DMatrix::from_iterator(4, 4, self.cov.iter().copied()))
    }
}

/// Block-diagonal Gaussian state of an amplified image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageState {
    grid: PixelGrid,
    blocks: Vec<PairBlock>,
}

impl ImageState {
    pub fn new(grid: PixelGrid, blocks: Vec<PairBlock>) -> Result<Self> {
        if blocks.len() != grid.pixel_count() {
            return Err(Error::validation("block count does not match grid"));
        }
        Ok(ImageState { grid, blocks })
    }

    pub fn grid(&self) -> PixelGrid {
        self.grid
    }

    pub fn blocks(&self) -> &[PairBlock] {
        &self.blocks
    }

    /// Smallest symplectic eigenvalue over all blocks.
    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for b in &self.blocks {
            for nu in b.symplectic_eigenvalues()? {
                min = min.min(nu);
            }
        }
        Ok(min)
    }

    /// Mean photon number of every pixel of one beam.
    pub fn mean_intensity(&self, beam: Beam) -> Vec<f64> {
        let local = match beam {
            Beam::Probe => 0,
            Beam::Conjugate => 1,
        };
        self.blocks
            .iter()
            .map(|b| mean_photons_with(|a| b.mean[a], |r, c| b.cov[(r, c)], local))
            .collect()
    }

    /// Dense equivalent with modes ordered `probe[0], conjugate[0], probe[1], ...`.
    pub fn to_gaussian_state(&self) -> Result<GaussianState> {
        let n = self.blocks.len();
        if n > DENSE_PIXEL_LIMIT {
            return Err(Error::ModeBudget {
                requested: n,
                budget: DENSE_PIXEL_LIMIT,
            });
        }
        let modes = (0..n)
            .flat_map(|k| [ModeLabel::probe(k), ModeLabel::conjugate(k)])
            .collect();
        let mut mean = DVector::zeros(4 * n);
        let mut cov = DMatrix::zeros(4 * n, 4 * n);
        for (k, b) in self.blocks.iter().enumerate() {
            mean.rows_mut(4 * k, 4).copy_from(&b.mean);
            cov.view_mut((4 * k, 4 * k), (4, 4)).copy_from(&b.cov);
        }
        GaussianState::new(modes, mean, cov)
    }

    /// Same loss `η` on every probe and conjugate pixel.
    pub fn with_loss(&self, eta: f64) -> Result<ImageState> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::validation(format!("transmission {eta} outside [0, 1]")));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| PairBlock {
                mean: b.mean * eta.sqrt(),
                cov: b.cov * eta + Matrix4::identity() * ((1.0 - eta) * VACUUM_VARIANCE),
            })
            .collect();
        Ok(ImageState {
            grid: self.grid,
            blocks,
        })
    }
}

/// Splits `(index, value)` pairs by block, keyed by `index / stride`.
fn group_by_block(mut items: Vec<(usize, f64)>, stride: usize) -> Vec<(usize, Vec<(usize, f64)>)> {
    items.sort_by_key(|&(i, _)| i);
    let mut out: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
    for (i, v) in items {
        let (block, local) = (i / stride, i % stride);
        match out.last_mut() {
            Some((b, list)) if *b == block => list.push((local, v)),
            _ => out.push((block, vec![(local, v)])),
        }
    }
    out
}

impl QuadratureModel for ImageState {
    fn mode_count(&self) -> usize {
        2 * self.blocks.len()
    }

    fn mode_index(&self, label: &ModeLabel) -> Result<usize> {
        if label.pixel >= self.blocks.len() {
            return Err(Error::UnknownMode(label.clone()));
        }
        Ok(match label.beam {
            Beam::Probe => 2 * label.pixel,
            Beam::Conjugate => 2 * label.pixel + 1,
        })
    }

    fn beam_pixel_count(&self, _beam: Beam) -> usize {
        self.blocks.len()
    }

    fn sparse_variance(&self, coeffs: &[(usize, f64)]) -> f64 {
        let mut v = 0.0;
        for (block, list) in group_by_block(coeffs.to_vec(), 4) {
            let cov = &self.blocks[block].cov;
            for &(a, ca) in &list {
                for &(b, cb) in &list {
                    v += ca * cb * cov[(a, b)];
                }
            }
        }
        v.max(0.0)
    }

    fn mode_mean(&self, m: usize) -> (f64, f64) {
        let b = &self.blocks[m / 2];
        let local = 2 * (m % 2);
        (b.mean[local], b.mean[local + 1])
    }

    fn photon_difference(&self, plus: &[usize], minus: &[usize]) -> PhotonDifference {
        let signed: Vec<(usize, f64)> = plus
            .iter()
            .map(|&m| (m, 1.0))
            .chain(minus.iter().map(|&m| (m, -1.0)))
            .collect();
        let mut variance = 0.0;
        for (block, list) in group_by_block(signed, 2) {
            let b = &self.blocks[block];
            let mean = |a: usize| b.mean[a];
            let cov = |r: usize, c: usize| b.cov[(r, c)];
            for &(i, si) in &list {
                for &(j, sj) in &list {
                    variance += si * sj * photon_covariance_with(mean, cov, i, j);
                }
            }
        }
        let total = |set: &[usize]| {
            set.iter()
                .map(|&m| {
                    let b = &self.blocks[m / 2];
                    mean_photons_with(|a| b.mean[a], |r, c| b.cov[(r, c)], m % 2)
                })
                .sum::<f64>()
        };
        PhotonDifference {
            mean_plus: total(plus),
            mean_minus: total(minus),
            variance: variance.max(0.0),
        }
    }
}

/// Seeds each probe pixel and amplifies every probe/conjugate pixel pair
/// independently with its own gain.
pub fn amplify_image(seed: &BeamImage, gain_map: &GainMap) -> Result<ImageState> {
    amplify_image_with_budget(seed, gain_map, DEFAULT_MODE_BUDGET)
}

pub fn amplify_image_with_budget(seed: &BeamImage, gain_map: &GainMap, budget: usize) -> Result<ImageState> {
    let grid = seed.grid;
    if grid.pixel_count() > budget {
        return Err(Error::ModeBudget {
            requested: grid.pixel_count(),
            budget,
        });
    }
    let gains = gain_map.gains(&grid)?;
    let blocks = gains
        .par_iter()
        .zip(seed.amplitude.par_iter())
        .map(|(&g, &(x, p))| {
            let op = tms_symplectic(&TwoModeSqueezerSpec::single_pair(g)?);
            let s = Matrix4::from_iterator(op.matrix().iter().copied());
            let vac = PairBlock::vacuum();
            Ok(PairBlock {
                mean: s * Vector4::new(x, p, 0.0, 0.0),
                cov: s * vac.cov * s.transpose(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ImageState::new(grid, blocks)
}

/// Labels of the included pixels of one beam. Excluded pixels are discarded,
/// not detected.
pub fn region_weights(selector: &RegionSelector, beam: Beam) -> Result<Vec<ModeLabel>> {
    let labels: Vec<ModeLabel> = selector.pixels().map(|k| ModeLabel::new(beam, k)).collect();
    if labels.is_empty() {
        return Err(Error::validation("region selects no pixels"));
    }
    Ok(labels)
}

/// Intensity-difference noise between a probe region and a conjugate region.
pub fn subregion_intensity_difference_db(
    state: &ImageState,
    probe_region: &RegionSelector,
    conj_region: &RegionSelector,
) -> Result<f64> {
    for region in [probe_region, conj_region] {
        if !region.grid.same_shape(&state.grid) {
            return Err(Error::validation("region does not match image grid"));
        }
    }
    let probe = region_weights(probe_region, Beam::Probe)?;
    let conj = region_weights(conj_region, Beam::Conjugate)?;
    let bright: f64 = probe
        .iter()
        .chain(&conj)
        .map(|l| {
            let (x, p) = state.mode_mean(state.mode_index(l).expect("pixel in grid"));
            0.5 * (x * x + p * p)
        })
        .sum();
    if !(bright > 0.0) {
        return Err(Error::BrightBeamUndefined(
            "the selected regions carry no seeded light".into(),
        ));
    }
    intensity_difference_db(state, &probe, &conj)
}

/// LO profile `∝ √T` over the mask, normalized to one measured mode.
pub fn lo_profile_from_mask(mask: &Mask, lo_phase: f64, efficiency: f64) -> Result<HomodyneSpec> {
    if mask.transmission.iter().all(|&t| t == 0.0) {
        return Err(Error::validation("LO mask has no transmitting pixels"));
    }
    HomodyneSpec::normalized(
        mask.transmission.iter().map(|t| t.sqrt()).collect(),
        lo_phase,
        efficiency,
    )
}
