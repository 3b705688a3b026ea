//! Four-wave-mixing amplifier models: the two-mode squeezer, continuous
//! evolution, a sliced gain/loss cell and the angular gain profile.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_channel, apply_symplectic, displace, loss_channel, vacuum_state, GaussianState, ModeLabel, SymplecticOp,
};

/// `2√(2 ln 2)`, the ratio between the FWHM and the standard deviation of a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Two-mode squeezer of photon-number gain `G = cosh² r` acting on a
/// probe/conjugate pair.
#[derive(Clone, Debug)]
pub struct TwoModeSqueezerSpec {
    gain: f64,
    probe: ModeLabel,
    conjugate: ModeLabel,
}

impl TwoModeSqueezerSpec {
    pub fn new(gain: f64, probe: ModeLabel, conjugate: ModeLabel) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::validation(format!("gain {gain} must be a finite value >= 1")));
        }
        if probe == conjugate {
            return Err(Error::validation("squeezer needs two distinct modes"));
        }
        Ok(TwoModeSqueezerSpec { gain, probe, conjugate })
    }

    /// Squeezer on `probe[0]`, `conjugate[0]`.
    pub fn single_pair(gain: f64) -> Result<Self> {
        Self::new(gain, ModeLabel::probe(0), ModeLabel::conjugate(0))
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// `r = arccosh √G`, equal to `κt`.
    pub fn squeeze_parameter(&self) -> f64 {
        self.gain.sqrt().acosh()
    }
}

/// `a₁ → c·a₁ + s·a₂†`, `a₂ → c·a₂ + s·a₁†` in interleaved `(x₁, p₁, x₂, p₂)`.
fn squeezer_matrix(c: f64, s: f64) -> DMatrix<f64> {
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]);
    m
}

/// Symplectic matrix of the squeezer: `X₋ = x₁ − x₂` and `P₊ = p₁ + p₂` shrink
/// by `e^{−r}`, `X₊` and `P₋` grow by `e^{r}`.
pub fn tms_symplectic(spec: &TwoModeSqueezerSpec) -> SymplecticOp {
    let c = spec.gain.sqrt();
    let s = (spec.gain - 1.0).sqrt();
    SymplecticOp::new(squeezer_matrix(c, s), vec![spec.probe.clone(), spec.conjugate.clone()])
        .expect("squeezer matrix is symplectic for every G >= 1")
}

/// Evolves the pair under `ȧ₁ = κ a₂†`, `ȧ₂ = κ a₁†` for a time `t`.
pub fn evolve_fwm(
    state: &GaussianState,
    kappa: f64,
    t: f64,
    probe: &ModeLabel,
    conjugate: &ModeLabel,
) -> Result<GaussianState> {
    let kt = kappa * t;
    if !(kt >= 0.0) || !kt.is_finite() {
        return Err(Error::validation(format!("κt = {kt} must be finite and >= 0")));
    }
    let op = SymplecticOp::new(
        squeezer_matrix(kt.cosh(), kt.sinh()),
        vec![probe.clone(), conjugate.clone()],
    )?;
    apply_symplectic(state, &op)
}

/// Probe seeded with a coherent state of mean quadratures `(x̄, p̄)`,
/// conjugate in vacuum, amplified with gain `G`.
pub fn seeded_amplifier_output(gain: f64, seed_x: f64, seed_p: f64) -> Result<GaussianState> {
    let spec = TwoModeSqueezerSpec::single_pair(gain)?;
    let vac = vacuum_state(vec![ModeLabel::probe(0), ModeLabel::conjugate(0)])?;
    let seeded = displace(&vac, &ModeLabel::probe(0), seed_x, seed_p)?;
    apply_symplectic(&seeded, &tms_symplectic(&spec))
}

/// Sliced gain/loss model of the vapor cell. The squeeze parameter and the
/// loss are split into `n_slices` equal parts (equal dB per slice) and
/// interleaved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellModel {
    pub n_slices: usize,
    pub total_gain: f64,
    pub probe_transmission: f64,
    pub conjugate_transmission: f64,
}

impl CellModel {
    pub const DEFAULT_SLICES: usize = 64;
    pub const DEFAULT_PROBE_TRANSMISSION: f64 = 0.8;
    pub const DEFAULT_CONJUGATE_TRANSMISSION: f64 = 1.0;

    pub fn new(n_slices: usize, total_gain: f64, probe_transmission: f64, conjugate_transmission: f64) -> Result<Self> {
        let cell = CellModel {
            n_slices,
            total_gain,
            probe_transmission,
            conjugate_transmission,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn lossless(n_slices: usize, total_gain: f64) -> Result<Self> {
        Self::new(n_slices, total_gain, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slices == 0 {
            return Err(Error::validation("cell needs at least one slice"));
        }
        if !(self.total_gain >= 1.0) || !self.total_gain.is_finite() {
            return Err(Error::validation(format!(
                "cell gain {} must be a finite value >= 1",
                self.total_gain
            )));
        }
        for (name, t) in [
            ("probe", self.probe_transmission),
            ("conjugate", self.conjugate_transmission),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::validation(format!("{name} transmission {t} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// `cosh²(r/n)`: squeeze parameters add under composition, gains do not multiply.
    pub fn slice_gain(&self) -> f64 {
        let r = self.total_gain.sqrt().acosh() / self.n_slices as f64;
        r.cosh().powi(2)
    }

    pub fn slice_transmissions(&self) -> (f64, f64) {
        let n = self.n_slices as f64;
        (
            self.probe_transmission.powf(1.0 / n),
            self.conjugate_transmission.powf(1.0 / n),
        )
    }
}

/// Runs a seeded probe through the sliced cell: each slice applies the
/// per-slice squeezer and then the per-slice losses.
pub fn distributed_cell_output(cell: &CellModel, seed_x: f64, seed_p: f64) -> Result<GaussianState> {
    cell.validate()?;
    let probe = ModeLabel::probe(0);
    let conjugate = ModeLabel::conjugate(0);
    let vac = vacuum_state(vec![probe.clone(), conjugate.clone()])?;
    let mut state = displace(&vac, &probe, seed_x, seed_p)?;

    let squeezer = tms_symplectic(&TwoModeSqueezerSpec::new(
        cell.slice_gain(),
        probe.clone(),
        conjugate.clone(),
    )?);
    let (tp, tc) = cell.slice_transmissions();
    let probe_loss = (tp < 1.0).then(|| loss_channel(tp, vec![probe.clone()])).transpose()?;
    let conj_loss = (tc < 1.0)
        .then(|| loss_channel(tc, vec![conjugate.clone()]))
        .transpose()?;

    for _ in 0..cell.n_slices {
        state = apply_symplectic(&state, &squeezer)?;
        if let Some(ch) = &probe_loss {
            state = apply_channel(&state, ch)?;
        }
        if let Some(ch) = &conj_loss {
            state = apply_channel(&state, ch)?;
        }
    }
    Ok(state)
}

/// Gain versus pump–probe angle: a Gaussian bump of height `G₀ − 1` above 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularGainModel {
    pub peak_gain: f64,
    pub center_mrad: f64,
    pub fwhm_mrad: f64,
    pub spot_mrad: f64,
}

impl Default for AngularGainModel {
    fn default() -> Self {
        AngularGainModel {
            peak_gain: 3.0,
            center_mrad: 7.0,
            fwhm_mrad: 8.0,
            spot_mrad: 1.0,
        }
    }
}

impl AngularGainModel {
    pub fn new(peak_gain: f64, center_mrad: f64, fwhm_mrad: f64, spot_mrad: f64) -> Result<Self> {
        let model = AngularGainModel {
            peak_gain,
            center_mrad,
            fwhm_mrad,
            spot_mrad,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_gain >= 1.0) || !self.peak_gain.is_finite() {
            return Err(Error::validation(format!(
                "peak gain {} must be a finite value >= 1",
                self.peak_gain
            )));
        }
        if !(self.center_mrad >= 0.0) || !self.center_mrad.is_finite() {
            return Err(Error::validation("gain center must be a finite angle >= 0"));
        }
        if !(self.fwhm_mrad > 0.0) || !self.fwhm_mrad.is_finite() {
            return Err(Error::validation("angular bandwidth must be positive"));
        }
        if !(self.spot_mrad > 0.0) || !self.spot_mrad.is_finite() {
            return Err(Error::validation("spot size must be positive"));
        }
        Ok(())
    }

    pub fn sigma_mrad(&self) -> f64 {
        self.fwhm_mrad / FWHM_PER_SIGMA
    }

    pub fn gain_at(&self, theta_mrad: f64) -> f64 {
        let sigma = self.sigma_mrad();
        let d = theta_mrad - self.center_mrad;
        1.0 + (self.peak_gain - 1.0) * (-d * d / (2.0 * sigma * sigma)).exp()
    }
}

pub fn angular_gain(model: &AngularGainModel, theta_mrad: f64) -> f64 {
    model.gain_at(theta_mrad)
}

/// Number of `spot`-diameter modes in the annular cone `[θ_min, θ_max]`,
/// counted as the area ratio `(θ_max² − θ_min²)/spot²` (square packing).
/// An order-of-magnitude estimate only.
pub fn estimate_mode_count(model: &AngularGainModel, theta_min: f64, theta_max: f64) -> Result<u64> {
    if !(theta_min >= 0.0 && theta_min < theta_max) || !theta_max.is_finite() {
        return Err(Error::validation(format!(
            "invalid acceptance cone [{theta_min}, {theta_max}] mrad"
        )));
    }
    if !(model.spot_mrad > 0.0) {
        return Err(Error::validation("spot size must be positive"));
    }
    let count = (theta_max * theta_max - theta_min * theta_min) / (model.spot_mrad * model.spot_mrad);
    // Guard against 95.99999999 for exact ratios.
    Ok((count * (1.0 + 1e-12)).floor() as u64)
}

/// Gain whose lossless squeezed joint variance, seen through detection
/// efficiency `η`, equals `target` (vacuum = 1): `η e^{−2r} + 1 − η = target`.
pub fn gain_for_joint_variance(target: f64, efficiency: f64) -> Result<f64> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::validation(format!("efficiency {efficiency} outside (0, 1]")));
    }
    let squeezed = (target - (1.0 - efficiency)) / efficiency;
    if !(squeezed > 0.0 && squeezed <= 1.0) {
        return Err(Error::validation(format!(
            "joint variance {target} is not reachable at efficiency {efficiency}"
        )));
    }
    let r = -0.5 * squeezed.ln();
    Ok(r.cosh().powi(2))
}

/// Gain at which the bright-seed intensity-difference noise `1/(2G − 1)`
/// sits `db_below_sql` dB under shot noise.
pub fn gain_for_intensity_squeezing_db(db_below_sql: f64) -> Result<f64> {
    if !(db_below_sql >= 0.0) || !db_below_sql.is_finite() {
        return Err(Error::validation("noise reduction must be a finite value >= 0 dB"));
    }
    Ok(0.5 * (10f64.powf(db_below_sql / 10.0) + 1.0))
}
