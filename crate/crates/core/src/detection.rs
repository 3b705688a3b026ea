//! Intensity and homodyne detection referenced to the standard quantum limit.
//!
//! Joint homodyne variances are normalized so that two vacuum modes give
//! 1 (0 dB). Intensity-difference noise is normalized by the total mean
//! photon number, the shot noise of coherent beams of the same powers.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Beam, ModeLabel, QuadratureModel, VACUUM_VARIANCE};

/// Tolerance on the L2 norm of LO weights.
pub const WEIGHT_NORM_TOL: f64 = 1e-12;

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A homodyne detector: the LO spatial profile over the pixels of one beam,
/// its phase offset and the detection efficiency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSpec {
    weights: Vec<f64>,
    lo_phase: f64,
    efficiency: f64,
}

impl HomodyneSpec {
    pub fn new(weights: Vec<f64>, lo_phase: f64, efficiency: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::validation("LO profile has no pixels"));
        }
        if weights.iter().any(|w| !w.is_finite()) || !lo_phase.is_finite() {
            return Err(Error::validation("LO profile contains non-finite values"));
        }
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > WEIGHT_NORM_TOL {
            return Err(Error::validation(format!("LO weights have norm {norm}, expected 1")));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::validation(format!("efficiency {efficiency} outside [0, 1]")));
        }
        Ok(HomodyneSpec {
            weights,
            lo_phase,
            efficiency,
        })
    }

    /// Rescales `weights` to unit norm first.
    pub fn normalized(weights: Vec<f64>, lo_phase: f64, efficiency: f64) -> Result<Self> {
        let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::validation("LO profile is identically zero"));
        }
        Self::new(weights.into_iter().map(|w| w / norm).collect(), lo_phase, efficiency)
    }

    pub fn single_pixel(lo_phase: f64, efficiency: f64) -> Result<Self> {
        Self::new(vec![1.0], lo_phase, efficiency)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lo_phase(&self) -> f64 {
        self.lo_phase
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn with_efficiency(&self, efficiency: f64) -> Result<Self> {
        Self::new(self.weights.clone(), self.lo_phase, efficiency)
    }

    pub fn with_phase(&self, lo_phase: f64) -> Result<Self> {
        Self::new(self.weights.clone(), lo_phase, self.efficiency)
    }
}

/// Values in dB relative to the SQL against an increasing abscissa.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrace {
    abscissa: Vec<f64>,
    values_db: Vec<f64>,
    label: String,
}

impl NoiseTrace {
    pub fn new(abscissa: Vec<f64>, values_db: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if abscissa.len() != values_db.len() {
            return Err(Error::validation(format!(
                "trace has {} abscissa points and {} values",
                abscissa.len(),
                values_db.len()
            )));
        }
        if abscissa.iter().chain(&values_db).any(|v| !v.is_finite()) {
            return Err(Error::validation("trace contains non-finite values"));
        }
        if abscissa.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("trace abscissa is not strictly increasing"));
        }
        let label = label.into();
        if label.contains(['\n', '\r']) {
            return Err(Error::validation("trace label must be a single line"));
        }
        Ok(NoiseTrace {
            abscissa,
            values_db,
            label,
        })
    }

    pub fn abscissa(&self) -> &[f64] {
        &self.abscissa
    }

    pub fn values_db(&self) -> &[f64] {
        &self.values_db
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// `(abscissa, value)` of the smallest value; first one wins on ties.
    pub fn min(&self) -> Option<(f64, f64)> {
        self.extreme(|a, b| a < b)
    }

    pub fn max(&self) -> Option<(f64, f64)> {
        self.extreme(|a, b| a > b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&x, &v) in self.abscissa.iter().zip(&self.values_db) {
            if best.is_none_or(|(_, b)| better(v, b)) {
                best = Some((x, v));
            }
        }
        best
    }

    /// `# label`, then `abscissa,value_db`, then one row per point with
    /// 9 significant digits and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\nabscissa,value_db\n", self.label);
        for (&x, &v) in self.abscissa.iter().zip(&self.values_db) {
            out.push_str(&format_significant(x, 9));
            out.push(',');
            out.push_str(&format_significant(v, 9));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |line: usize, column: usize, message: String| Error::Parse {
            path: "<csv>".into(),
            line,
            column,
            message,
        };
        let mut lines = text.lines().enumerate();
        let label = match lines.next() {
            Some((_, l)) if l.starts_with("# ") => l[2..].to_string(),
            _ => return Err(parse_err(1, 1, "expected `# label` header".into())),
        };
        match lines.next() {
            Some((_, "abscissa,value_db")) => {}
            _ => return Err(parse_err(2, 1, "expected `abscissa,value_db` header".into())),
        }
        let mut abscissa = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let (a, v) = line
                .split_once(',')
                .ok_or_else(|| parse_err(i + 1, 1, "expected two comma-separated fields".into()))?;
            abscissa.push(
                a.parse()
                    .map_err(|e| parse_err(i + 1, 1, format!("bad abscissa `{a}`: {e}")))?,
            );
            values.push(
                v.parse()
                    .map_err(|e| parse_err(i + 1, a.len() + 2, format!("bad value `{v}`: {e}")))?,
            );
        }
        NoiseTrace::new(abscissa, values, label)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Formats `v` with exactly `sig` significant digits: fixed notation for
/// decimal exponents in `[-5, sig)`, otherwise `d.ddde±XX`.
pub fn format_significant(v: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if v == 0.0 {
        return format!("{:.*}", sig - 1, 0.0);
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{:.*}", (sig as i32 - 1 - exp) as usize, v)
    }
}

/// Constant additive noise floors in dB relative to the SQL. `None` disables a floor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TechnicalNoiseSpec {
    pub electronic_floor_db: Option<f64>,
    pub pump_scatter_db: Option<f64>,
}

impl TechnicalNoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for v in [self.electronic_floor_db, self.pump_scatter_db].into_iter().flatten() {
            if !v.is_finite() {
                return Err(Error::validation("technical noise floors must be finite"));
            }
        }
        Ok(())
    }

    pub fn is_disabled(&self) -> bool {
        self.electronic_floor_db.is_none() && self.pump_scatter_db.is_none()
    }

    fn added_power(&self) -> f64 {
        [self.electronic_floor_db, self.pump_scatter_db]
            .into_iter()
            .flatten()
            .map(from_db)
            .sum()
    }
}

/// Adds the floors to every point in linear power.
pub fn apply_technical_noise(trace: &NoiseTrace, spec: &TechnicalNoiseSpec) -> NoiseTrace {
    let extra = spec.added_power();
    let values_db = trace.values_db.iter().map(|&v| to_db(from_db(v) + extra)).collect();
    NoiseTrace {
        abscissa: trace.abscissa.clone(),
        values_db,
        label: trace.label.clone(),
    }
}

fn resolve_sets<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_set: &[ModeLabel],
    conj_set: &[ModeLabel],
) -> Result<(Vec<usize>, Vec<usize>)> {
    if probe_set.is_empty() || conj_set.is_empty() {
        return Err(Error::validation("detection sets must be nonempty"));
    }
    let mut seen = std::collections::HashSet::new();
    for label in probe_set.iter().chain(conj_set) {
        if !seen.insert(label.key()) {
            return Err(Error::validation(format!(
                "mode {label} appears twice in the detection sets"
            )));
        }
    }
    let resolve = |set: &[ModeLabel]| set.iter().map(|l| state.mode_index(l)).collect::<Result<Vec<_>>>();
    Ok((resolve(probe_set)?, resolve(conj_set)?))
}

/// Shot-noise variance of the photocurrent difference for coherent beams of
/// the same powers: the total mean photon number of both sets.
pub fn sql_intensity_difference<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_set: &[ModeLabel],
    conj_set: &[ModeLabel],
) -> Result<f64> {
    let (p, c) = resolve_sets(state, probe_set, conj_set)?;
    let d = state.photon_difference(&p, &c);
    Ok(d.mean_plus + d.mean_minus)
}

/// Intensity-difference noise relative to the SQL, in dB, from exact
/// photon-number statistics.
pub fn intensity_difference_db<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_set: &[ModeLabel],
    conj_set: &[ModeLabel],
) -> Result<f64> {
    let (p, c) = resolve_sets(state, probe_set, conj_set)?;
    let d = state.photon_difference(&p, &c);
    let sql = d.mean_plus + d.mean_minus;
    if !(sql > 0.0) {
        return Err(Error::BrightBeamUndefined(
            "detected beams carry no photons, so the shot-noise reference is zero; use homodyne detection".into(),
        ));
    }
    if !(d.variance > 0.0) {
        return Err(Error::BrightBeamUndefined(
            "intensity-difference noise vanishes for an unseeded lossless pair".into(),
        ));
    }
    Ok(to_db(d.variance / sql))
}

/// Linearized estimate: photon-number fluctuations `δn ≈ x̄ δx + p̄ δp`
/// around the bright mean field. Only meaningful for bright seeds.
pub fn intensity_difference_db_linearized<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_set: &[ModeLabel],
    conj_set: &[ModeLabel],
) -> Result<f64> {
    let (p, c) = resolve_sets(state, probe_set, conj_set)?;
    let mut coeffs = Vec::with_capacity(2 * (p.len() + c.len()));
    let mut sql = 0.0;
    for (set, sign) in [(&p, 1.0), (&c, -1.0)] {
        for &m in set.iter() {
            let (x, q) = state.mode_mean(m);
            coeffs.push((2 * m, sign * x));
            coeffs.push((2 * m + 1, sign * q));
            sql += 0.5 * (x * x + q * q);
        }
    }
    if !(sql > 0.0) {
        return Err(Error::BrightBeamUndefined("no mean field to linearize around".into()));
    }
    Ok(to_db(state.sparse_variance(&coeffs) / sql))
}

fn lo_coefficients<S: QuadratureModel + ?Sized>(
    state: &S,
    spec: &HomodyneSpec,
    beam: Beam,
    theta: f64,
    scale: f64,
    out: &mut Vec<(usize, f64)>,
) -> Result<()> {
    let n = state.beam_pixel_count(beam);
    if spec.weights.len() != n {
        return Err(Error::validation(format!(
            "LO profile has {} pixels, the {beam} beam has {n}",
            spec.weights.len()
        )));
    }
    let (s, c) = theta.sin_cos();
    for (k, &w) in spec.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let m = state.mode_index(&ModeLabel::new(beam, k))?;
        out.push((2 * m, scale * w * c));
        out.push((2 * m + 1, scale * w * s));
    }
    Ok(())
}

/// Variance of `A_θ = X cos θ + P sin θ` for the LO-selected mode of one
/// beam, seen through efficiency `η`: `η V + (1 − η)/2`.
pub fn homodyne_variance<S: QuadratureModel + ?Sized>(state: &S, spec: &HomodyneSpec, beam: Beam) -> Result<f64> {
    let mut coeffs = Vec::new();
    lo_coefficients(state, spec, beam, spec.lo_phase, 1.0, &mut coeffs)?;
    let v = state.sparse_variance(&coeffs);
    let eta = spec.efficiency;
    Ok(eta * v + (1.0 - eta) * VACUUM_VARIANCE)
}

/// Whether the two photocurrents are added or subtracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combination {
    Difference,
    Sum,
}

/// Measured variance of `A_p ± A_c` with both LOs at global phase `theta`
/// (plus each spec's own offset), normalized to two-mode vacuum = 1.
pub fn joint_homodyne_variance<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
    theta: f64,
    combination: Combination,
) -> Result<f64> {
    let sign = match combination {
        Combination::Difference => -1.0,
        Combination::Sum => 1.0,
    };
    let mut cp = Vec::new();
    lo_coefficients(
        state,
        probe_spec,
        Beam::Probe,
        theta + probe_spec.lo_phase,
        1.0,
        &mut cp,
    )?;
    let mut cc = Vec::new();
    lo_coefficients(
        state,
        conj_spec,
        Beam::Conjugate,
        theta + conj_spec.lo_phase,
        sign,
        &mut cc,
    )?;
    let vp = state.sparse_variance(&cp);
    let vc = state.sparse_variance(&cc);
    let joint: Vec<(usize, f64)> = cp.iter().chain(&cc).copied().collect();
    let cross = 0.5 * (state.sparse_variance(&joint) - vp - vc);

    let (ep, ec) = (probe_spec.efficiency, conj_spec.efficiency);
    let measured = ep * vp
        + ec * vc
        + 2.0 * (ep * ec).sqrt() * cross
        + (1.0 - ep) * VACUUM_VARIANCE
        + (1.0 - ec) * VACUUM_VARIANCE;
    Ok(measured / (2.0 * VACUUM_VARIANCE))
}

/// Scans both LO phases in unison and records the difference and sum
/// photocurrent noise in dB relative to the two-mode vacuum.
pub fn joint_phase_scan<S: QuadratureModel + Sync + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
    phases: &[f64],
) -> Result<(NoiseTrace, NoiseTrace)> {
    if phases.is_empty() {
        return Err(Error::validation("phase scan needs at least one phase"));
    }
    let points = phases
        .par_iter()
        .map(|&theta| {
            let d = joint_homodyne_variance(state, probe_spec, conj_spec, theta, Combination::Difference)?;
            let s = joint_homodyne_variance(state, probe_spec, conj_spec, theta, Combination::Sum)?;
            Ok((to_db(d), to_db(s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (diff, sum): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok((
        NoiseTrace::new(phases.to_vec(), diff, "difference")?,
        NoiseTrace::new(phases.to_vec(), sum, "sum")?,
    ))
}

/// `n` equally spaced phases covering `[0, 2π)`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::seeded_amplifier_output;
    use crate::gaussian::{displace, vacuum_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn pair() -> (ModeLabel, ModeLabel) {
        (ModeLabel::probe(0), ModeLabel::conjugate(0))
    }

    fn coherent_pair(n_probe: f64, n_conj: f64) -> crate::gaussian::GaussianState {
        let (p, c) = pair();
        let vac = vacuum_state(vec![p.clone(), c.clone()]).unwrap();
        let s = displace(&vac, &p, (2.0 * n_probe).sqrt(), 0.0).unwrap();
        displace(&s, &c, (2.0 * n_conj).sqrt(), 0.0).unwrap()
    }

    fn single(eta: f64, phase: f64) -> HomodyneSpec {
        HomodyneSpec::single_pixel(phase, eta).unwrap()
    }

    #[test]
    fn sql_of_coherent_beams() {
        let (p, c) = pair();
        let s = coherent_pair(100.0, 50.0);
        assert_abs_diff_eq!(
            sql_intensity_difference(&s, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap(),
            150.0,
            epsilon = 1e-9
        );
        let vac = vacuum_state(vec![p.clone(), c.clone()]).unwrap();
        assert_eq!(
            sql_intensity_difference(&vac, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap(),
            0.0
        );
        assert!(matches!(
            intensity_difference_db(&vac, std::slice::from_ref(&p), std::slice::from_ref(&c)),
            Err(Error::BrightBeamUndefined(_))
        ));
        assert!(sql_intensity_difference(&s, &[], std::slice::from_ref(&c)).is_err());
        assert!(sql_intensity_difference(&s, std::slice::from_ref(&p), std::slice::from_ref(&p)).is_err());
    }

    #[test]
    fn seeded_gain_two_sql() {
        let (p, c) = pair();
        let s = seeded_amplifier_output(2.0, (200f64).sqrt(), 0.0).unwrap();
        let sql = sql_intensity_difference(&s, &[p], &[c]).unwrap();
        assert_abs_diff_eq!(sql, 201.0 + 101.0, epsilon = 1e-9);
    }

    #[test]
    fn intensity_difference_law() {
        let (p, c) = pair();
        let alpha2: f64 = 1e4;
        let db = |g: f64| {
            let s = seeded_amplifier_output(g, (2.0 * alpha2).sqrt(), 0.0).unwrap();
            intensity_difference_db(&s, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap()
        };
        assert_abs_diff_eq!(db(2.0), to_db(1.0 / 3.0), epsilon = 0.01);
        assert_abs_diff_eq!(db(3.655), -8.0, epsilon = 0.01);
        assert_abs_diff_eq!(db(1.0), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn linearized_estimate_agrees_for_bright_seed() {
        let (p, c) = pair();
        for g in [1.0, 1.5, 2.0, 4.0] {
            let s = seeded_amplifier_output(g, (2e4f64).sqrt(), 0.0).unwrap();
            let exact = intensity_difference_db(&s, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap();
            let lin =
                intensity_difference_db_linearized(&s, std::slice::from_ref(&p), std::slice::from_ref(&c)).unwrap();
            assert!((exact - lin).abs() < 0.05, "G={g}: {exact} vs {lin}");
        }
    }

    #[test]
    fn homodyne_single_beam() {
        let vac = vacuum_state(vec![ModeLabel::probe(0), ModeLabel::conjugate(0)]).unwrap();
        for (eta, th) in [(1.0, 0.0), (0.3, 1.1), (0.0, 2.5)] {
            assert_abs_diff_eq!(
                homodyne_variance(&vac, &single(eta, th), Beam::Probe).unwrap(),
                0.5,
                epsilon = 1e-15
            );
        }
        let s = seeded_amplifier_output(2.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            homodyne_variance(&s, &single(1.0, 0.0), Beam::Probe).unwrap(),
            1.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            homodyne_variance(&s, &single(0.5, 0.0), Beam::Probe).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let two = HomodyneSpec::normalized(vec![1.0, 1.0], 0.0, 1.0).unwrap();
        assert!(homodyne_variance(&s, &two, Beam::Probe).is_err());
    }

    #[test]
    fn weights_must_be_normalized() {
        assert!(HomodyneSpec::new(vec![1.0, 1.0], 0.0, 1.0).is_err());
        assert!(HomodyneSpec::normalized(vec![0.0, 0.0], 0.0, 1.0).is_err());
        assert!(HomodyneSpec::single_pixel(0.0, 1.5).is_err());
    }

    #[test]
    fn phase_scan_values() {
        let s = seeded_amplifier_output(2.0, 0.0, 0.0).unwrap();
        let spec = single(1.0, 0.0);
        let (d, m) = joint_phase_scan(&s, &spec, &spec, &[0.0, FRAC_PI_4]).unwrap();
        let r_db = to_db((2f64.sqrt() - 1.0).powi(2));
        assert_abs_diff_eq!(d.values_db()[0], r_db, epsilon = 1e-9);
        assert_abs_diff_eq!(m.values_db()[0], -r_db, epsilon = 1e-9);
        assert_abs_diff_eq!(d.values_db()[1], to_db(3.0), epsilon = 1e-9);
        assert_abs_diff_eq!(m.values_db()[1], to_db(3.0), epsilon = 1e-9);

        let vac = vacuum_state(vec![ModeLabel::probe(0), ModeLabel::conjugate(0)]).unwrap();
        let (d, m) = joint_phase_scan(&vac, &spec, &spec, &phase_grid(16)).unwrap();
        assert!(d.values_db().iter().chain(m.values_db()).all(|v| v.abs() < 1e-12));
        assert!(joint_phase_scan(&vac, &spec, &spec, &[]).is_err());
    }

    #[test]
    fn efficiency_maps_joint_variance_affinely() {
        let s = seeded_amplifier_output(2.0, 0.0, 0.0).unwrap();
        let v = (2f64.sqrt() - 1.0).powi(2);
        for eta in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let spec = single(eta, 0.0);
            let got = joint_homodyne_variance(&s, &spec, &spec, 0.0, Combination::Difference).unwrap();
            assert_abs_diff_eq!(got, eta * v + 1.0 - eta, epsilon = 1e-12);
            assert!(got >= 1.0 - eta - 1e-12);
        }
    }

    #[test]
    fn technical_noise() {
        let t = NoiseTrace::new(vec![0.0, 1.0], vec![-7.66, 0.0], "x").unwrap();
        assert_eq!(apply_technical_noise(&t, &TechnicalNoiseSpec::default()), t);
        let floor = TechnicalNoiseSpec {
            electronic_floor_db: Some(-15.0),
            pump_scatter_db: None,
        };
        let out = apply_technical_noise(&t, &floor);
        assert_abs_diff_eq!(
            out.values_db()[0],
            to_db(from_db(-7.66) + from_db(-15.0)),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(out.values_db()[0], -6.93, epsilon = 0.01);
        let zero = TechnicalNoiseSpec {
            electronic_floor_db: Some(0.0),
            pump_scatter_db: None,
        };
        assert_abs_diff_eq!(
            apply_technical_noise(&t, &zero).values_db()[1],
            to_db(2.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn trace_validation() {
        assert!(NoiseTrace::new(vec![0.0, 0.0], vec![1.0, 1.0], "x").is_err());
        assert!(NoiseTrace::new(vec![0.0], vec![f64::NAN], "x").is_err());
        assert!(NoiseTrace::new(vec![0.0], vec![], "x").is_err());
    }

    #[test]
    fn csv_format_is_fixed() {
        let t = NoiseTrace::new(
            vec![0.0, 0.024_543_692_6, 3.0],
            vec![-7.655_513_3, 4.771_212_547, 1.0e-7],
            "difference",
        )
        .unwrap();
        assert_eq!(
            t.to_csv(),
            "# difference\nabscissa,value_db\n0.00000000,-7.65551330\n0.0245436926,4.77121255\n3.00000000,1.00000000e-07\n"
        );
        let back = NoiseTrace::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.label(), "difference");
        assert_eq!(back.len(), 3);
        assert!(NoiseTrace::from_csv("abscissa,value_db\n").is_err());
        assert!(matches!(
            NoiseTrace::from_csv("# a\nabscissa,value_db\n1,zz\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(-0.0, 9), "0.00000000");
        assert_eq!(format_significant(9.9999999999, 9), "10.0000000");
        assert_eq!(format_significant(123456789.4, 9), "123456789");
        assert_eq!(format_significant(1234567890.0, 9), "1.23456789e+09");
        assert_eq!(format_significant(-0.00012345, 9), "-0.000123450000");
    }
}
