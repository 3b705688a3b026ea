//! Generalized-quadrature variances and the Duan inseparability figure
//! `I = V(X₋) + V(P₊)` for the mode pair selected by two LO profiles.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::detection::{joint_homodyne_variance, Combination, HomodyneSpec};
use crate::error::{Error, Result};
use crate::gaussian::QuadratureModel;

/// Separability bound on `I` in vacuum-normalized units.
pub const SEPARABLE_BOUND: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub var_x_minus: f64,
    pub var_p_plus: f64,
    pub inseparability: f64,
    pub squeezing_db_x: f64,
    pub squeezing_db_p: f64,
    pub entangled: bool,
}

impl EntanglementReport {
    pub fn from_variances(var_x_minus: f64, var_p_plus: f64) -> Result<Self> {
        let inseparability = var_x_minus + var_p_plus;
        Ok(EntanglementReport {
            var_x_minus,
            var_p_plus,
            inseparability,
            squeezing_db_x: squeezing_db(var_x_minus, 1.0)?,
            squeezing_db_p: squeezing_db(var_p_plus, 1.0)?,
            entangled: inseparability < SEPARABLE_BOUND,
        })
    }
}

pub fn squeezing_db(variance: f64, reference: f64) -> Result<f64> {
    if !(variance > 0.0) || !(reference > 0.0) || !variance.is_finite() || !reference.is_finite() {
        return Err(Error::validation(format!(
            "squeezing needs positive finite variance and reference, got {variance} and {reference}"
        )));
    }
    Ok(10.0 * (variance / reference).log10())
}

fn pair_at<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
    theta: f64,
) -> Result<(f64, f64)> {
    let x = joint_homodyne_variance(state, probe_spec, conj_spec, theta, Combination::Difference)?;
    let p = joint_homodyne_variance(state, probe_spec, conj_spec, theta + FRAC_PI_2, Combination::Sum)?;
    Ok((x, p))
}

/// `(V(X₋), V(P₊))`: the difference signal at LO phase 0 and the sum signal
/// at π/2, each relative to its spec's own phase offset.
pub fn generalized_variances<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
) -> Result<(f64, f64)> {
    pair_at(state, probe_spec, conj_spec, 0.0)
}

/// Global LO phase minimizing `diff(θ) + sum(θ + π/2)`.
///
/// Both terms are quadratic forms in `(cos θ, sin θ)` plus a constant, so
/// the total is `a cos²θ + b sin²θ + 2c sinθ cosθ + const` and its minimum
/// over the whole scan follows from three samples.
pub fn optimal_phase<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
) -> Result<f64> {
    let total = |theta: f64| pair_at(state, probe_spec, conj_spec, theta).map(|(x, p)| x + p);
    let a = total(0.0)?;
    let b = total(FRAC_PI_2)?;
    let c = total(FRAC_PI_4)? - 0.5 * (a + b);
    // total(θ) = (a+b)/2 + R cos(2θ − φ)
    let phi = c.atan2(0.5 * (a - b));
    let theta = 0.5 * (phi + PI);
    Ok(theta.rem_euclid(PI))
}

/// Inseparability of the LO-selected pair. With `optimize_phase` the global
/// LO phase is set to the minimum of the scan; otherwise the specs' own
/// phases are used as they are.
pub fn inseparability<S: QuadratureModel + ?Sized>(
    state: &S,
    probe_spec: &HomodyneSpec,
    conj_spec: &HomodyneSpec,
    optimize_phase: bool,
) -> Result<EntanglementReport> {
    let theta = if optimize_phase {
        optimal_phase(state, probe_spec, conj_spec)?
    } else {
        0.0
    };
    let (x, p) = pair_at(state, probe_spec, conj_spec, theta)?;
    EntanglementReport::from_variances(x, p)
}
