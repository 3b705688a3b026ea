//! Multimode Gaussian states, symplectic maps and Gaussian channels.
//!
//! Quadratures are stored interleaved, `(x_1, p_1, ..., x_M, p_M)`, with
//! `x = (a + a†)/√2` and `p = i(a† − a)/√2`. The vacuum therefore has
//! variance [`VACUUM_VARIANCE`] = 1/2 per quadrature and the joint
//! variables `x_1 − x_2`, `p_1 + p_2` have vacuum variance 1.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-quadrature vacuum variance.
pub const VACUUM_VARIANCE: f64 = 0.5;
/// Tolerance on `cov − covᵀ`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Symplectic eigenvalues may dip this far below 1/2.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Tolerance on `‖SᵀΩS − Ω‖∞`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Beam {
    Probe,
    Conjugate,
}

impl fmt::Display for Beam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beam::Probe => f.write_str("probe"),
            Beam::Conjugate => f.write_str("conjugate"),
        }
    }
}

/// Identifies one bosonic mode. Identity is `(beam, pixel)`; `note` is a
/// free-text tag that takes no part in comparisons.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeLabel {
    pub beam: Beam,
    pub pixel: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ModeLabel {
    pub fn new(beam: Beam, pixel: usize) -> Self {
        ModeLabel {
            beam,
            pixel,
            note: String::new(),
        }
    }

    pub fn probe(pixel: usize) -> Self {
        Self::new(Beam::Probe, pixel)
    }

    pub fn conjugate(pixel: usize) -> Self {
        Self::new(Beam::Conjugate, pixel)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn key(&self) -> (Beam, usize) {
        (self.beam, self.pixel)
    }
}

impl PartialEq for ModeLabel {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for ModeLabel {}

impl std::hash::Hash for ModeLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.beam, self.pixel)
    }
}

/// The K-mode symplectic form in interleaved ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Symplectic eigenvalues of a covariance matrix, sorted ascending.
///
/// Computed as the singular values of `V^{1/2} Ω V^{1/2}`, each of which
/// appears twice. Fails if `cov` is not positive definite, since no
/// physical covariance matrix is.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = cov.nrows();
    if dim != cov.ncols() || !dim.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "covariance must be square with even dimension, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::Unphysical(format!(
            "covariance is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let sqrt_cov = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let a = &sqrt_cov * symplectic_form(dim / 2) * &sqrt_cov;
    let gram = a.transpose() * &a;
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut squares: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    squares.sort_by(f64::total_cmp);
    Ok(squares
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

fn check_physical(cov: &DMatrix<f64>) -> Result<()> {
    let asym = asymmetry(cov);
    if asym > SYMMETRY_TOL {
        return Err(Error::Unphysical(format!(
            "covariance is not symmetric (max asymmetry {asym:e})"
        )));
    }
    let nu = symplectic_eigenvalues(cov)?;
    if let Some(&smallest) = nu.first() {
        if smallest < VACUUM_VARIANCE - PHYSICALITY_TOL {
            return Err(Error::Unphysical(format!("symplectic eigenvalue {smallest} below 1/2")));
        }
    }
    Ok(())
}

/// Mean vector and covariance matrix over an ordered list of labeled modes.
#[derive(Clone, Debug)]
pub struct GaussianState {
    modes: Vec<ModeLabel>,
    index: HashMap<(Beam, usize), usize>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

fn index_labels(modes: &[ModeLabel]) -> Result<HashMap<(Beam, usize), usize>> {
    let mut index = HashMap::with_capacity(modes.len());
    for (i, label) in modes.iter().enumerate() {
        if index.insert(label.key(), i).is_some() {
            return Err(Error::validation(format!("duplicate mode label {label}")));
        }
    }
    Ok(index)
}

impl GaussianState {
    /// Builds a state after checking dimensions, label uniqueness, symmetry
    /// and the uncertainty principle.
    pub fn new(modes: Vec<ModeLabel>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let index = index_labels(&modes)?;
        let dim = 2 * modes.len();
        if mean.len() != dim || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::validation(format!(
                "{} modes need a mean of length {dim} and a {dim}x{dim} covariance, got {} and {}x{}",
                modes.len(),
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::validation("state contains non-finite values"));
        }
        check_physical(&cov)?;
        Ok(GaussianState {
            modes,
            index,
            mean,
            cov,
        })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn index_of(&self, label: &ModeLabel) -> Result<usize> {
        self.index
            .get(&label.key())
            .copied()
            .ok_or_else(|| Error::UnknownMode(label.clone()))
    }

    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        // Construction already proved the covariance positive definite.
        symplectic_eigenvalues(&self.cov).expect("validated covariance")
    }

    /// Reduced state on a subset of modes, in the order given.
    pub fn reduced(&self, subset: &[ModeLabel]) -> Result<GaussianState> {
        let idx = self.quadrature_indices(subset)?;
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        GaussianState::new(subset.to_vec(), mean, cov)
    }

    fn quadrature_indices(&self, labels: &[ModeLabel]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(2 * labels.len());
        for label in labels {
            let m = self.index_of(label)?;
            idx.push(2 * m);
            idx.push(2 * m + 1);
        }
        Ok(idx)
    }

    fn target_indices(&self, targets: &[ModeLabel]) -> Result<Vec<usize>> {
        index_labels(targets)?;
        self.quadrature_indices(targets)
    }

    /// `mean → X·mean`, `cov → X·cov·Xᵀ + Y` on the quadratures `idx`.
    fn transformed(&self, idx: &[usize], x: &DMatrix<f64>, y: Option<&DMatrix<f64>>) -> Result<Self> {
        let dim = self.cov.nrows();
        let sub_mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let new_sub_mean = x * sub_mean;
        let mut mean = self.mean.clone();
        for (k, &i) in idx.iter().enumerate() {
            mean[i] = new_sub_mean[k];
        }

        let mut cov = self.cov.clone();
        let cols = DMatrix::from_fn(dim, idx.len(), |r, c| cov[(r, idx[c])]) * x.transpose();
        for (c, &j) in idx.iter().enumerate() {
            for r in 0..dim {
                cov[(r, j)] = cols[(r, c)];
            }
        }
        let rows = x * DMatrix::from_fn(idx.len(), dim, |r, c| cov[(idx[r], c)]);
        for (r, &i) in idx.iter().enumerate() {
            for c in 0..dim {
                cov[(i, c)] = rows[(r, c)];
            }
        }
        if let Some(y) = y {
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    cov[(i, j)] += y[(r, c)];
                }
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        GaussianState::new(self.modes.clone(), mean, cov)
    }

    /// Serializable snapshot used for golden files and debugging.
    pub fn dump(&self) -> StateDump {
        StateDump {
            modes: self.modes.clone(),
            mean: self.mean.iter().copied().collect(),
            cov: self.cov.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("state dump is always serializable")
    }

    pub fn from_dump(dump: StateDump) -> Result<Self> {
        let dim = dump.mean.len();
        if dump.cov.len() != dim || dump.cov.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("covariance rows do not match mean length"));
        }
        let cov = DMatrix::from_fn(dim, dim, |r, c| dump.cov[r][c]);
        GaussianState::new(dump.modes, DVector::from_vec(dump.mean), cov)
    }
}

/// JSON shape of a state: `{modes, mean, cov}` with `cov` row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateDump {
    pub modes: Vec<ModeLabel>,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Vacuum on the given modes: zero mean and covariance `I/2`.
pub fn vacuum_state(mode_labels: Vec<ModeLabel>) -> Result<GaussianState> {
    let dim = 2 * mode_labels.len();
    GaussianState::new(
        mode_labels,
        DVector::zeros(dim),
        DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
    )
}

/// Shifts the mean quadratures of `mode` by `(x, p)`.
pub fn displace(state: &GaussianState, mode: &ModeLabel, x: f64, p: f64) -> Result<GaussianState> {
    let m = state.index_of(mode)?;
    let mut out = state.clone();
    out.mean[2 * m] += x;
    out.mean[2 * m + 1] += p;
    Ok(out)
}

/// A symplectic matrix acting on an ordered list of target modes.
#[derive(Clone, Debug)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    target_modes: Vec<ModeLabel>,
}

impl SymplecticOp {
    pub fn new(matrix: DMatrix<f64>, target_modes: Vec<ModeLabel>) -> Result<Self> {
        index_labels(&target_modes)?;
        let dim = 2 * target_modes.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::validation(format!(
                "symplectic matrix for {} modes must be {dim}x{dim}, got {}x{}",
                target_modes.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = SymplecticOp { matrix, target_modes };
        let err = op.symplectic_error();
        if !(err < SYMPLECTIC_TOL) {
            return Err(Error::validation(format!(
                "matrix is not symplectic: max |SᵀΩS − Ω| = {err:e}"
            )));
        }
        Ok(op)
    }

    pub fn identity(target_modes: Vec<ModeLabel>) -> Result<Self> {
        let dim = 2 * target_modes.len();
        Self::new(DMatrix::identity(dim, dim), target_modes)
    }

    /// `x → x cos θ + p sin θ`, `p → −x sin θ + p cos θ`.
    pub fn phase_rotation(mode: ModeLabel, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let matrix = DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
        SymplecticOp {
            matrix,
            target_modes: vec![mode],
        }
    }

    /// Beamsplitter with power transmissivity `transmissivity` between two modes.
    pub fn beamsplitter(a: ModeLabel, b: ModeLabel, transmissivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::validation(format!(
                "beamsplitter transmissivity {transmissivity} outside [0, 1]"
            )));
        }
        let t = transmissivity.sqrt();
        let r = (1.0 - transmissivity).sqrt();
        #[rustfmt::skip]
        let matrix = DMatrix::from_row_slice(4, 4, &[
            t, 0.0, r, 0.0,
            0.0, t, 0.0, r,
            -r, 0.0, t, 0.0,
            0.0, -r, 0.0, t,
        ]);
        Self::new(matrix, vec![a, b])
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn target_modes(&self) -> &[ModeLabel] {
        &self.target_modes
    }

    /// `‖SᵀΩS − Ω‖∞`.
    pub fn symplectic_error(&self) -> f64 {
        let omega = symplectic_form(self.target_modes.len());
        max_abs(&(self.matrix.transpose() * &omega * &self.matrix - omega))
    }

    /// `other ∘ self` on identical target lists.
    pub fn then(&self, other: &SymplecticOp) -> Result<Self> {
        if self.target_modes != other.target_modes {
            return Err(Error::validation("composed operations must share target modes"));
        }
        Self::new(&other.matrix * &self.matrix, self.target_modes.clone())
    }
}

/// Applies `S` to the targeted block; untargeted modes are untouched.
pub fn apply_symplectic(state: &GaussianState, op: &SymplecticOp) -> Result<GaussianState> {
    let err = op.symplectic_error();
    if !(err < SYMPLECTIC_TOL) {
        return Err(Error::validation(format!("matrix is not symplectic ({err:e})")));
    }
    let idx = state.target_indices(&op.target_modes)?;
    state.transformed(&idx, &op.matrix, None)
}

/// Gaussian channel `V → X V Xᵀ + Y` on an ordered list of target modes.
#[derive(Clone, Debug)]
pub struct GaussianChannel {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
    target_modes: Vec<ModeLabel>,
}

impl GaussianChannel {
    /// Checks that `Y` is symmetric and that `Y + (i/2)(Ω − XΩXᵀ) ≥ 0`.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>, target_modes: Vec<ModeLabel>) -> Result<Self> {
        index_labels(&target_modes)?;
        let dim = 2 * target_modes.len();
        for (name, m) in [("X", &x), ("Y", &y)] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::validation(format!(
                    "channel {name} for {} modes must be {dim}x{dim}",
                    target_modes.len()
                )));
            }
        }
        if asymmetry(&y) > SYMMETRY_TOL {
            return Err(Error::validation("channel Y is not symmetric"));
        }
        let ch = GaussianChannel { x, y, target_modes };
        let min = ch.complete_positivity_margin();
        if min < -PHYSICALITY_TOL {
            return Err(Error::validation(format!(
                "channel is not completely positive (eigenvalue {min:e})"
            )));
        }
        Ok(ch)
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn target_modes(&self) -> &[ModeLabel] {
        &self.target_modes
    }

    /// Smallest eigenvalue of the Hermitian matrix `Y + (i/2)(Ω − XΩXᵀ)`.
    ///
    /// A Hermitian `A + iB` has the same spectrum (doubled) as the real
    /// symmetric `[[A, −B], [B, A]]`.
    pub fn complete_positivity_margin(&self) -> f64 {
        let dim = self.y.nrows();
        if dim == 0 {
            return 0.0;
        }
        let omega = symplectic_form(dim / 2);
        let b = (&omega - &self.x * &omega * self.x.transpose()) * 0.5;
        let mut real = DMatrix::zeros(2 * dim, 2 * dim);
        real.view_mut((0, 0), (dim, dim)).copy_from(&self.y);
        real.view_mut((dim, dim), (dim, dim)).copy_from(&self.y);
        real.view_mut((0, dim), (dim, dim)).copy_from(&(-&b));
        real.view_mut((dim, 0), (dim, dim)).copy_from(&b);
        let real = (&real + real.transpose()) * 0.5;
        SymmetricEigen::new(real).eigenvalues.min()
    }

    /// `other ∘ self` on identical target lists.
    pub fn then(&self, other: &GaussianChannel) -> Result<Self> {
        if self.target_modes != other.target_modes {
            return Err(Error::validation("composed channels must share target modes"));
        }
        let x = &other.x * &self.x;
        let y = &other.x * &self.y * other.x.transpose() + &other.y;
        let y = (&y + y.transpose()) * 0.5;
        Self::new(x, y, self.target_modes.clone())
    }
}

/// Pure loss of power transmission `eta` on each listed mode.
pub fn loss_channel(eta: f64, modes: Vec<ModeLabel>) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::validation(format!("transmission {eta} outside [0, 1]")));
    }
    let dim = 2 * modes.len();
    GaussianChannel::new(
        DMatrix::identity(dim, dim) * eta.sqrt(),
        DMatrix::identity(dim, dim) * ((1.0 - eta) * VACUUM_VARIANCE),
        modes,
    )
}

pub fn apply_channel(state: &GaussianState, ch: &GaussianChannel) -> Result<GaussianState> {
    let margin = ch.complete_positivity_margin();
    if margin < -PHYSICALITY_TOL {
        return Err(Error::validation(format!(
            "channel is not completely positive (eigenvalue {margin:e})"
        )));
    }
    let idx = state.target_indices(&ch.target_modes)?;
    state.transformed(&idx, &ch.x, Some(&ch.y))
}

/// `cᵀ·cov·c` for a dense coefficient vector over all quadratures.
pub fn quadrature_variance(state: &GaussianState, coeffs: &[f64]) -> Result<f64> {
    if state.n_modes() == 0 {
        return Err(Error::validation("quadrature variance of an empty state"));
    }
    if coeffs.len() != 2 * state.n_modes() {
        return Err(Error::validation(format!(
            "coefficient vector has length {}, state has {} quadratures",
            coeffs.len(),
            2 * state.n_modes()
        )));
    }
    let c = DVector::from_column_slice(coeffs);
    Ok((c.transpose() * &state.cov * &c)[(0, 0)].max(0.0))
}

/// Photon-number means and covariance over a subset of modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonStats {
    pub means: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

/// Mean photon number of mode `m` from its first and second moments.
pub(crate) fn mean_photons_with(mean: impl Fn(usize) -> f64, cov: impl Fn(usize, usize) -> f64, m: usize) -> f64 {
    let (x, p) = (2 * m, 2 * m + 1);
    0.5 * (cov(x, x) + cov(p, p) + mean(x) * mean(x) + mean(p) * mean(p) - 1.0)
}

/// `Cov(n_i, n_j)` for a Gaussian state.
///
/// With `n = (x² + p² − 1)/2`, the Gaussian quadratic-form identity gives
/// `½ Σ V_ab² + m_iᵀ V_ij m_j` over the 2x2 block `V_ij`. The Weyl symbol
/// of `n_i²` differs from the square of the symbol of `n_i` by 1/4, hence
/// the diagonal correction.
pub(crate) fn photon_covariance_with(
    mean: impl Fn(usize) -> f64,
    cov: impl Fn(usize, usize) -> f64,
    i: usize,
    j: usize,
) -> f64 {
    let mut sq = 0.0;
    let mut lin = 0.0;
    for a in [2 * i, 2 * i + 1] {
        for b in [2 * j, 2 * j + 1] {
            let v = cov(a, b);
            sq += v * v;
            lin += mean(a) * v * mean(b);
        }
    }
    let ordering = if i == j { 0.25 } else { 0.0 };
    0.5 * sq + lin - ordering
}

fn mean_photons(mean: &DVector<f64>, cov: &DMatrix<f64>, m: usize) -> f64 {
    mean_photons_with(|a| mean[a], |a, b| cov[(a, b)], m)
}

fn photon_covariance_entry(mean: &DVector<f64>, cov: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    photon_covariance_with(|a| mean[a], |a, b| cov[(a, b)], i, j)
}

pub fn photon_stats(state: &GaussianState, subset: &[ModeLabel]) -> Result<PhotonStats> {
    if state.n_modes() == 0 {
        return Err(Error::validation("photon statistics of an empty state"));
    }
    let idx = subset.iter().map(|l| state.index_of(l)).collect::<Result<Vec<_>>>()?;
    let means = DVector::from_iterator(idx.len(), idx.iter().map(|&m| mean_photons(&state.mean, &state.cov, m)));
    let covariance = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
        photon_covariance_entry(&state.mean, &state.cov, idx[r], idx[c])
    });
    Ok(PhotonStats { means, covariance })
}

/// Photon-number moments of a signed sum `Σ_plus n − Σ_minus n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonDifference {
    pub mean_plus: f64,
    pub mean_minus: f64,
    pub variance: f64,
}

/// Read access to the first and second moments of a Gaussian state, shared
/// by dense states and block-structured image states so detection code
/// works on either.
pub trait QuadratureModel {
    fn mode_count(&self) -> usize;

    fn mode_index(&self, label: &ModeLabel) -> Result<usize>;

    /// Number of modes belonging to `beam`.
    fn beam_pixel_count(&self, beam: Beam) -> usize;

    /// Variance of `Σ c·r` for sparse coefficients over quadrature indices
    /// (`2m` is `x` of mode `m`, `2m + 1` is `p`).
    fn sparse_variance(&self, coeffs: &[(usize, f64)]) -> f64;

    /// Mean `(x̄, p̄)` of mode `m`.
    fn mode_mean(&self, m: usize) -> (f64, f64);

    /// Moments of `Σ_{plus} n − Σ_{minus} n` over mode indices.
    fn photon_difference(&self, plus: &[usize], minus: &[usize]) -> PhotonDifference;
}

impl QuadratureModel for GaussianState {
    fn mode_count(&self) -> usize {
        self.n_modes()
    }

    fn mode_index(&self, label: &ModeLabel) -> Result<usize> {
        self.index_of(label)
    }

    fn beam_pixel_count(&self, beam: Beam) -> usize {
        self.modes.iter().filter(|l| l.beam == beam).count()
    }

    fn sparse_variance(&self, coeffs: &[(usize, f64)]) -> f64 {
        let mut v = 0.0;
        for &(a, ca) in coeffs {
            for &(b, cb) in coeffs {
                v += ca * cb * self.cov[(a, b)];
            }
        }
        v.max(0.0)
    }

    fn mode_mean(&self, m: usize) -> (f64, f64) {
        (self.mean[2 * m], self.mean[2 * m + 1])
    }

    fn photon_difference(&self, plus: &[usize], minus: &[usize]) -> PhotonDifference {
        let signed: Vec<(usize, f64)> = plus
            .iter()
            .map(|&m| (m, 1.0))
            .chain(minus.iter().map(|&m| (m, -1.0)))
            .collect();
        let mut variance = 0.0;
        for &(i, si) in &signed {
            for &(j, sj) in &signed {
                variance += si * sj * photon_covariance_entry(&self.mean, &self.cov, i, j);
            }
        }
        let total = |set: &[usize]| set.iter().map(|&m| mean_photons(&self.mean, &self.cov, m)).sum::<f64>();
        PhotonDifference {
            mean_plus: total(plus),
            mean_minus: total(minus),
            variance: variance.max(0.0),
        }
    }
}
