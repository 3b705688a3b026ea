//! Python bindings: states, amplifier constructions, detection, entanglement,
//! image states and the scenario runner.
//!
//! Modes are addressed as `(beam, pixel)` tuples with beam `"probe"` or
//! `"conjugate"`. Matrices cross the boundary as lists of rows.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twinbeam::amplifier::{self, AngularGainModel, CellModel};
use twinbeam::detection::{self, HomodyneSpec};
use twinbeam::entanglement;
use twinbeam::gaussian::{self, Beam, ModeLabel};
use twinbeam::imaging::{self, GainMap, Mask, MaskOptions, PixelGrid, REGION_THRESHOLD};
use twinbeam::scenario;

fn py_err(e: twinbeam::Error) -> PyErr {
    if e.is_config_error() || matches!(e, twinbeam::Error::Validation(_) | twinbeam::Error::UnknownMode(_)) {
        PyValueError::new_err(e.to_string())
    } else if e.is_io_error() {
        PyOSError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn beam(name: &str) -> PyResult<Beam> {
    match name {
        "probe" => Ok(Beam::Probe),
        "conjugate" => Ok(Beam::Conjugate),
        other => Err(PyValueError::new_err(format!(
            "beam must be 'probe' or 'conjugate', got '{other}'"
        ))),
    }
}

fn label(mode: (String, usize)) -> PyResult<ModeLabel> {
    Ok(ModeLabel::new(beam(&mode.0)?, mode.1))
}

fn labels(modes: Vec<(String, usize)>) -> PyResult<Vec<ModeLabel>> {
    modes.into_iter().map(label).collect()
}

fn beam_name(b: Beam) -> &'static str {
    match b {
        Beam::Probe => "probe",
        Beam::Conjugate => "conjugate",
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("covariance must be a square list of rows"));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

fn pair() -> (ModeLabel, ModeLabel) {
    (ModeLabel::probe(0), ModeLabel::conjugate(0))
}

/// Multimode Gaussian state in interleaved `(x, p)` ordering, vacuum variance 1/2.
#[pyclass(name = "GaussianState", module = "twinbeam", frozen)]
struct PyGaussianState {
    inner: gaussian::GaussianState,
}

#[pymethods]
impl PyGaussianState {
    #[new]
    fn new(modes: Vec<(String, usize)>, mean: Vec<f64>, cov: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner =
            gaussian::GaussianState::new(labels(modes)?, DVector::from_vec(mean), matrix(cov)?).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    #[staticmethod]
    fn vacuum(modes: Vec<(String, usize)>) -> PyResult<Self> {
        let inner = gaussian::vacuum_state(labels(modes)?).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let dump = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = gaussian::GaussianState::from_dump(dump).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn modes(&self) -> Vec<(&'static str, usize)> {
        self.inner
            .modes()
            .iter()
            .map(|l| (beam_name(l.beam), l.pixel))
            .collect()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean().iter().copied().collect()
    }

    #[getter]
    fn cov(&self) -> Vec<Vec<f64>> {
        rows(self.inner.cov())
    }

    fn symplectic_eigenvalues(&self) -> Vec<f64> {
        self.inner.symplectic_eigenvalues()
    }

    fn reduced(&self, modes: Vec<(String, usize)>) -> PyResult<Self> {
        let inner = self.inner.reduced(&labels(modes)?).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    fn displace(&self, mode: (String, usize), x: f64, p: f64) -> PyResult<Self> {
        let inner = gaussian::displace(&self.inner, &label(mode)?, x, p).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    /// Pure loss of transmission `eta` on each listed mode.
    fn apply_loss(&self, eta: f64, modes: Vec<(String, usize)>) -> PyResult<Self> {
        let ch = gaussian::loss_channel(eta, labels(modes)?).map_err(py_err)?;
        let inner = gaussian::apply_channel(&self.inner, &ch).map_err(py_err)?;
        Ok(PyGaussianState { inner })
    }

    fn quadrature_variance(&self, coeffs: Vec<f64>) -> PyResult<f64> {
        gaussian::quadrature_variance(&self.inner, &coeffs).map_err(py_err)
    }

    /// `(means, covariance)` of the photon numbers of the listed modes.
    fn photon_stats(&self, modes: Vec<(String, usize)>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let s = gaussian::photon_stats(&self.inner, &labels(modes)?).map_err(py_err)?;
        Ok((s.means.iter().copied().collect(), rows(&s.covariance)))
    }

    fn __repr__(&self) -> String {
        format!("GaussianState({} modes)", self.inner.n_modes())
    }
}

/// Two-mode squeezed vacuum of power gain `gain` on `probe[0]`, `conjugate[0]`.
#[pyfunction]
fn two_mode_squeezed_vacuum(gain: f64) -> PyResult<PyGaussianState> {
    seeded_amplifier_output(gain, 0.0, 0.0)
}

/// Amplifier output for a coherent probe seed with mean quadratures `(x, p)`.
#[pyfunction]
#[pyo3(signature = (gain, seed_x, seed_p = 0.0))]
fn seeded_amplifier_output(gain: f64, seed_x: f64, seed_p: f64) -> PyResult<PyGaussianState> {
    let inner = amplifier::seeded_amplifier_output(gain, seed_x, seed_p).map_err(py_err)?;
    Ok(PyGaussianState { inner })
}

#[pyfunction]
#[pyo3(signature = (gain, seed_x, seed_p = 0.0, n_slices = 64, probe_transmission = 0.8, conjugate_transmission = 1.0))]
fn distributed_cell_output(
    gain: f64,
    seed_x: f64,
    seed_p: f64,
    n_slices: usize,
    probe_transmission: f64,
    conjugate_transmission: f64,
) -> PyResult<PyGaussianState> {
    let cell = CellModel::new(n_slices, gain, probe_transmission, conjugate_transmission).map_err(py_err)?;
    let inner = amplifier::distributed_cell_output(&cell, seed_x, seed_p).map_err(py_err)?;
    Ok(PyGaussianState { inner })
}

fn angular(peak_gain: f64, center_mrad: f64, fwhm_mrad: f64, spot_mrad: f64) -> PyResult<AngularGainModel> {
    AngularGainModel::new(peak_gain, center_mrad, fwhm_mrad, spot_mrad).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (theta_mrad, peak_gain = 3.0, center_mrad = 7.0, fwhm_mrad = 8.0))]
fn angular_gain(theta_mrad: f64, peak_gain: f64, center_mrad: f64, fwhm_mrad: f64) -> PyResult<f64> {
    Ok(angular(peak_gain, center_mrad, fwhm_mrad, 1.0)?.gain_at(theta_mrad))
}

#[pyfunction]
#[pyo3(signature = (theta_min_mrad = 2.0, theta_max_mrad = 10.0, spot_mrad = 1.0))]
fn estimate_mode_count(theta_min_mrad: f64, theta_max_mrad: f64, spot_mrad: f64) -> PyResult<u64> {
    let model = angular(3.0, 7.0, 8.0, spot_mrad)?;
    amplifier::estimate_mode_count(&model, theta_min_mrad, theta_max_mrad).map_err(py_err)
}

/// Gain whose joint quadrature variance, seen with efficiency `eta`, equals `target`.
#[pyfunction]
fn gain_for_joint_variance(target: f64, eta: f64) -> PyResult<f64> {
    amplifier::gain_for_joint_variance(target, eta).map_err(py_err)
}

/// Intensity-difference noise of `probe[0]` minus `conjugate[0]` relative to the SQL, in dB.
#[pyfunction]
fn intensity_difference_db(state: &PyGaussianState) -> PyResult<f64> {
    let (p, c) = pair();
    detection::intensity_difference_db(&state.inner, &[p], &[c]).map_err(py_err)
}

/// `(phases, difference_db, sum_db)` for both LOs scanned together.
#[pyfunction]
#[pyo3(signature = (state, n_phases = 256, efficiency = 1.0))]
fn joint_phase_scan(
    state: &PyGaussianState,
    n_phases: usize,
    efficiency: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let spec = HomodyneSpec::single_pixel(0.0, efficiency).map_err(py_err)?;
    let phases = detection::phase_grid(n_phases);
    let (d, s) = detection::joint_phase_scan(&state.inner, &spec, &spec, &phases).map_err(py_err)?;
    Ok((phases, d.values_db().to_vec(), s.values_db().to_vec()))
}

fn report_dict<'py>(py: Python<'py>, r: &entanglement::EntanglementReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("var_x_minus", r.var_x_minus)?;
    d.set_item("var_p_plus", r.var_p_plus)?;
    d.set_item("inseparability", r.inseparability)?;
    d.set_item("squeezing_db_x", r.squeezing_db_x)?;
    d.set_item("squeezing_db_p", r.squeezing_db_p)?;
    d.set_item("entangled", r.entangled)?;
    Ok(d)
}

/// Duan inseparability of `probe[0]`/`conjugate[0]` with single-pixel LOs.
#[pyfunction]
#[pyo3(signature = (state, efficiency = 1.0, optimize_phase = true))]
fn inseparability<'py>(
    py: Python<'py>,
    state: &PyGaussianState,
    efficiency: f64,
    optimize_phase: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = HomodyneSpec::single_pixel(0.0, efficiency).map_err(py_err)?;
    let r = entanglement::inseparability(&state.inner, &spec, &spec, optimize_phase).map_err(py_err)?;
    report_dict(py, &r)
}

fn resolve_mask(reference: &str, width: usize, height: usize, pitch: f64) -> PyResult<Mask> {
    match reference.strip_prefix(scenario::config::BUILTIN_PREFIX) {
        Some(name) => {
            let grid = PixelGrid::new(width, height, pitch).map_err(py_err)?;
            scenario::builtin_mask(name, grid).map_err(py_err)
        }
        None => {
            let opts = MaskOptions {
                angular_pitch_mrad: pitch,
                ..MaskOptions::default()
            };
            imaging::load_mask(Path::new(reference), &opts).map_err(py_err)
        }
    }
}

/// Amplified image: one probe/conjugate pixel pair per mask pixel.
#[pyclass(name = "ImageState", module = "twinbeam", frozen)]
struct PyImageState {
    inner: imaging::ImageState,
    pitch: f64,
}

#[pymethods]
impl PyImageState {
    /// Seeds `seed_photons` per pixel through `mask` (`"builtin:<name>"` or a
    /// P2 PGM path) and amplifies every pixel pair with a uniform gain.
    #[new]
    #[pyo3(signature = (mask, gain, seed_photons = 1e4, width = 32, height = 32, pitch_mrad = 0.25))]
    fn new(mask: &str, gain: f64, seed_photons: f64, width: usize, height: usize, pitch_mrad: f64) -> PyResult<Self> {
        let m = resolve_mask(mask, width, height, pitch_mrad)?;
        let seed = imaging::masked_seed(m.grid(), &m, seed_photons.sqrt()).map_err(py_err)?;
        let inner = imaging::amplify_image(&seed, &GainMap::Uniform(gain)).map_err(py_err)?;
        Ok(PyImageState {
            inner,
            pitch: pitch_mrad,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.inner.grid();
        (g.height, g.width)
    }

    fn mean_intensity(&self, beam_name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.mean_intensity(beam(beam_name)?))
    }

    fn min_symplectic_eigenvalue(&self) -> PyResult<f64> {
        self.inner.min_symplectic_eigenvalue().map_err(py_err)
    }

    /// Intensity-difference dB between a probe region and a conjugate region.
    fn subregion_db(&self, probe_mask: &str, conjugate_mask: &str) -> PyResult<f64> {
        let g = self.inner.grid();
        let p = resolve_mask(probe_mask, g.width, g.height, self.pitch)?.selector(REGION_THRESHOLD);
        let c = resolve_mask(conjugate_mask, g.width, g.height, self.pitch)?.selector(REGION_THRESHOLD);
        imaging::subregion_intensity_difference_db(&self.inner, &p, &c).map_err(py_err)
    }

    /// Inseparability seen with the same shaped LO on both beams.
    #[pyo3(signature = (lo_mask, efficiency = 1.0))]
    fn inseparability<'py>(&self, py: Python<'py>, lo_mask: &str, efficiency: f64) -> PyResult<Bound<'py, PyDict>> {
        let g = self.inner.grid();
        let mask = resolve_mask(lo_mask, g.width, g.height, self.pitch)?;
        let lo = imaging::lo_profile_from_mask(&mask, 0.0, efficiency).map_err(py_err)?;
        let r = entanglement::inseparability(&self.inner, &lo, &lo, true).map_err(py_err)?;
        report_dict(py, &r)
    }
}

/// Runs a TOML scenario into `out_dir` and returns the summary as JSON text.
#[pyfunction]
#[pyo3(signature = (config_path, out_dir, strict = false))]
fn run_scenario(py: Python<'_>, config_path: &str, out_dir: &str, strict: bool) -> PyResult<String> {
    let (config_path, out_dir) = (config_path.to_owned(), out_dir.to_owned());
    py.detach(move || {
        let parsed = scenario::parse_config(Path::new(&config_path), strict)?;
        scenario::run_scenario(&parsed.config, Path::new(&out_dir))
    })
    .map_err(py_err)
    .map(|s| serde_json::to_string(&s).expect("summary serializes"))
}

#[pymodule]
#[pyo3(name = "twinbeam")]
fn twinbeam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianState>()?;
    m.add_class::<PyImageState>()?;
    m.add_function(wrap_pyfunction!(two_mode_squeezed_vacuum, m)?)?;
    m.add_function(wrap_pyfunction!(seeded_amplifier_output, m)?)?;
    m.add_function(wrap_pyfunction!(distributed_cell_output, m)?)?;
    m.add_function(wrap_pyfunction!(angular_gain, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mode_count, m)?)?;
    m.add_function(wrap_pyfunction!(gain_for_joint_variance, m)?)?;
    m.add_function(wrap_pyfunction!(intensity_difference_db, m)?)?;
    m.add_function(wrap_pyfunction!(joint_phase_scan, m)?)?;
    m.add_function(wrap_pyfunction!(inseparability, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
