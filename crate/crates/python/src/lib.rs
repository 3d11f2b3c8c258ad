//! Python bindings. Matrices cross the boundary as lists of rows of Python
//! `complex` (ints and floats are accepted on input); Fock states as lists
//! of occupation numbers.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uavg_core::experiments::{run_sweep as core_sweep, ExperimentConfig, TargetSpec};
use uavg_core::prelude as core;
use uavg_core::prelude::{ComplexMatrix, FockState, RandomStream};

type Rows = Vec<Vec<Complex64>>;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::ZeroHeraldProbability => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn mat(rows: Rows) -> PyResult<ComplexMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    ComplexMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(err)
}

fn mats(list: Vec<Rows>) -> PyResult<Vec<ComplexMatrix>> {
    list.into_iter().map(mat).collect()
}

fn state(occ: Vec<usize>) -> FockState {
    FockState::new(occ)
}

/// Output distribution over the Fock basis, with the heralding probability
/// that produced it (1 for unitaries).
#[pyclass(frozen, module = "uavg")]
struct Distribution(core::Distribution);

#[pymethods]
impl Distribution {
    /// Basis states as lists of occupations, in the order of `probs`.
    fn states(&self) -> Vec<Vec<usize>> {
        self.0
            .basis()
            .states()
            .iter()
            .map(|s| s.occupations().to_vec())
            .collect()
    }

    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    #[getter]
    fn herald_probability(&self) -> f64 {
        self.0.herald_probability()
    }

    fn prob(&self, occupations: Vec<usize>) -> Option<f64> {
        self.0.prob(&state(occupations))
    }

    fn __len__(&self) -> usize {
        self.0.probs().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Distribution(states={}, herald_probability={})",
            self.0.probs().len(),
            self.0.herald_probability()
        )
    }
}

/// A target unitary realised as a uniform-depth rectangular mesh whose
/// angles receive Gaussian noise.
#[pyclass(frozen, module = "uavg")]
struct NoisyInterferometer(core::NoisyInterferometer);

#[pymethods]
impl NoisyInterferometer {
    #[new]
    fn new(target: Rows) -> PyResult<Self> {
        Ok(Self(core::NoisyInterferometer::new(&mat(target)?).map_err(err)?))
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    fn target(&self) -> Rows {
        self.0.target().to_rows()
    }

    /// Mesh as a JSON string.
    fn mesh_json(&self) -> PyResult<String> {
        serde_json::to_string(self.0.mesh()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `count` noisy realisations drawn from one seeded stream.
    #[pyo3(signature = (nu, seed, count=1))]
    fn sample(&self, nu: f64, seed: u64, count: usize) -> PyResult<Vec<Rows>> {
        let noise = core::NoiseModel::gaussian(nu).map_err(err)?;
        let mut rng = RandomStream::from_seed(seed);
        Ok((0..count).map(|_| self.0.sample(&noise, &mut rng).to_rows()).collect())
    }
}

#[pyfunction]
fn haar_random(m: usize, seed: u64) -> Rows {
    core::haar_random(m, &mut RandomStream::from_seed(seed)).to_rows()
}

#[pyfunction]
fn dft(n: usize) -> PyResult<Rows> {
    Ok(core::dft(n).map_err(err)?.to_rows())
}

#[pyfunction]
fn permanent(a: Rows) -> PyResult<Complex64> {
    core::permanent_ryser(&mat(a)?).map_err(err)
}

/// n-photon lift of a single-photon transform.
#[pyfunction]
fn phi_matrix(a: Rows, n: usize) -> PyResult<Rows> {
    Ok(core::phi_matrix(&mat(a)?, n).map_err(err)?.to_rows())
}

/// Rectangular mesh of a unitary as a JSON string.
#[pyfunction]
#[pyo3(signature = (u, pad=false))]
fn clements_decompose(u: Rows, pad: bool) -> PyResult<String> {
    let mut mesh = core::clements_decompose(&mat(u)?).map_err(err)?;
    if pad {
        mesh = core::uniform_depth_pad(&mesh).map_err(err)?;
    }
    serde_json::to_string(&mesh).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn mesh_to_unitary(mesh_json: &str) -> PyResult<Rows> {
    let mesh: core::MeshSpec = serde_json::from_str(mesh_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(core::mesh_to_unitary(&mesh).map_err(err)?.to_rows())
}

#[pyfunction]
fn ideal_distribution(u: Rows, input: Vec<usize>) -> PyResult<Distribution> {
    Ok(Distribution(
        core::ideal_distribution(&mat(u)?, &state(input)).map_err(err)?,
    ))
}

/// Distribution of a contraction after heralding vacuum on its dilation.
#[pyfunction]
fn heralded_distribution(a: Rows, input: Vec<usize>) -> PyResult<Distribution> {
    Ok(Distribution(
        core::heralded_distribution(&mat(a)?, &state(input)).map_err(err)?,
    ))
}

#[pyfunction]
fn tvd(a: &Distribution, b: &Distribution) -> PyResult<f64> {
    core::tvd(&a.0, &b.0).map_err(err)
}

#[pyfunction]
fn arkhipov_bound(u: Rows, v: Rows, n: usize) -> PyResult<f64> {
    core::arkhipov_bound(&mat(u)?, &mat(v)?, n).map_err(err)
}

/// Returns `(bound, k, invertible)`.
#[pyfunction]
fn theorem1_bound(a: Rows, p_a: f64, b: Rows, p_b: f64, n: usize) -> PyResult<(f64, f64, bool)> {
    let r = core::theorem1_bound(&mat(a)?, p_a, &mat(b)?, p_b, n).map_err(err)?;
    Ok((r.bound, r.k, r.invertible))
}

#[pyfunction]
fn p_uni(nu: f64, d: usize, n: usize) -> PyResult<f64> {
    core::p_uni(nu, d, n).map_err(err)
}

#[pyfunction]
fn unitary_average(copies: Vec<Rows>) -> PyResult<Rows> {
    Ok(core::unitary_average(&mats(copies)?).map_err(err)?.to_rows())
}

/// Returns `(distribution, p_post)`.
#[pyfunction]
fn ua_distribution(copies: Vec<Rows>, input: Vec<usize>) -> PyResult<(Distribution, f64)> {
    let (d, p) = core::ua_distribution(&mats(copies)?, &state(input)).map_err(err)?;
    Ok((Distribution(d), p))
}

#[pyfunction]
fn distribution_average(dists: Vec<PyRef<'_, Distribution>>) -> PyResult<Distribution> {
    let inner: Vec<core::Distribution> = dists.iter().map(|d| d.0.clone()).collect();
    Ok(Distribution(core::distribution_average(&inner).map_err(err)?))
}

/// Full unitary of a uniform averaging network over the given copies.
#[pyfunction]
fn global_unitary(copies: Vec<Rows>) -> PyResult<Rows> {
    let net = core::AveragingNetwork::uniform(mats(copies)?).map_err(err)?;
    Ok(core::build_global_unitary(&net).map_err(err)?.to_rows())
}

/// Returns `(unitaries, coefficients, scale)`.
#[pyfunction]
fn decompose_into_unitaries(target: Rows) -> PyResult<(Vec<Rows>, Vec<Complex64>, f64)> {
    let s = core::decompose_into_unitaries(&mat(target)?).map_err(err)?;
    Ok((
        s.unitaries.iter().map(ComplexMatrix::to_rows).collect(),
        s.coefficients,
        s.scale,
    ))
}

#[pyfunction]
fn repeatability_witness(copies: Vec<Rows>, input: Vec<usize>) -> PyResult<f64> {
    core::repeatability_witness(&mats(copies)?, &state(input)).map_err(err)
}

/// Monte Carlo sweep over every (nu, N, run); one dict per row.
#[pyfunction]
#[pyo3(signature = (m=2, n=2, nu_values=vec![0.01], n_values=vec![1, 2, 3, 4, 5, 6, 7, 8], runs=300, seed=2025, identity_target=false, fresh_target_per_run=false, threads=None))]
#[allow(clippy::too_many_arguments)]
fn run_sweep<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    nu_values: Vec<f64>,
    n_values: Vec<usize>,
    runs: usize,
    seed: u64,
    identity_target: bool,
    fresh_target_per_run: bool,
    threads: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig {
        m,
        n,
        nu_values,
        n_values,
        runs,
        master_seed: seed,
        target: if identity_target {
            TargetSpec::Identity
        } else {
            TargetSpec::Haar { seed: None }
        },
        input_state: None,
        fresh_target_per_run,
        threads,
    };
    let rows = py.detach(|| core_sweep(&cfg)).map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("run", r.run)?;
            d.set_item("N", r.copies)?;
            d.set_item("nu", r.nu)?;
            d.set_item("tvd_ua", r.tvd_ua)?;
            d.set_item("tvd_da", r.tvd_da)?;
            d.set_item("bound_ua", r.bound_ua)?;
            d.set_item("bound_da", r.bound_da)?;
            d.set_item("p_post", r.p_post)?;
            d.set_item("p_uni", r.p_uni)?;
            d.set_item("invertible", r.invertible)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn uavg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Distribution>()?;
    m.add_class::<NoisyInterferometer>()?;
    m.add_function(wrap_pyfunction!(haar_random, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add_function(wrap_pyfunction!(phi_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(clements_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_to_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(heralded_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(tvd, m)?)?;
    m.add_function(wrap_pyfunction!(arkhipov_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(p_uni, m)?)?;
    m.add_function(wrap_pyfunction!(unitary_average, m)?)?;
    m.add_function(wrap_pyfunction!(ua_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(distribution_average, m)?)?;
    m.add_function(wrap_pyfunction!(global_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_into_unitaries, m)?)?;
    m.add_function(wrap_pyfunction!(repeatability_witness, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
