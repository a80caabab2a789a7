//! Python bindings: couplings, R-matrix entries, sector spectra, partition
//! functions, Bethe roots and scaling fits.

use fpl2::bethe::{self, RootSet, RootSetRecord};
use fpl2::cft_scaling::{self, CoulombCharge, ScalingSeries, ScalingTarget};
use fpl2::couplings::CouplingSet;
use fpl2::transfer::{build_sector_block, reference_eigenvalue, ChargeVector, Variant};
use fpl2::{loop_oracle, rmatrix, Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        4 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn couplings(n: Option<f64>, gamma: Option<f64>, branch: u8) -> PyResult<CouplingSet> {
    match (n, gamma) {
        (Some(n), None) => CouplingSet::from_n(n, branch).map_err(to_py),
        (None, Some(g)) => CouplingSet::from_gamma(g, branch).map_err(to_py),
        _ => Err(PyValueError::new_err("give exactly one of n, gamma")),
    }
}

/// Model parameters derived from the loop fugacity `n = 2 cos(gamma)`.
#[pyclass(name = "Couplings", frozen)]
struct PyCouplings {
    inner: CouplingSet,
}

#[pymethods]
impl PyCouplings {
    #[new]
    #[pyo3(signature = (n=None, gamma=None, omega_branch=0))]
    fn new(n: Option<f64>, gamma: Option<f64>, omega_branch: u8) -> PyResult<Self> {
        Ok(PyCouplings { inner: couplings(n, gamma, omega_branch)? })
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.n
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn q(&self) -> C64 {
        self.inner.q
    }
    #[getter]
    fn omega(&self) -> C64 {
        self.inner.omega
    }
    #[getter]
    fn a(&self) -> C64 {
        self.inner.a
    }
    #[getter]
    fn c_pref(&self) -> C64 {
        self.inner.c_pref
    }

    fn flipped(&self) -> PyResult<Self> {
        Ok(PyCouplings { inner: self.inner.flipped().map_err(to_py)? })
    }

    /// Entry of the 256x256 loop R-matrix, 1-based indices.
    fn loop_r_entry(&self, row: usize, col: usize) -> PyResult<C64> {
        if !(1..=256).contains(&row) || !(1..=256).contains(&col) {
            return Err(PyValueError::new_err("indices must lie in 1..=256"));
        }
        Ok(rmatrix::loop_r(&self.inner).entry_1(row, col))
    }

    /// `(row, col, value, expected)` for the three quoted entries.
    fn quoted_entries(&self) -> Vec<(usize, usize, C64, C64)> {
        let r = rmatrix::loop_r(&self.inner);
        rmatrix::QUOTED_ENTRIES
            .iter()
            .zip(rmatrix::QUOTED_EXPONENTS)
            .map(|(&(i, j), (p, q))| (i, j, r.entry_1(i, j), self.inner.omega_pow(p) + self.inner.omega_pow(q)))
            .collect()
    }

    /// Eigenvalues of the loop transfer matrix in one charge sector, sorted
    /// by decreasing modulus.
    #[pyo3(signature = (width, sector, top_k=None))]
    fn sector_spectrum(&self, width: usize, sector: [i32; 3], top_k: Option<usize>) -> PyResult<Vec<C64>> {
        build_sector_block(width, Variant::TwoRowLoop, &self.inner, ChargeVector(sector))
            .and_then(|b| b.spectrum(top_k))
            .map_err(to_py)
    }

    /// Eigenvalue of the reference state; Bethe eigenvalues are normalised
    /// to `n^2` there.
    fn reference_eigenvalue(&self, width: usize) -> C64 {
        reference_eigenvalue(width, &self.inner)
    }

    fn arrow_partition_function(&self, width: usize, rows: usize) -> PyResult<C64> {
        loop_oracle::arrow_partition_function(width, rows, &self.inner).map_err(to_py)
    }

    fn loop_partition_function(&self, width: usize, rows: usize) -> PyResult<C64> {
        loop_oracle::loop_partition_function(width, rows, &self.inner).map_err(to_py)
    }

    fn trace_power(&self, width: usize, rows: usize) -> PyResult<C64> {
        fpl2::cli::trace_power(&self.inner, width, rows).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Couplings(n={}, gamma={})", self.inner.n, self.inner.gamma)
    }
}

/// Bethe roots on the three levels.
#[pyclass(name = "RootSet", frozen)]
struct PyRootSet {
    inner: RootSet,
}

#[pymethods]
impl PyRootSet {
    #[getter]
    fn roots(&self) -> [Vec<C64>; 3] {
        self.inner.roots.clone()
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn width(&self) -> usize {
        self.inner.width
    }
    #[getter]
    fn counts(&self) -> [usize; 3] {
        self.inner.counts()
    }

    /// Max-norm of `LHS/RHS - 1` over all equations.
    fn residual(&self) -> PyResult<f64> {
        let r = bethe::bae_ratio_residual(&self.inner).map_err(to_py)?;
        Ok(r.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Eigenvalue at `u = 0`, normalised to `n^2` on the reference state.
    fn eigenvalue(&self) -> PyResult<C64> {
        Ok(bethe::eigenvalue_t(&self.inner).map_err(to_py)?.t)
    }

    /// Image under `gamma -> pi - gamma`.
    fn n_flip(&self) -> PyResult<Self> {
        Ok(PyRootSet { inner: bethe::n_flip(&self.inner).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        let rec = RootSetRecord::from_roots(&self.inner).map_err(to_py)?;
        serde_json::to_string(&rec).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let rec: RootSetRecord = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyRootSet { inner: rec.to_roots().map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("RootSet(width={}, counts={:?}, gamma={})", self.inner.width, self.inner.counts(), self.inner.gamma)
    }
}

#[pyfunction]
#[pyo3(signature = (couplings, width, seed=None))]
fn ground_state(couplings: &PyCouplings, width: usize, seed: Option<&PyRootSet>) -> PyResult<PyRootSet> {
    let rs = bethe::solve_ground_state(&couplings.inner, width, seed.map(|s| &s.inner)).map_err(to_py)?;
    Ok(PyRootSet { inner: rs })
}

/// All solutions found by a seeded multistart search in one sector.
#[pyfunction]
#[pyo3(signature = (couplings, width, root_counts, tries=200, seed=1))]
fn solve_sector(couplings: &PyCouplings, width: usize, root_counts: [usize; 3], tries: usize, seed: u64) -> PyResult<Vec<PyRootSet>> {
    let sols = bethe::solve_sector(&couplings.inner, width, root_counts, tries, seed).map_err(to_py)?;
    Ok(sols.into_iter().map(|s| PyRootSet { inner: s.roots }).collect())
}

#[pyfunction]
fn central_charge_closed(gamma: f64) -> PyResult<f64> {
    cft_scaling::central_charge_closed(gamma).map_err(to_py)
}

/// `e` in the fundamental-weight basis, `m` in the simple-root basis.
#[pyfunction]
#[pyo3(signature = (e, m, gamma, check_lattice=true))]
fn conformal_weight(e: [f64; 3], m: [f64; 3], gamma: f64, check_lattice: bool) -> PyResult<f64> {
    let ch = CoulombCharge::new(e, m, gamma);
    if check_lattice {
        cft_scaling::conformal_weight(&ch, gamma).map_err(to_py)
    } else {
        cft_scaling::conformal_weight_unchecked(&ch, gamma).map_err(to_py)
    }
}

/// `[(L, log|t|)]` for the Bethe ground state.
#[pyfunction]
fn ground_state_series(couplings: &PyCouplings, widths: Vec<usize>) -> PyResult<Vec<(usize, f64)>> {
    Ok(cft_scaling::ground_state_series(&couplings.inner, &widths).map_err(to_py)?.entries)
}

/// Fits `log t = -L f0 + pi c / (6L) [+ b / L^3]`; returns `(f0, c, residual_norm)`.
#[pyfunction]
#[pyo3(signature = (entries, with_l3=false))]
fn fit_scaling(entries: Vec<(usize, f64)>, with_l3: bool) -> PyResult<(f64, f64, f64)> {
    let s = ScalingSeries::new(entries, ScalingTarget::Ground).map_err(to_py)?;
    let f = cft_scaling::fit_scaling(&s, with_l3, None).map_err(to_py)?;
    Ok((f.f0, f.coefficient, f.residual_norm))
}

#[pymodule]
fn fpl2py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCouplings>()?;
    m.add_class::<PyRootSet>()?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sector, m)?)?;
    m.add_function(wrap_pyfunction!(central_charge_closed, m)?)?;
    m.add_function(wrap_pyfunction!(conformal_weight, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_series, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    Ok(())
}
