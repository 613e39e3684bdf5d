//! Python bindings.
//!
//! Complex quantities cross the boundary as Python `complex`; matrices as
//! nested lists, row major.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use schiffer_lab::abel_jacobi::{abel_jacobi, aj_jet, hyperelliptic_test, PathHints};
use schiffer_lab::curve::{parse_curve, CurveSpec, HyperellipticCurve, SurfacePoint};
use schiffer_lab::homology::{period_matrix, PeriodData};
use schiffer_lab::schiffer::schiffer_series;
use schiffer_lab::soliton;
use schiffer_lab::theta::{self, Characteristic};

fn err(e: schiffer_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<Complex64>]) -> PyResult<DMatrix<Complex64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn point(s: &str) -> PyResult<SurfacePoint> {
    SurfacePoint::parse(s).map_err(err)
}

/// A hyperelliptic curve `y² = f(x)` with its period data.
///
/// Coefficients are given lowest degree first, as integers or rational
/// strings such as `"3/2"`. Points use the command-line syntax:
/// `"re:im,+"`, `"branch:k"` or `"inf"`.
#[pyclass(module = "pyschiffer", frozen)]
struct Curve {
    curve: HyperellipticCurve,
    period: PeriodData,
}

#[pymethods]
impl Curve {
    #[new]
    #[pyo3(signature = (coeffs, name = "curve"))]
    fn new(coeffs: Vec<Bound<'_, PyAny>>, name: &str) -> PyResult<Self> {
        let f_coeffs = coeffs
            .iter()
            .map(|c| c.str().map(|s| s.to_string()))
            .collect::<PyResult<Vec<_>>>()?;
        let spec = CurveSpec {
            f_coeffs,
            name: name.to_string(),
        };
        let curve = parse_curve(&spec).map_err(err)?;
        let period = period_matrix(&curve).map_err(err)?;
        Ok(Curve { curve, period })
    }

    #[getter]
    fn genus(&self) -> usize {
        self.curve.genus()
    }

    #[getter]
    fn branch_points(&self) -> Vec<Complex64> {
        self.curve.branch_points().to_vec()
    }

    /// Normalized period matrix `Π`.
    fn period_matrix(&self) -> Vec<Vec<Complex64>> {
        rows(&self.period.pi)
    }

    /// `(‖Π − Πᵀ‖, λ_min(Im Π))`.
    fn certificate(&self) -> (f64, f64) {
        (self.period.symmetry_residual, self.period.min_imag_eigenvalue)
    }

    #[pyo3(signature = (target, base = "branch:0"))]
    fn abel_jacobi(&self, target: &str, base: &str) -> PyResult<Vec<Complex64>> {
        let v = abel_jacobi(
            &self.curve,
            &self.period,
            &point(base)?,
            &point(target)?,
            &PathHints::default(),
        )
        .map_err(err)?;
        Ok(v.value)
    }

    /// `[∂Ab, ∂²Ab, …]` in the local coordinate at `anchor`.
    #[pyo3(signature = (anchor, order = 2))]
    fn aj_jet(&self, anchor: &str, order: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let jet = aj_jet(&self.curve, &self.period, &point(anchor)?, order).map_err(err)?;
        Ok((1..=order).map(|n| jet.order(n).to_vec()).collect())
    }

    /// `(is_hyperelliptic_at_p, residual)`.
    #[pyo3(signature = (anchor, threshold = 1e-8))]
    fn hyper_test(&self, anchor: &str, threshold: f64) -> PyResult<(bool, f64)> {
        let t = hyperelliptic_test(&self.curve, &self.period, &point(anchor)?, threshold).map_err(err)?;
        Ok((t.is_hyperelliptic_at_p, t.residual))
    }

    /// Coefficients `[ΔΠ⁽¹⁾, …, ΔΠ⁽ᵒʳᵈᵉʳ⁾]` of the variation at `p0`.
    #[pyo3(signature = (p0, order = 2))]
    fn schiffer(&self, p0: &str, order: usize) -> PyResult<Vec<Vec<Vec<Complex64>>>> {
        let s = schiffer_series(&self.curve, &self.period, &point(p0)?, order, (2 * order).max(2)).map_err(err)?;
        Ok((1..=order).map(|n| rows(s.delta(n))).collect())
    }

    /// `Π(ε)` from the order-`order` series.
    #[pyo3(signature = (p0, eps, order = 2))]
    fn varied_period_matrix(&self, p0: &str, eps: f64, order: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let s = schiffer_series(&self.curve, &self.period, &point(p0)?, order, (2 * order).max(2)).map_err(err)?;
        Ok(rows(&s.eval(eps)))
    }

    fn __repr__(&self) -> String {
        format!("Curve(genus={}, coeffs={:?})", self.curve.genus(), self.curve.coeffs())
    }
}

/// `θ[α;β](0, Π)` with its truncation tail bound.
#[pyfunction]
fn theta_null(pi: Vec<Vec<Complex64>>, alpha: Vec<u8>, beta: Vec<u8>) -> PyResult<(Complex64, f64)> {
    if alpha.len() != beta.len() || alpha.iter().chain(&beta).any(|d| *d > 1) {
        return Err(PyValueError::new_err(
            "characteristic halves must be equal-length 0/1 lists",
        ));
    }
    let t = theta::theta_null(&matrix(&pi)?, &Characteristic::new(&alpha, &beta)).map_err(err)?;
    Ok((t.value, t.tail))
}

/// `(rational, best_residual, witnesses)`; witnesses are integer `(m, n)` vectors.
#[pyfunction]
#[pyo3(signature = (u, pi, tol = 1e-8, bound = 1_000_000))]
fn rationality_test(
    u: Vec<Complex64>,
    pi: Vec<Vec<Complex64>>,
    tol: f64,
    bound: i64,
) -> PyResult<(bool, f64, Vec<Vec<i64>>)> {
    let v = soliton::rationality_test(&u, &matrix(&pi)?, tol, bound).map_err(err)?;
    Ok((v.rational, v.best_residual, v.witnesses))
}

#[pymodule]
fn pyschiffer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Curve>()?;
    m.add_function(wrap_pyfunction!(theta_null, m)?)?;
    m.add_function(wrap_pyfunction!(rationality_test, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_round_trip_row_major() {
        let m = DMatrix::from_fn(2, 2, |i, j| Complex64::new(i as f64, j as f64));
        let r = rows(&m);
        assert_eq!(r[0][1], Complex64::new(0.0, 1.0));
        assert_eq!(matrix(&r).unwrap(), m);
    }

    #[test]
    fn ragged_input_is_rejected() {
        let r = vec![vec![Complex64::new(1.0, 0.0)], vec![]];
        assert!(matrix(&r).is_err());
    }
}
