//! ε-expansion of the period matrix under a Schiffer variation at `p₀`.
//!
//! With `D^k` the k-th t-derivative at `p₀` and `f*_i` the local density of the
//! deformed differential, the coefficient of `εⁿ` in `Π*(ε) - Π` is
//!
//! ```text
//! ΔΠ⁽ⁿ⁾_ij = Σ_{n'=1..n} 1/(n'!(n'-1)!) Σ_{s+m=n'-1} C(n'-1, m) [ε^{n-n'}](D^{n'-1+m} f*_i) · D^s f_j
//! ```
//!
//! and `f*_i = f_i + Σ_k C_ik(ε) e_k` with `C(ε) = Π*(ε) - Π` and `e_k` the
//! holomorphic local data of the dual forms `η_k`. Order `n` of `ΔΠ` needs only
//! orders `< n` of `f*`, so the two are solved together order by order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{factorial, HyperellipticCurve, LocalJet, SurfacePoint};
use crate::error::{Error, Result};
use crate::homology::{dual_form_local_data, normalized_jets, PeriodData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchifferOrder {
    pub n: usize,
    #[serde(rename = "dPi", with = "crate::serialize::complex_matrix")]
    pub dpi: DMatrix<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchifferSeries {
    pub p0: SurfacePoint,
    #[serde(with = "crate::serialize::complex")]
    pub chart_scale: Complex64,
    pub orders: Vec<SchifferOrder>,
    /// `C⁽ⁿ⁾_jk`, the coefficient of `εⁿ η_k` in `ω*_j`; equal to `ΔΠ⁽ⁿ⁾`.
    #[serde(rename = "C")]
    pub c: Vec<SchifferOrder>,
    /// `fstar[q][i]`: coefficient of `ε^q` in the t-jet of `f*_i` at `p₀`.
    #[serde(skip)]
    pub fstar: Vec<Vec<Vec<Complex64>>>,
    #[serde(rename = "Pi", with = "crate::serialize::complex_matrix")]
    pub pi: DMatrix<Complex64>,
}

impl SchifferSeries {
    pub fn order(&self) -> usize {
        self.orders.len()
    }

    /// `ΔΠ⁽ⁿ⁾`, `n ≥ 1`.
    pub fn delta(&self, n: usize) -> &DMatrix<Complex64> {
        &self.orders[n - 1].dpi
    }

    /// `Π + Σ_{n≤N} εⁿ ΔΠ⁽ⁿ⁾`.
    pub fn eval(&self, eps: f64) -> DMatrix<Complex64> {
        let mut out = self.pi.clone();
        let mut e = 1.0;
        for o in &self.orders {
            e *= eps;
            out += &o.dpi * Complex64::new(e, 0.0);
        }
        out
    }

    /// `‖ΔΠ⁽ⁿ⁾ - ΔΠ⁽ⁿ⁾ᵀ‖ / ‖ΔΠ⁽ⁿ⁾‖` for every order (max-entry norms).
    pub fn symmetry_residuals(&self) -> Vec<f64> {
        self.orders
            .iter()
            .map(|o| {
                let asym = (&o.dpi - o.dpi.transpose())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let size = o.dpi.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if size == 0.0 {
                    0.0
                } else {
                    asym / size
                }
            })
            .collect()
    }
}

/// `v vᵀ` with `v_i = f_i(p₀)`.
pub fn first_order_update(jets: &[LocalJet]) -> DMatrix<Complex64> {
    let g = jets.len();
    DMatrix::from_fn(g, g, |i, j| jets[i].coeff(0) * jets[j].coeff(0))
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Triangular solve from normalized jets `f` and dual data `e` at `p₀`
/// (both to t-order ≥ `2N - 2`).
pub fn schiffer_series_from_jets(
    p0: SurfacePoint,
    pi: &DMatrix<Complex64>,
    f: &[LocalJet],
    e: &[LocalJet],
    order: usize,
    chart_scale: Complex64,
) -> Result<SchifferSeries> {
    let g = f.len();
    if order == 0 {
        return Err(Error::Schiffer("series order must be at least 1".into()));
    }
    let need = 2 * order - 2;
    if f.iter().chain(e).any(|j| j.order() < need) {
        return Err(Error::Schiffer(format!(
            "insufficient jet budget: order {order} needs t-order {need}"
        )));
    }
    // derivative tables D^k f_i(0) and D^k e_k(0)
    let df: Vec<Vec<Complex64>> = f
        .iter()
        .map(|j| (0..=need).map(|k| j.derivative(k)).collect())
        .collect();
    let de: Vec<Vec<Complex64>> = e
        .iter()
        .map(|j| (0..=need).map(|k| j.derivative(k)).collect())
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    // fstar[q][i][k] = [ε^q] D^k f*_i(0)
    let mut fstar: Vec<Vec<Vec<Complex64>>> = vec![df.clone()];
    let mut dpis: Vec<DMatrix<Complex64>> = Vec::with_capacity(order);
    for n in 1..=order {
        let mut dpi = DMatrix::<Complex64>::zeros(g, g);
        for np in 1..=n {
            let q = n - np;
            let w = 1.0 / (factorial(np) * factorial(np - 1));
            for i in 0..g {
                for j in 0..g {
                    let mut acc = zero;
                    for m in 0..np {
                        let s = np - 1 - m;
                        acc += fstar[q][i][np - 1 + m] * df[j][s] * binom(np - 1, m);
                    }
                    dpi[(i, j)] += acc * w;
                }
            }
        }
        // [ε^n] f*_i = Σ_k ΔΠ⁽ⁿ⁾_ik e_k
        let next: Vec<Vec<Complex64>> = (0..g)
            .map(|i| {
                (0..=need)
                    .map(|k| (0..g).map(|l| dpi[(i, l)] * de[l][k]).sum())
                    .collect()
            })
            .collect();
        fstar.push(next);
        dpis.push(dpi);
    }
    fstar.truncate(order);
    let orders: Vec<SchifferOrder> = dpis
        .into_iter()
        .enumerate()
        .map(|(k, dpi)| SchifferOrder { n: k + 1, dpi })
        .collect();
    Ok(SchifferSeries {
        p0,
        chart_scale,
        c: orders.clone(),
        orders,
        fstar,
        pi: pi.clone(),
    })
}

pub fn schiffer_series(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p0: &SurfacePoint,
    order: usize,
    jet_budget: usize,
) -> Result<SchifferSeries> {
    schiffer_series_scaled(curve, period, p0, order, jet_budget, Complex64::new(1.0, 0.0))
}

/// As [`schiffer_series`] in the chart `x = x₀ + λ t`.
pub fn schiffer_series_scaled(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p0: &SurfacePoint,
    order: usize,
    jet_budget: usize,
    scale: Complex64,
) -> Result<SchifferSeries> {
    if !p0.is_ordinary() {
        return Err(Error::Schiffer("variation point must be an ordinary point".into()));
    }
    if order >= 1 && jet_budget + 1 < 2 * order {
        return Err(Error::Schiffer(format!(
            "insufficient jet budget {jet_budget}: order {order} needs {}",
            2 * order - 1
        )));
    }
    let f = normalized_jets(curve, period, p0, jet_budget, scale)?;
    let e = dual_form_local_data(period, &f)?;
    schiffer_series_from_jets(*p0, &period.pi, &f, &e, order, scale)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSum {
    #[serde(with = "crate::serialize::complex_vec")]
    pub values: Vec<Complex64>,
    pub max_abs: f64,
    pub derivative: bool,
}

/// `S_i = Σ_k (dⁱf_k/dtⁱ)(p₀) · h_k(p)` (or `h'_k(p)`), `i = 0..=max_i`.
pub fn criterion_sum(f_jets: &[LocalJet], h_jets: &[LocalJet], max_i: usize, derivative: bool) -> Result<CriterionSum> {
    if f_jets.len() != h_jets.len() || f_jets.is_empty() {
        return Err(Error::AnchorMismatch("jet families differ in size".into()));
    }
    if f_jets.iter().any(|j| !j.same_anchor(&f_jets[0])) || h_jets.iter().any(|j| !j.same_anchor(&h_jets[0])) {
        return Err(Error::AnchorMismatch("jets in a family must share an anchor".into()));
    }
    if f_jets[0].anchor == h_jets[0].anchor {
        return Err(Error::AnchorMismatch("p must differ from p0".into()));
    }
    if f_jets.iter().any(|j| j.order() < max_i) {
        return Err(Error::Schiffer(format!("jets too short for i = {max_i}")));
    }
    let hv: Vec<Complex64> = h_jets
        .iter()
        .map(|h| if derivative { h.coeff(1) } else { h.coeff(0) })
        .collect();
    let values: Vec<Complex64> = (0..=max_i)
        .map(|i| f_jets.iter().zip(&hv).map(|(f, h)| f.derivative(i) * h).sum())
        .collect();
    let max_abs = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(CriterionSum {
        values,
        max_abs,
        derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{parse_curve, CurveSpec, Sheet};
    use crate::homology::period_matrix;

    fn setup(c: &[i64]) -> (HyperellipticCurve, PeriodData) {
        let curve = parse_curve(&CurveSpec::new("t", c)).unwrap();
        let p = period_matrix(&curve).unwrap();
        (curve, p)
    }

    #[test]
    fn first_order_is_rank_one_outer_product() {
        let (c, p) = setup(&[-1, 0, 0, 0, 0, 1]);
        let p0 = SurfacePoint::ordinary(Complex64::new(2.0, 0.0), Sheet::Plus);
        let jets = normalized_jets(&c, &p, &p0, 1, Complex64::new(1.0, 0.0)).unwrap();
        let d = first_order_update(&jets);
        let sv = d.singular_values();
        assert!(sv[1] / sv[0] < 1e-13);
        let s = schiffer_series(&c, &p, &p0, 1, 1).unwrap();
        assert_eq!(s.delta(1), &d);
    }

    #[test]
    fn zero_vector_gives_zero_update() {
        let j = LocalJet {
            anchor: SurfacePoint::Branch(0),
            chart: crate::curve::Chart::Branch,
            coeffs: vec![Complex64::new(0.0, 0.0)],
        };
        let d = first_order_update(&[j.clone(), j]);
        assert!(d.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn chart_rescaling_scales_first_order_by_lambda_squared() {
        let (c, p) = setup(&[-1, 0, 0, 0, 0, 1]);
        let p0 = SurfacePoint::ordinary(Complex64::new(2.0, 0.3), Sheet::Minus);
        let lam = Complex64::new(0.7, -1.3);
        let a = schiffer_series(&c, &p, &p0, 1, 1).unwrap();
        let b = schiffer_series_scaled(&c, &p, &p0, 1, 1, lam).unwrap();
        let want = a.delta(1) * (lam * lam);
        let size = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((b.delta(1) - want).iter().all(|z| z.norm() < 1e-12 * size));
    }

    #[test]
    fn budget_and_chart_errors() {
        let (c, p) = setup(&[0, -1, 0, 1]);
        let p0 = SurfacePoint::ordinary(Complex64::new(2.0, 0.0), Sheet::Plus);
        assert!(matches!(schiffer_series(&c, &p, &p0, 3, 3), Err(Error::Schiffer(_))));
        assert!(matches!(
            schiffer_series(&c, &p, &SurfacePoint::Branch(0), 1, 1),
            Err(Error::Schiffer(_))
        ));
    }

    #[test]
    fn criterion_s0_is_a_dot_product() {
        let (c, p) = setup(&[-1, 0, 0, 0, 0, 1]);
        let p0 = SurfacePoint::ordinary(Complex64::new(2.0, 0.0), Sheet::Plus);
        let q = SurfacePoint::ordinary(Complex64::new(-0.5, 1.5), Sheet::Plus);
        let one = Complex64::new(1.0, 0.0);
        let f = normalized_jets(&c, &p, &p0, 6, one).unwrap();
        let gq = normalized_jets(&c, &p, &q, 2, one).unwrap();
        let h = dual_form_local_data(&p, &gq).unwrap();
        let s = criterion_sum(&f, &h, 6, false).unwrap();
        let dot: Complex64 = (0..2).map(|k| f[k].coeff(0) * h[k].coeff(0)).sum();
        assert_eq!(s.values[0], dot);
        assert!(s.max_abs > 1e-6);
        assert!(criterion_sum(&f, &f, 2, false).is_err());
    }
}
