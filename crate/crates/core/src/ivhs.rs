//! Rank-one IVHS directions and the hyperelliptic-breaking experiment.
//!
//! A Schiffer variation at `p` acts on `H^{1,0} → H^{0,1}` as `δ = v vᵀ` with
//! `v = (f_1(p), …, f_g(p))`; its projective class is the bicanonical image of `p`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::random_point;
use crate::curve::{HyperellipticCurve, SurfacePoint};
use crate::error::{Error, Result};
use crate::homology::{certify, normalized_jets, PeriodData};
use crate::theta::{even_nulls, hyperelliptic_theta_test};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rank1Direction {
    pub point: SurfacePoint,
    #[serde(with = "crate::serialize::complex_vec")]
    pub v: Vec<Complex64>,
    #[serde(with = "crate::serialize::complex_matrix")]
    pub delta: DMatrix<Complex64>,
    /// `(v_i v_j)` for `i ≤ j`, row-major.
    #[serde(with = "crate::serialize::complex_vec")]
    pub bicanonical: Vec<Complex64>,
}

impl Rank1Direction {
    pub fn from_vector(point: SurfacePoint, v: Vec<Complex64>) -> Self {
        let g = v.len();
        let delta = DMatrix::from_fn(g, g, |i, j| v[i] * v[j]);
        let mut bicanonical = Vec::with_capacity(g * (g + 1) / 2);
        for i in 0..g {
            for j in i..g {
                bicanonical.push(v[i] * v[j]);
            }
        }
        Rank1Direction {
            point,
            v,
            delta,
            bicanonical,
        }
    }

    /// `σ₂/σ₁` of `δ` (zero in genus one).
    pub fn rank_residual(&self) -> f64 {
        singular_ratio(&self.delta)
    }
}

pub fn singular_ratio(m: &DMatrix<Complex64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    if s.len() < 2 || s[0] == 0.0 {
        return 0.0;
    }
    let mut v: Vec<f64> = s.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v[1] / v[0]
}

pub fn schiffer_direction(curve: &HyperellipticCurve, period: &PeriodData, p: &SurfacePoint) -> Result<Rank1Direction> {
    schiffer_direction_scaled(curve, period, p, Complex64::new(1.0, 0.0))
}

/// Direction in the chart `x = x₀ + λt`.
pub fn schiffer_direction_scaled(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p: &SurfacePoint,
    scale: Complex64,
) -> Result<Rank1Direction> {
    if !matches!(p, SurfacePoint::Ordinary { .. }) {
        return Err(Error::Chart(format!(
            "Schiffer directions need an ordinary point, got {p}"
        )));
    }
    let jets = normalized_jets(curve, period, p, 0, scale)?;
    Ok(Rank1Direction::from_vector(
        *p,
        jets.iter().map(|j| j.coeff(0)).collect(),
    ))
}

/// Angle between the complex lines spanned by `a` and `b`.
pub fn projective_angle(a: &[Complex64], b: &[Complex64]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() / (na * nb);
    // sine from the orthogonal component, accurate near zero
    let off: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (y / nb - ip * x / na).norm_sqr())
        .sum::<f64>()
        .sqrt();
    off.min(1.0).asin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullRow {
    pub eps: f64,
    pub min_null: f64,
    pub argmin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakingExperiment {
    pub curve: String,
    pub p0: SurfacePoint,
    pub base: NullRow,
    pub rows: Vec<NullRow>,
    /// Least-squares slope of `log min_null` against `log ε` over the grid.
    pub slope: f64,
    pub monotone: bool,
    /// Whether the growth at `ε = 1e−4` clears ten times the vanishing threshold.
    pub generic: bool,
}

fn min_null(pi: &DMatrix<Complex64>, eps: f64) -> Result<NullRow> {
    let nulls = even_nulls(pi)?;
    let (ch, v) = nulls
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .ok_or_else(|| Error::Theta("no even characteristics".into()))?;
    Ok(NullRow {
        eps,
        min_null: *v,
        argmin: ch.to_string(),
    })
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Minimum even theta-null along `Π + ε·ΔΠ⁽¹⁾(p₀)`.
pub fn hyperelliptic_breaking_experiment(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p0: &SurfacePoint,
    eps_grid: &[f64],
    threshold: f64,
) -> Result<BreakingExperiment> {
    let test = hyperelliptic_theta_test(&period.pi, curve.genus(), threshold)?;
    if !test.hyperelliptic {
        return Err(Error::Experiment(format!(
            "no vanishing even theta-null (smallest {:e})",
            test.min_even_null
        )));
    }
    // ΔΠ⁽¹⁾ is the outer product of the normalized densities at p₀
    let update = schiffer_direction(curve, period, p0)?.delta;
    let base = min_null(&period.pi, 0.0)?;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let pi = &period.pi + &update * Complex64::new(eps, 0.0);
        certify(&pi).map_err(|e| Error::Experiment(format!("ε = {eps:e} leaves the Siegel space: {e}")))?;
        rows.push(min_null(&pi, eps)?);
    }
    let monotone = rows.windows(2).all(|w| w[1].min_null > w[0].min_null)
        && rows.first().map(|r| r.min_null > base.min_null).unwrap_or(true);
    let xs: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.min_null).collect();
    let slope = fit_slope(&xs, &ys);
    // growth at 1e−4 decides genericity of p₀
    let probe = &period.pi + &update * Complex64::new(1e-4, 0.0);
    let growth = min_null(&probe, 1e-4)?.min_null - base.min_null;
    Ok(BreakingExperiment {
        curve: curve.name().to_string(),
        p0: *p0,
        base,
        rows,
        slope,
        monotone,
        generic: growth >= 10.0 * threshold,
    })
}

/// Draw `p₀` until the experiment is generic, at most `tries` times; the last
/// draw is returned (flagged non-generic) when none qualifies.
pub fn sample_generic<R: Rng>(
    rng: &mut R,
    curve: &HyperellipticCurve,
    period: &PeriodData,
    eps_grid: &[f64],
    threshold: f64,
    tries: usize,
) -> Result<(BreakingExperiment, usize)> {
    let mut last = None;
    for attempt in 1..=tries.max(1) {
        let p0 = random_point(rng, curve);
        let exp = hyperelliptic_breaking_experiment(curve, period, &p0, eps_grid, threshold)?;
        if exp.generic {
            return Ok((exp, attempt));
        }
        last = Some(exp);
    }
    Ok((last.expect("at least one draw"), tries.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::homology::period_matrix;

    #[test]
    fn directions_are_symmetric_rank_one() {
        let curve = corpus::random_curve(&mut corpus::rng(2), 3, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        let p = corpus::random_point(&mut corpus::rng(9), &curve);
        let d = schiffer_direction(&curve, &period, &p).unwrap();
        assert!(d.rank_residual() < 1e-12);
        assert!((&d.delta - d.delta.transpose()).norm() == 0.0);
        assert_eq!(d.bicanonical.len(), 6);
    }

    #[test]
    fn chart_rescaling_is_projectively_trivial() {
        let curve = corpus::random_curve(&mut corpus::rng(4), 2, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        let p = corpus::random_point(&mut corpus::rng(5), &curve);
        let lam = Complex64::new(0.3, -1.7);
        let a = schiffer_direction(&curve, &period, &p).unwrap();
        let b = schiffer_direction_scaled(&curve, &period, &p, lam).unwrap();
        for (x, y) in a.delta.iter().zip(b.delta.iter()) {
            assert!((x * lam * lam - y).norm() < 1e-12 * (1.0 + y.norm()));
        }
        assert!(projective_angle(&a.bicanonical, &b.bicanonical) < 1e-12);
    }

    #[test]
    fn distinct_points_give_distinct_bicanonical_images() {
        let curve = corpus::random_curve(&mut corpus::rng(4), 2, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        let mut rng = corpus::rng(6);
        let p = corpus::random_point(&mut rng, &curve);
        let q = corpus::random_point(&mut rng, &curve);
        let a = schiffer_direction(&curve, &period, &p).unwrap();
        let b = schiffer_direction(&curve, &period, &q).unwrap();
        assert!(projective_angle(&a.bicanonical, &b.bicanonical) > 1e-6);
    }

    #[test]
    fn non_ordinary_points_are_rejected() {
        let curve = corpus::random_curve(&mut corpus::rng(4), 2, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        assert!(schiffer_direction(&curve, &period, &SurfacePoint::Branch(0)).is_err());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = [1e-5, 1e-4, 1e-3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((fit_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }
}
