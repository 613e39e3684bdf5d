//! Abel-Jacobi map, its derivative jets, and the hyperellipticity test.
//!
//! Integrals run along polylines in the x-plane. A straight leg that passes
//! too close to a branch point gets a deterministic detour: a waypoint at
//! distance `0.4·min_gap` from the offending branch point, on the side of the
//! leg away from it. `y` is continued along every leg; legs ending at a
//! branch point switch to the coordinate `x = e + (z - e)v²`, which makes the
//! integrand smooth.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{continue_sqrt, factorial, Chart, HyperellipticCurve, SurfacePoint};
use crate::error::{Error, Result};
use crate::homology::{normalized_jets, PeriodData};
use crate::quadrature::legendre_pair;

const MAX_DETOUR_DEPTH: usize = 8;
const MAX_BISECTIONS: usize = 40;

/// Optional routing information for [`abel_jacobi`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PathHints {
    /// Extra x-plane waypoints visited in order between the endpoints.
    #[serde(default, with = "crate::serialize::complex_vec")]
    pub waypoints: Vec<Complex64>,
    /// Closed cycles appended to the path: `(label, multiplicity)`, labels `a1`, `b2`, ...
    #[serde(default)]
    pub cycles: Vec<(String, i64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AjValue {
    pub base: SurfacePoint,
    pub target: SurfacePoint,
    #[serde(with = "crate::serialize::complex_vec")]
    pub value: Vec<Complex64>,
    pub lattice_reduced: bool,
    /// x-plane vertices actually integrated over, in order.
    #[serde(with = "crate::serialize::complex_vec")]
    pub path: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AjJet {
    pub anchor: SurfacePoint,
    pub chart: Chart,
    /// `derivatives[n-1][j]` is `∂ⁿ/∂τⁿ Ab_j` at the anchor.
    pub derivatives: Vec<Vec<[String; 2]>>,
    #[serde(skip)]
    values: Vec<Vec<Complex64>>,
}

impl AjJet {
    fn new(anchor: SurfacePoint, chart: Chart, values: Vec<Vec<Complex64>>) -> Self {
        let derivatives = values
            .iter()
            .map(|v| v.iter().map(|z| crate::serialize::encode(*z)).collect())
            .collect();
        AjJet {
            anchor,
            chart,
            derivatives,
            values,
        }
    }

    /// `∂ⁿ/∂τⁿ Ab` for `n ≥ 1`.
    pub fn order(&self, n: usize) -> &[Complex64] {
        &self.values[n - 1]
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperTest {
    pub is_hyperelliptic_at_p: bool,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct AjOptions {
    pub tol: f64,
}

impl Default for AjOptions {
    fn default() -> Self {
        AjOptions { tol: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug)]
enum End {
    Ordinary(Complex64),
    Branch(usize),
}

struct Integrator<'a> {
    curve: &'a HyperellipticCurve,
    tol: f64,
    clearance: f64,
}

impl<'a> Integrator<'a> {
    fn new(curve: &'a HyperellipticCurve, tol: f64) -> Self {
        Integrator {
            curve,
            tol,
            clearance: 0.2 * curve.min_gap(),
        }
    }

    fn g(&self) -> usize {
        self.curve.genus()
    }

    /// Waypoints from `a` to `b` avoiding branch points not in `allowed`.
    fn route(&self, a: Complex64, b: Complex64, allowed: Option<usize>, depth: usize) -> Result<Vec<Complex64>> {
        if depth > MAX_DETOUR_DEPTH {
            return Err(Error::Path("detour recursion limit reached".into()));
        }
        let e = self.curve.branch_points();
        let d = b - a;
        let mut worst: Option<(usize, f64, Complex64)> = None;
        for (k, ek) in e.iter().enumerate() {
            if Some(k) == allowed {
                continue;
            }
            let t = if d.norm_sqr() == 0.0 {
                0.0
            } else {
                (((ek - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
            };
            let c = a + d * t;
            let dist = (c - ek).norm();
            let clear = self.clearance.min(0.5 * (a - ek).norm()).min(0.5 * (b - ek).norm());
            if clear <= 1e-10 * self.curve.scale() {
                return Err(Error::Clearance {
                    index: k,
                    distance: dist,
                });
            }
            if dist < clear && worst.map(|w| dist < w.1).unwrap_or(true) {
                worst = Some((k, dist, c));
            }
        }
        let Some((k, _, c)) = worst else {
            return Ok(vec![a, b]);
        };
        let ek = e[k];
        let off = c - ek;
        let normal = if off.norm() > 1e-14 * self.curve.scale() {
            off / off.norm()
        } else {
            // segment runs through the branch point: pass on its left
            Complex64::new(0.0, 1.0) * d / d.norm()
        };
        let w = ek + normal * (0.4 * self.curve.min_gap());
        let mut left = self.route(a, w, allowed, depth + 1)?;
        let right = self.route(w, b, allowed, depth + 1)?;
        left.pop();
        left.extend(right);
        Ok(left)
    }

    /// Integrate `x^m dx / y` (all `m < g`) from `(x0, y0)` to `end`; returns the
    /// raw integrals, the final `y` (zero at a branch end) and the path.
    fn leg(
        &self,
        x0: Complex64,
        y0: Complex64,
        vias: &[Complex64],
        end: End,
    ) -> Result<(Vec<Complex64>, Complex64, Vec<Complex64>)> {
        let (xe, allowed) = match end {
            End::Ordinary(x) => (x, None),
            End::Branch(k) => (self.curve.branch_point(k)?, Some(k)),
        };
        let mut stops = vec![x0];
        stops.extend_from_slice(vias);
        stops.push(xe);
        let mut path = vec![x0];
        for w in stops.windows(2) {
            let r = self.route(w[0], w[1], allowed, 0)?;
            path.extend_from_slice(&r[1..]);
        }
        let mut total = vec![Complex64::new(0.0, 0.0); self.g()];
        let mut y = y0;
        let nseg = path.len() - 1;
        for s in 0..nseg {
            let (a, b) = (path[s], path[s + 1]);
            let last = s + 1 == nseg;
            if last && allowed.is_some() {
                let part = self.toward_branch(a, y, b)?;
                add(&mut total, &part);
                y = Complex64::new(0.0, 0.0);
            } else {
                let (part, y1) = self.segment(a, b, y)?;
                add(&mut total, &part);
                y = y1;
            }
        }
        Ok((total, y, path))
    }

    /// Straight segment `a → b` with adaptive Gauss-Legendre.
    fn segment(&self, a: Complex64, b: Complex64, ya: Complex64) -> Result<(Vec<Complex64>, Complex64)> {
        let g = self.g();
        let d = b - a;
        let curve = self.curve;
        let integrand = move |t: f64, y: Complex64, out: &mut [Complex64], w: f64| {
            let x = a + d * t;
            let mut xp = d / y * w;
            for o in out.iter_mut() {
                *o += xp;
                xp *= x;
            }
        };
        let fsq = move |t: f64| curve.f_factored(a + d * t);
        let mut out = vec![Complex64::new(0.0, 0.0); g];
        let y1 = adaptive(&fsq, &integrand, 0.0, 1.0, ya, g, self.tol, 0, &mut out)?;
        Ok((out, y1))
    }

    /// Segment from `z` (with `y = yz`) into the branch point `e`, via `x = e + (z-e)v²`.
    fn toward_branch(&self, z: Complex64, yz: Complex64, e: Complex64) -> Result<Vec<Complex64>> {
        let g = self.g();
        let dz = z - e;
        let curve = self.curve;
        let k = curve.nearest_branch(e).0;
        let branch = curve.branch_points().to_vec();
        let lc = curve.leading();
        // w(v)² = (z - e) F(x),  F = f / (x - e)
        let wsq = move |v: f64| {
            let x = e + dz * v * v;
            let f = branch
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .fold(Complex64::new(lc, 0.0), |acc, (_, ej)| acc * (x - ej));
            dz * f
        };
        let integrand = move |v: f64, w: Complex64, out: &mut [Complex64], wt: f64| {
            let x = e + dz * v * v;
            let mut xp = dz * 2.0 / w * wt;
            for o in out.iter_mut() {
                *o += xp;
                xp *= x;
            }
        };
        // v runs 1 → 0; integrate over [0, 1] in reversed orientation
        let mut out = vec![Complex64::new(0.0, 0.0); g];
        adaptive(&wsq, &integrand, 1.0, 0.0, yz, g, self.tol, 0, &mut out)?;
        Ok(out)
    }
}

fn add(acc: &mut [Complex64], part: &[Complex64]) {
    for (a, p) in acc.iter_mut().zip(part) {
        *a += p;
    }
}

/// Adaptive 12/24-point Gauss-Legendre on `[t0, t1]` (either orientation) of an
/// integrand depending on a square root `w` continued from `w0` at `t0`.
/// Returns `w` at `t1`; accumulates into `out`.
#[allow(clippy::too_many_arguments)]
fn adaptive<S, F>(
    wsq: &S,
    integrand: &F,
    t0: f64,
    t1: f64,
    w0: Complex64,
    dim: usize,
    tol: f64,
    depth: usize,
    out: &mut [Complex64],
) -> Result<Complex64>
where
    S: Fn(f64) -> Complex64,
    F: Fn(f64, Complex64, &mut [Complex64], f64),
{
    let ((x12, w12), (x24, w24)) = legendre_pair();
    let h = 0.5 * (t1 - t0);
    let mid = 0.5 * (t0 + t1);
    let rule = |xs: &[f64], ws: &[f64]| {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut t = t0;
        let mut w = w0;
        // nodes in the direction of travel
        let idx: Vec<usize> = if h >= 0.0 {
            (0..xs.len()).collect()
        } else {
            (0..xs.len()).rev().collect()
        };
        for i in idx {
            let tn = mid + h * xs[i];
            w = continue_sqrt(wsq, t, tn, w);
            t = tn;
            integrand(tn, w, &mut acc, ws[i] * h);
        }
        (acc, continue_sqrt(wsq, t, t1, w))
    };
    let (coarse, _) = rule(x12, w12);
    let (fine, w_end) = rule(x24, w24);
    let diff = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let mag = fine.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if diff <= tol * (1.0 + mag) || depth >= MAX_BISECTIONS {
        if diff > tol * (1.0 + mag) * 1e3 {
            return Err(Error::Quadrature(format!(
                "path segment did not converge (estimate {diff:e})"
            )));
        }
        add(out, &fine);
        return Ok(w_end);
    }
    let wm = adaptive(wsq, integrand, t0, mid, w0, dim, tol * 0.5, depth + 1, out)?;
    adaptive(wsq, integrand, mid, t1, wm, dim, tol * 0.5, depth + 1, out)
}

/// Raw integrals `∫_{p0}^{p} x^m dx / y`, `m = 0..g`, and the integration path.
pub fn raw_integral(
    curve: &HyperellipticCurve,
    p0: &SurfacePoint,
    p: &SurfacePoint,
    waypoints: &[Complex64],
    opts: &AjOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let g = curve.genus();
    if matches!(p0, SurfacePoint::Infinity) || matches!(p, SurfacePoint::Infinity) {
        return Err(Error::Path("paths ending at infinity are not supported".into()));
    }
    if p0 == p && waypoints.is_empty() {
        return Ok((vec![Complex64::new(0.0, 0.0); g], vec![curve.x_of(p)?]));
    }
    let it = Integrator::new(curve, opts.tol);
    let neg = |v: Vec<Complex64>| v.into_iter().map(|z| -z).collect::<Vec<_>>();
    let rev = |mut v: Vec<Complex64>| {
        v.reverse();
        v
    };
    let rev_vias: Vec<Complex64> = waypoints.iter().rev().copied().collect();
    match (*p0, *p) {
        (SurfacePoint::Ordinary { x: x0, sheet: s0 }, SurfacePoint::Ordinary { x, sheet }) => {
            let y0 = curve.y(x0, s0);
            let (v, y1, path) = it.leg(x0, y0, waypoints, End::Ordinary(x))?;
            let want = curve.y(x, sheet);
            if (y1 - want).norm() <= (y1 + want).norm() {
                return Ok((v, path));
            }
            // wrong sheet on arrival: pass through the branch point nearest p
            let (k, _) = curve.nearest_branch(x);
            let (v1, _, path1) = it.leg(x0, y0, waypoints, End::Branch(k))?;
            let (v2, _, path2) = it.leg(x, want, &[], End::Branch(k))?;
            let mut total = v1;
            add(&mut total, &neg(v2));
            let mut path = path1;
            path.extend(rev(path2).into_iter().skip(1));
            Ok((total, path))
        }
        (SurfacePoint::Ordinary { x: x0, sheet: s0 }, SurfacePoint::Branch(k)) => {
            let (v, _, path) = it.leg(x0, curve.y(x0, s0), waypoints, End::Branch(k))?;
            Ok((v, path))
        }
        (SurfacePoint::Branch(k), SurfacePoint::Ordinary { x, sheet }) => {
            let (v, _, path) = it.leg(x, curve.y(x, sheet), &rev_vias, End::Branch(k))?;
            Ok((neg(v), rev(path)))
        }
        (SurfacePoint::Branch(k0), SurfacePoint::Branch(k1)) => {
            // through an ordinary point: the first waypoint, else a point beside the segment
            let e0 = curve.branch_point(k0)?;
            let e1 = curve.branch_point(k1)?;
            let (w, rest) = match waypoints.split_first() {
                Some((w, rest)) => (*w, rest.to_vec()),
                None => {
                    let d = e1 - e0;
                    let w = (e0 + e1) * 0.5 + Complex64::new(0.0, 0.25) * d;
                    (w, Vec::new())
                }
            };
            let yw = curve.y(w, crate::curve::Sheet::Plus);
            let (v0, _, path0) = it.leg(w, yw, &[], End::Branch(k0))?;
            let (v1, _, path1) = it.leg(w, yw, &rest, End::Branch(k1))?;
            let mut total = neg(v0);
            add(&mut total, &v1);
            let mut path = rev(path0);
            path.extend(path1.into_iter().skip(1));
            Ok((total, path))
        }
        _ => unreachable!("infinity handled above"),
    }
}

/// `Ab(p) - Ab(p0)` with normalized differentials.
pub fn abel_jacobi(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p0: &SurfacePoint,
    p: &SurfacePoint,
    hints: &PathHints,
) -> Result<AjValue> {
    abel_jacobi_with(curve, period, p0, p, hints, &AjOptions::default())
}

pub fn abel_jacobi_with(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    p0: &SurfacePoint,
    p: &SurfacePoint,
    hints: &PathHints,
    opts: &AjOptions,
) -> Result<AjValue> {
    let g = curve.genus();
    let (raw, path) = raw_integral(curve, p0, p, &hints.waypoints, opts)?;
    let mut value: Vec<Complex64> = (0..g)
        .map(|j| (0..g).map(|i| period.c[(j, i)] * raw[i]).sum())
        .collect();
    for (label, times) in &hints.cycles {
        let shift = cycle_shift(period, label)?;
        for (v, s) in value.iter_mut().zip(shift) {
            *v += s * *times as f64;
        }
    }
    Ok(AjValue {
        base: *p0,
        target: *p,
        value,
        lattice_reduced: false,
        path,
    })
}

/// Normalized periods of a labelled cycle: `e_i` for `a_i`, column `i` of `Π` for `b_i`.
fn cycle_shift(period: &PeriodData, label: &str) -> Result<Vec<Complex64>> {
    let g = period.genus;
    let bad = || Error::Path(format!("unknown cycle label '{label}'"));
    let (kind, idx) = label.split_at(1);
    let i: usize = idx.parse().map_err(|_| bad())?;
    if i == 0 || i > g {
        return Err(bad());
    }
    match kind {
        "a" => Ok((0..g)
            .map(|j| Complex64::new(if j == i - 1 { 1.0 } else { 0.0 }, 0.0))
            .collect()),
        "b" => Ok((0..g).map(|j| period.pi[(j, i - 1)]).collect()),
        _ => Err(bad()),
    }
}

/// Real coordinates `(m, n)` with `z = m + Π n`.
pub fn lattice_coordinates(period: &PeriodData, z: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = period.genus;
    let im = DMatrix::<f64>::from_fn(g, g, |i, j| period.pi[(i, j)].im);
    let re = DMatrix::<f64>::from_fn(g, g, |i, j| period.pi[(i, j)].re);
    let zi = nalgebra::DVector::<f64>::from_iterator(g, z.iter().map(|c| c.im));
    let zr = nalgebra::DVector::<f64>::from_iterator(g, z.iter().map(|c| c.re));
    let n = im
        .lu()
        .solve(&zi)
        .ok_or_else(|| Error::Certificate("Im Π is singular".into()))?;
    let m = zr - re * &n;
    Ok((m.iter().copied().collect(), n.iter().copied().collect()))
}

/// Distance (max norm in ℂ^g) from `z` to the nearest lattice point found by rounding.
pub fn lattice_residual(period: &PeriodData, z: &[Complex64]) -> Result<f64> {
    let reduced = reduce_mod_lattice(period, z)?;
    Ok(reduced.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// `z - (round(m) + Π round(n))`.
pub fn reduce_mod_lattice(period: &PeriodData, z: &[Complex64]) -> Result<Vec<Complex64>> {
    let g = period.genus;
    let (m, n) = lattice_coordinates(period, z)?;
    Ok((0..g)
        .map(|i| {
            let mut v = z[i] - m[i].round();
            for (k, nk) in n.iter().enumerate() {
                v -= period.pi[(i, k)] * nk.round();
            }
            v
        })
        .collect())
}

impl AjValue {
    /// Replace the value by its representative with lattice coordinates in `[-1/2, 1/2]`.
    pub fn reduced(mut self, period: &PeriodData) -> Result<AjValue> {
        self.value = reduce_mod_lattice(period, &self.value)?;
        self.lattice_reduced = true;
        Ok(self)
    }
}

/// Derivatives `∂ⁿ/∂τⁿ Ab` at `anchor` for `n = 1..=order`, from normalized jets.
pub fn aj_jet(curve: &HyperellipticCurve, period: &PeriodData, anchor: &SurfacePoint, order: usize) -> Result<AjJet> {
    aj_jet_scaled(curve, period, anchor, order, Complex64::new(1.0, 0.0))
}

pub fn aj_jet_scaled(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    anchor: &SurfacePoint,
    order: usize,
    scale: Complex64,
) -> Result<AjJet> {
    if order == 0 {
        return Err(Error::Chart("jet order must be at least 1".into()));
    }
    let jets = normalized_jets(curve, period, anchor, order - 1, scale)?;
    let values = (1..=order)
        .map(|n| jets.iter().map(|j| j.coeff(n - 1) * factorial(n - 1)).collect())
        .collect();
    Ok(AjJet::new(*anchor, jets[0].chart, values))
}

/// `∂²Ab/∂τ² = 0` at the anchor, decided against `threshold`.
pub fn hyperelliptic_test(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    anchor: &SurfacePoint,
    threshold: f64,
) -> Result<HyperTest> {
    let jet = aj_jet(curve, period, anchor, 2)?;
    if jet.order(2).iter().any(|z| !z.norm().is_finite()) {
        return Err(Error::Certificate(format!("non-finite second jet at {anchor}")));
    }
    let residual = jet.order(2).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(HyperTest {
        is_hyperelliptic_at_p: residual < threshold,
        residual,
        threshold,
    })
}
