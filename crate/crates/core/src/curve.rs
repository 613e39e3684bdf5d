//! Hyperelliptic curves `y² = f(x)`, points on them, and local jets of the
//! holomorphic differentials `x^{j-1} dx / y`.
//!
//! Coefficients are ingested as exact rationals (decimal strings) so that the
//! squarefree check is exact; everything downstream runs in `f64`.
//!
//! Sheet convention: at an ordinary point `x₀` the sheet `+` carries
//! `y = √f(x₀)` with the principal square root, `-` its negative.

use nalgebra::{DMatrix, Schur};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::series::PowerSeries;

/// Largest truncation order accepted by [`differential_jet`].
pub const MAX_JET_ORDER: usize = 256;

/// Structured-text curve description: `{"f_coeffs": [...], "name": "..."}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    /// Ascending-degree coefficients of f as decimal strings.
    pub f_coeffs: Vec<String>,
    #[serde(default)]
    pub name: String,
}

impl CurveSpec {
    pub fn new(name: &str, coeffs: &[i64]) -> Self {
        CurveSpec {
            f_coeffs: coeffs.iter().map(|c| c.to_string()).collect(),
            name: name.to_string(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve spec serializes")
    }
}

#[derive(Clone, Debug)]
pub struct HyperellipticCurve {
    name: String,
    exact: Vec<BigRational>,
    coeffs: Vec<f64>,
    genus: usize,
    branch: Vec<Complex64>,
    root_error: f64,
    min_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sheet {
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sheet {
        match self {
            Sheet::Plus => Sheet::Minus,
            Sheet::Minus => Sheet::Plus,
        }
    }
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sheet::Plus => write!(f, "+"),
            Sheet::Minus => write!(f, "-"),
        }
    }
}

/// A point of the curve: an ordinary point with a sheet tag, a finite
/// Weierstrass point by branch index, or the branch point at infinity
/// (odd degree only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfacePoint {
    Ordinary {
        #[serde(with = "crate::serialize::complex")]
        x: Complex64,
        sheet: Sheet,
    },
    Branch(usize),
    Infinity,
}

impl SurfacePoint {
    pub fn ordinary(x: Complex64, sheet: Sheet) -> Self {
        SurfacePoint::Ordinary { x, sheet }
    }

    pub fn is_ordinary(&self) -> bool {
        matches!(self, SurfacePoint::Ordinary { .. })
    }

    /// Parse `re[:im],sheet`, `branch:K` or `inf`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(SurfacePoint::Infinity);
        }
        if let Some(rest) = s.strip_prefix("branch:") {
            let k = rest
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::MalformedSpec(format!("branch index '{rest}': {e}")))?;
            return Ok(SurfacePoint::Branch(k));
        }
        let (xpart, sheet) = match s.rsplit_once(',') {
            Some((x, sh)) => (x, sh.trim()),
            None => (s, "+"),
        };
        let sheet = match sheet {
            "+" | "p" | "plus" => Sheet::Plus,
            "-" | "m" | "minus" => Sheet::Minus,
            other => return Err(Error::MalformedSpec(format!("sheet tag '{other}'"))),
        };
        let (re, im) = match xpart.split_once(':') {
            Some((a, b)) => (a, b),
            None => (xpart, "0"),
        };
        let pf = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedSpec(format!("coordinate '{t}': {e}")))
        };
        Ok(SurfacePoint::Ordinary {
            x: Complex64::new(pf(re)?, pf(im)?),
            sheet,
        })
    }
}

impl fmt::Display for SurfacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfacePoint::Ordinary { x, sheet } => write!(f, "{}:{},{}", x.re, x.im, sheet),
            SurfacePoint::Branch(k) => write!(f, "branch:{k}"),
            SurfacePoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Local coordinate used for a jet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `x = x₀ + λ t` on the anchor's sheet.
    Ordinary {
        #[serde(with = "crate::serialize::complex")]
        scale: Complex64,
    },
    /// `x = e_k + τ²`.
    Branch,
    /// `x = 1/τ²`.
    Infinity,
}

/// Truncated Taylor expansion `(Σ c_s t^s) dt` of a differential's local density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalJet {
    pub anchor: SurfacePoint,
    pub chart: Chart,
    #[serde(with = "crate::serialize::complex_vec")]
    pub coeffs: Vec<Complex64>,
}

impl LocalJet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, s: usize) -> Complex64 {
        self.coeffs.get(s).copied().unwrap_or_default()
    }

    /// `d^s f / dt^s` at the anchor, i.e. `s! c_s`.
    pub fn derivative(&self, s: usize) -> Complex64 {
        self.coeff(s) * factorial(s)
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    pub fn same_anchor(&self, other: &LocalJet) -> bool {
        self.anchor == other.anchor && self.chart == other.chart
    }

    /// Linear combination `Σ w_i jets_i` over jets sharing an anchor.
    pub fn combine(jets: &[LocalJet], weights: &[Complex64]) -> Result<LocalJet> {
        let first = jets
            .first()
            .ok_or_else(|| Error::AnchorMismatch("no jets to combine".into()))?;
        let n = jets.iter().map(|j| j.order()).min().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for (jet, w) in jets.iter().zip(weights) {
            if !jet.same_anchor(first) {
                return Err(Error::AnchorMismatch(format!("{} vs {}", jet.anchor, first.anchor)));
            }
            for (c, v) in coeffs.iter_mut().zip(&jet.coeffs) {
                *c += w * v;
            }
        }
        Ok(LocalJet {
            anchor: first.anchor,
            chart: first.chart,
            coeffs,
        })
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl HyperellipticCurve {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ascending coefficients in working precision.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn exact_coeffs(&self) -> &[BigRational] {
        &self.exact
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("nonempty")
    }

    pub fn odd_degree(&self) -> bool {
        self.degree() % 2 == 1
    }

    /// Finite branch points, sorted lexicographically by (Re, Im).
    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch
    }

    /// A-posteriori bound on the distance from each computed root to a true root.
    pub fn root_error(&self) -> f64 {
        self.root_error
    }

    /// Smallest pairwise distance between finite branch points.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Length scale used to make tolerances relative.
    pub fn scale(&self) -> f64 {
        self.branch.iter().map(|e| e.norm()).fold(1.0, f64::max)
    }

    pub fn spec(&self) -> CurveSpec {
        CurveSpec {
            f_coeffs: self.exact.iter().map(rational_to_string).collect(),
            name: self.name.clone(),
        }
    }

    /// `f(x)` by Horner on the coefficients.
    pub fn f(&self, x: Complex64) -> Complex64 {
        let v = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
        // normalize signed zero so the principal branch is stable on the real axis
        Complex64::new(v.re, if v.im == 0.0 { 0.0 } else { v.im })
    }

    /// `f(x) = lc ∏ (x - e_k)`, accurate near the branch points.
    pub fn f_factored(&self, x: Complex64) -> Complex64 {
        self.branch
            .iter()
            .fold(Complex64::new(self.leading(), 0.0), |acc, e| acc * (x - e))
    }

    pub fn df(&self, x: Complex64) -> Complex64 {
        let n = self.coeffs.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..n).rev() {
            acc = acc * x + self.coeffs[k] * k as f64;
        }
        acc
    }

    /// `y` at an ordinary point on the given sheet.
    pub fn y(&self, x: Complex64, sheet: Sheet) -> Complex64 {
        self.f(x).sqrt() * sheet.sign()
    }

    /// `y` at a surface point (zero at finite branch points).
    pub fn y_at(&self, p: &SurfacePoint) -> Result<Complex64> {
        match p {
            SurfacePoint::Ordinary { x, sheet } => Ok(self.y(*x, *sheet)),
            SurfacePoint::Branch(k) => {
                self.branch_point(*k)?;
                Ok(Complex64::new(0.0, 0.0))
            }
            SurfacePoint::Infinity => Err(Error::Chart("y is infinite at infinity".into())),
        }
    }

    pub fn branch_point(&self, k: usize) -> Result<Complex64> {
        self.branch.get(k).copied().ok_or_else(|| {
            Error::Chart(format!(
                "branch index {k} out of range (curve has {} finite branch points)",
                self.branch.len()
            ))
        })
    }

    /// x-coordinate of a finite point.
    pub fn x_of(&self, p: &SurfacePoint) -> Result<Complex64> {
        match p {
            SurfacePoint::Ordinary { x, .. } => Ok(*x),
            SurfacePoint::Branch(k) => self.branch_point(*k),
            SurfacePoint::Infinity => Err(Error::Chart("point at infinity has no x".into())),
        }
    }

    /// Index and distance of the nearest finite branch point.
    pub fn nearest_branch(&self, x: Complex64) -> (usize, f64) {
        self.branch
            .iter()
            .enumerate()
            .map(|(k, e)| (k, (x - e).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Weierstrass points of the curve (finite ones, plus infinity for odd degree).
    pub fn weierstrass_points(&self) -> Vec<SurfacePoint> {
        let mut pts: Vec<SurfacePoint> = (0..self.branch.len()).map(SurfacePoint::Branch).collect();
        if self.odd_degree() {
            pts.push(SurfacePoint::Infinity);
        }
        pts
    }

    /// The hyperelliptic involution `(x, y) -> (x, -y)`.
    pub fn involution(&self, p: &SurfacePoint) -> SurfacePoint {
        match p {
            SurfacePoint::Ordinary { x, sheet } => SurfacePoint::Ordinary {
                x: *x,
                sheet: sheet.flip(),
            },
            other => *other,
        }
    }
}

/// Build a curve from a structured-text spec.
pub fn parse_curve(spec: &CurveSpec) -> Result<HyperellipticCurve> {
    let exact: Vec<BigRational> = spec.f_coeffs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
    if exact.is_empty() {
        return Err(Error::MalformedSpec("empty coefficient list".into()));
    }
    if exact.last().map(|c| c.is_zero()).unwrap_or(true) {
        return Err(Error::MalformedSpec("leading coefficient must be nonzero".into()));
    }
    let degree = exact.len() - 1;
    if degree < 3 {
        return Err(Error::DegreeTooLow(degree));
    }
    let g = poly_gcd(&exact, &poly_derivative(&exact));
    if g.len() > 1 {
        return Err(Error::NotSquarefree(format!("gcd(f, f') has degree {}", g.len() - 1)));
    }
    let coeffs: Vec<f64> = exact.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::MalformedSpec("coefficient not representable".into()));
    }
    let mut curve = HyperellipticCurve {
        name: spec.name.clone(),
        exact,
        coeffs,
        genus: (degree - 1) / 2,
        branch: Vec::new(),
        root_error: 0.0,
        min_gap: 0.0,
    };
    let (roots, err) = refine_roots(&curve)?;
    let mut gap = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            gap = gap.min((roots[i] - roots[j]).norm());
        }
    }
    if gap <= 10.0 * err {
        return Err(Error::NotSquarefree(format!(
            "roots not certifiably separated: gap {gap:e}, error bound {err:e}"
        )));
    }
    curve.branch = roots;
    curve.root_error = err;
    curve.min_gap = gap;
    Ok(curve)
}

/// Sorted, refined branch points of a curve.
pub fn branch_points(curve: &HyperellipticCurve) -> Vec<Complex64> {
    curve.branch.clone()
}

fn refine_roots(curve: &HyperellipticCurve) -> Result<(Vec<Complex64>, f64)> {
    let c = curve.coeffs();
    let d = c.len() - 1;
    let lc = c[d];
    // companion matrix of the monic polynomial
    let mut comp = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lc;
    }
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max) / lc.abs();
    // the unbounded QR iteration can stall on some companion matrices
    let mut roots: Vec<Complex64> = match Schur::try_new(comp, f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
        None => aberth(c, scale),
    };
    for r in roots.iter_mut() {
        *r = newton_polish(curve, *r);
    }
    // enforce exact conjugate symmetry of a real polynomial
    let real_tol = 1e-12 * (1.0 + scale);
    let mut used = vec![false; d];
    let mut sym = Vec::with_capacity(d);
    for i in 0..d {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        if r.im.abs() <= real_tol {
            sym.push(newton_polish(curve, Complex64::new(r.re, 0.0)));
            continue;
        }
        let target = r.conj();
        let partner = (0..d).filter(|&j| !used[j]).min_by(|&a, &b| {
            (roots[a] - target)
                .norm()
                .partial_cmp(&(roots[b] - target).norm())
                .unwrap()
        });
        let z = if r.im > 0.0 { r } else { r.conj() };
        let z = newton_polish(curve, z);
        let z = Complex64::new(z.re, z.im.abs());
        match partner {
            Some(j) => {
                used[j] = true;
                sym.push(z);
                sym.push(z.conj());
            }
            None => sym.push(r),
        }
    }
    let mut roots = sym;
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let mut err: f64 = 0.0;
    for r in &roots {
        let fv = curve.f(*r).norm();
        let dv = curve.df(*r).norm();
        let resid_tol = 1e-10 * c.iter().map(|v| v.abs()).sum::<f64>() * (1.0 + r.norm()).powi(d as i32);
        if !fv.is_finite() || fv > resid_tol || dv == 0.0 {
            return Err(Error::RootRefinement { residual: fv });
        }
        // Newton step size times degree, floored at roundoff in the root's magnitude
        err = err.max(d as f64 * fv / dv).max(4.0 * f64::EPSILON * (1.0 + r.norm()));
    }
    Ok((roots, err))
}

/// Aberth-Ehrlich simultaneous iteration, started on a circle of radius `scale`.
fn aberth(c: &[f64], scale: f64) -> Vec<Complex64> {
    let d = c.len() - 1;
    let horner = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        let mut dv = Complex64::new(0.0, 0.0);
        for &a in c.iter().rev() {
            dv = dv * z + v;
            v = v * z + a;
        }
        (v, dv)
    };
    let radius = 1.0 + scale;
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 0.4 + std::f64::consts::TAU * k as f64 / d as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..d {
            let (v, dv) = horner(z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let repulse: Complex64 = (0..d).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulse);
            z[k] -= step;
            moved = moved.max(step.norm() / (1.0 + z[k].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn newton_polish(curve: &HyperellipticCurve, mut z: Complex64) -> Complex64 {
    for _ in 0..60 {
        let fv = curve.f(z);
        let dv = curve.df(z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = fv / dv;
        z -= step;
        if step.norm() <= 1e-17 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Jet of the unnormalized differential `ω̂_j = x^{j-1} dx / y` at `anchor`.
pub fn differential_jet(curve: &HyperellipticCurve, j: usize, anchor: &SurfacePoint, order: usize) -> Result<LocalJet> {
    differential_jet_scaled(curve, j, anchor, order, Complex64::new(1.0, 0.0))
}

/// As [`differential_jet`], with the ordinary chart `x = x₀ + λ t`.
/// `scale` is ignored for branch and infinity charts.
pub fn differential_jet_scaled(
    curve: &HyperellipticCurve,
    j: usize,
    anchor: &SurfacePoint,
    order: usize,
    scale: Complex64,
) -> Result<LocalJet> {
    let g = curve.genus();
    if j == 0 || j > g {
        return Err(Error::BasisIndex { index: j, genus: g });
    }
    if order > MAX_JET_ORDER {
        return Err(Error::OrderTooLarge {
            requested: order,
            max: MAX_JET_ORDER,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match anchor {
        SurfacePoint::Ordinary { x, sheet } => {
            let (k, dist) = curve.nearest_branch(*x);
            if dist <= 10.0 * curve.root_error() {
                return Err(Error::Chart(format!(
                    "anchor {x} is a zero of y (branch point {k}); use the branch chart"
                )));
            }
            let xs = PowerSeries::linear(*x, scale, order);
            let poly: Vec<Complex64> = curve.coeffs().iter().map(|c| Complex64::new(*c, 0.0)).collect();
            let fs = PowerSeries::compose_poly(&poly, &xs);
            let y0 = curve.y(*x, *sheet);
            let ys = fs.sqrt_with(y0)?;
            let num = xs.powi(j - 1).scale(scale);
            let dens = &num * &ys.inv()?;
            Ok(LocalJet {
                anchor: *anchor,
                chart: Chart::Ordinary { scale },
                coeffs: dens.into_coeffs(),
            })
        }
        SurfacePoint::Branch(k) => {
            let e = curve.branch_point(*k)?;
            let half = order / 2;
            // F(s) = lc ∏_{i≠k} (e - e_i + s)
            let mut fs = PowerSeries::constant(Complex64::new(curve.leading(), 0.0), half);
            for (i, ei) in curve.branch_points().iter().enumerate() {
                if i != *k {
                    fs = &fs * &PowerSeries::linear(e - ei, one, half);
                }
            }
            let root = fs.coeff(0).sqrt();
            let inv_sqrt = fs.sqrt_with(root)?.inv()?;
            let xs = PowerSeries::linear(e, one, half);
            let dens_s = (&xs.powi(j - 1) * &inv_sqrt).scale(Complex64::new(2.0, 0.0));
            let dens = PowerSeries::from_coeffs(dens_s.coeffs(), order).compose_square();
            Ok(LocalJet {
                anchor: *anchor,
                chart: Chart::Branch,
                coeffs: dens.truncate(order).into_coeffs(),
            })
        }
        SurfacePoint::Infinity => {
            if !curve.odd_degree() {
                return Err(Error::Chart(
                    "even-degree curves have no branch point at infinity".into(),
                ));
            }
            let half = order / 2;
            let mut gs = PowerSeries::constant(Complex64::new(curve.leading(), 0.0), half);
            for ei in curve.branch_points() {
                gs = &gs * &PowerSeries::linear(one, -ei, half);
            }
            let root = gs.coeff(0).sqrt();
            let inv_sqrt = gs.sqrt_with(root)?.inv()?;
            let mut mono = vec![zero; half + 1];
            if g - j <= half {
                mono[g - j] = Complex64::new(-2.0, 0.0);
            }
            let dens_s = &PowerSeries::from_coeffs(&mono, half) * &inv_sqrt;
            let dens = PowerSeries::from_coeffs(dens_s.coeffs(), order).compose_square();
            Ok(LocalJet {
                anchor: *anchor,
                chart: Chart::Infinity,
                coeffs: dens.truncate(order).into_coeffs(),
            })
        }
    }
}

/// Jets of all `ω̂_1..ω̂_g` at a common anchor.
pub fn basis_jets(
    curve: &HyperellipticCurve,
    anchor: &SurfacePoint,
    order: usize,
    scale: Complex64,
) -> Result<Vec<LocalJet>> {
    (1..=curve.genus())
        .map(|j| differential_jet_scaled(curve, j, anchor, order, scale))
        .collect()
}

/// Continue `w(t) = ±√g(t)` from `(t_from, w_from)` to `t_to` along the real
/// parameter, choosing at each step the root nearest the previous value.
pub(crate) fn continue_sqrt<G>(g: G, t_from: f64, t_to: f64, w_from: Complex64) -> Complex64
where
    G: Fn(f64) -> Complex64,
{
    let mut t = t_from;
    let mut w = w_from;
    let total = t_to - t_from;
    if total == 0.0 {
        return w;
    }
    let mut h = total / 4.0;
    let min_h = total.abs() * 1e-12;
    while (t_to - t) * total.signum() > 0.0 {
        if (t + h - t_to) * total.signum() > 0.0 {
            h = t_to - t;
        }
        let r = g(t + h).sqrt();
        let cand = if (r - w).norm() <= (r + w).norm() { r } else { -r };
        let change = (cand - w).norm();
        if change <= 0.3 * w.norm().max(cand.norm()) || h.abs() <= min_h {
            t += h;
            w = cand;
            h *= 1.5;
        } else {
            h *= 0.5;
        }
    }
    w
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::MalformedSpec(format!("not a decimal number: '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        num = -num;
    }
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    };
    Ok(r)
}

fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    // exact decimal when the denominator divides a power of ten
    let mut d = r.denom().clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if d.is_one() {
        let k = twos.max(fives);
        let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), k));
        let n = scaled.to_integer();
        let s = n.abs().to_string();
        let s = format!("{s:0>width$}", width = k + 1);
        let (ip, fp) = s.split_at(s.len() - k);
        let sign = if n.is_negative() { "-" } else { "" };
        return format!("{sign}{ip}.{fp}");
    }
    format!("{}/{}", r.numer(), r.denom())
}

fn poly_derivative(p: &[BigRational]) -> Vec<BigRational> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
        .collect()
}

/// Drop trailing zeros; the zero polynomial is the empty vector.
fn poly_trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = poly_trim(a.to_vec());
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db {
        let dr = r.len() - 1;
        let q = &r[dr] / &lb;
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = &r[idx] - &q * &b[i];
        }
        r.pop();
        r = poly_trim(r);
    }
    r
}

/// Monic-agnostic gcd over the rationals; the result's length minus one is its degree.
fn poly_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = poly_trim(a.to_vec());
    let mut y = poly_trim(b.to_vec());
    while !y.is_empty() {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}
