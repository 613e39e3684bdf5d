//! Riemann theta constants with half-integer characteristics.
//!
//! `θ[a;b](0,Π) = Σ_{n∈ℤ^g} exp(iπ(n+a)ᵀΠ(n+a) + 2iπ(n+a)ᵀb)`, with `a, b ∈ {0, 1/2}^g`.
//! A characteristic is stored as two 0/1 vectors `(α, β) = (2a, 2b)`; its
//! parity is `αᵀβ mod 2`.
//!
//! The sum runs over the ellipsoid `(n+a)ᵀ Y (n+a) ≤ R²`, `Y = Im Π`. The tail
//! is bounded shell by shell: a box count bounds the number of points with
//! `Q ≤ T`, and each point outside the ellipsoid has modulus `exp(-π Q)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest number of box points scanned for one theta constant.
const MAX_BOX_POINTS: f64 = 2.0e7;
/// Largest `R²` tried before giving up.
const MAX_RADIUS_SQ: f64 = 400.0;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Characteristic {
    pub alpha: Vec<u8>,
    pub beta: Vec<u8>,
}

impl Characteristic {
    pub fn new(alpha: &[u8], beta: &[u8]) -> Self {
        Characteristic {
            alpha: alpha.to_vec(),
            beta: beta.to_vec(),
        }
    }

    pub fn zero(g: usize) -> Self {
        Characteristic::new(&vec![0; g], &vec![0; g])
    }

    pub fn genus(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_even(&self) -> bool {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| (a * b) as u32)
            .sum::<u32>()
            % 2
            == 0
    }

    /// `[[a], [b]]` with entries 0 or 0.5.
    pub fn halves(&self) -> [Vec<f64>; 2] {
        [
            self.alpha.iter().map(|&v| 0.5 * v as f64).collect(),
            self.beta.iter().map(|&v| 0.5 * v as f64).collect(),
        ]
    }
}

impl std::fmt::Display for Characteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = |v: &[u8]| v.iter().map(|x| x.to_string()).collect::<String>();
        write!(f, "[{};{}]", s(&self.alpha), s(&self.beta))
    }
}

/// All `4^g` characteristics, in the order of their bits.
pub fn all_characteristics(g: usize) -> Vec<Characteristic> {
    let bits = 2 * g;
    (0..1usize << bits)
        .map(|code| {
            let alpha = (0..g).map(|i| ((code >> (bits - 1 - i)) & 1) as u8).collect();
            let beta = (0..g).map(|i| ((code >> (g - 1 - i)) & 1) as u8).collect();
            Characteristic { alpha, beta }
        })
        .collect()
}

/// The `2^{g-1}(2^g + 1)` even characteristics.
pub fn even_characteristics(g: usize) -> Vec<Characteristic> {
    all_characteristics(g).into_iter().filter(|c| c.is_even()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConstant {
    pub characteristic: Characteristic,
    pub even: bool,
    #[serde(with = "crate::serialize::complex")]
    pub value: Complex64,
    pub radius: f64,
    pub tail: f64,
    pub terms: usize,
}

impl ThetaConstant {
    /// Structured-text form `{"characteristic": [[a],[b]], "value": [re,im], "tail": t}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "characteristic": self.characteristic.halves(),
            "value": crate::serialize::encode(self.value),
            "tail": crate::serialize::encode_real(self.tail),
            "radius": self.radius,
            "even": self.even,
        })
    }
}

struct Ellipsoid {
    y: DMatrix<f64>,
    yinv_diag: Vec<f64>,
}

impl Ellipsoid {
    fn new(pi: &DMatrix<Complex64>) -> Result<Self> {
        let g = pi.nrows();
        if pi.ncols() != g || g == 0 {
            return Err(Error::Theta("period matrix must be square and nonempty".into()));
        }
        let asym = (pi - pi.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let size = pi.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if asym > 1e-8 * size {
            return Err(Error::Theta(format!("period matrix not symmetric ({asym:e})")));
        }
        let y = DMatrix::<f64>::from_fn(g, g, |i, j| 0.5 * (pi[(i, j)].im + pi[(j, i)].im));
        let chol = y
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Theta("Im Π is not positive definite".into()))?;
        let yinv = chol.inverse();
        let yinv_diag = (0..g).map(|i| yinv[(i, i)]).collect();
        Ok(Ellipsoid { y, yinv_diag })
    }

    /// Upper bound on the number of shifted lattice points with `Q ≤ t`.
    fn count_bound(&self, t: f64) -> f64 {
        self.yinv_diag.iter().map(|d| 2.0 * (t * d).sqrt() + 1.0).product()
    }

    /// `Σ_{Q > r2} exp(-π Q)` bounded by unit shells.
    fn tail_bound(&self, r2: f64) -> f64 {
        let mut total = 0.0;
        for m in 0.. {
            let lo = r2 + m as f64;
            let term = self.count_bound(lo + 1.0) * (-PI * lo).exp();
            total += term;
            if term < 1e-300 || term < total * 1e-17 {
                break;
            }
        }
        total
    }
}

/// Enumerate `v = n + a` with `vᵀ Y v ≤ r2`, calling `visit(v, Q)`.
fn enumerate<F: FnMut(&[f64], f64)>(ell: &Ellipsoid, a: &[f64], r2: f64, mut visit: F) {
    let g = a.len();
    let lo: Vec<i64> = (0..g)
        .map(|i| (-(r2 * ell.yinv_diag[i]).sqrt() - a[i]).ceil() as i64)
        .collect();
    let hi: Vec<i64> = (0..g)
        .map(|i| ((r2 * ell.yinv_diag[i]).sqrt() - a[i]).floor() as i64)
        .collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return;
    }
    let mut n = lo.clone();
    let mut v = vec![0.0; g];
    loop {
        for i in 0..g {
            v[i] = n[i] as f64 + a[i];
        }
        let mut q = 0.0;
        for i in 0..g {
            let mut row = 0.0;
            for j in 0..g {
                row += ell.y[(i, j)] * v[j];
            }
            q += v[i] * row;
        }
        if q <= r2 {
            visit(&v, q);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == g {
                return;
            }
            if n[k] < hi[k] {
                n[k] += 1;
                break;
            }
            n[k] = lo[k];
            k += 1;
        }
    }
}

pub fn theta_null(pi: &DMatrix<Complex64>, ch: &Characteristic) -> Result<ThetaConstant> {
    theta_null_with(pi, ch, 1e-12)
}

/// Theta constant with tail below `rel_tail` times the largest term.
pub fn theta_null_with(pi: &DMatrix<Complex64>, ch: &Characteristic, rel_tail: f64) -> Result<ThetaConstant> {
    let g = pi.nrows();
    if ch.genus() != g {
        return Err(Error::Theta(format!(
            "characteristic of genus {} for a {g}x{g} period matrix",
            ch.genus()
        )));
    }
    let ell = Ellipsoid::new(pi)?;
    let [a, b] = ch.halves();
    // largest term: smallest Q over a small ellipsoid that always contains a point
    let mut qmin = f64::INFINITY;
    let mut r0 = 1.0;
    while qmin.is_infinite() {
        enumerate(&ell, &a, r0, |_, q| qmin = qmin.min(q));
        r0 *= 2.0;
    }
    let leading = (-PI * qmin).exp();
    let mut r2 = qmin.max(1.0);
    while ell.tail_bound(r2) >= rel_tail * leading {
        r2 += 1.0;
        if r2 > MAX_RADIUS_SQ {
            return Err(Error::Theta("truncation radius exceeds budget".into()));
        }
    }
    if ell.count_bound(r2) > MAX_BOX_POINTS {
        return Err(Error::Theta(format!(
            "Im Π too ill-conditioned: {:e} lattice points needed",
            ell.count_bound(r2)
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    enumerate(&ell, &a, r2, |v, _| {
        let mut quad = Complex64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..g {
                row += pi[(i, j)] * v[j];
            }
            quad += row * v[i];
        }
        let lin: f64 = v.iter().zip(&b).map(|(x, y)| x * y).sum();
        let expo = Complex64::new(0.0, PI) * quad + Complex64::new(0.0, 2.0 * PI * lin);
        sum += expo.exp();
        terms += 1;
    });
    Ok(ThetaConstant {
        characteristic: ch.clone(),
        even: ch.is_even(),
        value: sum,
        radius: r2.sqrt(),
        tail: ell.tail_bound(r2),
        terms,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperThetaTest {
    pub genus: usize,
    pub min_even_null: f64,
    pub index: Characteristic,
    /// Second-smallest even null modulus.
    pub next_even_null: f64,
    pub vanishing: usize,
    pub threshold: f64,
    pub hyperelliptic: bool,
}

/// All even theta nulls at `Π`, as `(characteristic, |θ|)` pairs.
pub fn even_nulls(pi: &DMatrix<Complex64>) -> Result<Vec<(Characteristic, f64)>> {
    even_characteristics(pi.nrows())
        .into_iter()
        .map(|c| theta_null(pi, &c).map(|t| (c, t.value.norm())))
        .collect()
}

/// Minimum even theta-null; for genus 3 the verdict is "exactly one vanishes".
pub fn hyperelliptic_theta_test(pi: &DMatrix<Complex64>, genus: usize, threshold: f64) -> Result<HyperThetaTest> {
    if !(1..=3).contains(&genus) || pi.nrows() != genus {
        return Err(Error::Theta(format!("unsupported genus {genus}")));
    }
    let mut nulls = even_nulls(pi)?;
    nulls.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
    let vanishing = nulls.iter().filter(|n| n.1 < threshold).count();
    let (index, min_even_null) = nulls[0].clone();
    let next_even_null = nulls.get(1).map(|n| n.1).unwrap_or(f64::INFINITY);
    Ok(HyperThetaTest {
        genus,
        min_even_null,
        index,
        next_even_null,
        vanishing,
        threshold,
        hyperelliptic: genus <= 2 || vanishing == 1,
    })
}
