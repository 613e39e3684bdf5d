//! Truncated power series over `Complex64`.
//!
//! A series of order `N` stores the coefficients `c_0..=c_N` of
//! `c_0 + c_1 t + ... + c_N t^N + O(t^{N+1})`. Inverse and square root are
//! computed by Newton iteration with precision doubling.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    /// Series of the given order whose coefficients are taken from `coeffs`,
    /// zero-padded or truncated as needed.
    pub fn from_coeffs(coeffs: &[Complex64], order: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); order + 1];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        PowerSeries { coeffs: c }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries::from_coeffs(&[], order)
    }

    pub fn constant(value: Complex64, order: usize) -> Self {
        PowerSeries::from_coeffs(&[value], order)
    }

    /// `a + b t`, the local expression of an affine chart.
    pub fn linear(a: Complex64, b: Complex64, order: usize) -> Self {
        PowerSeries::from_coeffs(&[a, b], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn truncate(&self, order: usize) -> Self {
        PowerSeries::from_coeffs(&self.coeffs, order)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    /// Substitute `t -> t^2`, keeping the order.
    pub fn compose_square(&self) -> Self {
        let n = self.order();
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, v) in self.coeffs.iter().enumerate() {
            if 2 * k > n {
                break;
            }
            c[2 * k] = *v;
        }
        PowerSeries { coeffs: c }
    }

    /// Polynomial `p(s)` (ascending coefficients) composed with this series.
    pub fn compose_poly(poly: &[Complex64], inner: &PowerSeries) -> Self {
        let n = inner.order();
        let mut acc = PowerSeries::zero(n);
        for c in poly.iter().rev() {
            acc = &acc * inner;
            acc.coeffs[0] += c;
        }
        acc
    }

    pub fn powi(&self, e: usize) -> Self {
        let mut acc = PowerSeries::constant(Complex64::new(1.0, 0.0), self.order());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse; requires `c_0 != 0`.
    pub fn inv(&self) -> Result<Self> {
        let n = self.order();
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(Error::Chart("series inverse needs a nonzero constant term".into()));
        }
        let mut g = PowerSeries::constant(a0.inv(), n);
        let mut prec = 1usize;
        while prec <= n {
            prec = (2 * prec).min(n + 1);
            let m = prec - 1;
            let a = self.truncate(m);
            let gm = g.truncate(m);
            // g <- g (2 - a g)
            let ag = &a * &gm;
            let two_minus = PowerSeries::constant(Complex64::new(2.0, 0.0), m) - ag;
            g = (&gm * &two_minus).truncate(n);
            if prec == n + 1 {
                break;
            }
        }
        Ok(g)
    }

    /// Square root whose constant term is `root0` (which must square to `c_0`).
    pub fn sqrt_with(&self, root0: Complex64) -> Result<Self> {
        let n = self.order();
        if root0.norm() == 0.0 {
            return Err(Error::Chart("series square root needs a nonzero constant term".into()));
        }
        let half = Complex64::new(0.5, 0.0);
        let mut s = PowerSeries::constant(root0, n);
        let mut prec = 1usize;
        while prec <= n {
            prec = (2 * prec).min(n + 1);
            let m = prec - 1;
            let sm = s.truncate(m);
            let q = &self.truncate(m) * &sm.inv()?;
            s = (&sm + &q).truncate(m).scale(half).truncate(n);
            if prec == n + 1 {
                break;
            }
        }
        Ok(s)
    }

    /// Formal derivative, order reduced by one (order 0 stays order 0).
    pub fn derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return PowerSeries::zero(0);
        }
        let c: Vec<Complex64> = (1..=n).map(|k| self.coeffs[k] * k as f64).collect();
        PowerSeries { coeffs: c }
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..=n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Add for PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: PowerSeries) -> PowerSeries {
        &self + &rhs
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.order().min(rhs.order());
        PowerSeries {
            coeffs: (0..=n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: PowerSeries) -> PowerSeries {
        &self - &rhs
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.order().min(rhs.order());
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                c[i + j] += a * b;
            }
        }
        PowerSeries { coeffs: c }
    }
}

impl Mul for PowerSeries {
    type Output = PowerSeries;
    fn mul(self, rhs: PowerSeries) -> PowerSeries {
        &self * &rhs
    }
}
