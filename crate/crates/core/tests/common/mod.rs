//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls the period, jet or theta machinery of the library: each
//! oracle evaluates `f` directly from its integer coefficients.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Largest modulus; NaN if any entry is NaN.
pub fn max_norm<'a, I: IntoIterator<Item = &'a C>>(it: I) -> f64 {
    it.into_iter().map(|z| z.norm()).fold(0.0, nan_max)
}

/// `max` that lets NaN through instead of discarding it.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// `min` that lets NaN through instead of discarding it.
pub fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

pub fn horner(coeffs: &[f64], x: C) -> C {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * x + a)
}

/// Complex AGM, choosing at each step the square root closer to the mean.
pub fn agm(mut a: C, mut b: C) -> C {
    for _ in 0..100 {
        let an = (a + b) * 0.5;
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    a
}

/// Reduce `τ` into the standard fundamental domain of SL(2,ℤ).
pub fn sl2z_reduce(mut tau: C) -> C {
    for _ in 0..1000 {
        tau.re -= tau.re.round();
        if tau.norm_sqr() < 1.0 - 1e-14 {
            tau = -1.0 / tau;
        } else {
            break;
        }
    }
    // boundary identifications
    if (tau.re + 0.5).abs() < 1e-12 {
        tau.re = 0.5;
    }
    if (tau.norm_sqr() - 1.0).abs() < 1e-12 && tau.re < 0.0 {
        tau.re = -tau.re;
    }
    tau
}

/// Modulus of `y² = x³ + a x² + b x + d` from the complex AGM.
///
/// With roots `e_1, e_2, e_3`, the numbers `π/M(√(e_i−e_j), √(e_i−e_k))` are
/// half-periods; two of them with non-real ratio span the period lattice.
pub fn agm_modulus(roots: [C; 3]) -> C {
    let mut periods = Vec::new();
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        for (p, q) in [(j, k), (k, j)] {
            let m = agm((roots[i] - roots[p]).sqrt(), (roots[i] - roots[q]).sqrt());
            periods.push(2.0 * PI / m);
        }
    }
    // the lattice generated by all candidates: pick the shortest non-real pair
    let mut best: Option<(C, C)> = None;
    for a in &periods {
        for b in &periods {
            let r = b / a;
            if r.im.abs() > 1e-6 {
                let size = a.norm() + b.norm();
                if best.map(|(x, y)| size < x.norm() + y.norm()).unwrap_or(true) {
                    best = Some((*a, *b));
                }
            }
        }
    }
    let (a, b) = best.expect("AGM periods span a lattice");
    let t = b / a;
    sl2z_reduce(if t.im > 0.0 { t } else { -t })
}

/// Klein's `j` from the q-expansion, `j = E₄³/Δ`.
pub fn klein_j(tau: C) -> C {
    let q = (c(0.0, 2.0 * PI) * tau).exp();
    let mut e4 = c(1.0, 0.0);
    let mut qn = c(1.0, 0.0);
    let mut prod = c(1.0, 0.0);
    for n in 1..200 {
        qn *= q;
        let sigma3: f64 = (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(3)).sum();
        e4 += 240.0 * sigma3 * qn;
        prod *= (c(1.0, 0.0) - qn).powi(24);
        if qn.norm() < 1e-30 {
            break;
        }
    }
    e4.powi(3) / (q * prod)
}

/// `j` of `y² = x³ + a x² + b x + d` via the depressed Weierstrass form.
pub fn curve_j(a: f64, b: f64, d: f64) -> f64 {
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + d;
    1728.0 * 4.0 * p.powi(3) / (4.0 * p.powi(3) + 27.0 * q * q)
}

/// `∫₀¹ F(s) ds` by tanh-sinh, refining the step until two levels agree.
pub fn tanh_sinh<F: Fn(f64) -> C>(f: F, tol: f64) -> C {
    let eval = |h: f64| {
        let mut sum = c(0.0, 0.0);
        let kmax = (4.0 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let s = 1.0 / (1.0 + (-2.0 * u).exp());
            let w = 0.5 * PI * t.cosh() / (2.0 * u.cosh().powi(2));
            if s <= 0.0 || s >= 1.0 || w < 1e-300 || !w.is_finite() {
                continue;
            }
            sum += f(s) * w;
        }
        sum * h
    };
    let mut h = 0.5;
    let mut prev = eval(h);
    for _ in 0..8 {
        h *= 0.5;
        let cur = eval(h);
        if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Nearest-root continuation of `√g` along the points `xs`, starting at `w0`.
pub fn follow_sqrt<G: Fn(C) -> C>(g: &G, xs: &[C], w0: C) -> Vec<C> {
    let mut out = Vec::with_capacity(xs.len());
    let mut w = w0;
    let mut prev = xs[0];
    for &x in xs {
        let steps = (((x - prev).norm() / 0.005).ceil() as usize).max(1);
        for s in 1..=steps {
            let z = prev + (x - prev) * (s as f64 / steps as f64);
            let r = g(z).sqrt();
            w = if (r - w).norm() <= (r + w).norm() { r } else { -r };
        }
        out.push(w);
        prev = x;
    }
    out
}

/// Sheet-one period data of the chain homology, computed on bent edges.
///
/// Edge `k` runs `e_k → w_k → e_{k+1}` with the apex `w_k` on the left of the
/// edge; `y` is carried from apex to apex around each inner branch point on
/// the left. Each leg is `x = e + s(w − e)` with `y = √(s(w−e))·Q(x)`,
/// `Q² = f/(x−e)` smooth, integrated by tanh-sinh.
pub fn chain_periods(coeffs: &[f64], roots: &[C]) -> DMatrix<C> {
    let deg = coeffs.len() - 1;
    let g = (deg - 1) / 2;
    let f = |x: C| horner(coeffs, x);
    let n = roots.len();
    let min_dist = |v: C| {
        roots
            .iter()
            .map(|r| (r - v).norm())
            .filter(|d| *d > 1e-12)
            .fold(f64::INFINITY, f64::min)
    };
    let apex = |k: usize| {
        let (a, b) = (roots[k], roots[k + 1]);
        (a + b) * 0.5 + c(0.0, 0.3) * (b - a) * 0.5
    };
    // carry y to each apex along the left bank
    let mut y_apex = vec![c(0.0, 0.0); n - 1];
    y_apex[0] = f(apex(0)).sqrt();
    for k in 0..n - 2 {
        let v = roots[k + 1];
        let r = 0.3 * min_dist(v);
        let th_in = (roots[k] - v).arg();
        let th_out = (roots[k + 2] - v).arg();
        let mut sweep = (th_in - th_out).rem_euclid(2.0 * PI);
        if sweep == 0.0 {
            sweep = 2.0 * PI;
        }
        let mut pts = vec![apex(k)];
        let steps = 400;
        for s in 0..=steps {
            let th = th_in - 0.02 - (sweep - 0.04) * s as f64 / steps as f64;
            pts.push(v + C::from_polar(r, th));
        }
        pts.push(apex(k + 1));
        let ys = follow_sqrt(&f, &pts, y_apex[k]);
        y_apex[k + 1] = *ys.last().unwrap();
    }
    let leg = |e: C, w: C, yw: C| -> Vec<C> {
        let d = w - e;
        // f(x)/(x − e) as a polynomial, so nodes that round onto e stay finite
        let mut quot = vec![c(0.0, 0.0); deg];
        let mut acc = c(0.0, 0.0);
        for i in (1..=deg).rev() {
            acc = acc * e + coeffs[i];
            quot[i - 1] = acc;
        }
        let q = |x: C| quot.iter().rev().fold(c(0.0, 0.0), |s, a| s * x + a);
        let qw = yw / d.sqrt();
        // Q along the leg from w back towards e, tabulated finely
        let m = 4000;
        let pts: Vec<C> = (0..=m).map(|i| w - d * (i as f64 / m as f64)).collect();
        let qs = follow_sqrt(&q, &pts, qw);
        let q_at = |s: f64| {
            let idx = ((1.0 - s) * m as f64).round() as usize;
            let x = e + d * s;
            let r = q(x).sqrt();
            let near = qs[idx.min(m)];
            if (r - near).norm() <= (r + near).norm() {
                r
            } else {
                -r
            }
        };
        (0..g)
            .map(|j| {
                tanh_sinh(
                    |s| {
                        let x = e + d * s;
                        let y = (d * s).sqrt() * q_at(s);
                        x.powi(j as i32) / y * d
                    },
                    1e-14,
                )
            })
            .collect()
    };
    let mut table = Vec::with_capacity(2 * g);
    for k in 0..2 * g {
        let w = apex(k);
        let first = leg(roots[k], w, y_apex[k]);
        let second = leg(roots[k + 1], w, y_apex[k]);
        table.push(first.iter().zip(&second).map(|(a, b)| a - b).collect::<Vec<C>>());
    }
    let mut a = DMatrix::<C>::zeros(g, g);
    let mut b = DMatrix::<C>::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            a[(j, i)] = 2.0 * table[2 * i][j];
            for l in i..g {
                b[(j, i)] += 2.0 * table[2 * l + 1][j];
            }
        }
    }
    let mut pi = a.try_inverse().expect("a-periods invertible") * b;
    if (0..g).map(|i| pi[(i, i)].im).sum::<f64>() < 0.0 {
        pi = -pi;
    }
    pi
}

/// Lexicographically sorted roots of `z^n − 1`.
pub fn roots_of_unity(n: usize) -> Vec<C> {
    let mut r: Vec<C> = (0..n)
        .map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    for z in r.iter_mut() {
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
    }
    r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    r
}

/// Derivatives `d^s/dt^s` at `t = 0` of `x^m / y` on `x = x₀ + t`, for
/// `s = 0..=smax`, from the Cauchy integral on a circle of radius `r`.
pub fn cauchy_derivatives(coeffs: &[f64], x0: C, y0: C, m: usize, smax: usize, r: f64) -> Vec<C> {
    let n = 256;
    let f = |x: C| horner(coeffs, x);
    let pts: Vec<C> = std::iter::once(x0)
        .chain((0..=n).map(|k| x0 + C::from_polar(r, 2.0 * PI * k as f64 / n as f64)))
        .collect();
    // radial move out to the circle, then around it
    let ys = follow_sqrt(&f, &pts, y0);
    let mut out = vec![c(0.0, 0.0); smax + 1];
    for k in 0..n {
        let t = C::from_polar(r, 2.0 * PI * k as f64 / n as f64);
        let val = (x0 + t).powi(m as i32) / ys[k + 1];
        for (s, o) in out.iter_mut().enumerate() {
            *o += val / t.powi(s as i32);
        }
    }
    let mut fact = 1.0;
    for (s, o) in out.iter_mut().enumerate() {
        if s > 0 {
            fact *= s as f64;
        }
        *o *= fact / n as f64;
    }
    out
}

/// Shortest nonzero vector by exhaustive search in coefficient space.
///
/// Any vector no longer than `R` has coefficients bounded by `R·‖col_i(B⁻¹)‖`.
pub fn brute_force_svp(basis: &[Vec<f64>]) -> f64 {
    let d = basis.len();
    let b = DMatrix::<f64>::from_fn(d, basis[0].len(), |i, j| basis[i][j]);
    let gram = &b * b.transpose();
    let r2 = (0..d).map(|i| gram[(i, i)]).fold(f64::INFINITY, f64::min);
    // coefficient bound from the inverse Gram matrix: c_i² ≤ R² (G⁻¹)_ii
    let ginv = gram.clone().try_inverse().expect("full rank");
    let bound: Vec<i64> = (0..d).map(|i| (r2 * ginv[(i, i)]).sqrt().floor() as i64).collect();
    let mut best = r2;
    let mut cvec: Vec<i64> = bound.iter().map(|b| -b).collect();
    loop {
        if cvec.iter().any(|&x| x != 0) {
            let mut n2 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    n2 += cvec[i] as f64 * cvec[j] as f64 * gram[(i, j)];
                }
            }
            best = best.min(n2);
        }
        let mut k = 0;
        loop {
            if k == d {
                return best.sqrt();
            }
            if cvec[k] < bound[k] {
                cvec[k] += 1;
                break;
            }
            cvec[k] = -bound[k];
            k += 1;
        }
    }
}

/// `θ[a;b](0, Π)` by a plain box sum over `|n_i| ≤ radius`.
pub fn theta_box(pi: &DMatrix<C>, a: &[f64], b: &[f64], radius: i64) -> C {
    let g = a.len();
    let mut n = vec![-radius; g];
    let mut sum = c(0.0, 0.0);
    loop {
        let v: Vec<f64> = n.iter().zip(a).map(|(x, y)| *x as f64 + y).collect();
        let mut quad = c(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                quad += pi[(i, j)] * v[i] * v[j];
            }
        }
        let lin: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        sum += (c(0.0, PI) * quad + c(0.0, 2.0 * PI * lin)).exp();
        let mut k = 0;
        loop {
            if k == g {
                return sum;
            }
            if n[k] < radius {
                n[k] += 1;
                break;
            }
            n[k] = -radius;
            k += 1;
        }
    }
}
