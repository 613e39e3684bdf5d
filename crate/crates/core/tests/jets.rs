#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use nalgebra::DMatrix;
use schiffer_lab::abel_jacobi::{abel_jacobi, aj_jet, lattice_coordinates, PathHints};
use schiffer_lab::corpus;
use schiffer_lab::curve::{differential_jet, parse_curve, CurveSpec, HyperellipticCurve, Sheet, SurfacePoint};
use schiffer_lab::homology::{dual_form_local_data, normalized_jets, period_matrix, PeriodData};
use schiffer_lab::schiffer::{schiffer_series, schiffer_series_scaled};

fn x5_minus_1() -> (HyperellipticCurve, PeriodData) {
    let curve = parse_curve(&CurveSpec::new("x5-1", &[-1, 0, 0, 0, 0, 1])).unwrap();
    let p = period_matrix(&curve).unwrap();
    (curve, p)
}

#[test]
fn jet_matches_finite_differences() {
    let (curve, _) = x5_minus_1();
    let x0 = c(2.0, 0.0);
    let jet = differential_jet(&curve, 2, &SurfacePoint::ordinary(x0, Sheet::Plus), 4).unwrap();
    let g = |x: C| x / (x.powi(5) - 1.0).sqrt();
    let h = 1e-4;
    let d1 = (g(x0 + h) - g(x0 - h)) / (2.0 * h);
    let d2 = (g(x0 + h) - 2.0 * g(x0) + g(x0 - h)) / (h * h);
    assert!((jet.coeff(0) - g(x0)).norm() < 1e-14);
    assert!((jet.derivative(1) - d1).norm() < 1e-8, "{} vs {d1}", jet.derivative(1));
    assert!((jet.derivative(2) - d2).norm() < 1e-6);
}

/// The sheet tag at `x` continuing `y0` from a nearby point.
fn nearby(curve: &HyperellipticCurve, x: C, y0: C) -> SurfacePoint {
    let y = curve.f(x).sqrt();
    let sheet = if (y - y0).norm() <= (y + y0).norm() {
        Sheet::Plus
    } else {
        Sheet::Minus
    };
    SurfacePoint::ordinary(x, sheet)
}

/// `Ab(q) − Ab(p)` reduced to the lattice translate nearest zero.
fn small_difference(period: &PeriodData, a: &[C], b: &[C]) -> Vec<C> {
    let d: Vec<C> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (m, n) = lattice_coordinates(period, &d).unwrap();
    let g = d.len();
    (0..g)
        .map(|i| {
            let mut z = d[i] - m[i].round();
            for k in 0..g {
                z -= period.pi[(i, k)] * n[k].round();
            }
            z
        })
        .collect()
}

#[test]
fn aj_derivative_matches_finite_differences() {
    let (curve, period) = x5_minus_1();
    let base = SurfacePoint::Branch(0);
    for (x0, sheet) in [(c(0.4, 0.3), Sheet::Plus), (c(-0.2, -1.4), Sheet::Minus)] {
        let p = SurfacePoint::ordinary(x0, sheet);
        let y0 = curve.y_at(&p).unwrap();
        let jet = aj_jet(&curve, &period, &p, 1).unwrap();
        let h = 1e-3;
        for dir in [c(1.0, 0.0), c(0.0, 1.0)] {
            let plus = nearby(&curve, x0 + dir * h, y0);
            let minus = nearby(&curve, x0 - dir * h, y0);
            let ap = abel_jacobi(&curve, &period, &base, &plus, &PathHints::default()).unwrap();
            let am = abel_jacobi(&curve, &period, &base, &minus, &PathHints::default()).unwrap();
            let diff = small_difference(&period, &ap.value, &am.value);
            for j in 0..2 {
                let fd = diff[j] / (2.0 * h);
                let want = jet.order(1)[j] * dir;
                assert!((fd - want).norm() < 1e-6, "{x0} dir {dir}: {fd} vs {want}");
            }
        }
    }
}

#[test]
fn dual_densities_match_harmonic_integral_differences() {
    // F_k = Σ_m M_km (A_m − conj A_m) is a primitive of η_k; its ∂_t is h_k
    let (curve, period) = x5_minus_1();
    let x0 = c(0.5, -0.6);
    let p = SurfacePoint::ordinary(x0, Sheet::Plus);
    let y0 = curve.y_at(&p).unwrap();
    let base = SurfacePoint::Branch(2);
    let jets = normalized_jets(&curve, &period, &p, 0, c(1.0, 0.0)).unwrap();
    let h = dual_form_local_data(&period, &jets).unwrap();
    let big_f = |x: C| -> Vec<C> {
        let q = nearby(&curve, x, y0);
        let a = abel_jacobi(&curve, &period, &base, &q, &PathHints::default())
            .unwrap()
            .value;
        (0..2)
            .map(|k| (0..2).map(|m| period.m[(k, m)] * (a[m] - a[m].conj())).sum())
            .collect()
    };
    let step = 1e-3;
    let fu = (big_f(x0 + step), big_f(x0 - step));
    let fv = (big_f(x0 + c(0.0, step)), big_f(x0 - c(0.0, step)));
    for k in 0..2 {
        // F_k is single-valued modulo integers; the differences here are small
        let du = (fu.0[k] - fu.1[k]) / (2.0 * step);
        let dv = (fv.0[k] - fv.1[k]) / (2.0 * step);
        let wirtinger = (du - c(0.0, 1.0) * dv) * 0.5;
        assert!(
            (wirtinger - h[k].coeff(0)).norm() < 1e-6,
            "{wirtinger} vs {}",
            h[k].coeff(0)
        );
    }
}

/// Literal second-order expansion from directly evaluated densities.
fn second_order_oracle(curve: &HyperellipticCurve, period: &PeriodData, x0: C, sheet: Sheet) -> DMatrix<C> {
    let g = curve.genus();
    let coeffs = curve.coeffs();
    let y0 = horner(coeffs, x0).sqrt() * sheet.sign();
    let r = 0.3 * curve.nearest_branch(x0).1;
    let raw: Vec<Vec<C>> = (0..g).map(|m| cauchy_derivatives(coeffs, x0, y0, m, 2, r)).collect();
    // D^s f_j = Σ_i C_ji D^s ω̂_i
    let f: Vec<Vec<C>> = (0..g)
        .map(|j| {
            (0..=2)
                .map(|s| (0..g).map(|i| period.c[(j, i)] * raw[i][s]).sum())
                .collect()
        })
        .collect();
    let h: Vec<C> = (0..g)
        .map(|k| (0..g).map(|m| period.m[(k, m)] * f[m][0]).sum())
        .collect();
    let s0: C = (0..g).map(|l| f[l][0] * h[l]).sum();
    DMatrix::from_fn(g, g, |i, j| {
        f[i][0] * s0 * f[j][0] + 0.5 * (f[i][1] * f[j][1] + f[i][2] * f[j][0])
    })
}

#[test]
fn second_order_matches_literal_expansion() {
    let cases: [&[i64]; 3] = [&[0, -1, 0, 1], &[-1, 0, 0, 1], &[-1, 0, 0, 0, 0, 1]];
    for coeffs in cases {
        let curve = parse_curve(&CurveSpec::new("t", coeffs)).unwrap();
        let period = period_matrix(&curve).unwrap();
        for (x0, sheet) in [(c(0.35, 0.55), Sheet::Plus), (c(-0.4, -0.25), Sheet::Minus)] {
            let s = schiffer_series(&curve, &period, &SurfacePoint::ordinary(x0, sheet), 2, 4).unwrap();
            let oracle = second_order_oracle(&curve, &period, x0, sheet);
            let diff = max_norm((s.delta(2) - &oracle).iter());
            assert!(diff < 1e-9, "{coeffs:?} at {x0}: {} vs {}", s.delta(2), oracle);
        }
    }
}

#[test]
fn first_order_update_is_rank_one_and_covariant() {
    let mut rng = corpus::rng(3);
    for g in 1..=3 {
        let curve = corpus::random_curve(&mut rng, g, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        let p0 = corpus::random_point(&mut rng, &curve);
        let lam = c(0.7, -1.3);
        let a = schiffer_series(&curve, &period, &p0, 1, 1).unwrap();
        let b = schiffer_series_scaled(&curve, &period, &p0, 1, 1, lam).unwrap();
        let d = a.delta(1);
        assert!((d - d.transpose()).norm() <= 1e-12 * d.norm());
        assert!(schiffer_lab::ivhs::singular_ratio(d) < 1e-12);
        let scaled = d * (lam * lam);
        assert!((&scaled - b.delta(1)).norm() <= 1e-12 * scaled.norm());
    }
}

#[test]
fn weierstrass_points_have_vanishing_second_jet() {
    let mut rng = corpus::rng(8);
    for g in 1..=3 {
        let curve = corpus::random_curve(&mut rng, g, false).unwrap();
        let period = period_matrix(&curve).unwrap();
        for w in curve.weierstrass_points() {
            let jet = aj_jet(&curve, &period, &w, 2).unwrap();
            assert!(jet.order(2).iter().all(|z| z.norm() < 1e-10), "{w}");
        }
        let p = corpus::random_point(&mut rng, &curve);
        let jet = aj_jet(&curve, &period, &p, 2).unwrap();
        assert!(max_norm(jet.order(2).iter()) > 1e-3);
    }
}
