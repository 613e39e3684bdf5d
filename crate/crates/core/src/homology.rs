//! Canonical homology basis and period matrices.
//!
//! The finite branch points, in their lexicographic order, are joined by the
//! polyline chain `e_1 → e_2 → … → e_n`; since the order is by real part first
//! the chain is x-monotone and never crosses itself. Edge `k` joins `e_k` and
//! `e_{k+1}`. Sheet 1 is the branch of `y` obtained by continuing along the
//! left bank of the whole chain, starting from the principal value at the
//! midpoint of edge 1.
//!
//! With `γ_k` the loop around edge `k` (its integral is twice the edge integral
//! on sheet 1), the basis is `a_i = γ_{2i-1}` and `b_i = γ_{2i} + γ_{2i+2} + … + γ_{2g}`.
//! Consecutive loops meet once with the same sign, which gives `a_i ∘ b_j = δ_ij`
//! up to one global orientation; that sign is fixed by requiring `Im Π ≻ 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::curve::{basis_jets, continue_sqrt, HyperellipticCurve, LocalJet, SurfacePoint};
use crate::error::{Error, Result};
use crate::quadrature::chebyshev_nodes;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodOptions {
    /// Target relative accuracy of every edge integral.
    pub tol: f64,
    /// Node budget for the Gauss-Chebyshev doubling.
    pub max_nodes: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions {
            tol: 1e-12,
            max_nodes: 1 << 17,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleKind {
    A,
    B,
}

/// One chain edge contributing `weight · ∫_edge ω̂` (sheet 1, left bank).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleTerm {
    pub edge: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub label: String,
    pub kind: CycleKind,
    /// 1-based index `i` of `a_i` / `b_i`.
    pub index: usize,
    pub terms: Vec<CycleTerm>,
}

/// Chain edge from branch point `start` to `start + 1` with its sheet-1 sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub start: usize,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    pub genus: usize,
    pub cycles: Vec<Cycle>,
    /// `A_{ij} = ∫_{a_j} ω̂_i`.
    #[serde(rename = "A", with = "crate::serialize::complex_matrix")]
    pub a: DMatrix<Complex64>,
    /// `B_{ij} = ∫_{b_j} ω̂_i`.
    #[serde(rename = "B", with = "crate::serialize::complex_matrix")]
    pub b: DMatrix<Complex64>,
    /// `C = A^{-1}`; normalized `ω_j = Σ_i C_{ji} ω̂_i`.
    #[serde(rename = "C", with = "crate::serialize::complex_matrix")]
    pub c: DMatrix<Complex64>,
    #[serde(rename = "Pi", with = "crate::serialize::complex_matrix")]
    pub pi: DMatrix<Complex64>,
    /// `M = (2i Im Π)^{-1}`.
    #[serde(rename = "M", with = "crate::serialize::complex_matrix")]
    pub m: DMatrix<Complex64>,
    pub err: f64,
    pub symmetry_residual: f64,
    pub min_imag_eigenvalue: f64,
}

impl PeriodData {
    /// Rebuild derived matrices from a period matrix alone (used for
    /// perturbed `Π` in experiments, where no curve is at hand).
    pub fn from_pi(pi: DMatrix<Complex64>) -> Result<PeriodData> {
        let g = pi.nrows();
        let id = DMatrix::<Complex64>::identity(g, g);
        let (symmetry_residual, min_imag_eigenvalue) = certify(&pi)?;
        let m = dual_matrix(&pi)?;
        Ok(PeriodData {
            genus: g,
            cycles: Vec::new(),
            a: id.clone(),
            b: pi.clone(),
            c: id,
            pi,
            m,
            err: 0.0,
            symmetry_residual,
            min_imag_eigenvalue,
        })
    }
}

/// Chain edges with the sign relating each edge's reference branch to sheet 1.
pub fn chain_edges(curve: &HyperellipticCurve) -> Result<Vec<Edge>> {
    let e = curve.branch_points();
    let n = e.len();
    let mut edges = vec![Edge { start: 0, sigma: 1.0 }];
    for k in 0..n - 2 {
        let v = e[k + 1];
        let u_in = (e[k + 1] - e[k]) / (e[k + 1] - e[k]).norm();
        let u_out = (e[k + 2] - e[k + 1]) / (e[k + 2] - e[k + 1]).norm();
        let rho = 0.4
            * e.iter()
                .enumerate()
                .filter(|(j, _)| *j != k + 1)
                .map(|(_, w)| (w - v).norm())
                .fold(f64::INFINITY, f64::min);
        let len_in = (e[k + 1] - e[k]).norm();
        let len_out = (e[k + 2] - e[k + 1]).norm();
        let s_in = 1.0 - 2.0 * rho / len_in;
        let s_out = -1.0 + 2.0 * rho / len_out;
        let y_in = edges[k].sigma * edge_branch(curve, k, &[s_in])[0];
        let th_in = (-u_in).arg();
        let mut delta = ((-u_in).arg() - u_out.arg()).rem_euclid(2.0 * PI);
        if delta == 0.0 {
            delta = 2.0 * PI;
        }
        // clockwise arc keeps the path on the left bank
        let y_out = continue_sqrt(
            |th| curve.f_factored(v + Complex64::from_polar(rho, th)),
            th_in,
            th_in - delta,
            y_in,
        );
        let reference = edge_branch(curve, k + 1, &[s_out])[0];
        let sigma = if (y_out - reference).norm() <= (y_out + reference).norm() {
            1.0
        } else {
            -1.0
        };
        if (y_out - sigma * reference).norm() > 1e-6 * y_out.norm() {
            return Err(Error::Homology(format!(
                "sheet continuation around branch point {} is inconsistent",
                k + 1
            )));
        }
        edges.push(Edge { start: k + 1, sigma });
    }
    Ok(edges)
}

/// `q_k(u)` with `q_k² = lc ∏_{j∉{k,k+1}} (x(u) - e_j)`, continued from the
/// principal value at `u = 0` to each requested parameter.
fn edge_q(curve: &HyperellipticCurve, k: usize, us: &[f64]) -> Vec<Complex64> {
    let e = curve.branch_points();
    let (a, b) = (e[k], e[k + 1]);
    let mid = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let lc = curve.leading();
    let qsq = |u: f64| {
        let x = mid + half * u;
        e.iter()
            .enumerate()
            .filter(|(j, _)| *j != k && *j != k + 1)
            .fold(Complex64::new(lc, 0.0), |acc, (_, w)| acc * (x - w))
    };
    let q0 = qsq(0.0).sqrt();
    let mut order: Vec<usize> = (0..us.len()).collect();
    order.sort_by(|&i, &j| us[i].partial_cmp(&us[j]).unwrap());
    let mut out = vec![Complex64::new(0.0, 0.0); us.len()];
    // ascending from 0
    let (mut t, mut w) = (0.0, q0);
    for &i in order.iter().filter(|&&i| us[i] >= 0.0) {
        w = continue_sqrt(qsq, t, us[i], w);
        t = us[i];
        out[i] = w;
    }
    let (mut t, mut w) = (0.0, q0);
    for &i in order.iter().rev().filter(|&&i| us[i] < 0.0) {
        w = continue_sqrt(qsq, t, us[i], w);
        t = us[i];
        out[i] = w;
    }
    out
}

/// Reference branch `B_k(u) = (d/2)·i·√(1-u²)·q_k(u)` of `y` on edge `k`.
fn edge_branch(curve: &HyperellipticCurve, k: usize, us: &[f64]) -> Vec<Complex64> {
    let e = curve.branch_points();
    let half = (e[k + 1] - e[k]) * 0.5;
    edge_q(curve, k, us)
        .into_iter()
        .zip(us)
        .map(|(q, u)| half * I * (1.0 - u * u).sqrt() * q)
        .collect()
}

/// `∫_edge x^m dx / y` on sheet 1 for `m = 0..powers`, with the last
/// doubling difference as error estimate.
pub fn edge_integrals(
    curve: &HyperellipticCurve,
    edge: &Edge,
    powers: usize,
    opts: &PeriodOptions,
) -> Result<(Vec<Complex64>, f64)> {
    let e = curve.branch_points();
    let k = edge.start;
    let mid = (e[k] + e[k + 1]) * 0.5;
    let half = (e[k + 1] - e[k]) * 0.5;
    let eval = |n: usize| -> Vec<Complex64> {
        let us = chebyshev_nodes(n);
        let qs = edge_q(curve, k, &us);
        let mut sums = vec![Complex64::new(0.0, 0.0); powers];
        for (u, q) in us.iter().zip(&qs) {
            let x = mid + half * u;
            let mut xp = Complex64::new(1.0, 0.0) / q;
            for s in sums.iter_mut() {
                *s += xp;
                xp *= x;
            }
        }
        let w = PI / n as f64;
        sums.into_iter().map(|s| s * w * edge.sigma / I).collect()
    };
    let mut n = 16;
    let mut prev = eval(n);
    loop {
        n *= 2;
        if n > opts.max_nodes {
            return Err(Error::Quadrature(format!(
                "edge {k} needs more than {} Gauss-Chebyshev nodes",
                opts.max_nodes
            )));
        }
        let cur = eval(n);
        let diff = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm() / a.norm().max(1.0))
            .fold(0.0, f64::max);
        if diff < opts.tol {
            let abs = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let mag = cur.iter().map(|c| c.norm()).fold(0.0, f64::max);
            return Ok((cur, abs.max(f64::EPSILON * mag)));
        }
        prev = cur;
    }
}

fn build_cycles(g: usize, orientation: f64) -> Vec<Cycle> {
    let mut cycles = Vec::with_capacity(2 * g);
    for i in 1..=g {
        cycles.push(Cycle {
            label: format!("a{i}"),
            kind: CycleKind::A,
            index: i,
            terms: vec![CycleTerm {
                edge: 2 * i - 2,
                weight: 2.0,
            }],
        });
    }
    for i in 1..=g {
        cycles.push(Cycle {
            label: format!("b{i}"),
            kind: CycleKind::B,
            index: i,
            terms: (i..=g)
                .map(|l| CycleTerm {
                    edge: 2 * l - 1,
                    weight: 2.0 * orientation,
                })
                .collect(),
        });
    }
    cycles
}

/// The `2g` cycles `a_1..a_g, b_1..b_g`.
pub fn canonical_homology(curve: &HyperellipticCurve) -> Result<Vec<Cycle>> {
    Ok(period_matrix(curve)?.cycles)
}

/// `∫_cycle ω̂_j`.
pub fn cycle_integral(curve: &HyperellipticCurve, j: usize, cycle: &Cycle) -> Result<Complex64> {
    let g = curve.genus();
    if j == 0 || j > g {
        return Err(Error::BasisIndex { index: j, genus: g });
    }
    let edges = chain_edges(curve)?;
    let opts = PeriodOptions::default();
    let mut total = Complex64::new(0.0, 0.0);
    for term in &cycle.terms {
        let edge = edges
            .get(term.edge)
            .ok_or_else(|| Error::Homology(format!("cycle uses missing edge {}", term.edge)))?;
        let (vals, _) = edge_integrals(curve, edge, j, &opts)?;
        total += vals[j - 1] * term.weight;
    }
    Ok(total)
}

pub fn period_matrix(curve: &HyperellipticCurve) -> Result<PeriodData> {
    period_matrix_with(curve, &PeriodOptions::default())
}

pub fn period_matrix_with(curve: &HyperellipticCurve, opts: &PeriodOptions) -> Result<PeriodData> {
    let g = curve.genus();
    let edges = chain_edges(curve)?;
    let used = 2 * g;
    let mut table = Vec::with_capacity(used);
    let mut quad_err: f64 = 0.0;
    for edge in edges.iter().take(used) {
        let (vals, err) = edge_integrals(curve, edge, g, opts)?;
        quad_err = quad_err.max(err);
        table.push(vals);
    }
    let assemble = |cycles: &[Cycle], kind: CycleKind| {
        let mut m = DMatrix::<Complex64>::zeros(g, g);
        for cyc in cycles.iter().filter(|c| c.kind == kind) {
            for term in &cyc.terms {
                for i in 0..g {
                    m[(i, cyc.index - 1)] += table[term.edge][i] * term.weight;
                }
            }
        }
        m
    };
    let mut cycles = build_cycles(g, 1.0);
    let a = assemble(&cycles, CycleKind::A);
    let c = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Homology("a-period matrix is singular".into()))?;
    let mut b = assemble(&cycles, CycleKind::B);
    let mut pi = &c * &b;
    let trace_im: f64 = (0..g).map(|i| pi[(i, i)].im).sum();
    if trace_im < 0.0 {
        cycles = build_cycles(g, -1.0);
        b = -b;
        pi = -pi;
    }
    let (symmetry_residual, min_imag_eigenvalue) = certify(&pi)?;
    let scale = pi.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if symmetry_residual > 100.0 * opts.tol.max(1e-12) * scale {
        return Err(Error::Certificate(format!(
            "period matrix not symmetric: residual {symmetry_residual:e}"
        )));
    }
    let m = dual_matrix(&pi)?;
    let cnorm = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = (2.0 * g as f64 * cnorm * quad_err * (1.0 + scale)).max(symmetry_residual);
    Ok(PeriodData {
        genus: g,
        cycles,
        a,
        b,
        c,
        pi,
        m,
        err,
        symmetry_residual,
        min_imag_eigenvalue,
    })
}

/// `(‖Π - Πᵀ‖_max, λ_min(Im Π))`; fails unless `Im Π ≻ 0`.
pub fn certify(pi: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    let g = pi.nrows();
    if pi.ncols() != g {
        return Err(Error::Certificate("period matrix is not square".into()));
    }
    if pi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Certificate("period matrix has non-finite entries".into()));
    }
    let sym = (pi - pi.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let im = DMatrix::<f64>::from_fn(g, g, |i, j| 0.5 * (pi[(i, j)].im + pi[(j, i)].im));
    if im.clone().cholesky().is_none() {
        return Err(Error::Certificate("Im Π is not positive definite".into()));
    }
    let min_eig = im.symmetric_eigenvalues().min();
    Ok((sym, min_eig))
}

/// `M = (2i Im Π)^{-1}`.
pub fn dual_matrix(pi: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let g = pi.nrows();
    let m = DMatrix::<Complex64>::from_fn(g, g, |i, j| 2.0 * I * pi[(i, j)].im);
    m.try_inverse()
        .ok_or_else(|| Error::Certificate("Im Π is singular".into()))
}

/// Jets of the normalized differentials `ω_1..ω_g` at `anchor`.
pub fn normalized_jets(
    curve: &HyperellipticCurve,
    period: &PeriodData,
    anchor: &SurfacePoint,
    order: usize,
    scale: Complex64,
) -> Result<Vec<LocalJet>> {
    let raw = basis_jets(curve, anchor, order, scale)?;
    let g = curve.genus();
    (0..g)
        .map(|j| {
            let w: Vec<Complex64> = (0..g).map(|i| period.c[(j, i)]).collect();
            LocalJet::combine(&raw, &w)
        })
        .collect()
}

/// Holomorphic local data `h_k = Σ_m M_{km} ω_m` of the harmonic duals `η_k`.
pub fn dual_form_local_data(period: &PeriodData, jets: &[LocalJet]) -> Result<Vec<LocalJet>> {
    let g = period.genus;
    if jets.len() != g {
        return Err(Error::AnchorMismatch(format!("expected {g} jets, got {}", jets.len())));
    }
    (0..g)
        .map(|k| {
            let w: Vec<Complex64> = (0..g).map(|m| period.m[(k, m)]).collect();
            LocalJet::combine(jets, &w)
        })
        .collect()
}
