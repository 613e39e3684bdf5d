//! Quadrature rules.
//!
//! Gauss-Chebyshev (first kind) integrates `φ(u)/√(1-u²)` on `[-1, 1]`; the
//! weight absorbs the inverse square-root endpoint singularities of
//! hyperelliptic integrands between two branch points. Gauss-Legendre is used
//! for regular path segments.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Chebyshev nodes `cos((2k-1)π/2n)`, `k = 1..=n`, in decreasing order.
/// The common weight is `π/n`.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect()
}

/// `∫_{-1}^{1} φ(u) / √(1-u²) du` with an `n`-point Gauss-Chebyshev rule.
pub fn gauss_chebyshev<F>(n: usize, mut phi: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let s: f64 = chebyshev_nodes(n).into_iter().map(&mut phi).sum();
    s * PI / n as f64
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights.
type Rule = (Vec<f64>, Vec<f64>);

/// Shared Gauss-Legendre pair used by the adaptive path integrator:
/// a 12-point rule and a 24-point rule whose difference is the error estimate.
pub(crate) fn legendre_pair() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(12), gauss_legendre(24)))
}
