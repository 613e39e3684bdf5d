//! LLL reduction of real lattice bases with an exact integer transform.
//!
//! Gram-Schmidt data is recomputed from the original basis through the integer
//! transform after every change, so floating-point drift never accumulates in
//! the basis itself. Dimensions here are at most eight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_VECTORS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LllResult {
    /// Reduced basis vectors (rows).
    pub basis: Vec<Vec<f64>>,
    /// Integer matrix `T` with `reduced = T · input`.
    pub transform: Vec<Vec<i64>>,
}

impl LllResult {
    pub fn determinant(&self) -> i128 {
        int_determinant(&self.transform)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn apply(t: &[Vec<i64>], basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    t.iter()
        .map(|row| {
            let mut v = vec![0.0; basis[0].len()];
            for (c, b) in row.iter().zip(basis) {
                if *c != 0 {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += *c as f64 * bi;
                    }
                }
            }
            v
        })
        .collect()
}

/// Gram-Schmidt coefficients `μ` and squared norms `B`.
fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = if norms[j] > 0.0 {
                dot(&b[i], &star[j]) / norms[j]
            } else {
                0.0
            };
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (mu, norms)
}

/// LLL with Lovász parameter `delta ∈ (1/4, 1)`.
pub fn lll_reduce(basis: &[Vec<f64>], delta: f64) -> Result<LllResult> {
    let n = basis.len();
    if !(2..=MAX_VECTORS).contains(&n) {
        return Err(Error::Lattice(format!("basis size {n} outside 2..={MAX_VECTORS}")));
    }
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Lattice(format!("delta {delta} outside (1/4, 1)")));
    }
    let m = basis[0].len();
    if basis.iter().any(|v| v.len() != m) || m < n {
        return Err(Error::Lattice(
            "vectors must share a dimension at least the basis size".into(),
        ));
    }
    let (_, norms) = gram_schmidt(basis);
    let scale = basis.iter().map(|v| dot(v, v)).fold(0.0, f64::max);
    if norms.iter().any(|&b| b <= 1e-24 * scale) || scale == 0.0 {
        return Err(Error::Lattice("degenerate input basis".into()));
    }
    let mut t: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut b = basis.to_vec();
    let mut k = 1;
    let mut iterations = 0usize;
    while k < n {
        iterations += 1;
        if iterations > 100_000 {
            return Err(Error::Lattice("LLL did not terminate".into()));
        }
        // size-reduce b_k against b_{k-1}, ..., b_0
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&b);
            let q = mu[k][j].round();
            if q != 0.0 {
                if q.abs() > 1e15 {
                    return Err(Error::Lattice("coefficient overflow".into()));
                }
                let qi = q as i64;
                for c in 0..n {
                    t[k][c] = t[k][c]
                        .checked_sub(qi.checked_mul(t[j][c]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                b = apply(&t, basis);
            }
        }
        let (mu, norms) = gram_schmidt(&b);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            t.swap(k, k - 1);
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(LllResult { basis: b, transform: t })
}

fn overflow() -> Error {
    Error::Lattice("integer transform overflow".into())
}

/// Exact determinant of a small integer matrix (Bareiss elimination).
pub fn int_determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Lovász and size-reduction conditions, for checking outputs.
pub fn is_reduced(basis: &[Vec<f64>], delta: f64) -> bool {
    let (mu, norms) = gram_schmidt(basis);
    let n = basis.len();
    for i in 1..n {
        for j in 0..i {
            if mu[i][j].abs() > 0.5 + 1e-9 {
                return false;
            }
        }
        if norms[i] < (delta - mu[i][i - 1] * mu[i][i - 1]) * norms[i - 1] * (1.0 - 1e-9) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_example_finds_unit_vector() {
        let b = vec![vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0], vec![3.0, 5.0, 6.0]];
        let r = lll_reduce(&b, 0.99).unwrap();
        assert!(r.basis.iter().any(|v| v == &vec![0.0, 1.0, 0.0]));
        assert_eq!(r.determinant().abs(), 1);
        assert!(is_reduced(&r.basis, 0.99));
    }

    #[test]
    fn reduced_basis_is_a_fixed_point() {
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = lll_reduce(&b, 0.99).unwrap();
        assert_eq!(r.basis, b);
        assert_eq!(r.transform, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(lll_reduce(&[vec![1.0, 2.0], vec![2.0, 4.0]], 0.99).is_err());
        assert!(lll_reduce(&[vec![1.0, 0.0]], 0.99).is_err());
        assert!(lll_reduce(&[vec![1.0, 0.0], vec![0.0, 1.0]], 0.2).is_err());
    }

    #[test]
    fn bareiss_determinant() {
        assert_eq!(int_determinant(&[vec![2, 1], vec![7, 4]]), 1);
        assert_eq!(int_determinant(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]), -1);
        assert_eq!(int_determinant(&[vec![1, 2], vec![2, 4]]), 0);
    }
}
