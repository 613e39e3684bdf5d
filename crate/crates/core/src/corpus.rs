//! Seeded random test curves and points.
//!
//! Coefficients are integers in `[-5, 5]`. Curves whose branch points crowd
//! closer than [`MIN_ROOT_GAP`] are redrawn: they are squarefree but so close
//! to the discriminant that default-tolerance quadrature loses digits.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::{parse_curve, CurveSpec, HyperellipticCurve, Sheet, SurfacePoint};
use crate::error::{Error, Result};

pub const MIN_ROOT_GAP: f64 = 0.1;
const MAX_DRAWS: usize = 10_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn accept(spec: CurveSpec) -> Option<HyperellipticCurve> {
    let c = parse_curve(&spec).ok()?;
    (c.min_gap() >= MIN_ROOT_GAP).then_some(c)
}

/// Random squarefree `f` of degree `2g+1` (or `2g+2` when `even_degree`).
pub fn random_curve<R: Rng>(rng: &mut R, genus: usize, even_degree: bool) -> Result<HyperellipticCurve> {
    let degree = 2 * genus + 1 + usize::from(even_degree);
    for draw in 0..MAX_DRAWS {
        let mut coeffs: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-5..=5)).collect();
        while coeffs[degree] == 0 {
            coeffs[degree] = rng.gen_range(-5..=5);
        }
        let name = format!("random-g{genus}-{draw}");
        if let Some(c) = accept(CurveSpec::new(&name, &coeffs)) {
            return Ok(c);
        }
    }
    Err(Error::Experiment("no acceptable random curve found".into()))
}

/// Random bielliptic genus-2 curve `y² = c₃x⁶ + c₂x⁴ + c₁x² + c₀`.
pub fn random_bielliptic<R: Rng>(rng: &mut R) -> Result<HyperellipticCurve> {
    for draw in 0..MAX_DRAWS {
        let mut c: Vec<i64> = (0..4).map(|_| rng.gen_range(-5..=5)).collect();
        if c[3] == 0 || c[0] == 0 {
            continue;
        }
        // keep f(0) > 0 so that (0, ±√c₀) are real points
        c[0] = c[0].abs();
        let coeffs = [c[0], 0, c[1], 0, c[2], 0, c[3]];
        if let Some(curve) = accept(CurveSpec::new(&format!("bielliptic-{draw}"), &coeffs)) {
            return Ok(curve);
        }
    }
    Err(Error::Experiment("no acceptable bielliptic curve found".into()))
}

/// Random ordinary point in the box `[-2, 2]²`, at least `0.25·min_gap` from
/// every branch point.
pub fn random_point<R: Rng>(rng: &mut R, curve: &HyperellipticCurve) -> SurfacePoint {
    let keep = 0.25 * curve.min_gap();
    loop {
        let x = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if curve.nearest_branch(x).1 < keep {
            continue;
        }
        let sheet = if rng.gen_bool(0.5) { Sheet::Plus } else { Sheet::Minus };
        return SurfacePoint::ordinary(x, sheet);
    }
}
