//! Command-line front end.
//!
//! Results go to stdout as JSON (and to `--out` when given). Exit codes: 0 on
//! success, 1 on a domain error, 2 on a usage or configuration error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::abel_jacobi::{abel_jacobi_with, aj_jet, hyperelliptic_test, AjOptions, PathHints};
use crate::config::RunConfig;
use crate::corpus;
use crate::curve::{parse_curve, CurveSpec, HyperellipticCurve, SurfacePoint};
use crate::error::{Error, Result};
use crate::homology::{period_matrix_with, PeriodData, PeriodOptions};
use crate::ivhs::{sample_generic, BreakingExperiment};
use crate::schiffer::schiffer_series;
use crate::serialize::{encode, matrix_value};
use crate::soliton::{bielliptic_anchor, rationality_test, soliton_breaking_experiment, SolitonExperiment};
use crate::theta::{all_characteristics, hyperelliptic_theta_test, theta_null};

#[derive(Parser, Debug)]
#[command(
    name = "schiffer-lab",
    version,
    about = "Periods, Abel-Jacobi jets and Schiffer variations of hyperelliptic curves"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// JSON file mirroring the run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Significant digits (at most 16).
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (single results) or directory (experiments).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Curve inspection.
    Curve {
        #[command(subcommand)]
        action: CurveAction,
    },
    /// Period matrix with certificates.
    Periods { curve: PathBuf },
    /// Abel-Jacobi image of a point.
    Aj {
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Base point (default: the first branch point).
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
    },
    /// Derivatives of the Abel-Jacobi map at a point.
    AjJet {
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Second-derivative hyperellipticity test at a point.
    HyperTest {
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Schiffer perturbation series of the period matrix.
    Schiffer {
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Also evaluate the truncated series at this ε.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
    },
    /// Theta constants of the period matrix.
    ThetaNull {
        curve: PathBuf,
        /// Characteristic as 0/1 digits `alpha/beta`, e.g. `01/10`.
        #[arg(long)]
        characteristic: Option<String>,
    },
    /// Even theta-null vanishing test.
    HyperThetaTest { curve: PathBuf },
    /// Rationality of the Abel-Jacobi tangent at a point.
    SolitonTest {
        curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Seeded desk experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Quick invariant suite.
    Selftest,
}

#[derive(Subcommand, Debug)]
pub enum CurveAction {
    Info { curve: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Minimum even theta-null under first-order Schiffer updates.
    #[command(name = "thm-4-2")]
    Hyperelliptic {
        #[arg(long, default_value_t = 3)]
        genus: usize,
        #[arg(long, default_value_t = 5)]
        curves: usize,
        #[arg(long, default_value_t = 5)]
        points: usize,
    },
    /// Rationality of bielliptic tangents under first-order Schiffer updates.
    #[command(name = "thm-5-5")]
    Soliton {
        #[arg(long, default_value_t = 20)]
        instances: usize,
    },
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match resolve_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match dispatch(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn resolve_config(g: &GlobalOpts) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    if let Some(p) = g.prec {
        cfg.prec = p;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(o) = &g.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_curve(path: &Path) -> Result<HyperellipticCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_curve(&CurveSpec::from_json(&text)?)
}

fn periods(curve: &HyperellipticCurve, cfg: &RunConfig) -> Result<PeriodData> {
    period_matrix_with(
        curve,
        &PeriodOptions {
            tol: cfg.tol,
            ..PeriodOptions::default()
        },
    )
}

fn point(s: &str) -> Result<SurfacePoint> {
    SurfacePoint::parse(s)
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    if let Some(p) = out {
        std::fs::write(p, format!("{text}\n"))?;
    }
    say(&text);
    Ok(())
}

/// Print to stdout, tolerating a closed pipe.
fn say(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn parse_characteristic(s: &str) -> Result<crate::theta::Characteristic> {
    let (a, b) = s
        .split_once('/')
        .ok_or_else(|| Error::Config(format!("characteristic '{s}' must look like 01/10")))?;
    let digits = |t: &str| -> Result<Vec<u8>> {
        t.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("characteristic digit '{c}'"))),
            })
            .collect()
    };
    let (a, b) = (digits(a)?, digits(b)?);
    if a.len() != b.len() {
        return Err(Error::Config("characteristic halves differ in length".into()));
    }
    Ok(crate::theta::Characteristic::new(&a, &b))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<i32> {
    let out = cli.global.out.as_deref();
    match &cli.command {
        Command::Curve {
            action: CurveAction::Info { curve },
        } => {
            let c = load_curve(curve)?;
            let branch: Vec<[String; 2]> = c.branch_points().iter().map(|z| encode(*z)).collect();
            emit(
                &json!({
                    "name": c.name(),
                    "f_coeffs": c.spec().f_coeffs,
                    "degree": c.degree(),
                    "genus": c.genus(),
                    "branch_points": branch,
                    "root_error": c.root_error(),
                    "min_gap": c.min_gap(),
                    "infinity_is_branch": c.odd_degree(),
                }),
                out,
            )?;
        }
        Command::Periods { curve } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            emit(&serde_json::to_value(&p)?, out)?;
        }
        Command::Aj { curve, point: pt, base } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let base = match base {
                Some(b) => point(b)?,
                None => SurfacePoint::Branch(0),
            };
            let v = abel_jacobi_with(
                &c,
                &p,
                &base,
                &point(pt)?,
                &PathHints::default(),
                &AjOptions { tol: cfg.tol },
            )?
            .reduced(&p)?;
            emit(&serde_json::to_value(&v)?, out)?;
        }
        Command::AjJet {
            curve,
            point: pt,
            order,
        } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let j = aj_jet(&c, &p, &point(pt)?, *order)?;
            emit(&serde_json::to_value(&j)?, out)?;
        }
        Command::HyperTest { curve, point: pt } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let t = hyperelliptic_test(&c, &p, &point(pt)?, cfg.hyper_threshold)?;
            emit(&serde_json::to_value(t)?, out)?;
        }
        Command::Schiffer {
            curve,
            point: pt,
            order,
            eps,
        } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let budget = (2 * order).max(2);
            let s = schiffer_series(&c, &p, &point(pt)?, *order, budget)?;
            let mut v = serde_json::to_value(&s)?;
            v["symmetry_residuals"] = json!(s.symmetry_residuals());
            if let Some(e) = eps {
                v["eps"] = json!(e);
                v["Pi_eps"] = matrix_value(&s.eval(*e));
            }
            emit(&v, out)?;
        }
        Command::ThetaNull { curve, characteristic } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let chars = match characteristic {
                Some(s) => {
                    let ch = parse_characteristic(s)?;
                    if ch.genus() != c.genus() {
                        return Err(Error::Config(format!(
                            "characteristic of genus {} for a genus-{} curve",
                            ch.genus(),
                            c.genus()
                        )));
                    }
                    vec![ch]
                }
                None => all_characteristics(c.genus()),
            };
            let vals: Vec<Value> = chars
                .iter()
                .map(|ch| theta_null(&p.pi, ch).map(|t| t.to_json()))
                .collect::<Result<_>>()?;
            emit(&json!({ "genus": c.genus(), "theta_nulls": vals }), out)?;
        }
        Command::HyperThetaTest { curve } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let t = hyperelliptic_theta_test(&p.pi, c.genus(), cfg.theta_threshold)?;
            emit(&serde_json::to_value(&t)?, out)?;
        }
        Command::SolitonTest { curve, point: pt } => {
            let c = load_curve(curve)?;
            let p = periods(&c, cfg)?;
            let u = aj_jet(&c, &p, &point(pt)?, 1)?.order(1).to_vec();
            let v = rationality_test(&u, &p.pi, cfg.rationality_tol, cfg.rationality_bound)?;
            let mut val = serde_json::to_value(&v)?;
            val["U"] = crate::serialize::vector_value(&u);
            emit(&val, out)?;
        }
        Command::Experiment { which } => {
            let dir = cli.global.out.clone().unwrap_or_else(|| cfg.out.clone());
            std::fs::create_dir_all(&dir)?;
            match which {
                Experiment::Hyperelliptic { genus, curves, points } => {
                    let summary = experiment_hyperelliptic(cfg, *genus, *curves, *points, &dir)?;
                    say(&serde_json::to_string_pretty(&summary)?);
                }
                Experiment::Soliton { instances } => {
                    let summary = experiment_soliton(cfg, *instances, &dir)?;
                    say(&serde_json::to_string_pretty(&summary)?);
                }
            }
        }
        Command::Selftest => {
            let (report, ok) = selftest();
            say(report.trim_end());
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Seeded genus-3 run of the theta-null experiment; writes `thm-4-2.csv` and
/// `thm-4-2.json` into `dir` and returns the summary.
pub fn experiment_hyperelliptic(
    cfg: &RunConfig,
    genus: usize,
    curves: usize,
    points: usize,
    dir: &Path,
) -> Result<Value> {
    if genus != 3 {
        return Err(Error::Config(format!(
            "the theta-null certificate is implemented for genus 3 only, got {genus}"
        )));
    }
    let mut rng = corpus::rng(cfg.seed);
    let mut runs: Vec<(String, BreakingExperiment, usize)> = Vec::new();
    for _ in 0..curves {
        let c = corpus::random_curve(&mut rng, genus, false)?;
        let p = periods(&c, cfg)?;
        let label = c.spec().f_coeffs.join(" ");
        for _ in 0..points {
            let (e, tries) = sample_generic(
                &mut rng,
                &c,
                &p,
                &cfg.eps_hyperelliptic,
                cfg.theta_threshold,
                cfg.resample_tries,
            )?;
            runs.push((label.clone(), e, tries));
        }
    }
    let mut csv = String::from("curve,point,eps,min_null,argmin\n");
    for (label, e, _) in &runs {
        for r in std::iter::once(&e.base).chain(&e.rows) {
            writeln!(
                csv,
                "\"{label}\",\"{}\",{:e},{:e},{}",
                e.p0, r.eps, r.min_null, r.argmin
            )
            .unwrap();
        }
    }
    std::fs::write(dir.join("thm-4-2.csv"), &csv)?;
    let slopes: Vec<f64> = runs.iter().map(|r| r.1.slope).collect();
    let summary = json!({
        "seed": cfg.seed,
        "genus": genus,
        "eps": cfg.eps_hyperelliptic,
        "threshold": cfg.theta_threshold,
        "runs": runs.iter().map(|(label, e, tries)| json!({
            "curve": label,
            "p0": e.p0.to_string(),
            "base_null": e.base.min_null,
            "slope": e.slope,
            "monotone": e.monotone,
            "generic": e.generic,
            "draws": tries,
        })).collect::<Vec<_>>(),
        "slope_min": slopes.iter().copied().fold(f64::INFINITY, f64::min),
        "slope_max": slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "all_vanish_at_zero": runs.iter().all(|r| r.1.base.min_null < cfg.theta_threshold),
        "all_monotone": runs.iter().all(|r| r.1.monotone),
        "all_generic": runs.iter().all(|r| r.1.generic),
    });
    std::fs::write(dir.join("thm-4-2.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Seeded genus-2 run of the rationality experiment; writes `thm-5-5.csv` and
/// `thm-5-5.json` into `dir`.
pub fn experiment_soliton(cfg: &RunConfig, instances: usize, dir: &Path) -> Result<Value> {
    let mut rng = corpus::rng(cfg.seed);
    let mut runs: Vec<(String, SolitonExperiment)> = Vec::new();
    for _ in 0..instances {
        let c = corpus::random_bielliptic(&mut rng)?;
        let p = periods(&c, cfg)?;
        let anchor = bielliptic_anchor(&c)?;
        let p0 = corpus::random_point(&mut rng, &c);
        let e = soliton_breaking_experiment(
            &c,
            &p,
            &anchor,
            &p0,
            &cfg.eps_soliton,
            cfg.rationality_tol,
            cfg.rationality_bound,
        )?;
        runs.push((c.spec().f_coeffs.join(" "), e));
    }
    let mut csv = String::from("curve,p0,eps,rational,best_residual\n");
    for (label, e) in &runs {
        for r in &e.rows {
            writeln!(
                csv,
                "\"{label}\",\"{}\",{:e},{},{:e}",
                e.p0, r.eps, r.rational, r.best_residual
            )
            .unwrap();
        }
    }
    std::fs::write(dir.join("thm-5-5.csv"), &csv)?;
    let tol = cfg.rationality_tol;
    let verified = |e: &SolitonExperiment| e.rows.iter().filter(|r| r.eps == 0.0).all(|r| r.rational);
    let broken = |e: &SolitonExperiment| {
        e.rows
            .iter()
            .filter(|r| r.eps >= 1e-4)
            .all(|r| !r.rational && r.best_residual >= 10.0 * tol)
    };
    let summary = json!({
        "seed": cfg.seed,
        "eps": cfg.eps_soliton,
        "tol": tol,
        "bound": cfg.rationality_bound,
        "runs": runs.iter().map(|(label, e)| json!({
            "curve": label,
            "p0": e.p0.to_string(),
            "criterion_max_abs": e.criterion.max_abs,
            "verified_at_zero": verified(e),
            "broken_from_1e-4": broken(e),
        })).collect::<Vec<_>>(),
        "all_verified_at_zero": runs.iter().all(|r| verified(&r.1)),
        "all_broken_from_1e-4": runs.iter().all(|r| broken(&r.1)),
    });
    std::fs::write(dir.join("thm-5-5.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

/// Fast end-to-end checks; returns the report and the overall verdict.
pub fn selftest() -> (String, bool) {
    type Check = (&'static str, fn() -> Result<bool>);
    let checks: [Check; 7] = [
        ("genus-1 lattice of x^3 - x is i", || {
            let c = parse_curve(&CurveSpec::new("x3-x", &[0, -1, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            Ok((p.pi[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-10)
        }),
        ("genus-2 period matrix is Siegel", || {
            let c = parse_curve(&CurveSpec::new("x5-1", &[-1, 0, 0, 0, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            Ok(p.symmetry_residual < 1e-10 && p.min_imag_eigenvalue > 0.0)
        }),
        ("Weierstrass points have vanishing second AJ jet", || {
            let c = parse_curve(&CurveSpec::new("x5-1", &[-1, 0, 0, 0, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            let mut ok = true;
            for k in 0..c.branch_points().len() {
                ok &= hyperelliptic_test(&c, &p, &SurfacePoint::Branch(k), 1e-8)?.is_hyperelliptic_at_p;
            }
            Ok(ok)
        }),
        ("first-order Schiffer update is symmetric rank one", || {
            let c = parse_curve(&CurveSpec::new("x5-1", &[-1, 0, 0, 0, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            let s = schiffer_series(&c, &p, &SurfacePoint::parse("0.3:0.7,+")?, 1, 2)?;
            let d = s.delta(1);
            Ok((d - d.transpose()).norm() < 1e-12 * d.norm() && crate::ivhs::singular_ratio(d) < 1e-12)
        }),
        ("hyperelliptic genus-3 curve has one vanishing even null", || {
            let c = parse_curve(&CurveSpec::new("x7-x", &[0, -1, 0, 0, 0, 0, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            let t = hyperelliptic_theta_test(&p.pi, 3, 1e-8)?;
            Ok(t.hyperelliptic && t.vanishing == 1)
        }),
        ("LLL transform is unimodular", || {
            let r =
                crate::lattice::lll_reduce(&[vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0], vec![3.0, 5.0, 6.0]], 0.99)?;
            Ok(r.determinant().abs() == 1)
        }),
        ("genus-1 tangents are rational", || {
            let c = parse_curve(&CurveSpec::new("x3-1", &[-1, 0, 0, 1]))?;
            let p = crate::homology::period_matrix(&c)?;
            let u = aj_jet(&c, &p, &SurfacePoint::parse("0.5:0.5,+")?, 1)?.order(1).to_vec();
            Ok(rationality_test(&u, &p.pi, 1e-8, 1_000_000)?.rational)
        }),
    ];
    let mut report = String::new();
    let mut all = true;
    for (name, f) in checks {
        let (ok, note) = match f() {
            Ok(v) => (v, String::new()),
            Err(e) => (false, format!(" ({e})")),
        };
        all &= ok;
        writeln!(report, "{} {name}{note}", if ok { "ok  " } else { "FAIL" }).unwrap();
    }
    (report, all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["schiffer-lab", "no-such-command"]), 2);
        assert_eq!(run(["schiffer-lab", "--prec", "40", "selftest"]), 2);
    }

    #[test]
    fn characteristic_syntax() {
        let c = parse_characteristic("01/10").unwrap();
        assert_eq!(c.genus(), 2);
        assert!(parse_characteristic("01/1").is_err());
        assert!(parse_characteristic("02/10").is_err());
    }

    #[test]
    fn selftest_passes() {
        let (report, ok) = selftest();
        assert!(ok, "{report}");
    }
}
