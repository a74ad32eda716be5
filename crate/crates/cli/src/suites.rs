//! Verification checks and their built-in default suites.

use zoo_opt::function_space::FunctionClassParams;
use zoo_opt::rng::fuzz_stream;
use zoo_opt::spectral::SymmetricMatrix;
use zoo_opt::verification::{
    bias_experiment, concentration_experiment, newton_fuzz, noise_tail_check, prop13_fuzz, variance_experiment,
    BoundCheckReport, ConcentrationKind,
};
use zoo_opt::{NoiseModel, Point};

use crate::config::{CheckSpec, Command, ExperimentConfig, FamilySpec};
use crate::CliError;

pub const CHECK_NAMES: &[&str] = &["bias", "variance", "concentration", "noise-tail", "prop13", "newton"];

fn unit_params() -> FunctionClassParams {
    FunctionClassParams::new(1.0, 1.0, 1.0).expect("unit parameters are valid")
}

fn cell(family: Option<FamilySpec>, noise: Option<NoiseModel>, check: CheckSpec) -> ExperimentConfig {
    ExperimentConfig { family, noise, check: Some(check), ..ExperimentConfig::empty(Command::Verify) }
}

fn cubic(curvature: f64, d: usize) -> Option<FamilySpec> {
    Some(FamilySpec::CubicPerturbed { rho: 1.0, curvature, d })
}

/// Three sampling shapes per dimension: isotropic, graded diagonal, and a
/// tridiagonal matrix with off-diagonal coupling.
pub fn bias_shapes(d: usize) -> Vec<SymmetricMatrix> {
    let graded: Vec<f64> = (0..d).map(|i| 0.05 + 0.25 * i as f64 / (d.max(2) - 1) as f64).collect();
    let coupled = SymmetricMatrix::from_fn(d, |i, j| match i.abs_diff(j) {
        0 => 0.2,
        1 => 0.05,
        _ => 0.0,
    });
    vec![SymmetricMatrix::scaled_identity(d, 0.1), SymmetricMatrix::from_diagonal(&graded), coupled]
}

/// The experiments run by `verify <check>` when no config is given.
pub fn default_suite(check: &str) -> Option<Vec<ExperimentConfig>> {
    let cells = match check {
        "bias" => {
            // Equality instance f(x) = x^3/6 at the origin, then cubic-perturbed
            // objectives across dimensions and shapes.
            let mut cells: Vec<_> = [0.1, 0.5, 1.0]
                .into_iter()
                .map(|r| {
                    cell(cubic(0.0, 1), None, CheckSpec::Bias { x: vec![0.0], z: SymmetricMatrix::from_diagonal(&[r]), n_mc: 1_000_000 })
                })
                .collect();
            for d in [1, 2, 4] {
                for z in bias_shapes(d) {
                    cells.push(cell(cubic(1.0, d), None, CheckSpec::Bias { x: vec![0.3; d], z, n_mc: 200_000 }));
                }
            }
            cells
        }
        "variance" => {
            let mut cells = Vec::new();
            for d in [2, 4] {
                for n in [10, 100, 1000] {
                    cells.push(cell(
                        cubic(1.0, d),
                        Some(NoiseModel::StdGaussian),
                        CheckSpec::Variance { x: vec![0.3; d], z: SymmetricMatrix::scaled_identity(d, 0.5), n, n_mc: 2000 },
                    ));
                }
            }
            cells
        }
        "concentration" => [ConcentrationKind::Bootstrap, ConcentrationKind::Hessian]
            .into_iter()
            .map(|kind| {
                cell(
                    Some(FamilySpec::BenchmarkQuadratic { params: unit_params(), d: 2 }),
                    Some(NoiseModel::StdGaussian),
                    CheckSpec::Concentration {
                        kind,
                        x: vec![0.0, 0.0],
                        r: 0.3,
                        n: 100,
                        k_grid: vec![0.5, 1.0, 1.5],
                        n_mc: 10_000,
                    },
                )
            })
            .collect(),
        "noise-tail" => vec![cell(
            None,
            Some(NoiseModel::UniformBounded { a: 3f64.sqrt() }),
            CheckSpec::NoiseTail { s_grid: vec![0.5, 1.0, 1.5, 2.0], n_draws: 100_000 },
        )],
        "prop13" => vec![cell(
            None,
            None,
            CheckSpec::Prop13 { n_instances: 100_000, d_list: vec![1, 2, 4], m: 1.0, r0_range: (0.1, 10.0) },
        )],
        "newton" => vec![cell(None, None, CheckSpec::Newton { n_instances: 100, max_d: 4, max_ratio: 20.0, extra: 10 })],
        _ => return None,
    };
    Some(cells)
}

fn point(x: &[f64], d: usize) -> Result<Point, CliError> {
    if x.len() != d {
        return Err(CliError::Config(format!("point has {} coordinates, objective has {d}", x.len())));
    }
    Ok(Point::from_vec(x.to_vec()))
}

fn require_family(cfg: &ExperimentConfig) -> Result<&FamilySpec, CliError> {
    cfg.family.as_ref().ok_or_else(|| CliError::Config("this check needs a `family`".into()))
}

/// Runs the check described by `cfg.check` and returns one report per row.
///
/// `bound_scale` multiplies the bias bound; values below 1 make the bias
/// check intentionally stricter.
pub fn run_check(cfg: &ExperimentConfig, seed: u64, bound_scale: f64) -> Result<Vec<BoundCheckReport>, CliError> {
    let check = cfg.check.as_ref().ok_or_else(|| CliError::Config("missing `check`".into()))?;
    let noise = cfg.noise.unwrap_or(NoiseModel::StdGaussian);
    match check {
        CheckSpec::Bias { x, z, n_mc } => {
            let f = require_family(cfg)?.build()?;
            Ok(vec![bias_experiment(f.as_ref(), &point(x, f.dim())?, z, *n_mc, seed, bound_scale)?])
        }
        CheckSpec::Variance { x, z, n, n_mc } => {
            let f = require_family(cfg)?.build()?;
            Ok(vec![variance_experiment(f.as_ref(), &point(x, f.dim())?, z, *n, *n_mc, noise, seed)?])
        }
        CheckSpec::Concentration { kind, x, r, n, k_grid, n_mc } => {
            let f = require_family(cfg)?.build()?;
            Ok(concentration_experiment(*kind, f.as_ref(), &point(x, f.dim())?, *r, *n, k_grid, *n_mc, noise, seed)?)
        }
        CheckSpec::NoiseTail { s_grid, n_draws } => Ok(noise_tail_check(noise, s_grid, *n_draws, seed)?),
        CheckSpec::Prop13 { n_instances, d_list, m, r0_range } => {
            let mut rng = fuzz_stream(seed);
            let mut rows = Vec::new();
            for &d in d_list {
                let rep = prop13_fuzz(*n_instances, d, *m, *r0_range, &mut rng)?;
                for (claim, worst, violations) in
                    [("prop13_a", rep.worst_slack_a, rep.violations_a), ("prop13_b", rep.worst_slack_b, rep.violations_b)]
                {
                    // Worst `lhs - rhs`; no applicable instance counts as zero.
                    let excess = if worst.is_finite() { -worst } else { 0.0 };
                    rows.push(BoundCheckReport::with_abs_slack(
                        claim,
                        [("d", d as f64), ("n_instances", *n_instances as f64), ("violations", violations as f64)],
                        excess,
                        0.0,
                        0.0,
                        0.0,
                        rep.abs_slack,
                    ));
                }
            }
            Ok(rows)
        }
        CheckSpec::Newton { n_instances, max_d, max_ratio, extra } => {
            let reports = newton_fuzz(*n_instances, *max_d, *max_ratio, *extra, &mut fuzz_stream(seed))?;
            Ok(reports
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    BoundCheckReport::new(
                        "newton_threshold",
                        [
                            ("instance", i as f64),
                            ("t0", r.t0 as f64),
                            ("max_grad_after_t0", r.max_grad_after_t0),
                            ("threshold", r.threshold),
                        ],
                        (r.violations + r.contraction_violations) as f64,
                        0.0,
                        0.0,
                        0.0,
                    )
                })
                .collect())
        }
    }
}
