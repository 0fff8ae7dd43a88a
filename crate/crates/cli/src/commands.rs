//! Subcommand implementations. Every command returns a process exit code:
//! 0 when all checks pass, 1 when a mathematical check fails, 2 for usage or
//! input errors (the caller maps library errors to 2).

use std::fs;
use std::path::Path;

use infharm::catalog::{EnergyExpectation, catalog_entries, catalog_get};
use infharm::conformal::{
    hyperbolic_equation_residual, sphere_equation_residual, sphere_restriction_residual,
};
use infharm::reductions::{
    ProfileSign, ReductionSolution, cylinder_constant, cylinder_kink, cylinder_pendulum,
    equator_solution, reconstruct_and_verify, solve_ball_profile,
};
use infharm::{CatalogEntry, Chart, Error, Expr, SmoothMap, classify};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::mapspec::MapSpecFile;
use crate::report::{
    CatalogListing, CatalogReport, CheckReport, ClassifyReport, ConformalReport, EntryReport,
    NegativeWitness, OutputFormat, ReduceReport, SCHEMA_VERSION, VerificationReport,
};

pub struct CheckConfig {
    pub entries: Vec<String>,
    pub tolerance: f64,
    pub grid_limit: Option<usize>,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<String>,
}

fn emit(text: &str, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write `{path}`: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_entry(
    entry: &CatalogEntry,
    tolerance: f64,
    grid_limit: Option<usize>,
) -> Result<EntryReport, Error> {
    let samples: Vec<Vec<f64>> = match grid_limit {
        Some(limit) if entry.samples.len() > limit.max(1) => {
            let stride = entry.samples.len().div_ceil(limit.max(1));
            entry.samples.iter().step_by(stride).cloned().collect()
        }
        _ => entry.samples.clone(),
    };
    let classification =
        classify(&entry.map, &entry.source_metric, &entry.target_metric, &samples, tolerance)?;
    let verdict_ok = classification.verdicts == entry.expected_verdicts;

    let energy_max_rel_error = match &entry.expected_energy {
        EnergyExpectation::Nonconstant => None,
        expected => {
            let mut worst = 0.0_f64;
            for x in &samples {
                let measured = infharm::energy_density(
                    &entry.map,
                    &entry.source_metric,
                    &entry.target_metric,
                    x,
                )?
                .value();
                let reference = match expected {
                    EnergyExpectation::Constant(c) => *c,
                    EnergyExpectation::Profile(f) => f(x),
                    EnergyExpectation::Nonconstant => unreachable!(),
                };
                worst = worst.max((measured - reference).abs() / reference.abs().max(1e-300));
            }
            Some(worst)
        }
    };
    let energy_ok = energy_max_rel_error.is_none_or(|w| w <= 1e-10);

    let negative_witness = entry.min_infinity_residual.map(|required_above| NegativeWitness {
        required_above,
        measured: classification.worst.infinity_harmonic,
    });
    let witness_ok = negative_witness
        .as_ref()
        .is_none_or(|w| w.measured > w.required_above);

    Ok(EntryReport {
        id: entry.id.to_string(),
        description: entry.description.to_string(),
        passed: verdict_ok && energy_ok && witness_ok,
        expected_verdicts: entry.expected_verdicts.iter().copied().collect(),
        verdicts: classification.verdicts.iter().copied().collect(),
        worst_residuals: classification.worst,
        energy_max_rel_error,
        sample_count: samples.len(),
        critical_points: classification.critical_points,
        near_degenerate_points: classification.near_degenerate_points,
        rank_deficient_points: classification.rank_deficient_points,
        negative_witness,
    })
}

pub fn cmd_check(config: CheckConfig) -> Result<i32, Error> {
    let selected: Vec<&'static CatalogEntry> = if config.entries.is_empty() {
        catalog_entries()
    } else {
        let mut picked = Vec::with_capacity(config.entries.len());
        for id in &config.entries {
            picked.push(catalog_get(id)?);
        }
        picked.sort_by_key(|e| e.id);
        picked
    };

    let mut entries: Vec<EntryReport> = selected
        .par_iter()
        .map(|entry| check_entry(entry, config.tolerance, config.grid_limit))
        .collect::<Result<Vec<_>, Error>>()?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let all_passed = entries.iter().all(|e| e.passed);

    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check",
        tolerance: config.tolerance,
        seed: config.seed,
        entries,
        all_passed,
    };
    emit(&report.render(config.format), config.out.as_deref())?;
    Ok(if all_passed { 0 } else { 1 })
}

pub struct ClassifyConfig {
    pub file: String,
    pub tolerance: f64,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<String>,
}

pub fn cmd_classify(config: ClassifyConfig) -> Result<i32, Error> {
    let text = fs::read_to_string(&config.file)
        .map_err(|e| Error::InvalidArgument(format!("cannot read `{}`: {e}", config.file)))?;
    let spec = MapSpecFile::parse(&text)?;
    let loaded = spec.load(config.seed)?;
    let classification = classify(
        &loaded.map,
        &loaded.source_metric,
        &loaded.target_metric,
        &loaded.samples,
        config.tolerance,
    )?;
    let report = ClassifyReport {
        schema_version: SCHEMA_VERSION,
        command: "classify",
        file: config.file.clone(),
        tolerance: config.tolerance,
        seed: config.seed,
        sample_count: classification.sample_count,
        verdicts: classification.verdicts.iter().copied().collect(),
        worst_residuals: classification.worst,
        critical_points: classification.critical_points,
        near_degenerate_points: classification.near_degenerate_points,
        rank_deficient_points: classification.rank_deficient_points,
    };
    emit(&report.render(config.format), config.out.as_deref())?;
    Ok(0)
}

#[derive(Clone, Debug, clap::Subcommand)]
pub enum ReduceBranch {
    /// Closed-form separatrix profile a(s) = 2 arctan(e^{ks+A}) - pi/2.
    Kink {
        #[arg(long, default_value_t = 1)]
        k: i32,
        #[arg(long, alias = "A", default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = -3.0)]
        s_min: f64,
        #[arg(long, default_value_t = 3.0)]
        s_max: f64,
    },
    /// Circulating profile with conserved a'^2 + k^2 sin^2 a = C > k^2.
    Pendulum {
        #[arg(long, default_value_t = 1)]
        k: i32,
        #[arg(long, alias = "C")]
        c: f64,
        /// Initial profile value a(0); a'(0) is derived from C.
        #[arg(long, default_value_t = 0.0)]
        alpha0: f64,
        #[arg(long, default_value_t = 30.0)]
        s_max: f64,
    },
    /// Constant profile a = alpha0 (homothetic latitude immersion).
    Constant {
        #[arg(long, default_value_t = 1)]
        k: i32,
        #[arg(long)]
        alpha0: f64,
        #[arg(long, default_value_t = 2.0)]
        s_max: f64,
    },
    /// Ball profile rho' = sign sqrt(C - (n-1) sin^2 rho / r^2), rho(1) = pi/2.
    Ball {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, alias = "C")]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        r_min: f64,
        /// Slope sign: +1 or -1.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i32,
    },
    /// The equator map rho = pi/2 on the annulus [r_min, 1].
    Equator {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        r_min: f64,
    },
}

pub struct ReduceConfig {
    pub branch: ReduceBranch,
    pub step: f64,
    pub transverse: usize,
    pub format: OutputFormat,
    pub out: Option<String>,
    pub report_out: Option<String>,
}

pub fn cmd_reduce(config: ReduceConfig) -> Result<i32, Error> {
    let (name, solution): (&str, ReductionSolution) = match &config.branch {
        ReduceBranch::Kink { k, a, s_min, s_max } => {
            ("kink", cylinder_kink(*k, *a, (*s_min, *s_max), config.step)?)
        }
        ReduceBranch::Pendulum { k, c, alpha0, s_max } => {
            let kf = f64::from(*k);
            let arg = c - kf * kf * alpha0.sin().powi(2);
            if arg <= 0.0 {
                return Err(Error::WrongRegime {
                    c: *c,
                    k_sq: kf * kf,
                    hint: "no circulating slope at alpha0; use the constant branch (or the kink at C = k^2)".into(),
                });
            }
            ("pendulum", cylinder_pendulum(*k, *c, *alpha0, arg.sqrt(), *s_max, config.step)?)
        }
        ReduceBranch::Constant { k, alpha0, s_max } => {
            ("constant", cylinder_constant(*k, *alpha0, (0.0, *s_max), config.step)?)
        }
        ReduceBranch::Ball { n, c, r_min, sign } => {
            let sign = match sign {
                1 => ProfileSign::Increasing,
                -1 => ProfileSign::Decreasing,
                _ => {
                    return Err(Error::InvalidArgument("--sign must be 1 or -1".into()));
                }
            };
            ("ball", solve_ball_profile(*n, *c, *r_min, sign, config.step)?)
        }
        ReduceBranch::Equator { n, r_min } => {
            ("equator", equator_solution(*n, *r_min, config.step)?)
        }
    };

    if let Some(path) = &config.out {
        let mut buf = Vec::new();
        solution
            .write_csv(&mut buf)
            .map_err(|e| Error::InvalidArgument(format!("csv serialization failed: {e}")))?;
        fs::write(Path::new(path), buf)
            .map_err(|e| Error::InvalidArgument(format!("cannot write `{path}`: {e}")))?;
    }

    let summary = reconstruct_and_verify(&solution, config.transverse)?;
    let invariant = solution.max_invariant_residual();
    let passed =
        summary.max_inf_residual < 1e-6 && summary.max_energy_error < 1e-6 && invariant < 1e-8;

    let report = ReduceReport {
        schema_version: SCHEMA_VERSION,
        command: "reduce",
        branch: name.to_string(),
        sample_count: solution.samples.len(),
        conserved_constant: solution.conserved_constant,
        max_invariant_residual: invariant,
        turning_point: solution.turning_point,
        period: solution.params.period,
        verification: VerificationReport {
            grid_points: summary.grid_points,
            max_inf_residual: summary.max_inf_residual,
            max_energy_error: summary.max_energy_error,
            energy_min: summary.energy_range.0,
            energy_max: summary.energy_range.1,
        },
        csv_path: config.out.clone(),
        passed,
    };
    emit(&report.render(config.format), config.report_out.as_deref())?;
    Ok(if passed { 0 } else { 1 })
}

pub struct ConformalConfig {
    pub space: String,
    pub expression: String,
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub box_range: (f64, f64),
    pub format: OutputFormat,
    pub out: Option<String>,
}

pub fn cmd_conformal(config: ConformalConfig) -> Result<i32, Error> {
    let ambient_dim = match config.space.as_str() {
        "sphere" | "hyperbolic" => config.dim,
        "restriction" => config.dim + 1,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown space `{other}` (sphere, hyperbolic, restriction)"
            )));
        }
    };
    let expr = Expr::parse(&config.expression, ambient_dim)?;
    let u = SmoothMap::scalar_from_expr(Chart::euclidean(ambient_dim), expr);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = config.box_range;
    if lo >= hi {
        return Err(Error::InvalidArgument("sampling box must satisfy lo < hi".into()));
    }
    let mut worst = 0.0_f64;
    let mut evaluated = 0;
    let mut attempts = 0;
    while evaluated < config.samples && attempts < config.samples * 200 {
        attempts += 1;
        let x: Vec<f64> = (0..ambient_dim).map(|_| rng.random_range(lo..=hi)).collect();
        let residual = match config.space.as_str() {
            "sphere" => sphere_equation_residual(&u, &x),
            "hyperbolic" => {
                if x.iter().map(|c| c * c).sum::<f64>() >= 0.96 {
                    continue;
                }
                hyperbolic_equation_residual(&u, &x)
            }
            _ => {
                let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm < 1e-6 {
                    continue;
                }
                let on_sphere: Vec<f64> = x.iter().map(|c| c / norm).collect();
                sphere_restriction_residual(&u, &on_sphere)
            }
        };
        match residual {
            Ok(r) => {
                worst = worst.max(r.abs());
                evaluated += 1;
            }
            Err(Error::SingularPoint { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if evaluated == 0 {
        return Err(Error::InvalidArgument(
            "no evaluable sample points found in the box".into(),
        ));
    }
    let passed = worst < config.tolerance;
    let report = ConformalReport {
        schema_version: SCHEMA_VERSION,
        command: "conformal",
        space: config.space.clone(),
        expression: config.expression.clone(),
        dim: config.dim,
        sample_count: evaluated,
        seed: config.seed,
        tolerance: config.tolerance,
        max_abs_residual: worst,
        passed,
    };
    emit(&report.render(config.format), config.out.as_deref())?;
    Ok(if passed { 0 } else { 1 })
}

pub fn cmd_catalog(format: OutputFormat, out: Option<&str>) -> Result<i32, Error> {
    let entries = catalog_entries()
        .into_iter()
        .map(|e| CatalogListing {
            id: e.id.to_string(),
            description: e.description.to_string(),
            expected_verdicts: e.expected_verdicts.iter().copied().collect(),
            sample_count: e.samples.len(),
        })
        .collect();
    let report =
        CatalogReport { schema_version: SCHEMA_VERSION, command: "catalog", entries };
    emit(&report.render(format), out)?;
    Ok(0)
}
