//! Experiment pipeline: constants across refinements, kernel checks and
//! verification suites, one experiment per inequality id.

use guenterlab::geometry::{extrude_region, mark_region, Carrier};
use guenterlab::kernels::def_kernel_check;
use guenterlab::norms::Exponent;
use guenterlab::spectra::{
    build_domain, default_regions, estimate_problem, quotient_lower_bound, ConstantEstimate, Domain, EigenOptions,
    InequalityId, NamedRegion, Problem, Setup,
};
use guenterlab::verify::{build_suite, calibrate_sup_constant, calibration_seed, verify_inequality, EPSILON};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, RegionSpec};
use crate::error::{CliError, ConfigError, Context};
use crate::report::{Check, ConstantKind, Experiment, KernelLevel, LevelResult};

/// Seeded fields added to the sup calibration pool.
pub const CALIBRATION_EXTRA: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Constants at every level.
    Estimate,
    /// Suites at the finest level against configured or estimated constants.
    Verify,
    /// Null spaces and unique continuation at every level.
    Kernel,
    /// Everything.
    Run,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Estimate => "estimate",
            Mode::Verify => "verify",
            Mode::Kernel => "kernel",
            Mode::Run => "run",
        }
    }
}

fn user_regions(domain: &Domain<f64>, specs: &[RegionSpec]) -> Result<Vec<NamedRegion<f64>>, CliError> {
    // cylinder regions are marked on the base and extruded
    let carrier: &dyn Carrier<f64> = match domain {
        Domain::Cylinder(c) => c.base().carrier(),
        _ => domain.carrier(),
    };
    specs
        .iter()
        .map(|spec| {
            if let Some(axis) = spec.predicate.max_axis().filter(|&a| a >= carrier.ambient_dim()) {
                return Err(CliError::Config(ConfigError {
                    file: None,
                    line: spec.line,
                    field: Some(format!("regions.{}.predicate", spec.name)),
                    message: format!("x{} does not exist on a carrier in R^{}", axis + 1, carrier.ambient_dim()),
                }));
            }
            let region = mark_region(carrier, |x| spec.predicate.eval(x, spec.tol), spec.kind)
                .context(|| format!("region `{}`", spec.name))?;
            let region = match domain {
                Domain::Cylinder(c) => extrude_region(c, &region).context(|| format!("region `{}`", spec.name))?,
                _ => region,
            };
            Ok(NamedRegion { name: spec.name.clone(), region })
        })
        .collect()
}

pub fn make_setup(id: InequalityId, cfg: &ExperimentConfig, level: usize) -> Result<Setup<f64>, CliError> {
    let ctx = || format!("{id} level {level}");
    let shape = cfg.shape.clone().unwrap_or_else(|| id.default_shape()).refine(level);
    let domain = build_domain::<f64>(id, &shape, cfg.layers).context(ctx)?;
    let regions = if cfg.regions.is_empty() || !id.needs_region() {
        default_regions(id, &domain).context(ctx)?
    } else {
        user_regions(&domain, &cfg.regions)?
    };
    Ok(Setup { id, shape, level, domain, regions })
}

fn exponent(id: InequalityId, cfg: &ExperimentConfig) -> Exponent {
    if id.is_sup() {
        Exponent::INFINITY
    } else {
        Exponent::new(cfg.p).expect("validated with the config")
    }
}

struct Level {
    result: LevelResult,
    problem: Problem<f64>,
}

fn constant_at(id: InequalityId, cfg: &ExperimentConfig, level: usize) -> Result<Level, CliError> {
    let ctx = || format!("{id} level {level}");
    let setup = make_setup(id, cfg, level)?;
    let problem = setup.problem().context(ctx)?;
    let p = exponent(id, cfg);
    let (kind, c, estimate, calibration) = if id.is_sup() {
        let cal = calibrate_sup_constant(&problem, calibration_seed(cfg.seed), CALIBRATION_EXTRA).context(ctx)?;
        (ConstantKind::Calibrated, cal.c, None, Some(cal))
    } else if p.value() == 2.0 {
        let est = estimate_problem(&problem, &EigenOptions::default()).context(ctx)?;
        (ConstantKind::Eigen, est.c, Some(est), None)
    } else {
        let suite = build_suite(&problem, cfg.family, cfg.seed, cfg.samples, None).context(ctx)?;
        let xs: Vec<Vec<f64>> = suite.samples.into_iter().map(|s| s.x).collect();
        let lb = quotient_lower_bound(&problem, p, &xs).context(ctx)?;
        (ConstantKind::LowerBound, lb, None, None)
    };
    let result = LevelResult {
        level,
        shape: setup.shape.clone(),
        nodes: problem.mesh.nodes,
        dofs: problem.mesh.dofs,
        h: problem.mesh.h,
        kind,
        c,
        estimate,
        calibration,
    };
    Ok(Level { result, problem })
}

fn run_id(id: InequalityId, cfg: &ExperimentConfig, mode: Mode) -> Result<Experiment, CliError> {
    let mut e = Experiment {
        id: id.name(),
        description: id.description().into(),
        p: exponent(id, cfg).value(),
        regions: Vec::new(),
        levels: Vec::new(),
        kernel: Vec::new(),
        constant_source: None,
        verification: None,
        checks: Vec::new(),
        pass: true,
        witness_csv: None,
        kernel_csv: None,
    };
    let finest = cfg.levels - 1;

    let mut last: Option<Level> = None;
    if matches!(mode, Mode::Estimate | Mode::Run) {
        for level in 0..cfg.levels {
            let l = constant_at(id, cfg, level)?;
            let ok = l.result.c.is_finite() && l.result.c > 0.0;
            e.checks.push(Check {
                name: format!("{id}/level{level}/constant"),
                pass: ok,
                detail: format!("{:?} C = {}", l.result.kind, l.result.c),
            });
            e.levels.push(l.result.clone());
            last = Some(l);
        }
    }

    if matches!(mode, Mode::Kernel | Mode::Run) && id.uses_def() {
        for level in 0..cfg.levels {
            let s = make_setup(id, cfg, level)?;
            let (basis, check) =
                def_kernel_check(id, &s.domain, &s.regions).context(|| format!("{id} level {level} kernel"))?;
            let detail = match &check.continuation {
                Some(u) => format!("dim {} gap {:.3e} rank {}/{}", check.dim, check.gap, u.rank, u.expected),
                None => format!("dim {} gap {:.3e}", check.dim, check.gap),
            };
            e.checks.push(Check { name: format!("{id}/level{level}/kernel"), pass: check.pass, detail });
            if level == finest {
                e.kernel_csv = Some(basis.to_csv());
            }
            e.kernel.push(KernelLevel { level, check });
        }
    }

    if matches!(mode, Mode::Verify | Mode::Run) {
        verify_finest(id, cfg, &mut e, last)?;
    }

    if e.regions.is_empty() {
        let s = make_setup(id, cfg, finest)?;
        e.regions = s.problem().context(|| format!("{id} level {finest}"))?.regions;
    }
    e.pass = e.checks.iter().all(|c| c.pass);
    Ok(e)
}

fn verify_finest(
    id: InequalityId,
    cfg: &ExperimentConfig,
    e: &mut Experiment,
    last: Option<Level>,
) -> Result<(), CliError> {
    let finest = cfg.levels - 1;
    let ctx = || format!("{id} level {finest} verification");
    let configured = cfg.constants.get(&id.name()).copied();
    // the finest-level constant is needed unless one is configured
    let level = match (last, configured) {
        (Some(l), _) => l,
        (None, Some(_)) => {
            let setup = make_setup(id, cfg, finest)?;
            let problem = setup.problem().context(ctx)?;
            let result = LevelResult {
                level: finest,
                shape: setup.shape.clone(),
                nodes: problem.mesh.nodes,
                dofs: problem.mesh.dofs,
                h: problem.mesh.h,
                kind: ConstantKind::Eigen,
                c: f64::NAN,
                estimate: None,
                calibration: None,
            };
            Level { result, problem }
        }
        (None, None) => constant_at(id, cfg, finest)?,
    };
    let (constant, source) = match (configured, level.result.kind) {
        (Some(c), _) => (c, "config"),
        (None, ConstantKind::Eigen) => (level.result.c, "estimate"),
        (None, ConstantKind::Calibrated) => (level.result.c, "calibration"),
        (None, ConstantKind::LowerBound) => {
            // a sampled lower bound verified against its own suite proves nothing
            e.checks.push(Check {
                name: format!("{id}/verify"),
                pass: true,
                detail: format!("skipped: no constant configured for p = {}; lower bound {}", cfg.p, level.result.c),
            });
            return Ok(());
        }
    };
    let eigenvector: Option<&ConstantEstimate> = level.result.estimate.as_ref();
    let suite = build_suite(&level.problem, cfg.family, cfg.seed, cfg.samples, eigenvector).context(ctx)?;
    let report = verify_inequality(&level.problem, constant, &suite, exponent(id, cfg), EPSILON).context(ctx)?;
    e.checks.push(Check {
        name: format!("{id}/verify"),
        pass: report.pass,
        detail: format!(
            "max ratio {} vs C = {constant} ({source}), {} unbounded, argmax {}",
            report.max_ratio,
            report.unbounded.len(),
            report.argmax.as_deref().unwrap_or("-")
        ),
    });
    if !report.witness_csv.is_empty() {
        e.witness_csv = Some(report.witness_csv.clone());
    }
    e.regions = level.problem.regions.clone();
    e.constant_source = Some(source.into());
    e.verification = Some(report);
    Ok(())
}

/// Runs every id of the config; ids run concurrently, results keep config order.
pub fn run_experiment(cfg: &ExperimentConfig, mode: Mode) -> Result<Vec<Experiment>, CliError> {
    if mode == Mode::Kernel {
        let plain: Vec<String> = cfg.ids.iter().filter(|i| !i.uses_def()).map(|i| i.name()).collect();
        if !plain.is_empty() {
            return Err(CliError::Config(ConfigError {
                file: None,
                line: None,
                field: Some("ids".into()),
                message: format!("kernel checks need a deformation form; not applicable to {}", plain.join(", ")),
            }));
        }
    }
    cfg.ids.par_iter().map(|&id| run_id(id, cfg, mode)).collect()
}
