//! The four subcommands. Each returns whether its check passed; errors carry
//! their own exit code.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use firstorder::algorithms::{
    gradient_descent, nesterov_first, nesterov_second, proximal_gradient, replay, subgradient_method, Algorithm,
    Problem, RunRecord, StepSchedule,
};
use firstorder::certificates::{
    estimate_optimum, verify_run, CertificateReport, OptimumMethod, TheoremId, VerifyOptions,
};
use firstorder::convex_analysis::{
    self, check_cocoercivity, check_first_order_condition, check_gradient_limit, check_gradient_monotone,
    check_moreau_rockafellar, check_smooth_upper_bound, check_strong_and_smooth, check_strong_convexity,
    check_subderiv_singleton, PropertyReport, Sampler,
};
use firstorder::io::{format_float, write_certificate_csv, write_run_csv};
use firstorder::lasso::{lasso_reference, solve_lasso, LassoMethod};
use firstorder::objectives::{make_least_squares, make_scaled_l1, sign, CompositeProblem};
use firstorder::{Error, Rng, Vector};

use crate::config::{BuiltProblem, Format, Property, RunConfig, StepChoice};
use crate::error::CliError;

const GRADIENT_LIMIT_RADII: [f64; 3] = [1e-2, 1e-4, 1e-7];
const GRADIENT_LIMIT_TOL: f64 = 1e-5;
const SUM_RULE_POINTS: usize = 20;

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            context: format!("cannot create {}", p.display()),
            source,
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = open(path)?;
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(|source| CliError::Io {
        context: "write failed".into(),
        source,
    })
}

fn emit_record(rec: &RunRecord, cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format(Format::Csv) {
        Format::Json => write_json(rec, cfg.output_path()),
        Format::Csv => {
            let mut out = open(cfg.output_path())?;
            write_run_csv(rec, &mut out)?;
            out.flush().map_err(Error::from)?;
            Ok(())
        }
    }
}

fn emit_certificate(rep: &CertificateReport, cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format(Format::Csv) {
        Format::Json => write_json(rep, cfg.output_path()),
        Format::Csv => {
            let mut out = open(cfg.output_path())?;
            write_certificate_csv(rep, &mut out)?;
            out.flush().map_err(Error::from)?;
            Ok(())
        }
    }
}

fn emit_property(rep: &PropertyReport, cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.format(Format::Json) {
        Format::Json => write_json(rep, cfg.output_path()),
        Format::Csv => {
            let mut out = open(cfg.output_path())?;
            let mut text = String::from("check,lhs,rhs,deficit\n");
            for v in &rep.violations {
                text += &format!(
                    "{},{},{},{}\n",
                    v.check,
                    format_float(v.lhs),
                    format_float(v.rhs),
                    format_float(v.deficit)
                );
            }
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(Error::from)?;
            Ok(())
        }
    }
}

/// Runs the configured algorithm. Step-size choices are validated first so
/// that config mistakes surface as config errors.
fn run_inline(cfg: &RunConfig, problem: &BuiltProblem) -> Result<RunRecord, CliError> {
    let algorithm = cfg.algorithm()?;
    let x0 = cfg.start(problem.dim())?;
    let k = cfg.max_iter()?;
    let step = cfg.step(algorithm, problem.lipschitz())?;
    let mut rec = match (algorithm, problem, step) {
        (Algorithm::GradientDescent, BuiltProblem::Smooth(f), StepChoice::Fixed(a)) => gradient_descent(f, &x0, a, k)?,
        (Algorithm::GradientDescent, ..) => return Err(CliError::Config("gradient descent needs a smooth problem".into())),
        (Algorithm::Subgradient, BuiltProblem::Nonsmooth(g), s) => {
            let schedule = match s {
                StepChoice::Fixed(a) => StepSchedule::Fixed(a),
                StepChoice::Diminishing(a) => StepSchedule::Diminishing(a),
            };
            subgradient_method(g, &x0, schedule, k)?
        }
        (Algorithm::Subgradient, ..) => {
            return Err(CliError::Config("the subgradient method needs a nonsmooth problem".into()))
        }
        (Algorithm::ProximalGradient, p, StepChoice::Fixed(t)) => proximal_gradient(&p.composite()?, &x0, t, k)?,
        (Algorithm::NesterovFirst, p, _) => nesterov_first(&p.composite()?, &x0, k)?,
        (Algorithm::NesterovSecond, p, _) => nesterov_second(&p.composite()?, &x0, k)?,
        (Algorithm::ProximalGradient, _, StepChoice::Diminishing(_)) => unreachable!("rejected by step validation"),
    };
    rec.echo.seed = Some(cfg.seed());
    Ok(rec)
}

/// On divergence the partial record is written before the error is returned.
fn run_or_write_partial(cfg: &RunConfig, problem: &BuiltProblem) -> Result<RunRecord, CliError> {
    match run_inline(cfg, problem) {
        Err(CliError::Lib(Error::Divergence { iteration, partial })) => {
            emit_record(&partial, cfg)?;
            Err(CliError::Lib(Error::Divergence { iteration, partial }))
        }
        other => other,
    }
}

pub fn cmd_run(cfg: &RunConfig) -> Result<bool, CliError> {
    let problem = cfg.build_problem()?;
    let rec = run_or_write_partial(cfg, &problem)?;
    emit_record(&rec, cfg)?;
    Ok(true)
}

fn default_optimum(problem: &BuiltProblem) -> OptimumMethod {
    match problem {
        BuiltProblem::Smooth(f) if f.known_minimum().is_some() => OptimumMethod::ClosedForm,
        BuiltProblem::Smooth(_) => OptimumMethod::NormalEquations,
        BuiltProblem::Nonsmooth(_) => OptimumMethod::ClosedForm,
        BuiltProblem::Lasso(_) => OptimumMethod::HighPrecisionRun,
    }
}

fn load_record(path: &Path) -> Result<RunRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("cannot read {}", path.display()),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn replay_view<'a>(
    algorithm: Algorithm,
    problem: &'a BuiltProblem,
    composite: &'a Option<CompositeProblem>,
) -> Result<Problem<'a>, CliError> {
    Ok(match (algorithm, problem, composite) {
        (Algorithm::GradientDescent, BuiltProblem::Smooth(f), _) => Problem::Smooth(f),
        (Algorithm::Subgradient, BuiltProblem::Nonsmooth(g), _) => Problem::Nonsmooth(g),
        (_, _, Some(c)) if !matches!(algorithm, Algorithm::GradientDescent | Algorithm::Subgradient) => {
            Problem::Composite(c)
        }
        _ => return Err(CliError::Config(format!("{algorithm} record does not match the configured problem"))),
    })
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<bool, CliError> {
    let problem = cfg.build_problem()?;
    let rec = match &cfg.record {
        Some(path) => {
            let rec = load_record(path)?;
            let composite = problem.composite().ok();
            let view = replay_view(rec.algorithm, &problem, &composite)?;
            replay(&rec, view).map_err(|e| CliError::Failed(format!("stored record does not replay: {e}")))?;
            rec
        }
        None => run_or_write_partial(cfg, &problem)?,
    };
    let theorem = cfg.theorem.unwrap_or_else(|| TheoremId::default_for(rec.algorithm));
    let method = cfg.optimum.unwrap_or_else(|| default_optimum(&problem));
    let composite;
    let view = match &problem {
        BuiltProblem::Smooth(f) => Problem::Smooth(f),
        BuiltProblem::Nonsmooth(g) => Problem::Nonsmooth(g),
        BuiltProblem::Lasso(p) => {
            composite = p.composite().clone();
            Problem::Composite(&composite)
        }
    };
    let reference = estimate_optimum(view, method)?;
    let opts = VerifyOptions {
        tol: cfg.tol()?,
        force: cfg.force,
    };
    let report = verify_run(&rec, &reference, theorem, opts)?;
    emit_certificate(&report, cfg)?;
    Ok(report.passed)
}

fn sum_rule_cases(f1_grad: impl Fn(&Vector) -> Vector, lambda: f64, dim: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut rng = Rng::new(seed);
    let mut cases = Vec::new();
    for i in 0..SUM_RULE_POINTS {
        let mut x = rng.in_ball(dim, 2.0).into_inner();
        x[i % dim] = 0.0;
        let x = Vector::new(x).expect("finite");
        let g = f1_grad(&x).add(&x.map(|xi| lambda * sign(xi)));
        cases.push((x.clone(), g.clone()));
        cases.push((x.clone(), g.add(&rng.unit_vector(dim).scale(0.5))));
        cases.push((x.clone(), g.add(&Vector::basis(dim, i % dim).scale(2.0 * lambda))));
    }
    cases
}

pub fn cmd_props(cfg: &RunConfig) -> Result<bool, CliError> {
    let property = cfg.property.ok_or_else(|| CliError::Config("missing `property`".into()))?;
    let problem = cfg.build_problem()?;
    let seed = cfg.seed();
    let n = cfg.samples()?;
    let tol = cfg.tol.map(|_| cfg.tol()).transpose()?;
    let sampler = Sampler::ball(seed);
    let smooth = || match &problem {
        BuiltProblem::Smooth(f) => Ok(f.clone()),
        BuiltProblem::Lasso(p) => Ok(p.composite().smooth().clone()),
        BuiltProblem::Nonsmooth(_) => Err(CliError::Config(format!("{property:?} needs a smooth problem"))),
    };
    let tol_or_default = tol.unwrap_or(convex_analysis::DEFAULT_TOL);
    let report = match property {
        Property::GradientLimit => {
            let f = smooth()?;
            let x = cfg.start(f.dim())?;
            check_gradient_limit(&f, &x, &GRADIENT_LIMIT_RADII, tol.unwrap_or(GRADIENT_LIMIT_TOL), seed)?
        }
        Property::FirstOrderCondition => check_first_order_condition(&smooth()?, &sampler, n, tol_or_default)?,
        Property::GradientMonotone => check_gradient_monotone(&smooth()?, &sampler, n, tol_or_default)?,
        Property::StrongConvexity => {
            let f = smooth()?;
            let m = cfg.strong_convexity.unwrap_or(f.strong_convexity());
            check_strong_convexity(&f, m, &sampler, n, tol_or_default)?
        }
        Property::SmoothUpperBound => {
            let f = smooth()?;
            let l = cfg.lipschitz.unwrap_or(f.lipschitz());
            check_smooth_upper_bound(&f, l, &sampler, n, tol_or_default)?
        }
        Property::Cocoercivity => {
            let f = smooth()?;
            let l = cfg.lipschitz.unwrap_or(f.lipschitz());
            check_cocoercivity(&f, l, &sampler, n, tol_or_default)?
        }
        Property::StrongAndSmooth => {
            let f = smooth()?;
            let m = cfg.strong_convexity.unwrap_or(f.strong_convexity());
            let l = cfg.lipschitz.unwrap_or(f.lipschitz());
            check_strong_and_smooth(&f, m, l, &sampler, n, tol_or_default)?
        }
        Property::MoreauRockafellar => {
            let BuiltProblem::Lasso(p) = &problem else {
                return Err(CliError::Config("the sum rule check needs a lasso problem".into()));
            };
            let f1 = make_least_squares(p.a(), p.b())?;
            let f2 = make_scaled_l1(p.lambda(), p.dim())?;
            let cases = sum_rule_cases(|x| f1.gradient(x), p.lambda(), p.dim(), seed);
            check_moreau_rockafellar(&f1, &f2, &cases, tol_or_default, seed)?
        }
        Property::SubderivSingleton => {
            let g = match &problem {
                BuiltProblem::Nonsmooth(g) => g.clone(),
                BuiltProblem::Lasso(p) => p.composite().nonsmooth().clone(),
                BuiltProblem::Smooth(_) => {
                    return Err(CliError::Config("the singleton check needs a nonsmooth problem".into()))
                }
            };
            let x = cfg.start(g.dim())?;
            check_subderiv_singleton(&g, &x, tol_or_default, seed)
                .map_err(|e| CliError::Config(format!("x0: {e}")))?
        }
    };
    emit_property(&report, cfg)?;
    Ok(report.passed)
}

pub fn cmd_lasso(cfg: &RunConfig) -> Result<bool, CliError> {
    let BuiltProblem::Lasso(p) = cfg.build_problem()? else {
        return Err(CliError::Config("the lasso command needs a lasso problem".into()));
    };
    if let Some(path) = &cfg.export {
        write_json(&p.to_file(), Some(path))?;
    }
    let method = cfg.method.unwrap_or(LassoMethod::ProxGrad);
    let x0 = cfg.start(p.dim())?;
    let rec = solve_lasso(&p, method, &x0, cfg.max_iter()?)?;
    if let Some(path) = &cfg.record_out {
        write_json(&rec, Some(path))?;
    }
    let reference = lasso_reference(&p)?;
    let opts = VerifyOptions {
        tol: cfg.tol()?,
        force: cfg.force,
    };
    let report = verify_run(&rec, &reference, method.theorem(), opts)?;
    emit_certificate(&report, cfg)?;
    Ok(report.passed)
}
