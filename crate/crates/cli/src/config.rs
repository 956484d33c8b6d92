//! Strict JSON configuration: unknown keys are rejected, numbers are range
//! checked, and command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use firstorder::algorithms::Algorithm;
use firstorder::certificates::{OptimumMethod, TheoremId};
use firstorder::lasso::{generate_lasso, LassoMethod, LassoProblem};
use firstorder::objectives::{
    make_abs_1d, make_least_squares, make_norm_sq, make_scaled_l1, make_zero, CompositeProblem, NonsmoothFn, SmoothFn,
};
use firstorder::{Matrix, Rng, Vector};

use crate::error::CliError;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 500;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub algorithm: Option<Algorithm>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub x0: StartSpec,
    #[serde(default)]
    pub step: Option<StepSpec>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    /// certify: which rate to check (defaults to the algorithm's).
    #[serde(default)]
    pub theorem: Option<TheoremId>,
    /// certify: how to obtain the reference optimum.
    #[serde(default)]
    pub optimum: Option<OptimumMethod>,
    /// certify: a stored JSON run record to replay and check instead of
    /// running inline.
    #[serde(default)]
    pub record: Option<PathBuf>,
    /// certify: evaluate the bound even when its hypotheses fail.
    #[serde(default)]
    pub force: bool,
    /// props: which property to test.
    #[serde(default)]
    pub property: Option<Property>,
    #[serde(default)]
    pub samples: Option<usize>,
    /// props: claimed strong convexity modulus.
    #[serde(default)]
    pub strong_convexity: Option<f64>,
    /// props: claimed Lipschitz constant of the gradient.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    /// lasso: solver.
    #[serde(default)]
    pub method: Option<LassoMethod>,
    /// lasso: where to write the problem instance as JSON.
    #[serde(default)]
    pub export: Option<PathBuf>,
    /// lasso: where to write the run record as JSON.
    #[serde(default)]
    pub record_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `(c/2)‖x‖²`
    NormSq {
        dim: usize,
        #[serde(default = "one")]
        c: f64,
    },
    /// `−½‖x‖²`, a concave control for the property checks.
    NegNormSq { dim: usize },
    /// `½‖Ax − b‖²`
    LeastSquares { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// `λ‖x‖₁`
    ScaledL1 { dim: usize, lambda: f64 },
    /// `|x|` on R¹
    Abs,
    /// `½‖Ax − b‖² + λ‖x‖₁`
    Lasso { a: Vec<Vec<f64>>, b: Vec<f64>, lambda: f64 },
    /// Seeded random LASSO instance.
    LassoRandom {
        m: usize,
        n: usize,
        sparsity: usize,
        #[serde(default)]
        lambda: Option<f64>,
    },
    /// LASSO instance stored as JSON.
    LassoFile { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Keyword(StartKeyword),
    Literal(Vec<f64>),
    Random(RandomStart),
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Keyword(StartKeyword::Zeros)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKeyword {
    Zeros,
}

/// Uniform point in the ball of the given radius, drawn from the config seed.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStart {
    pub random_radius: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSpec {
    /// `1/L`
    Auto,
    Fixed(f64),
    /// `a/√(k+1)`
    Diminishing(f64),
    /// `c/L`
    Scaled(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    GradientLimit,
    FirstOrderCondition,
    GradientMonotone,
    StrongConvexity,
    SmoothUpperBound,
    Cocoercivity,
    StrongAndSmooth,
    MoreauRockafellar,
    SubderivSingleton,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(what: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("{what} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ProblemSpec::LassoFile { path } = &mut self.problem {
            fix(path);
        }
        for p in [&mut self.record, &mut self.export, &mut self.record_out].into_iter().flatten() {
            fix(p);
        }
        if let Some(OutputSpec { path: Some(p), .. }) = &mut self.output {
            fix(p);
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(k) = o.max_iter {
            self.max_iter = Some(k);
        }
        if let Some(tol) = o.tol {
            self.tol = Some(tol);
        }
        if o.out.is_some() || o.format.is_some() {
            let out = self.output.get_or_insert(OutputSpec { path: None, format: None });
            if let Some(p) = &o.out {
                out.path = Some(p.clone());
            }
            if let Some(f) = o.format {
                out.format = Some(f);
            }
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn max_iter(&self) -> Result<usize, CliError> {
        match self.max_iter.unwrap_or(DEFAULT_MAX_ITER) {
            0 => Err(bad("max_iter must be at least 1")),
            k => Ok(k),
        }
    }

    pub fn tol(&self) -> Result<f64, CliError> {
        positive("tol", self.tol.unwrap_or(DEFAULT_TOL))
    }

    pub fn samples(&self) -> Result<usize, CliError> {
        match self.samples.unwrap_or(DEFAULT_SAMPLES) {
            0 => Err(bad("samples must be at least 1")),
            n => Ok(n),
        }
    }

    pub fn output_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    pub fn format(&self, default: Format) -> Format {
        self.output.as_ref().and_then(|o| o.format).unwrap_or(default)
    }

    pub fn algorithm(&self) -> Result<Algorithm, CliError> {
        self.algorithm.ok_or_else(|| bad("missing `algorithm`"))
    }

    pub fn start(&self, dim: usize) -> Result<Vector, CliError> {
        match &self.x0 {
            StartSpec::Keyword(StartKeyword::Zeros) => Ok(Vector::zeros(dim)),
            StartSpec::Literal(v) => {
                if v.len() != dim {
                    return Err(bad(format!("x0 has {} entries, problem dimension is {dim}", v.len())));
                }
                Vector::new(v.clone()).map_err(|e| bad(format!("x0: {e}")))
            }
            StartSpec::Random(r) => {
                let radius = positive("x0.random_radius", r.random_radius)?;
                // offset so the start point is independent of the problem generator's stream
                Ok(Rng::new(self.seed() ^ 0x5_7a27).in_ball(dim, radius))
            }
        }
    }

    /// The step size (or schedule) for `algorithm` on a problem whose smooth
    /// part has Lipschitz constant `lipschitz`.
    pub fn step(&self, algorithm: Algorithm, lipschitz: Option<f64>) -> Result<StepChoice, CliError> {
        let need_l = || lipschitz.ok_or_else(|| bad("step relative to L needs a smooth objective"));
        let spec = self.step.unwrap_or(match algorithm {
            Algorithm::Subgradient => StepSpec::Diminishing(1.0),
            _ => StepSpec::Auto,
        });
        let choice = match spec {
            StepSpec::Auto => StepChoice::Fixed(1.0 / need_l()?),
            StepSpec::Fixed(a) => StepChoice::Fixed(positive("step.fixed", a)?),
            StepSpec::Scaled(c) => StepChoice::Fixed(positive("step.scaled", c)? / need_l()?),
            StepSpec::Diminishing(a) => StepChoice::Diminishing(positive("step.diminishing", a)?),
        };
        match (algorithm, choice) {
            (Algorithm::Subgradient, _) => Ok(choice),
            (_, StepChoice::Diminishing(_)) => Err(bad(format!("{algorithm} needs a fixed step"))),
            (Algorithm::NesterovFirst | Algorithm::NesterovSecond, _) if !matches!(spec, StepSpec::Auto) => {
                Err(bad(format!("{algorithm} always uses t = 1/L; set step to \"auto\" or omit it")))
            }
            _ => Ok(choice),
        }
    }

    pub fn build_problem(&self) -> Result<BuiltProblem, CliError> {
        let lib = |e: firstorder::Error| bad(format!("problem: {e}"));
        let matrix = |rows: &Vec<Vec<f64>>| Matrix::from_rows(rows.clone()).map_err(lib);
        let vector = |v: &Vec<f64>| Vector::new(v.clone()).map_err(lib);
        Ok(match &self.problem {
            ProblemSpec::NormSq { dim, c } => BuiltProblem::Smooth(make_norm_sq(*c, nonzero(*dim)?).map_err(lib)?),
            ProblemSpec::NegNormSq { dim } => {
                let f = SmoothFn::custom(
                    "neg_norm_sq",
                    nonzero(*dim)?,
                    1.0,
                    0.0,
                    |x| -0.5 * x.norm2_sq(),
                    |x| x.scale(-1.0),
                )
                .map_err(lib)?;
                BuiltProblem::Smooth(f)
            }
            ProblemSpec::LeastSquares { a, b } => {
                BuiltProblem::Smooth(make_least_squares(&matrix(a)?, &vector(b)?).map_err(lib)?)
            }
            ProblemSpec::ScaledL1 { dim, lambda } => {
                BuiltProblem::Nonsmooth(make_scaled_l1(*lambda, nonzero(*dim)?).map_err(lib)?)
            }
            ProblemSpec::Abs => BuiltProblem::Nonsmooth(make_abs_1d()),
            ProblemSpec::Lasso { a, b, lambda } => {
                BuiltProblem::Lasso(LassoProblem::new(matrix(a)?, vector(b)?, *lambda).map_err(lib)?)
            }
            ProblemSpec::LassoRandom { m, n, sparsity, lambda } => {
                BuiltProblem::Lasso(generate_lasso(*m, *n, *sparsity, *lambda, self.seed()).map_err(lib)?)
            }
            ProblemSpec::LassoFile { path } => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
                BuiltProblem::Lasso(LassoProblem::from_json(&text).map_err(lib)?)
            }
        })
    }
}

fn nonzero(dim: usize) -> Result<usize, CliError> {
    if dim == 0 {
        Err(bad("dim must be at least 1"))
    } else {
        Ok(dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChoice {
    Fixed(f64),
    Diminishing(f64),
}

#[allow(clippy::large_enum_variant)]
pub enum BuiltProblem {
    Smooth(SmoothFn),
    Nonsmooth(NonsmoothFn),
    Lasso(LassoProblem),
}

impl BuiltProblem {
    pub fn dim(&self) -> usize {
        match self {
            BuiltProblem::Smooth(f) => f.dim(),
            BuiltProblem::Nonsmooth(g) => g.dim(),
            BuiltProblem::Lasso(p) => p.dim(),
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            BuiltProblem::Smooth(f) => Some(f.lipschitz()),
            BuiltProblem::Nonsmooth(_) => None,
            BuiltProblem::Lasso(p) => Some(p.lipschitz()),
        }
    }

    /// Composite view: smooth objectives get a zero nonsmooth part.
    pub fn composite(&self) -> Result<CompositeProblem, CliError> {
        match self {
            BuiltProblem::Smooth(f) => {
                let zero = make_zero(f.dim()).map_err(CliError::Lib)?;
                CompositeProblem::new(f.clone(), zero).map_err(CliError::Lib)
            }
            BuiltProblem::Lasso(p) => Ok(p.composite().clone()),
            BuiltProblem::Nonsmooth(_) => Err(bad("this algorithm needs a smooth or composite problem")),
        }
    }
}
