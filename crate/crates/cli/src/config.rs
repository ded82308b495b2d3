//! Run configuration. One TOML file per run; unknown keys are rejected so
//! typos surface with their line numbers.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use extremal_core::eigen::EigenConfig;
use extremal_core::{DomainSpec, ExtremizeOptions, QuadratureSpec, Sign, SolverConfig, TailMode};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub seed: Option<u64>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub eval: Option<EvalSection>,
    pub solve: Option<SolveSection>,
    pub eigen: Option<EigenSection>,
    pub verify: Option<VerifySection>,
    pub profile: Option<ProfileSection>,
}

fn default_s() -> f64 {
    0.75
}

fn default_dim() -> usize {
    2
}

fn default_k() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignName {
    #[default]
    Sup,
    Inf,
}

impl From<SignName> for Sign {
    fn from(s: SignName) -> Sign {
        match s {
            SignName::Sup => Sign::Sup,
            SignName::Inf => Sign::Inf,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Oracle name, or "grid" together with `grid_file`.
    pub field: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub value: f64,
    /// Eigenvalue for `entire_gaussian`.
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub grid_file: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub sign: SignName,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    pub path: Option<AxisPath>,
    pub random: Option<RandomPoints>,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub extremize: ExtremizeSection,
}

fn default_radius() -> f64 {
    1.0
}

fn default_mu() -> f64 {
    1.0
}

/// Points `(1/n) e_axis`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisPath {
    pub axis: usize,
    pub n: Vec<f64>,
}

/// Uniform points in the ball of radius `radius`; needs a seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub tol: f64,
    pub rho: f64,
    pub grading: f64,
    pub cells: usize,
    pub max_cells: usize,
    /// "auto", "analytic" or "truncated".
    pub tail: String,
    pub t_max: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureSpec::<f64>::default();
        QuadratureSection {
            tol: q.tol,
            rho: q.rho,
            grading: q.grading,
            cells: q.cells,
            max_cells: q.max_cells,
            tail: "auto".into(),
            t_max: q.t_max,
        }
    }
}

impl QuadratureSection {
    pub fn spec(&self) -> Result<QuadratureSpec<f64>, CliError> {
        let tail_mode = match self.tail.as_str() {
            "auto" => TailMode::Auto,
            "analytic" => TailMode::Analytic,
            "truncated" => TailMode::Truncated,
            other => return Err(CliError::Config(format!("quadrature.tail: unknown mode {other:?}"))),
        };
        let q = QuadratureSpec {
            rho: self.rho,
            grading: self.grading,
            cells: self.cells,
            tail_mode,
            t_max: self.t_max,
            tol: self.tol,
            max_cells: self.max_cells,
        };
        q.validate().map_err(|e| CliError::Config(format!("quadrature: {e}")))?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremizeSection {
    pub starts: usize,
    pub coarse_samples: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_evals: usize,
}

impl Default for ExtremizeSection {
    fn default() -> Self {
        let o = ExtremizeOptions::default();
        ExtremizeSection {
            starts: o.starts,
            coarse_samples: o.coarse_samples,
            initial_step: o.initial_step,
            min_step: o.min_step,
            max_evals: o.max_evals,
        }
    }
}

impl ExtremizeSection {
    pub fn options(&self, seed: u64) -> ExtremizeOptions {
        ExtremizeOptions {
            starts: self.starts,
            coarse_samples: self.coarse_samples,
            initial_step: self.initial_step,
            min_step: self.min_step,
            max_evals: self.max_evals,
            chart: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum DomainSection {
    Ball { center: Vec<f64>, radius: f64 },
    BallList { centers: Vec<Vec<f64>>, radius: f64 },
    Ellipse { a: f64, b: f64, balls: usize },
}

impl DomainSection {
    pub fn build(&self) -> Result<DomainSpec, CliError> {
        let d = match self {
            DomainSection::Ball { center, radius } => DomainSpec::ball(center.clone(), *radius),
            DomainSection::BallList { centers, radius } => DomainSpec::ball_list(centers.clone(), *radius),
            DomainSection::Ellipse { a, b, balls } => DomainSpec::ellipse(*a, *b, *balls),
        };
        d.map_err(|e| CliError::Config(format!("domain: {e}")))
    }
}

/// Right-hand side `f`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum DataSection {
    Constant { value: f64 },
    /// `-k C_s beta(1-s, s)`, whose solution on the unit ball is the barrier.
    Barrier,
    /// `value + amplitude * cos(frequency . x)`.
    Cosine {
        value: f64,
        amplitude: f64,
        frequency: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub domain: DomainSection,
    pub f: DataSection,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub sign: SignName,
    /// Runs the zero-order outer iteration `I w_(n+1) = f - mu w_n`.
    pub mu: Option<f64>,
    /// Compares against the barrier on the domain's enclosing ball.
    #[serde(default)]
    pub barrier_reference: bool,
    /// Solves with `f -/+ eps` and certifies their order.
    pub comparison_eps: Option<f64>,
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_profile_points() -> usize {
    65
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSection {
    pub domain: DomainSection,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub sign: SignName,
    #[serde(default = "yes")]
    pub eigenfunction: bool,
    #[serde(default)]
    pub settings: EigenSettings,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenSettings {
    pub tol_mu: f64,
    pub cap_factor: f64,
    pub max_doublings: usize,
    pub max_bisections: usize,
    pub max_probe_steps: usize,
    pub max_power_iterations: usize,
    pub solver: SolverConfig,
}

impl Default for EigenSettings {
    fn default() -> Self {
        let e = EigenConfig::default();
        EigenSettings {
            tol_mu: e.tol_mu,
            cap_factor: e.cap_factor,
            max_doublings: e.max_doublings,
            max_bisections: e.max_bisections,
            max_probe_steps: e.max_probe_steps,
            max_power_iterations: e.max_power_iterations,
            solver: e.solver,
        }
    }
}

impl EigenSettings {
    pub fn config(&self) -> EigenConfig {
        EigenConfig {
            solver: self.solver.clone(),
            tol_mu: self.tol_mu,
            cap_factor: self.cap_factor,
            max_doublings: self.max_doublings,
            max_bisections: self.max_bisections,
            max_probe_steps: self.max_probe_steps,
            max_power_iterations: self.max_power_iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub dims: Vec<usize>,
    pub tol_scale: f64,
    pub cs_override: Option<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            dims: vec![1, 2, 3],
            tol_scale: 1.0,
            cs_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub points: usize,
    pub grid_steps: Vec<f64>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            points: 16,
            grid_steps: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
        }
    }
}

impl Config {
    /// Parses without validating; call [`Config::validate`] after applying
    /// command-line overrides.
    pub fn parse(text: &str) -> Result<Config, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version = {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(CliError::Config(format!("s = {} must lie in (0, 1)", self.s)));
        }
        if self.dim == 0 {
            return Err(CliError::Config("dim must be positive".into()));
        }
        if let Some(e) = &self.eval {
            if e.random.is_some() && self.seed.is_none() {
                return Err(CliError::Config("eval.random needs a seed".into()));
            }
            for (i, p) in e.points.iter().enumerate() {
                if p.len() != self.dim {
                    return Err(CliError::Config(format!(
                        "eval.points[{i}] has {} coordinates, dim = {}",
                        p.len(),
                        self.dim
                    )));
                }
            }
            if let Some(p) = &e.path {
                if p.axis >= self.dim {
                    return Err(CliError::Config(format!("eval.path.axis = {} >= dim", p.axis)));
                }
            }
        }
        if let Some(s) = &self.solve {
            s.solver.validate().map_err(|e| CliError::Config(format!("solve.solver: {e}")))?;
            let uniform = s.solver.direction_set == extremal_core::solver::DirectionSet::Uniform;
            if uniform && s.solver.rotation_seed.is_none() && self.seed.is_none() {
                return Err(CliError::Config(
                    "solve.solver.direction_set = \"uniform\" needs a seed".into(),
                ));
            }
        }
        if let Some(e) = &self.eigen {
            e.settings
                .solver
                .validate()
                .map_err(|err| CliError::Config(format!("eigen.settings.solver: {err}")))?;
        }
        Ok(())
    }
}
