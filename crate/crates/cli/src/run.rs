use serde::Serialize;
use thiserror::Error;

use matkowski::classify::{classify_tuple_on, interior_grid, ClassificationReport, ClassifyError};
use matkowski::families::sampling::random_params_seeded;
use matkowski::families::{build_family_with, BuildOptions, FamilyError, FamilyParams};
use matkowski::means::{
    catalog_generator, compose_generators, eq1_residual, invariance_residual, GeneratorPair, MeanError, COMPOSE_TOL,
};
use matkowski::reduction::{anchors_from, derive_system, reconstruct_tuple, system_residual, tuple_distance, ReductionError};
use matkowski::{Grid, Interval, RealFn, ResidualReport, SolutionTuple};

use crate::config::{parse_input, Command, CommandConfig, Input, TripleSpec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Constraint(String),
    #[error("{0}")]
    Failure(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Failure(_) => 1,
            RunError::Parse(_) => 2,
            RunError::Constraint(_) => 3,
        }
    }
}

impl From<FamilyError> for RunError {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::UnknownTag(_) | FamilyError::Parse(_) | FamilyError::UnknownFreeFn(_) => {
                RunError::Parse(e.to_string())
            }
            FamilyError::ConstraintViolated(_) | FamilyError::UnsafeDomain { .. } => RunError::Constraint(e.to_string()),
            _ => RunError::Failure(e.to_string()),
        }
    }
}

impl From<MeanError> for RunError {
    fn from(e: MeanError) -> Self {
        match e {
            MeanError::InvalidPair(_) | MeanError::DomainMismatch(_) => RunError::Constraint(e.to_string()),
            _ => RunError::Failure(e.to_string()),
        }
    }
}

impl From<ReductionError> for RunError {
    fn from(e: ReductionError) -> Self {
        RunError::Failure(e.to_string())
    }
}

impl From<ClassifyError> for RunError {
    fn from(e: ClassifyError) -> Self {
        RunError::Failure(e.to_string())
    }
}

impl From<matkowski::fncore::FnError> for RunError {
    fn from(e: matkowski::fncore::FnError) -> Self {
        RunError::Failure(e.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    pub label: Option<String>,
    pub params: Option<FamilyParams>,
    pub interval: Interval,
    pub sum_domain: Interval,
    pub notes: Vec<String>,
    pub self_check: ResidualReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReduceReport {
    pub plus: ResidualReport,
    pub minus: ResidualReport,
    /// Sup member distance between the input and the tuple rebuilt from
    /// its derivative system, on an interior grid.
    pub round_trip_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub invariance: ResidualReport,
    pub composed: ResidualReport,
    pub plus: ResidualReport,
    pub minus: ResidualReport,
    pub classification: Result<ClassificationReport, String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Build(BuildReport),
    Residual(ResidualReport),
    Reduce(ReduceReport),
    Classify(ClassificationReport),
    Demo(Box<DemoReport>),
}

impl Report {
    /// Residuals that decide the exit status.
    pub fn gated(&self) -> Vec<&ResidualReport> {
        match self {
            Report::Build(b) => vec![&b.self_check],
            Report::Residual(r) => vec![r],
            Report::Reduce(r) => vec![&r.plus, &r.minus],
            Report::Classify(c) => c.residuals.iter().take(1).collect(),
            Report::Demo(d) => vec![&d.invariance, &d.composed],
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.gated().iter().all(|r| r.passes(tol))
    }

    /// `(x, y, residual)` rows for CSV output.
    pub fn grid_rows(&self) -> Vec<(f64, f64, f64)> {
        match self {
            Report::Reduce(r) => r
                .plus
                .points
                .iter()
                .zip(&r.minus.points)
                .map(|(p, m)| (p.0, p.1, if p.2.abs() >= m.2.abs() { p.2 } else { m.2 }))
                .collect(),
            _ => self.gated().first().map(|r| r.points.clone()).unwrap_or_default(),
        }
    }
}

fn pair(names: &[String; 2], domain: Interval) -> Result<GeneratorPair, RunError> {
    let get = |n: &str| {
        catalog_generator(n)
            .map(|e| RealFn::from_expr(domain, e))
            .ok_or_else(|| RunError::Parse(format!("unknown generator {n:?}")))
    };
    Ok(GeneratorPair::new(get(&names[0])?, get(&names[1])?, domain)?)
}

fn triple(spec: &TripleSpec) -> Result<[GeneratorPair; 3], RunError> {
    Ok([pair(&spec.m, spec.domain)?, pair(&spec.n, spec.domain)?, pair(&spec.k, spec.domain)?])
}

fn load_input(cfg: &CommandConfig) -> Result<Option<Input>, RunError> {
    match &cfg.input_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Parse(format!("{}: {e}", path.display())))?;
            parse_input(&text).map(Some).map_err(RunError::Parse)
        }
        None => Ok(cfg.tag.map(|t| Input::Family(random_params_seeded(t, cfg.seed)))),
    }
}

fn tuple_of(input: &Input, cfg: &CommandConfig) -> Result<SolutionTuple, RunError> {
    match input {
        Input::Family(p) => {
            let opts = BuildOptions { self_check: false, grid_n: cfg.grid_n as usize, ..Default::default() };
            Ok(build_family_with(p, cfg.tol, &opts)?)
        }
        Input::Triple(s) => {
            let [m, n, k] = triple(s)?;
            Ok(compose_generators(&m, &n, &k, COMPOSE_TOL)?)
        }
    }
}

fn residual_on(t: &SolutionTuple, n: usize) -> Result<ResidualReport, RunError> {
    Ok(eq1_residual(t, &Grid::chebyshev(t.i, n)?)?)
}

fn system_on(t: &SolutionTuple, n: usize) -> Result<(ResidualReport, ResidualReport), RunError> {
    let s = derive_system(t)?;
    Ok(system_residual(&s, &Grid::chebyshev(t.i, n)?)?)
}

fn shrink(t: &SolutionTuple, frac: f64) -> Result<SolutionTuple, RunError> {
    let w = t.i.width();
    let i = Interval::new(t.i.lo() + frac * w, t.i.hi() - frac * w)?;
    Ok(SolutionTuple { i, ..t.clone() })
}

/// Execute one command and return its report.
pub fn run_command(cfg: &CommandConfig) -> Result<Report, RunError> {
    if !(cfg.tol > 0.0) {
        return Err(RunError::Parse(format!("tol must be positive, got {}", cfg.tol)));
    }
    let n = cfg.grid_n as usize;
    let input = load_input(cfg)?;
    let need = || input.clone().ok_or_else(|| RunError::Parse("--input or --tag is required".into()));
    match cfg.command {
        Command::Build => {
            let input = need()?;
            let t = tuple_of(&input, cfg)?;
            let params = match input {
                Input::Family(p) => Some(FamilyParams { interval: t.i, ..p }),
                Input::Triple(_) => None,
            };
            Ok(Report::Build(BuildReport {
                label: t.meta.label.clone(),
                params,
                interval: t.i,
                sum_domain: t.sum_domain,
                notes: t.meta.notes.clone(),
                self_check: residual_on(&t, n)?,
            }))
        }
        Command::Verify => Ok(Report::Residual(residual_on(&tuple_of(&need()?, cfg)?, n)?)),
        Command::Invariance => {
            let spec = match input {
                Some(Input::Triple(s)) => s,
                Some(Input::Family(_)) => return Err(RunError::Parse("invariance needs a generator triple".into())),
                None => TripleSpec::classical(),
            };
            let [m, nn, k] = triple(&spec)?;
            Ok(Report::Residual(invariance_residual(&m, &nn, &k, &Grid::uniform(spec.domain, n)?)?))
        }
        Command::Reduce => {
            let t = tuple_of(&need()?, cfg)?;
            let s = derive_system(&t)?;
            let (plus, minus) = system_residual(&s, &Grid::chebyshev(t.i, n)?)?;
            let r = reconstruct_tuple(&s, &anchors_from(&t, t.i.midpoint()))?;
            let round_trip_error = tuple_distance(&t, &r, &interior_grid(t.i, n, 0.1)?);
            Ok(Report::Reduce(ReduceReport { plus, minus, round_trip_error }))
        }
        Command::Classify => Ok(Report::Classify(classify_tuple_on(&tuple_of(&need()?, cfg)?, n)?)),
        Command::Demo => {
            let spec = TripleSpec::classical();
            let [m, nn, k] = triple(&spec)?;
            let invariance = invariance_residual(&m, &nn, &k, &Grid::uniform(spec.domain, n)?)?;
            let t = compose_generators(&m, &nn, &k, COMPOSE_TOL)?;
            let composed = residual_on(&t, n)?;
            // finite-difference stencils need room at the ends
            let inner = shrink(&t, 0.1)?;
            let (plus, minus) = system_on(&inner, n)?;
            let classification = classify_tuple_on(&inner, n.min(40)).map_err(|e| e.to_string());
            Ok(Report::Demo(Box::new(DemoReport { invariance, composed, plus, minus, classification })))
        }
    }
}
