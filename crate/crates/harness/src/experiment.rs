//! Building a discretisation from a configuration and running it to the final time.

use crate::config::{ConfigError, ErrorNorm, ExperimentConfig, ViscosityMode};
use ecav_core::dgcore::{DgError, Discretization, SolutionField};
use ecav_core::mesh::{uniform_interval_mesh, uniform_triangle_mesh, BoundaryKind, MeshError, SwitchRule};
use ecav_core::physics::problems::Problem;
use ecav_core::physics::{Burgers, ConservationLaw};
use ecav_core::refelem::{RefElemError, ReferenceElement, Shape};
use ecav_core::semidiscrete::{SemiDiscrete, ViscosityModel};
use ecav_core::shockcap::{IndicatorConfig, ShockCapError};
use ecav_core::timeint::{integrate, integrate_fixed, IntegrationLog, IntegratorConfig, StepRecord, TimeError};
use ecav_core::viscosity::{dissipation_identity, ldg_gradient, projection_ratios};
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    RefElem(#[from] RefElemError),
    #[error(transparent)]
    ShockCap(#[from] ShockCapError),
    #[error(transparent)]
    Dg(#[from] DgError),
    #[error("time integration failed: {0}")]
    Time(#[from] TimeError<DgError>),
}

/// Per-sample diagnostics. `lemma1_residual` is `(lhs − rhs) / max(|lhs|, |rhs|)`
/// of the dissipation identity, zero when both sides vanish.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub t: f64,
    pub max_epsilon: f64,
    pub entropy_rate: f64,
    pub lemma1_residual: f64,
    pub l2_error: Option<f64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct DiagnosticsRecord {
    pub samples: Vec<Sample>,
    /// Largest ε over every stage evaluation, sampled or not.
    pub stage_max_epsilon: f64,
    pub log: IntegrationLog,
    pub wall_seconds: f64,
}

impl DiagnosticsRecord {
    pub fn max_epsilon(&self) -> f64 {
        self.samples.iter().map(|s| s.max_epsilon).fold(self.stage_max_epsilon, f64::max)
    }

    pub fn max_entropy_rate(&self) -> f64 {
        self.samples.iter().map(|s| s.entropy_rate).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.samples.last().and_then(|s| s.l2_error)
    }
}

/// A finished run: the operator, the final state and what was recorded on the way.
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub problem: Problem,
    pub operator: SemiDiscrete,
    pub field: SolutionField,
    /// Time actually reached; below the configured final time after an early stop.
    pub t_final: f64,
    pub record: DiagnosticsRecord,
}

impl RunOutput {
    pub fn disc(&self) -> &Discretization {
        &self.operator.disc
    }

    /// L² error of the final state in the configured norm, when the problem has an exact solution.
    pub fn final_error(&self) -> Option<f64> {
        exact_error(self.disc(), &self.problem, self.config.error_norm(), &self.field, self.t_final)
    }
}

fn exact_error(disc: &Discretization, problem: &Problem, norm: ErrorNorm, field: &SolutionField, t: f64) -> Option<f64> {
    if !problem.has_exact_solution() {
        return None;
    }
    let exact = |x| problem.exact(x, t).expect("problem has an exact solution");
    Some(match norm {
        ErrorNorm::Relative => disc.relative_l2_error(field, exact),
        ErrorNorm::Absolute => disc.l2_error(field, exact),
    })
}

pub fn build_discretization(cfg: &ExperimentConfig) -> Result<Discretization, RunError> {
    cfg.validate()?;
    let problem = cfg.problem();
    let dim = problem.dim();
    let shape = if dim == 1 { Shape::Interval } else { Shape::Triangle };
    let refelem = match cfg.quadrature_degree {
        Some(q) => ReferenceElement::with_quadrature_degree(shape, cfg.degree, q)?,
        None => ReferenceElement::new(shape, cfg.degree, cfg.formulation.into())?,
    };
    let mesh = match problem {
        Problem::BurgersGaussian => {
            uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], cfg.elements[0], cfg.elements[1], [BoundaryKind::Periodic; 2])?
        }
        Problem::IsentropicVortex { lo, hi } => {
            uniform_triangle_mesh([lo, lo], [hi, hi], cfg.elements[0], cfg.elements[1], [BoundaryKind::Periodic; 2])?
        }
        Problem::ShockVortex => uniform_triangle_mesh(
            [0.0, 0.0],
            [2.0, 1.0],
            cfg.elements[0],
            cfg.elements[1],
            [BoundaryKind::Periodic, BoundaryKind::Wall],
        )?,
        Problem::StationaryContact { .. } => uniform_interval_mesh(-1.0, 1.0, cfg.elements[0], BoundaryKind::Periodic)?,
        Problem::DensityWave { lo, hi } => uniform_interval_mesh(lo, hi, cfg.elements[0], BoundaryKind::Periodic)?,
        Problem::ShuOsher => uniform_interval_mesh(-5.0, 5.0, cfg.elements[0], BoundaryKind::Periodic)?,
    };
    let rule = match (cfg.viscosity, dim) {
        (ViscosityMode::EcavBr1, _) => SwitchRule::Br1,
        (_, 1) => SwitchRule::Ldg([1.0, 0.0]),
        _ => SwitchRule::Ldg([2.0, 1.0]),
    };
    let mesh = mesh.with_switches(rule)?;
    let law: Arc<dyn ConservationLaw> = if problem.is_scalar() {
        Arc::new(Burgers::new(dim))
    } else {
        Arc::new(problem.euler())
    };
    Ok(Discretization::new(refelem, mesh, law, cfg.flux.into())?)
}

pub fn viscosity_model(cfg: &ExperimentConfig) -> Result<ViscosityModel, RunError> {
    Ok(match cfg.viscosity {
        ViscosityMode::None => ViscosityModel::None,
        ViscosityMode::EcavLdg | ViscosityMode::EcavBr1 => ViscosityModel::Ecav(cfg.regularization.into()),
        ViscosityMode::Sc => {
            let mut ic = IndicatorConfig::for_degree(cfg.degree)?;
            let sc = cfg.shock_capturing;
            ic.s0 = sc.s0.unwrap_or(ic.s0);
            ic.kappa = sc.kappa.unwrap_or(ic.kappa);
            ic.eps0_scale = sc.eps0_scale.unwrap_or(ic.eps0_scale);
            ic.validate()?;
            ViscosityModel::ShockCapturing(ic)
        }
    })
}

/// Diagnostics of one state; costs about two right-hand-side evaluations.
pub fn sample_state(
    op: &SemiDiscrete,
    problem: &Problem,
    norm: ErrorNorm,
    u: &[f64],
    step: usize,
    t: f64,
) -> Result<Sample, DgError> {
    let disc = &op.disc;
    let mut scratch = vec![0.0; u.len()];
    let report = op.evaluate(u, &mut scratch, true)?;
    let proj = disc.entropy_projection(u)?;
    let lemma1_residual = if report.max_epsilon() > 0.0 {
        let theta = ldg_gradient(disc, &proj.vh, &proj.vh_face);
        let (lhs, rhs) = dissipation_identity(disc, &proj, &report.epsilon, &theta);
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            (lhs - rhs) / scale
        } else {
            0.0
        }
    } else {
        0.0
    };
    let ratios: Vec<f64> = projection_ratios(disc, &proj).into_iter().flatten().collect();
    let r_min = ratios.iter().copied().reduce(f64::min);
    let r_max = ratios.iter().copied().reduce(f64::max);
    let field = SolutionField {
        num_elements: disc.num_elements(),
        num_vars: disc.num_vars(),
        num_basis: disc.num_basis(),
        data: u.to_vec(),
    };
    Ok(Sample {
        step,
        t,
        max_epsilon: report.max_epsilon(),
        entropy_rate: report.entropy_rate.unwrap_or(0.0),
        lemma1_residual,
        l2_error: exact_error(disc, problem, norm, &field, t),
        r_min,
        r_max,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let disc = build_discretization(cfg)?;
    let problem = cfg.problem();
    let model = viscosity_model(cfg)?;
    let operator = SemiDiscrete::new(disc, model);
    let mut field = operator.disc.project(|x| problem.initial(x));
    let start = Instant::now();
    let mut samples = vec![sample_state(&operator, &problem, cfg.error_norm(), &field.data, 0, 0.0)?];
    let stride = cfg.output.stride;
    let t_final = cfg.time.t_final;
    let method = cfg.time.method()?;

    let stage_max = std::cell::Cell::new(0.0f64);
    let rhs = |_t: f64, u: &[f64], out: &mut [f64]| {
        let report = operator.evaluate(u, out, false)?;
        stage_max.set(stage_max.get().max(report.max_epsilon()));
        Ok(())
    };
    let stop_after = cfg.time.stop_after.unwrap_or(usize::MAX);
    let mut accepted = 0;
    let callback = |r: &StepRecord, u: &[f64]| -> Result<(), DgError> {
        accepted += 1;
        if r.step.is_multiple_of(stride) || r.t >= t_final || accepted >= stop_after {
            samples.push(sample_state(&operator, &problem, cfg.error_norm(), u, r.step, r.t)?);
        }
        Ok(())
    };
    let log = match cfg.time.dt {
        Some(dt) => integrate_fixed(rhs, &mut field.data, method, dt, t_final, callback)?,
        None => {
            let mut ic = IntegratorConfig::adaptive(method, t_final, cfg.time.abstol, cfg.time.reltol);
            ic.dt_init = cfg.time.dt_init;
            ic.max_steps = cfg.time.max_steps;
            ic.stop_after = cfg.time.stop_after;
            integrate(rhs, &mut field.data, &ic, callback)?
        }
    };
    // an early stop leaves the state short of the configured final time
    let t_final = log.t_end;
    let record = DiagnosticsRecord {
        samples,
        stage_max_epsilon: stage_max.get(),
        log,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunOutput {
        config: cfg.clone(),
        problem,
        operator,
        field,
        t_final,
        record,
    })
}
