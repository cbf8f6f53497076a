//! The full semi-discrete operator: inviscid DG residual plus an optional
//! element-constant artificial viscosity.

use crate::dgcore::{DgError, Discretization, EntropyProjection};
use crate::refelem::Formulation;
use crate::shockcap::{ramp_viscosity, smoothness_indicator, IndicatorConfig};
use crate::viscosity::{
    add_viscous_rhs, dissipation_denominator, ecav_coefficients, ldg_gradient, viscous_flux,
    Regularization, ViscosityError,
};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ViscosityModel {
    None,
    /// Entropy correction artificial viscosity.
    Ecav(Regularization),
    /// Smoothness-indicator viscosity with the sine ramp.
    ShockCapturing(IndicatorConfig),
}

/// Per-evaluation quantities the harness records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RhsReport {
    pub epsilon: Vec<f64>,
    /// Volume entropy residuals; empty unless the model is ECAV.
    pub delta: Vec<f64>,
    /// `Σ_k (du/dt, Π_N v)_{D^k}`, only when requested.
    pub entropy_rate: Option<f64>,
}

impl RhsReport {
    pub fn max_epsilon(&self) -> f64 {
        self.epsilon.iter().copied().fold(0.0, f64::max)
    }
}

pub struct SemiDiscrete {
    pub disc: Discretization,
    pub model: ViscosityModel,
}

impl SemiDiscrete {
    pub fn new(disc: Discretization, model: ViscosityModel) -> Self {
        Self { disc, model }
    }

    /// `du/dt` into `out`.
    pub fn rhs(&self, u: &[f64], out: &mut [f64]) -> Result<(), DgError> {
        self.evaluate(u, out, false).map(|_| ())
    }

    /// `du/dt` into `out`, with the viscosity coefficients and optionally the entropy rate.
    pub fn evaluate(&self, u: &[f64], out: &mut [f64], with_rate: bool) -> Result<RhsReport, DgError> {
        let disc = &self.disc;
        let proj = disc.entropy_projection(u)?;
        disc.inviscid_rhs(&proj, out)?;
        let mut report = RhsReport::default();
        match self.model {
            ViscosityModel::None => {
                report.epsilon = vec![0.0; disc.num_elements()];
            }
            ViscosityModel::Ecav(reg) => {
                let delta = disc.volume_entropy_residual(&proj);
                let theta = ldg_gradient(disc, &proj.vh, &proj.vh_face);
                let b = dissipation_denominator(disc, &proj, &theta);
                let coeffs = ecav_coefficients(&delta, b, reg).map_err(|e| match e {
                    ViscosityError::NonFinite { element } => DgError::NonFinite { element },
                })?;
                self.add_viscosity(&proj, &coeffs.epsilon, &theta, out);
                report.epsilon = coeffs.epsilon;
                report.delta = delta;
            }
            ViscosityModel::ShockCapturing(cfg) => {
                let eps = self.shock_capturing_epsilon(u, &cfg);
                let theta = ldg_gradient(disc, &proj.vh, &proj.vh_face);
                self.add_viscosity(&proj, &eps, &theta, out);
                report.epsilon = eps;
            }
        }
        if with_rate {
            report.entropy_rate = Some(disc.entropy_rate(out, &proj));
        }
        Ok(report)
    }

    fn add_viscosity(
        &self,
        proj: &EntropyProjection,
        eps: &[f64],
        theta: &crate::viscosity::GradientField,
        out: &mut [f64],
    ) {
        let active: Vec<bool> = eps.iter().map(|&e| e != 0.0).collect();
        if !active.iter().any(|&a| a) {
            return;
        }
        let sigma = viscous_flux(&self.disc, proj, eps, theta);
        add_viscous_rhs(&self.disc, &sigma, &active, out);
    }

    /// Ramp viscosity from the smoothness of the indicator variable on each element.
    pub fn shock_capturing_epsilon(&self, u: &[f64], cfg: &IndicatorConfig) -> Vec<f64> {
        let disc = &self.disc;
        let re = &disc.refelem;
        let nv = disc.num_vars();
        let nb = disc.num_basis();
        let nq = re.num_volume_points();
        let degrees: Vec<usize> = match re.formulation {
            Formulation::Modal => re.mode_degree.clone(),
            Formulation::Nodal => (0..nb).collect(),
        };
        (0..disc.num_elements())
            .into_par_iter()
            .map(|k| {
                let uq = disc.volume_values(&u[k * nv * nb..(k + 1) * nv * nb]);
                let ind: Vec<f64> = (0..nq)
                    .map(|q| disc.law.indicator_variable(&uq[q * nv..(q + 1) * nv]))
                    .collect();
                let coeffs = re.pq.mul_vec(&ind);
                let modes = re.to_orthonormal_modes(&coeffs);
                let s = smoothness_indicator(&modes, &degrees);
                let h = disc.mesh.elements[k].h;
                ramp_viscosity(s, cfg, cfg.eps0_scale * h)
            })
            .collect()
    }
}
