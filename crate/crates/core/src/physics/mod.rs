//! Conservation laws, their entropy algebra and interface fluxes.

mod burgers;
mod euler;
pub mod problems;

pub use burgers::Burgers;
pub use euler::Euler;

use std::fmt;
use thiserror::Error;

/// Largest number of conserved variables of any supported law.
pub const MAX_VARS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("inadmissible state: density {density:.6e}, internal energy {internal_energy:.6e}")]
    Inadmissible { density: f64, internal_energy: f64 },
    #[error("{flux} flux is not defined for {law}")]
    UnsupportedFlux { flux: FluxKind, law: &'static str },
    #[error("{0} has no exact solution")]
    NoExactSolution(String),
    #[error("{problem} needs a {expected}-dimensional law, got {got}")]
    DimensionMismatch { problem: String, expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluxKind {
    Hllc,
    LaxFriedrichs,
    BurgersEntropyConservative,
}

impl fmt::Display for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FluxKind::Hllc => "hllc",
            FluxKind::LaxFriedrichs => "lax-friedrichs",
            FluxKind::BurgersEntropyConservative => "burgers-ec",
        })
    }
}

/// Flux and entropy algebra of a system `u_t + Σ_m ∂f_m(u)/∂x_m = 0`.
///
/// States are slices of length [`num_vars`](Self::num_vars); outputs are
/// written into caller-provided slices of the same length.
pub trait ConservationLaw: Send + Sync {
    fn name(&self) -> &'static str;
    fn num_vars(&self) -> usize;
    fn dim(&self) -> usize;

    /// Err when the state is outside the domain of the entropy.
    fn check_admissible(&self, u: &[f64]) -> Result<(), PhysicsError>;

    /// `f_m(u)`.
    fn flux(&self, u: &[f64], m: usize, out: &mut [f64]);

    /// `Σ_m f_m(u) n_m`.
    fn normal_flux(&self, u: &[f64], normal: [f64; 2], out: &mut [f64]) {
        let n = self.num_vars();
        let mut tmp = [0.0; MAX_VARS];
        out[..n].iter_mut().for_each(|o| *o = 0.0);
        for m in 0..self.dim() {
            self.flux(u, m, &mut tmp[..n]);
            for i in 0..n {
                out[i] += normal[m] * tmp[i];
            }
        }
    }

    fn entropy(&self, u: &[f64]) -> f64;
    fn entropy_variables(&self, u: &[f64], v: &mut [f64]);
    /// Inverse of [`entropy_variables`](Self::entropy_variables).
    fn conservative_from_entropy(&self, v: &[f64], u: &mut [f64]) -> Result<(), PhysicsError>;
    /// `ψ_m(u)` with entropy flux `F_m = vᵀ f_m − ψ_m`.
    fn entropy_potential(&self, u: &[f64], m: usize) -> f64;
    /// `∂u/∂v` as a row-major `n × n` matrix.
    fn dudv(&self, u: &[f64], out: &mut [f64]);
    /// Largest characteristic speed in direction `normal` (unit vector).
    fn max_wave_speed(&self, u: &[f64], normal: [f64; 2]) -> f64;

    fn numerical_flux(
        &self,
        kind: FluxKind,
        ul: &[f64],
        ur: &[f64],
        normal: [f64; 2],
        out: &mut [f64],
    ) -> Result<(), PhysicsError>;

    /// Exterior state across a slip wall.
    fn wall_ghost(&self, u: &[f64], normal: [f64; 2], out: &mut [f64]);

    /// Variable used by the shock-capturing smoothness indicator, pointwise.
    fn indicator_variable(&self, u: &[f64]) -> f64;

    /// Entropy flux `F_m = vᵀ f_m − ψ_m`.
    fn entropy_flux(&self, u: &[f64], m: usize) -> f64 {
        let n = self.num_vars();
        let mut v = [0.0; MAX_VARS];
        let mut f = [0.0; MAX_VARS];
        self.entropy_variables(u, &mut v[..n]);
        self.flux(u, m, &mut f[..n]);
        crate::linalg::dot(&v[..n], &f[..n]) - self.entropy_potential(u, m)
    }
}

/// Local Lax–Friedrichs flux shared by every law.
pub(crate) fn lax_friedrichs<L: ConservationLaw + ?Sized>(
    law: &L,
    ul: &[f64],
    ur: &[f64],
    normal: [f64; 2],
    out: &mut [f64],
) {
    let n = law.num_vars();
    let mut fl = [0.0; MAX_VARS];
    let mut fr = [0.0; MAX_VARS];
    law.normal_flux(ul, normal, &mut fl[..n]);
    law.normal_flux(ur, normal, &mut fr[..n]);
    let lambda = law
        .max_wave_speed(ul, normal)
        .max(law.max_wave_speed(ur, normal));
    for i in 0..n {
        out[i] = 0.5 * (fl[i] + fr[i]) - 0.5 * lambda * (ur[i] - ul[i]);
    }
}
