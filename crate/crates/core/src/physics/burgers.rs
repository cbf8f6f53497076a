use super::{lax_friedrichs, ConservationLaw, FluxKind, PhysicsError};

/// Inviscid Burgers equation with `f_m = u²/2` in every direction and square entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Burgers {
    pub dim: usize,
}

impl Burgers {
    pub fn new(dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "Burgers is implemented in 1D and 2D");
        Self { dim }
    }

    fn normal_sum(&self, normal: [f64; 2]) -> f64 {
        normal[..self.dim].iter().sum()
    }

    /// `(u⁺² + u⁻u⁺ + u⁻²)/6 Σ n_m`, entropy conservative for the square entropy.
    pub fn entropy_conservative_flux(&self, ul: f64, ur: f64, normal: [f64; 2]) -> f64 {
        (ur * ur + ul * ur + ul * ul) / 6.0 * self.normal_sum(normal)
    }
}

impl ConservationLaw for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }

    fn num_vars(&self) -> usize {
        1
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn check_admissible(&self, _u: &[f64]) -> Result<(), PhysicsError> {
        Ok(())
    }

    fn flux(&self, u: &[f64], _m: usize, out: &mut [f64]) {
        out[0] = 0.5 * u[0] * u[0];
    }

    fn entropy(&self, u: &[f64]) -> f64 {
        0.5 * u[0] * u[0]
    }

    fn entropy_variables(&self, u: &[f64], v: &mut [f64]) {
        v[0] = u[0];
    }

    fn conservative_from_entropy(&self, v: &[f64], u: &mut [f64]) -> Result<(), PhysicsError> {
        u[0] = v[0];
        Ok(())
    }

    fn entropy_potential(&self, u: &[f64], _m: usize) -> f64 {
        u[0] * u[0] * u[0] / 6.0
    }

    fn dudv(&self, _u: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn max_wave_speed(&self, u: &[f64], normal: [f64; 2]) -> f64 {
        (u[0] * self.normal_sum(normal)).abs()
    }

    fn numerical_flux(
        &self,
        kind: FluxKind,
        ul: &[f64],
        ur: &[f64],
        normal: [f64; 2],
        out: &mut [f64],
    ) -> Result<(), PhysicsError> {
        match kind {
            FluxKind::BurgersEntropyConservative => {
                out[0] = self.entropy_conservative_flux(ul[0], ur[0], normal);
                Ok(())
            }
            FluxKind::LaxFriedrichs => {
                lax_friedrichs(self, ul, ur, normal, out);
                Ok(())
            }
            FluxKind::Hllc => Err(PhysicsError::UnsupportedFlux {
                flux: kind,
                law: "burgers",
            }),
        }
    }

    fn wall_ghost(&self, u: &[f64], _normal: [f64; 2], out: &mut [f64]) {
        out[0] = -u[0];
    }

    fn indicator_variable(&self, u: &[f64]) -> f64 {
        u[0]
    }
}
