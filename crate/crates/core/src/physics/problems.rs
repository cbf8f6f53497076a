//! Initial conditions and exact solutions of the benchmark problems.

use super::{Euler, PhysicsError};
use std::f64::consts::PI;

pub const GAMMA: f64 = 1.4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    /// `u0 = exp(−25(x² + y²))` for 2D Burgers on `[−1, 1]²`.
    BurgersGaussian,
    /// Isentropic vortex translating diagonally with speed `1/γ` through a
    /// periodic box `[lo, hi]²`.
    IsentropicVortex { lo: f64, hi: f64 },
    /// Stationary contact on `[−1, 1]`, piecewise constant or piecewise smooth.
    StationaryContact { smooth: bool },
    /// Mach 1.1 stationary shock at `x = 0.5` with a vortex at `(0.25, 0.5)`.
    ShockVortex,
    /// `ρ = 1 + 0.5 exp(−10 sin²(πx))`, `u = 0.1`, `p = 10`, periodic on `[lo, hi]`.
    DensityWave { lo: f64, hi: f64 },
    /// Shu–Osher sine–shock interaction on `[−5, 5]`.
    ShuOsher,
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::BurgersGaussian => "burgers-gaussian",
            Problem::IsentropicVortex { .. } => "isentropic-vortex",
            Problem::StationaryContact { smooth: false } => "stationary-contact",
            Problem::StationaryContact { smooth: true } => "stationary-contact-smooth",
            Problem::ShockVortex => "shock-vortex",
            Problem::DensityWave { .. } => "density-wave",
            Problem::ShuOsher => "shu-osher",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::BurgersGaussian | Problem::IsentropicVortex { .. } | Problem::ShockVortex => 2,
            _ => 1,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Problem::BurgersGaussian)
    }

    pub fn num_vars(&self) -> usize {
        if self.is_scalar() {
            1
        } else {
            self.dim() + 2
        }
    }

    pub fn euler(&self) -> Euler {
        Euler::new(self.dim(), GAMMA)
    }

    pub fn has_exact_solution(&self) -> bool {
        matches!(
            self,
            Problem::IsentropicVortex { .. } | Problem::StationaryContact { .. } | Problem::DensityWave { .. }
        )
    }

    /// Conservative state at `x` and `t = 0`.
    pub fn initial(&self, x: [f64; 2]) -> Vec<f64> {
        match *self {
            Problem::BurgersGaussian => vec![(-25.0 * (x[0] * x[0] + x[1] * x[1])).exp()],
            Problem::IsentropicVortex { .. } => self.vortex_state(x[0], x[1]),
            Problem::StationaryContact { smooth } => {
                let inside = x[0].abs() < 0.3;
                let rho = match (smooth, inside) {
                    (false, true) => 1.5,
                    (false, false) => 1.0,
                    (true, true) => 1.0 + 0.5 * ((2.0 * PI * x[0]).sin() + x[0].abs()),
                    (true, false) => 1.0 + 0.5 * (2.0 * PI * x[0]).sin(),
                };
                self.euler().from_primitive(rho, [0.0, 0.0], 1.0)
            }
            Problem::ShockVortex => shock_vortex(self.euler(), x),
            Problem::DensityWave { .. } => self.density_wave_state(x[0]),
            Problem::ShuOsher => {
                let e = self.euler();
                if x[0] < -4.0 {
                    e.from_primitive(3.857143, [2.629369, 0.0], 10.3333)
                } else {
                    e.from_primitive(1.0 + 0.2 * (5.0 * x[0]).sin(), [0.0, 0.0], 1.0)
                }
            }
        }
    }

    /// Exact conservative state at `(x, t)`.
    pub fn exact(&self, x: [f64; 2], t: f64) -> Result<Vec<f64>, PhysicsError> {
        match *self {
            Problem::IsentropicVortex { lo, hi } => {
                let shift = t / GAMMA;
                let xs = periodic_offset(x[0] - shift, lo, hi);
                let ys = periodic_offset(x[1] - shift, lo, hi);
                Ok(self.vortex_state(xs, ys))
            }
            Problem::StationaryContact { .. } => Ok(self.initial(x)),
            Problem::DensityWave { lo, hi } => {
                let xs = lo + (x[0] - 0.1 * t - lo).rem_euclid(hi - lo);
                Ok(self.density_wave_state(xs))
            }
            _ => Err(PhysicsError::NoExactSolution(self.name().to_string())),
        }
    }

    fn vortex_state(&self, x: f64, y: f64) -> Vec<f64> {
        let g = GAMMA;
        let alpha = 5.0 * 0.5f64.exp() / (2.0 * PI * g.sqrt());
        let omega = alpha * (-0.5 * (x * x + y * y)).exp();
        // radial momentum balance of an isentropic vortex with T = p/ρ
        let dt = -(g - 1.0) / (2.0 * g) * omega * omega;
        let rho = (1.0 + dt).powf(1.0 / (g - 1.0));
        let p = rho.powf(g);
        let u1 = 1.0 / g - y * omega;
        let u2 = 1.0 / g + x * omega;
        self.euler().from_primitive(rho, [u1, u2], p)
    }

    fn density_wave_state(&self, x: f64) -> Vec<f64> {
        let s = (PI * x).sin();
        let rho = 1.0 + 0.5 * (-10.0 * s * s).exp();
        self.euler().from_primitive(rho, [0.1, 0.0], 10.0)
    }
}

/// Coordinate relative to the box centre, wrapped to the nearest periodic image.
fn periodic_offset(x: f64, lo: f64, hi: f64) -> f64 {
    let len = hi - lo;
    let c = 0.5 * (lo + hi);
    let d = x - c;
    c + d - len * (d / len).round()
}

fn shock_vortex(e: Euler, x: [f64; 2]) -> Vec<f64> {
    let g = e.gamma;
    let mach: f64 = 1.1;
    let m2 = mach * mach;
    let (rho_l, u_l, p_l) = (1.0, g.sqrt(), 1.0);
    let rho_r = rho_l * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let u_r = u_l * rho_l / rho_r;
    let p_r = p_l * (1.0 + 2.0 * g / (g + 1.0) * (m2 - 1.0));

    let (xc, yc) = (0.25, 0.5);
    let (eps, alpha, rc) = (0.3, 0.204, 0.05);
    let dx = x[0] - xc;
    let dy = x[1] - yc;
    let r = dx.hypot(dy);
    let tau = r / rc;
    let v_theta = eps * tau * (alpha * (1.0 - tau * tau)).exp();
    let (sin_t, cos_t) = if r > 0.0 { (dy / r, dx / r) } else { (0.0, 0.0) };
    let du = v_theta * sin_t;
    let dv = -v_theta * cos_t;
    let dtemp = -(g - 1.0) * eps * eps * (2.0 * alpha * (1.0 - tau * tau)).exp() / (4.0 * alpha * g);
    let t_l = p_l / rho_l;
    let ratio = (t_l + dtemp) / t_l;
    let (rho0, u0, p0) = if x[0] < 0.5 { (rho_l, u_l, p_l) } else { (rho_r, u_r, p_r) };
    e.from_primitive(
        rho0 * ratio.powf(1.0 / (g - 1.0)),
        [u0 + du, dv],
        p0 * ratio.powf(g / (g - 1.0)),
    )
}
