use super::{lax_friedrichs, ConservationLaw, FluxKind, PhysicsError, MAX_VARS};

/// Compressible Euler equations of an ideal gas, `u = (ρ, ρu_1, …, ρu_d, E)`.
///
/// The entropy is `S = −ρ s` with `s = ln(p / ρ^γ)`. With this scaling the
/// entropy variables are
/// `v = (γ − s − ρ|u|²/(2ρe), ρu_m/(ρe), −ρ/(ρe))`, the potentials are
/// `ψ_m = (γ − 1) ρ u_m` and `∂u/∂v` is the classical symmetrizer divided by `γ − 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Euler {
    pub dim: usize,
    pub gamma: f64,
}

/// Density, velocity and pressure of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub vel: [f64; 2],
    pub p: f64,
}

impl Euler {
    pub fn new(dim: usize, gamma: f64) -> Self {
        assert!(dim == 1 || dim == 2, "Euler is implemented in 1D and 2D");
        assert!(gamma > 1.0);
        Self { dim, gamma }
    }

    fn energy_index(&self) -> usize {
        self.dim + 1
    }

    pub fn primitive(&self, u: &[f64]) -> Primitive {
        let rho = u[0];
        let mut vel = [0.0; 2];
        let mut ke = 0.0;
        for m in 0..self.dim {
            vel[m] = u[1 + m] / rho;
            ke += u[1 + m] * vel[m];
        }
        let p = (self.gamma - 1.0) * (u[self.energy_index()] - 0.5 * ke);
        Primitive { rho, vel, p }
    }

    pub fn conservative(&self, w: Primitive, u: &mut [f64]) {
        u[0] = w.rho;
        let mut ke = 0.0;
        for m in 0..self.dim {
            u[1 + m] = w.rho * w.vel[m];
            ke += w.rho * w.vel[m] * w.vel[m];
        }
        u[self.energy_index()] = w.p / (self.gamma - 1.0) + 0.5 * ke;
    }

    pub fn from_primitive(&self, rho: f64, vel: [f64; 2], p: f64) -> Vec<f64> {
        let mut u = vec![0.0; self.dim + 2];
        self.conservative(Primitive { rho, vel, p }, &mut u);
        u
    }

    pub fn pressure(&self, u: &[f64]) -> f64 {
        self.primitive(u).p
    }

    pub fn sound_speed(&self, u: &[f64]) -> f64 {
        let w = self.primitive(u);
        (self.gamma * w.p / w.rho).sqrt()
    }

    /// Physical entropy `s = ln(p / ρ^γ)`.
    pub fn physical_entropy(&self, u: &[f64]) -> f64 {
        let w = self.primitive(u);
        w.p.ln() - self.gamma * w.rho.ln()
    }

    fn normal_velocity(&self, w: &Primitive, n: [f64; 2]) -> f64 {
        (0..self.dim).map(|m| w.vel[m] * n[m]).sum()
    }

    /// Batten's signal speeds `(S_L, S_M, S_R)` for the HLLC flux: Roe-averaged
    /// bounds on the outer waves and the matching contact speed.
    pub fn hllc_wave_speeds(&self, ul: &[f64], ur: &[f64], n: [f64; 2]) -> (f64, f64, f64) {
        let g = self.gamma;
        let e = self.energy_index();
        let wl = self.primitive(ul);
        let wr = self.primitive(ur);
        let unl = self.normal_velocity(&wl, n);
        let unr = self.normal_velocity(&wr, n);
        let al = (g * wl.p / wl.rho).sqrt();
        let ar = (g * wr.p / wr.rho).sqrt();

        let sl_w = wl.rho.sqrt();
        let sr_w = wr.rho.sqrt();
        let inv = 1.0 / (sl_w + sr_w);
        let hl = (ul[e] + wl.p) / wl.rho;
        let hr = (ur[e] + wr.p) / wr.rho;
        let mut q2 = 0.0;
        let mut un_roe = 0.0;
        for m in 0..self.dim {
            let vm = (sl_w * wl.vel[m] + sr_w * wr.vel[m]) * inv;
            q2 += vm * vm;
            un_roe += vm * n[m];
        }
        let h_roe = (sl_w * hl + sr_w * hr) * inv;
        let a_roe = ((g - 1.0) * (h_roe - 0.5 * q2)).max(0.0).sqrt();

        let s_l = (unl - al).min(un_roe - a_roe);
        let s_r = (unr + ar).max(un_roe + a_roe);
        let s_m = (wr.p - wl.p + wl.rho * unl * (s_l - unl) - wr.rho * unr * (s_r - unr))
            / (wl.rho * (s_l - unl) - wr.rho * (s_r - unr));
        (s_l, s_m, s_r)
    }

    /// HLLC flux with Batten's signal speeds.
    pub fn hllc(&self, ul: &[f64], ur: &[f64], n: [f64; 2], out: &mut [f64]) -> Result<(), PhysicsError> {
        self.check_admissible(ul)?;
        self.check_admissible(ur)?;
        let nv = self.dim + 2;
        let e = self.energy_index();
        let wl = self.primitive(ul);
        let wr = self.primitive(ur);
        let unl = self.normal_velocity(&wl, n);
        let unr = self.normal_velocity(&wr, n);
        let (s_l, s_m, s_r) = self.hllc_wave_speeds(ul, ur, n);

        if s_l >= 0.0 {
            self.normal_flux(ul, n, out);
            return Ok(());
        }
        if s_r <= 0.0 {
            self.normal_flux(ur, n, out);
            return Ok(());
        }
        let (u, w, un, s) = if s_m >= 0.0 {
            (ul, wl, unl, s_l)
        } else {
            (ur, wr, unr, s_r)
        };
        self.normal_flux(u, n, out);
        let factor = w.rho * (s - un) / (s - s_m);
        let mut star = [0.0; MAX_VARS];
        star[0] = factor;
        for m in 0..self.dim {
            star[1 + m] = factor * (w.vel[m] + (s_m - un) * n[m]);
        }
        star[e] = factor * (u[e] / w.rho + (s_m - un) * (s_m + w.p / (w.rho * (s - un))));
        for i in 0..nv {
            out[i] += s * (star[i] - u[i]);
        }
        Ok(())
    }
}

impl ConservationLaw for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }

    fn num_vars(&self) -> usize {
        self.dim + 2
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn check_admissible(&self, u: &[f64]) -> Result<(), PhysicsError> {
        let w = self.primitive(u);
        let rho_e = w.p / (self.gamma - 1.0);
        if w.rho > 0.0 && rho_e > 0.0 && w.rho.is_finite() && rho_e.is_finite() {
            Ok(())
        } else {
            Err(PhysicsError::Inadmissible {
                density: w.rho,
                internal_energy: rho_e,
            })
        }
    }

    fn flux(&self, u: &[f64], m: usize, out: &mut [f64]) {
        let w = self.primitive(u);
        let um = w.vel[m];
        let e = self.energy_index();
        out[0] = u[1 + m];
        for j in 0..self.dim {
            out[1 + j] = u[1 + j] * um;
        }
        out[1 + m] += w.p;
        out[e] = um * (u[e] + w.p);
    }

    fn normal_flux(&self, u: &[f64], n: [f64; 2], out: &mut [f64]) {
        let w = self.primitive(u);
        let un = self.normal_velocity(&w, n);
        let e = self.energy_index();
        out[0] = w.rho * un;
        for j in 0..self.dim {
            out[1 + j] = u[1 + j] * un + w.p * n[j];
        }
        out[e] = un * (u[e] + w.p);
    }

    fn entropy(&self, u: &[f64]) -> f64 {
        -u[0] * self.physical_entropy(u)
    }

    fn entropy_variables(&self, u: &[f64], v: &mut [f64]) {
        let w = self.primitive(u);
        let rho_e = w.p / (self.gamma - 1.0);
        let s = w.p.ln() - self.gamma * w.rho.ln();
        let mut ke = 0.0;
        for m in 0..self.dim {
            ke += u[1 + m] * w.vel[m];
        }
        v[0] = self.gamma - s - 0.5 * ke / rho_e;
        for m in 0..self.dim {
            v[1 + m] = u[1 + m] / rho_e;
        }
        v[self.energy_index()] = -w.rho / rho_e;
    }

    fn conservative_from_entropy(&self, v: &[f64], u: &mut [f64]) -> Result<(), PhysicsError> {
        let g = self.gamma;
        let e = self.energy_index();
        let v_last = v[e];
        if !(v_last < 0.0) {
            return Err(PhysicsError::Inadmissible {
                density: f64::NAN,
                internal_energy: f64::NAN,
            });
        }
        let vm2: f64 = (0..self.dim).map(|m| v[1 + m] * v[1 + m]).sum();
        let s = g - v[0] + vm2 / (2.0 * v_last);
        let rho_e = ((g - 1.0) / (-v_last).powf(g)).powf(1.0 / (g - 1.0)) * (-s / (g - 1.0)).exp();
        if !(rho_e > 0.0 && rho_e.is_finite()) {
            return Err(PhysicsError::Inadmissible {
                density: -rho_e * v_last,
                internal_energy: rho_e,
            });
        }
        u[0] = -rho_e * v_last;
        for m in 0..self.dim {
            u[1 + m] = rho_e * v[1 + m];
        }
        u[e] = rho_e * (1.0 - vm2 / (2.0 * v_last));
        Ok(())
    }

    fn entropy_potential(&self, u: &[f64], m: usize) -> f64 {
        (self.gamma - 1.0) * u[1 + m]
    }

    fn dudv(&self, u: &[f64], out: &mut [f64]) {
        let g = self.gamma;
        let n = self.num_vars();
        let e = self.energy_index();
        let w = self.primitive(u);
        let energy = u[e];
        let a2 = g * w.p / w.rho;
        let h = a2 / (g - 1.0) + 0.5 * (0..self.dim).map(|m| w.vel[m] * w.vel[m]).sum::<f64>();
        let scale = 1.0 / (g - 1.0);
        let mut set = |i: usize, j: usize, val: f64| {
            out[i * n + j] = val * scale;
            out[j * n + i] = val * scale;
        };
        set(0, 0, w.rho);
        for m in 0..self.dim {
            set(0, 1 + m, u[1 + m]);
            for j in m..self.dim {
                let delta = if j == m { w.p } else { 0.0 };
                set(1 + m, 1 + j, u[1 + m] * w.vel[j] + delta);
            }
            set(1 + m, e, w.vel[m] * (energy + w.p));
        }
        set(0, e, energy);
        set(e, e, w.rho * h * h - a2 * w.p / (g - 1.0));
    }

    fn max_wave_speed(&self, u: &[f64], n: [f64; 2]) -> f64 {
        let w = self.primitive(u);
        self.normal_velocity(&w, n).abs() + (self.gamma * w.p / w.rho).abs().sqrt()
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
            FluxKind::Hllc => self.hllc(ul, ur, normal, out),
            FluxKind::LaxFriedrichs => {
                self.check_admissible(ul)?;
                self.check_admissible(ur)?;
                lax_friedrichs(self, ul, ur, normal, out);
                Ok(())
            }
            FluxKind::BurgersEntropyConservative => Err(PhysicsError::UnsupportedFlux {
                flux: kind,
                law: "euler",
            }),
        }
    }

    fn wall_ghost(&self, u: &[f64], n: [f64; 2], out: &mut [f64]) {
        let nv = self.num_vars();
        out[..nv].copy_from_slice(&u[..nv]);
        let mn: f64 = (0..self.dim).map(|m| u[1 + m] * n[m]).sum();
        for m in 0..self.dim {
            out[1 + m] -= 2.0 * mn * n[m];
        }
    }

    fn indicator_variable(&self, u: &[f64]) -> f64 {
        let w = self.primitive(u);
        w.rho * w.p
    }
}
