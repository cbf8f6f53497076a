//! Randomised property suite behind `ecav-dg check-lemmas`: the dissipation
//! identity, gradient control of the LDG operator, and projection ratios.

use ecav_core::dgcore::{Discretization, SolutionField};
use ecav_core::mesh::{uniform_interval_mesh, uniform_triangle_mesh, BoundaryKind, SwitchRule};
use ecav_core::physics::{Burgers, ConservationLaw, Euler, FluxKind};
use ecav_core::refelem::{Formulation, ReferenceElement, Shape};
use ecav_core::viscosity::{
    broken_gradient_operator, dissipation_identity, gradient_operator, ldg_gradient, projection_ratios, surface_sums,
    viscous_flux,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    pub lines: Vec<String>,
    pub results: Vec<(String, bool)>,
}

impl LemmaReport {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        self.lines.push(format!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" }));
        self.results.push((name.to_string(), pass));
    }

    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.1)
    }
}

/// One periodic test configuration of the identity check.
#[derive(Clone, Copy, Debug)]
pub struct IdentityCase {
    pub dim: usize,
    pub formulation: Formulation,
    pub ldg: bool,
    pub euler: bool,
}

impl IdentityCase {
    pub fn all() -> Vec<IdentityCase> {
        let mut v = Vec::new();
        for euler in [true, false] {
            for ldg in [true, false] {
                for formulation in [Formulation::Modal, Formulation::Nodal] {
                    v.push(IdentityCase { dim: 1, formulation, ldg, euler });
                }
                v.push(IdentityCase {
                    dim: 2,
                    formulation: Formulation::Modal,
                    ldg,
                    euler,
                });
            }
        }
        v
    }

    pub fn label(&self) -> String {
        format!(
            "{}D {:?} {} {}",
            self.dim,
            self.formulation,
            if self.ldg { "LDG" } else { "BR-1" },
            if self.euler { "Euler" } else { "Burgers" }
        )
    }

    pub fn discretization(&self, degree: usize, k: usize) -> Discretization {
        let law: Arc<dyn ConservationLaw> = if self.euler {
            Arc::new(Euler::new(self.dim, 1.4))
        } else {
            Arc::new(Burgers::new(self.dim))
        };
        let flux = if self.euler { FluxKind::Hllc } else { FluxKind::LaxFriedrichs };
        let (shape, mesh) = if self.dim == 1 {
            (Shape::Interval, uniform_interval_mesh(-1.0, 1.0, k, BoundaryKind::Periodic))
        } else {
            (
                Shape::Triangle,
                uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], k, k, [BoundaryKind::Periodic; 2]),
            )
        };
        let rule = match (self.ldg, self.dim) {
            (false, _) => SwitchRule::Br1,
            (true, 1) => SwitchRule::Ldg([1.0, 0.0]),
            (true, _) => SwitchRule::Ldg([2.0, 1.0]),
        };
        let mesh = mesh.and_then(|m| m.with_switches(rule)).expect("valid periodic mesh");
        let re = ReferenceElement::new(shape, degree, self.formulation).expect("valid reference element");
        Discretization::new(re, mesh, law, flux).expect("consistent discretisation")
    }
}

/// Smooth random admissible state plus coefficient noise so that interface jumps are present.
pub fn random_field(disc: &Discretization, rng: &mut ChaCha8Rng) -> SolutionField {
    let nv = disc.num_vars();
    let amp: Vec<[f64; 4]> = (0..nv)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI), rng.gen_range(1.0..3.0)])
        .collect();
    let wave = |a: &[f64; 4], x: [f64; 2]| a[0] * (PI * a[3].floor() * x[0] + a[2]).sin() + a[1] * (PI * x[1] + a[2]).cos();
    let mut field = if nv == 1 {
        disc.project(|x| vec![wave(&amp[0], x)])
    } else {
        let euler = Euler::new(disc.dim(), 1.4);
        disc.project(|x| {
            let rho = 1.0 + 0.3 * wave(&amp[0], x);
            let u = 0.5 * wave(&amp[1], x);
            let v = if nv == 4 { 0.5 * wave(&amp[2], x) } else { 0.0 };
            let p = 1.0 + 0.3 * wave(&amp[nv - 1], x);
            euler.from_primitive(rho, [u, v], p)
        })
    };
    let noise = rng.gen_range(1e-3..2e-2);
    field.data.iter_mut().for_each(|c| *c += noise * rng.gen_range(-1.0..1.0));
    field
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub surface_a: f64,
    pub surface_b: f64,
}

impl IdentityOutcome {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs().max(f64::MIN_POSITIVE)
    }

    pub fn surface_gap(&self) -> f64 {
        (self.surface_a + self.surface_b).abs() / self.surface_a.abs().max(1.0)
    }
}

pub fn identity_sample(disc: &Discretization, rng: &mut ChaCha8Rng) -> IdentityOutcome {
    let field = random_field(disc, rng);
    let proj = disc.entropy_projection(&field.data).expect("random field is admissible");
    let theta = ldg_gradient(disc, &proj.vh, &proj.vh_face);
    let eps: Vec<f64> = (0..disc.num_elements())
        .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..0.1) })
        .collect();
    let (lhs, rhs) = dissipation_identity(disc, &proj, &eps, &theta);
    let sigma = viscous_flux(disc, &proj, &eps, &theta);
    let (surface_a, surface_b) = surface_sums(disc, &proj, &sigma);
    IdentityOutcome {
        lhs,
        rhs,
        surface_a,
        surface_b,
    }
}

/// `min ‖Θ v‖ / ‖∇v‖` over scalar fields without piecewise-constant part, on a uniform mesh.
pub fn min_gradient_ratio(disc: &Discretization) -> f64 {
    let g = gradient_operator(disc).to_dmatrix();
    let b = broken_gradient_operator(disc).to_dmatrix();
    let nb = disc.num_basis();
    let keep: Vec<usize> = (0..disc.num_elements() * nb)
        .filter(|c| disc.refelem.mode_degree[c % nb] > 0)
        .collect();
    let g = g.select_columns(&keep);
    let b = b.select_columns(&keep);
    // uniform mesh and orthonormal modes: the L² norms are a common multiple of the Euclidean ones
    let gtg = g.transpose() * &g;
    let btb = b.transpose() * &b;
    let l = btb.cholesky().expect("broken gradient is injective without constants").l();
    let linv = l.try_inverse().expect("Cholesky factor is invertible");
    let m: DMatrix<f64> = &linv * gtg * linv.transpose();
    let m = 0.5 * (&m + m.transpose());
    m.symmetric_eigenvalues().min().max(0.0).sqrt()
}

pub fn scalar_interval(degree: usize, k: usize, rule: SwitchRule) -> Discretization {
    let re = ReferenceElement::new(Shape::Interval, degree, Formulation::Modal).expect("valid element");
    let mesh = uniform_interval_mesh(0.0, 1.0, k, BoundaryKind::Periodic)
        .and_then(|m| m.with_switches(rule))
        .expect("valid mesh");
    Discretization::new(re, mesh, Arc::new(Burgers::new(1)), FluxKind::LaxFriedrichs).expect("consistent")
}

pub fn scalar_triangles(degree: usize, k: usize, rule: SwitchRule) -> Discretization {
    let re = ReferenceElement::new(Shape::Triangle, degree, Formulation::Modal).expect("valid element");
    let mesh = uniform_triangle_mesh([0.0, 0.0], [1.0, 1.0], k, k, [BoundaryKind::Periodic; 2])
        .and_then(|m| m.with_switches(rule))
        .expect("valid mesh");
    Discretization::new(re, mesh, Arc::new(Burgers::new(2)), FluxKind::LaxFriedrichs).expect("consistent")
}

/// Ratios for `h = 1/8, 1/16, 1/32` in 1D with `N = 2`.
pub fn ldg_ratio_sweep() -> Vec<(usize, f64)> {
    [8, 16, 32]
        .into_iter()
        .map(|k| (k, min_gradient_ratio(&scalar_interval(2, k, SwitchRule::Ldg([1.0, 0.0])))))
        .collect()
}

pub fn br1_counterexample_ratio() -> f64 {
    min_gradient_ratio(&scalar_interval(2, 8, SwitchRule::Br1))
}

pub fn check_all(seed: u64, samples: usize) -> LemmaReport {
    let mut report = LemmaReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = IdentityCase::all();
    let discs: Vec<(IdentityCase, Discretization)> = cases
        .iter()
        .map(|c| {
            let (n, k) = if c.dim == 1 { (3, 9) } else { (2, 4) };
            (*c, c.discretization(n, k))
        })
        .collect();

    let mut worst = 0.0f64;
    let mut worst_surface = 0.0f64;
    let mut negative = 0;
    for i in 0..samples {
        let (_, disc) = &discs[i % discs.len()];
        let out = identity_sample(disc, &mut rng);
        worst = worst.max(out.relative_gap());
        worst_surface = worst_surface.max(out.surface_gap());
        if out.rhs < 0.0 || out.lhs < -1e-10 * out.rhs.abs() {
            negative += 1;
        }
    }
    report.record(
        "dissipation identity",
        worst <= 1e-10 && negative == 0,
        format!("{samples} fields over {} configurations, worst relative gap {worst:.2e}, {negative} negative", discs.len()),
    );
    report.record(
        "surface cancellation",
        worst_surface <= 1e-12,
        format!("worst |a + b| / max(|a|, 1) = {worst_surface:.2e}"),
    );

    let sweep = ldg_ratio_sweep();
    let lo = sweep.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let hi = sweep.iter().map(|s| s.1).fold(0.0, f64::max);
    let variation = (hi - lo) / lo;
    report.record(
        "LDG gradient control",
        lo > 0.0 && variation <= 0.2,
        format!(
            "min ‖Θ‖/‖∇v‖ = {} (variation {:.1}%)",
            sweep.iter().map(|(k, r)| format!("{r:.4} @ h=1/{k}")).collect::<Vec<_>>().join(", "),
            100.0 * variation
        ),
    );
    let br1 = br1_counterexample_ratio();
    report.record("BR-1 counterexample", br1 < 0.01, format!("min ‖Θ‖/‖∇v‖ = {br1:.2e}"));

    let mut r_min = f64::INFINITY;
    for i in 0..samples.min(50) {
        let (_, disc) = &discs[i % discs.len()];
        let field = random_field(disc, &mut rng);
        let proj = disc.entropy_projection(&field.data).expect("admissible");
        for r in projection_ratios(disc, &proj).into_iter().flatten() {
            r_min = r_min.min(r);
        }
    }
    report.record("projection ratio", r_min >= 1.0 - 1e-12, format!("min r_k = {r_min:.15}"));
    report
}
