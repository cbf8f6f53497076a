use ecav_core::dgcore::Discretization;
use ecav_core::mesh::{uniform_interval_mesh, uniform_triangle_mesh, BoundaryKind, SwitchRule};
use ecav_core::physics::problems::Problem;
use ecav_core::physics::{Burgers, ConservationLaw, Euler, FluxKind};
use ecav_core::refelem::{Formulation, ReferenceElement, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn interval(n: usize, k: usize, form: Formulation, law: Arc<dyn ConservationLaw>, flux: FluxKind) -> Discretization {
    let re = ReferenceElement::new(Shape::Interval, n, form).unwrap();
    let mesh = uniform_interval_mesh(-1.0, 1.0, k, BoundaryKind::Periodic)
        .unwrap()
        .with_switches(SwitchRule::Ldg([1.0, 0.0]))
        .unwrap();
    Discretization::new(re, mesh, law, flux).unwrap()
}

fn triangles(n: usize, k: usize, law: Arc<dyn ConservationLaw>, flux: FluxKind) -> Discretization {
    let re = ReferenceElement::new(Shape::Triangle, n, Formulation::Modal).unwrap();
    let mesh = uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], k, k, [BoundaryKind::Periodic; 2])
        .unwrap()
        .with_switches(SwitchRule::Ldg([2.0, 1.0]))
        .unwrap();
    Discretization::new(re, mesh, law, flux).unwrap()
}

fn smooth_euler_state(e: &Euler, x: [f64; 2], seed: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let rho = 1.0 + 0.3 * (pi * (x[0] + seed)).sin() * (pi * x[1]).cos();
    let u = 0.4 * (pi * x[1] + seed).cos();
    let v = -0.2 * (pi * x[0]).sin();
    let p = 1.0 + 0.25 * (pi * (x[0] - x[1])).cos();
    e.from_primitive(rho, [u, v], p)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn constant_state_is_preserved() {
    let e1 = Arc::new(Euler::new(1, 1.4));
    let e2 = Arc::new(Euler::new(2, 1.4));
    let state1 = e1.from_primitive(1.3, [0.4, 0.0], 0.9);
    let state2 = e2.from_primitive(1.3, [0.4, -0.7], 0.9);
    let cases: Vec<(Discretization, Vec<f64>)> = vec![
        (interval(3, 7, Formulation::Modal, e1.clone(), FluxKind::Hllc), state1.clone()),
        (interval(3, 7, Formulation::Nodal, e1.clone(), FluxKind::LaxFriedrichs), state1),
        (triangles(2, 4, e2.clone(), FluxKind::Hllc), state2.clone()),
        (triangles(3, 3, e2, FluxKind::LaxFriedrichs), state2),
        (triangles(2, 3, Arc::new(Burgers::new(2)), FluxKind::BurgersEntropyConservative), vec![0.7]),
    ];
    for (disc, state) in cases {
        let field = disc.project(|_| state.clone());
        let proj = disc.entropy_projection(&field.data).unwrap();
        let mut rhs = vec![0.0; field.data.len()];
        disc.inviscid_rhs(&proj, &mut rhs).unwrap();
        assert!(max_abs(&rhs) < 1e-12, "{disc:?}: {}", max_abs(&rhs));
        let delta = disc.volume_entropy_residual(&proj);
        assert!(max_abs(&delta) < 1e-14 * 10.0, "{disc:?}: δ = {}", max_abs(&delta));
    }
}

#[test]
fn residual_is_conservative_on_periodic_meshes() {
    let e2 = Arc::new(Euler::new(2, 1.4));
    let disc = triangles(3, 4, e2.clone(), FluxKind::Hllc);
    let field = disc.project(|x| smooth_euler_state(&e2, x, 0.3));
    let proj = disc.entropy_projection(&field.data).unwrap();
    let mut rhs = vec![0.0; field.data.len()];
    disc.inviscid_rhs(&proj, &mut rhs).unwrap();
    for total in disc.totals(&rhs) {
        assert!(total.abs() < 1e-12, "{total}");
    }

    let e1 = Arc::new(Euler::new(1, 1.4));
    for form in [Formulation::Modal, Formulation::Nodal] {
        let disc = interval(4, 9, form, e1.clone(), FluxKind::Hllc);
        let field = disc.project(|x| smooth_euler_state(&e1, x, 0.1));
        let proj = disc.entropy_projection(&field.data).unwrap();
        let mut rhs = vec![0.0; field.data.len()];
        disc.inviscid_rhs(&proj, &mut rhs).unwrap();
        for total in disc.totals(&rhs) {
            assert!(total.abs() < 1e-12, "{form:?}: {total}");
        }
    }
}

#[test]
fn two_element_burgers_matches_closed_form_assembly() {
    // u = a φ0 + b φ1 with φ0 = 1/√2, φ1 = √(3/2) r on each element
    let disc = interval(1, 2, Formulation::Modal, Arc::new(Burgers::new(1)), FluxKind::LaxFriedrichs);
    let coeffs = [[1.1, 0.2], [0.9, -0.15]];
    let mut field = disc.zero_field();
    for k in 0..2 {
        field.element_mut(k).copy_from_slice(&coeffs[k]);
    }
    let proj = disc.entropy_projection(&field.data).unwrap();
    let mut rhs = vec![0.0; 4];
    disc.inviscid_rhs(&proj, &mut rhs).unwrap();

    let s2 = 2f64.sqrt();
    let s32 = 1.5f64.sqrt();
    let ab = |k: usize| (coeffs[k][0] / s2, coeffs[k][1] * s32);
    let trace = |k: usize, right: bool| {
        let (a, b) = ab(k);
        if right {
            a + b
        } else {
            a - b
        }
    };
    let lf = |ul: f64, ur: f64| 0.5 * (0.5 * ul * ul + 0.5 * ur * ur) - 0.5 * ul.abs().max(ur.abs()) * (ur - ul);
    let jac = 0.5; // h = 1
    for k in 0..2 {
        let other = 1 - k;
        // flux across the right face uses (own right trace, neighbour left trace)
        let f_right = lf(trace(k, true), trace(other, false));
        let f_left = lf(trace(other, true), trace(k, false));
        let (a, b) = ab(k);
        let volume = [0.0, s32 * (a * a + b * b / 3.0)];
        let phi_right = [1.0 / s2, s32];
        let phi_left = [1.0 / s2, -s32];
        for j in 0..2 {
            let expected = (volume[j] - (f_right * phi_right[j] - f_left * phi_left[j])) / jac;
            let got = rhs[k * 2 + j];
            assert!((got - expected).abs() < 1e-13, "k={k} j={j}: {got} vs {expected}");
        }
    }
}

#[test]
fn burgers_volume_residual_vanishes_with_exact_integration() {
    let law: Arc<dyn ConservationLaw> = Arc::new(Burgers::new(2));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let re = ReferenceElement::with_quadrature_degree(Shape::Triangle, n, 3 * n).unwrap();
        let mesh = uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], 3, 3, [BoundaryKind::Periodic; 2]).unwrap();
        let disc = Discretization::new(re, mesh, law.clone(), FluxKind::BurgersEntropyConservative).unwrap();
        let mut field = disc.zero_field();
        field.data.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        let proj = disc.entropy_projection(&field.data).unwrap();
        let delta = disc.volume_entropy_residual(&proj);
        assert!(max_abs(&delta) < 1e-12, "N={n}: {}", max_abs(&delta));

        // 1D as well, with the rule exact to 3N
        let re = ReferenceElement::with_quadrature_degree(Shape::Interval, n, 3 * n).unwrap();
        let mesh = uniform_interval_mesh(-1.0, 1.0, 5, BoundaryKind::Periodic).unwrap();
        let disc = Discretization::new(re, mesh, Arc::new(Burgers::new(1)), FluxKind::BurgersEntropyConservative).unwrap();
        let mut field = disc.zero_field();
        field.data.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        let proj = disc.entropy_projection(&field.data).unwrap();
        assert!(max_abs(&disc.volume_entropy_residual(&proj)) < 1e-12);
    }
}

#[test]
fn entropy_projection_is_orthogonal_and_matches_least_squares() {
    let e2 = Arc::new(Euler::new(2, 1.4));
    let disc = triangles(2, 2, e2.clone(), FluxKind::Hllc);
    let field = disc.project(|x| smooth_euler_state(&e2, x, 0.7));
    let proj = disc.entropy_projection(&field.data).unwrap();
    let re = &disc.refelem;
    let nq = re.num_volume_points();
    let nb = re.num_basis();
    let w = &re.volume_quad.weights;
    for k in 0..disc.num_elements() {
        let uq = disc.volume_values(field.element(k));
        for i in 0..4 {
            let v: Vec<f64> = (0..nq)
                .map(|q| {
                    let mut vv = [0.0; 4];
                    e2.entropy_variables(&uq[q * 4..q * 4 + 4], &mut vv);
                    vv[i]
                })
                .collect();
            let vh = proj.vh.coefficients(k, i);
            let back = re.vq.mul_vec(vh);
            // residual is orthogonal to every basis function
            for j in 0..nb {
                let r: f64 = (0..nq).map(|q| w[q] * (v[q] - back[q]) * re.vq.get(q, j)).sum();
                assert!(r.abs() < 1e-12, "k={k} i={i} j={j}: {r}");
            }
            // weighted least squares through nalgebra
            let a = nalgebra::DMatrix::from_fn(nq, nb, |q, j| w[q].sqrt() * re.vq.get(q, j));
            let rhs = nalgebra::DVector::from_fn(nq, |q, _| w[q].sqrt() * v[q]);
            let ls = a.svd(true, true).solve(&rhs, 1e-14).unwrap();
            for j in 0..nb {
                assert!((ls[j] - vh[j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn nodal_projection_traces_equal_solution_traces() {
    let e1 = Arc::new(Euler::new(1, 1.4));
    let disc = interval(3, 6, Formulation::Nodal, e1.clone(), FluxKind::Hllc);
    let field = disc.project(|x| smooth_euler_state(&e1, x, 0.2));
    let proj = disc.entropy_projection(&field.data).unwrap();
    let nfp = disc.face_points_per_element();
    for k in 0..disc.num_elements() {
        let uf = disc.face_values(field.element(k));
        for q in 0..nfp * 3 {
            let ut = proj.u_tilde_face[k * nfp * 3 + q];
            assert!((ut - uf[q]).abs() < 1e-12 * (1.0 + uf[q].abs()));
        }
    }
}

#[test]
fn entropy_residual_matches_independent_quadrature() {
    // same discrete expression, integrals re-evaluated with a denser rule on
    // the polynomial Π_N v and with u_h sampled at the formulation's points
    let e1 = Arc::new(Euler::new(1, 1.4));
    let disc = interval(2, 5, Formulation::Modal, e1.clone(), FluxKind::Hllc);
    let field = disc.project(|x| smooth_euler_state(&e1, x, 0.4));
    let proj = disc.entropy_projection(&field.data).unwrap();
    let delta = disc.volume_entropy_residual(&proj);
    let re = &disc.refelem;
    for k in 0..disc.num_elements() {
        let g = &disc.mesh.elements[k];
        let uq = disc.volume_values(field.element(k));
        let mut vol = 0.0;
        for (q, (p, w)) in re.volume_quad.points.iter().zip(&re.volume_quad.weights).enumerate() {
            let dphi = &re.eval_basis_gradient(*p)[0];
            let mut f = [0.0; 3];
            e1.flux(&uq[q * 3..q * 3 + 3], 0, &mut f);
            for i in 0..3 {
                let dv: f64 = dphi.iter().zip(proj.vh.coefficients(k, i)).map(|(a, b)| a * b).sum::<f64>() * g.rx[0][0];
                vol -= w * g.jacobian * f[i] * dv;
            }
        }
        let mut surf = 0.0;
        for (f, r) in [(0usize, -1.0), (1usize, 1.0)] {
            let phi = re.eval_basis([r, 0.0]);
            let vb: Vec<f64> = (0..3)
                .map(|i| phi.iter().zip(proj.vh.coefficients(k, i)).map(|(a, b)| a * b).sum())
                .collect();
            let mut ub = [0.0; 3];
            e1.conservative_from_entropy(&vb, &mut ub).unwrap();
            surf += e1.entropy_potential(&ub, 0) * disc.mesh.face(k, f).normal[0];
        }
        let oracle = vol + surf;
        assert!((delta[k] - oracle).abs() < 1e-12 * (1.0 + oracle.abs()), "{} vs {oracle}", delta[k]);
    }
}

#[test]
fn chain_rule_identity_holds_for_any_polynomial_rate() {
    let e2 = Arc::new(Euler::new(2, 1.4));
    let disc = triangles(2, 3, e2.clone(), FluxKind::Hllc);
    let field = disc.project(|x| smooth_euler_state(&e2, x, 0.9));
    let proj = disc.entropy_projection(&field.data).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rate: Vec<f64> = (0..field.data.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let with_projection = disc.entropy_rate(&rate, &proj);
    // (du/dt, v(u_h)) at the volume points
    let nq = disc.refelem.num_volume_points();
    let w = &disc.refelem.volume_quad.weights;
    let mut direct = 0.0;
    for k in 0..disc.num_elements() {
        let rq = disc.volume_values(&rate[k * 4 * disc.num_basis()..(k + 1) * 4 * disc.num_basis()]);
        let uq = &proj.u_volume[k * nq * 4..(k + 1) * nq * 4];
        for q in 0..nq {
            let mut v = [0.0; 4];
            e2.entropy_variables(&uq[q * 4..q * 4 + 4], &mut v);
            let s: f64 = (0..4).map(|i| v[i] * rq[q * 4 + i]).sum();
            direct += disc.mesh.elements[k].jacobian * w[q] * s;
        }
    }
    assert!((with_projection - direct).abs() < 1e-12 * (1.0 + direct.abs()));
    assert_eq!(disc.entropy_rate(&vec![0.0; rate.len()], &proj), 0.0);
}

#[test]
fn vortex_residual_is_finite_and_converges() {
    let p = Problem::IsentropicVortex { lo: -5.0, hi: 5.0 };
    let e2 = Arc::new(p.euler());
    let mut errors = Vec::new();
    for k in [4, 8, 16] {
        let re = ReferenceElement::new(Shape::Triangle, 2, Formulation::Modal).unwrap();
        let mesh = uniform_triangle_mesh([-5.0, -5.0], [5.0, 5.0], k, k, [BoundaryKind::Periodic; 2]).unwrap();
        let disc = Discretization::new(re, mesh, e2.clone(), FluxKind::Hllc).unwrap();
        let field = disc.project(|x| p.initial(x));
        let proj = disc.entropy_projection(&field.data).unwrap();
        let mut rhs = vec![0.0; field.data.len()];
        disc.inviscid_rhs(&proj, &mut rhs).unwrap();
        assert!(rhs.iter().all(|x| x.is_finite()));
        // exact du/dt = −(1/γ)(∂u/∂x + ∂u/∂y)
        let h = 1e-6;
        let exact = disc.project(|x| {
            let a = p.exact(x, h).unwrap();
            let b = p.exact(x, -h).unwrap();
            a.iter().zip(&b).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        });
        let diff: Vec<f64> = rhs.iter().zip(&exact.data).map(|(a, b)| a - b).collect();
        errors.push(disc.l2_norm(&diff));
    }
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
}

#[test]
fn wall_mesh_keeps_a_resting_gas_at_rest() {
    let e2 = Arc::new(Euler::new(2, 1.4));
    let re = ReferenceElement::new(Shape::Triangle, 2, Formulation::Modal).unwrap();
    let mesh = uniform_triangle_mesh([0.0, 0.0], [2.0, 1.0], 4, 2, [BoundaryKind::Periodic, BoundaryKind::Wall]).unwrap();
    let disc = Discretization::new(re, mesh, e2.clone(), FluxKind::Hllc).unwrap();
    let state = e2.from_primitive(1.2, [0.3, 0.0], 1.0);
    let field = disc.project(|_| state.clone());
    let proj = disc.entropy_projection(&field.data).unwrap();
    let mut rhs = vec![0.0; field.data.len()];
    disc.inviscid_rhs(&proj, &mut rhs).unwrap();
    assert!(max_abs(&rhs) < 1e-12);
}

#[test]
fn inadmissible_states_are_reported_with_their_element() {
    let e1 = Arc::new(Euler::new(1, 1.4));
    let disc = interval(2, 4, Formulation::Modal, e1.clone(), FluxKind::Hllc);
    let field = disc.project(|x| {
        if x[0] > 0.5 {
            vec![-1.0, 0.0, 1.0]
        } else {
            e1.from_primitive(1.0, [0.0, 0.0], 1.0)
        }
    });
    match disc.entropy_projection(&field.data) {
        Err(ecav_core::dgcore::DgError::Physics { element, .. }) => assert_eq!(element, 3),
        other => panic!("expected an admissibility error, got {other:?}"),
    }
}
