//! LDG and BR-1 discretisation of the entropy-variable Laplacian and the
//! entropy correction coefficient.
//!
//! Interface values use the jump `[[u]] = u⁺ − u⁻` seen from the owning
//! element. The gradient takes `{{v}} − β/2 [[v]]`, the viscous flux
//! `{{σ}} + β/2 [[σ]]`. On walls the gradient sees no jump and no viscous
//! flux leaves the domain.

use crate::dgcore::{Discretization, EntropyProjection, SolutionField};
use crate::linalg::{compensated_sum, Matrix};
use crate::physics::MAX_VARS;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViscosityError {
    #[error("non-finite entropy residual or dissipation in element {element}")]
    NonFinite { element: usize },
}

/// LDG gradient `Θ_m` of the projected entropy variables, one field per direction.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub components: Vec<SolutionField>,
}

impl GradientField {
    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// How the ratio `a b / (b² + δ)` is regularised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularization {
    Absolute(f64),
    /// `δ` is the spacing of floating-point numbers at `b`.
    Ulp,
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Absolute(1e-14)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EcavCoefficients {
    pub epsilon: Vec<f64>,
    /// `−min(0, δ_k)`.
    pub numerator: Vec<f64>,
    /// `Σ_m (K Θ_m, Θ_m)_{D^k}`.
    pub denominator: Vec<f64>,
}

impl EcavCoefficients {
    pub fn max(&self) -> f64 {
        self.epsilon.iter().copied().fold(0.0, f64::max)
    }
}

/// Distance from `b` to the next representable number.
pub fn ulp(b: f64) -> f64 {
    let b = b.abs();
    if b == 0.0 {
        return f64::from_bits(1);
    }
    f64::from_bits(b.to_bits() + 1) - b
}

/// `ε = a b / (b² + δ)` with `a = −min(0, δ_k)`.
pub fn ecav_coefficient(delta_k: f64, b: f64, reg: Regularization) -> f64 {
    let a = -delta_k.min(0.0);
    if a == 0.0 {
        return 0.0;
    }
    let d = match reg {
        Regularization::Absolute(d) => d,
        Regularization::Ulp => ulp(b),
    };
    a * b / (b * b + d)
}

/// `Θ_m = ∂Π_N v/∂x_m + lift((1 − β)/2 [[Π_N v]] n_m)` on every element.
pub fn ldg_gradient(disc: &Discretization, vh: &SolutionField, vh_face: &[f64]) -> GradientField {
    let d = disc.dim();
    let nv = disc.num_vars();
    let nb = disc.num_basis();
    let nfp = disc.face_points_per_element();
    let nfq = disc.refelem.face_points();
    let blocks: Vec<Vec<Vec<f64>>> = (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let geom = &disc.mesh.elements[k];
            let own = vh.element(k);
            // strong derivative: Σ_a rx[a][m] D_a
            let mut out: Vec<Vec<f64>> = (0..d)
                .map(|m| {
                    let mut g = vec![0.0; nv * nb];
                    for a in 0..d {
                        let c = geom.rx[a][m];
                        if c == 0.0 {
                            continue;
                        }
                        for i in 0..nv {
                            disc.refelem.dr[a].mul_vec_add(
                                c,
                                &own[i * nb..(i + 1) * nb],
                                &mut g[i * nb..(i + 1) * nb],
                            );
                        }
                    }
                    g
                })
                .collect();
            let mut jumps = vec![vec![0.0; nfp]; nv];
            let mut any = false;
            for q in 0..nfp {
                let face = disc.mesh.face(k, q / nfq);
                let Some(other) = disc.exterior_trace(vh_face, k, q) else {
                    continue;
                };
                let start = (k * nfp + q) * nv;
                let mine = &vh_face[start..start + nv];
                let c = 0.5 * (1.0 - face.beta) * face.surface_jacobian / geom.jacobian;
                if c == 0.0 {
                    continue;
                }
                for i in 0..nv {
                    jumps[i][q] = c * (other[i] - mine[i]);
                }
                any = true;
            }
            if any {
                for (m, g) in out.iter_mut().enumerate() {
                    for i in 0..nv {
                        let scaled: Vec<f64> = (0..nfp)
                            .map(|q| jumps[i][q] * disc.mesh.face(k, q / nfq).normal[m])
                            .collect();
                        disc.refelem
                            .lift
                            .mul_vec_add(1.0, &scaled, &mut g[i * nb..(i + 1) * nb]);
                    }
                }
            }
            out
        })
        .collect();
    let mut components: Vec<SolutionField> = (0..d).map(|_| disc.zero_field()).collect();
    for (k, b) in blocks.into_iter().enumerate() {
        for (m, g) in b.into_iter().enumerate() {
            components[m].element_mut(k).copy_from_slice(&g);
        }
    }
    GradientField { components }
}

/// `K = ∂u/∂v` at the volume points of element `k`, row-major `n × n` per point.
fn dudv_at_points(disc: &Discretization, proj: &EntropyProjection, k: usize) -> Vec<f64> {
    let nv = disc.num_vars();
    let nq = disc.refelem.num_volume_points();
    let uq = &proj.u_volume[k * nq * nv..(k + 1) * nq * nv];
    let mut out = vec![0.0; nq * nv * nv];
    for q in 0..nq {
        disc.law
            .dudv(&uq[q * nv..(q + 1) * nv], &mut out[q * nv * nv..(q + 1) * nv * nv]);
    }
    out
}

/// `b_k = Σ_m (K Θ_m, Θ_m)_{D^k}`.
pub fn dissipation_denominator(
    disc: &Discretization,
    proj: &EntropyProjection,
    theta: &GradientField,
) -> Vec<f64> {
    let nv = disc.num_vars();
    let nq = disc.refelem.num_volume_points();
    let w = &disc.refelem.volume_quad.weights;
    (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let kmat = dudv_at_points(disc, proj, k);
            let mut s = 0.0;
            for comp in &theta.components {
                let tq = disc.volume_values(comp.element(k));
                for q in 0..nq {
                    let t = &tq[q * nv..(q + 1) * nv];
                    let km = &kmat[q * nv * nv..(q + 1) * nv * nv];
                    let mut quad = 0.0;
                    for i in 0..nv {
                        quad += t[i] * crate::linalg::dot(&km[i * nv..(i + 1) * nv], t);
                    }
                    s += w[q] * quad;
                }
            }
            disc.mesh.elements[k].jacobian * s
        })
        .collect()
}

/// ε_k from the volume entropy residual and the LDG gradient.
pub fn ecav_coefficients(
    delta: &[f64],
    denominator: Vec<f64>,
    reg: Regularization,
) -> Result<EcavCoefficients, ViscosityError> {
    let mut epsilon = Vec::with_capacity(delta.len());
    let mut numerator = Vec::with_capacity(delta.len());
    for (k, (&dk, &b)) in delta.iter().zip(&denominator).enumerate() {
        if !dk.is_finite() || !b.is_finite() {
            return Err(ViscosityError::NonFinite { element: k });
        }
        numerator.push(-dk.min(0.0));
        epsilon.push(ecav_coefficient(dk, b, reg));
    }
    Ok(EcavCoefficients {
        epsilon,
        numerator,
        denominator,
    })
}

/// `σ_m = Π_N(ε_k K Θ_m)`.
pub fn viscous_flux(
    disc: &Discretization,
    proj: &EntropyProjection,
    epsilon: &[f64],
    theta: &GradientField,
) -> Vec<SolutionField> {
    let nv = disc.num_vars();
    let nb = disc.num_basis();
    let nq = disc.refelem.num_volume_points();
    let d = theta.dim();
    let blocks: Vec<Vec<Vec<f64>>> = (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let eps = epsilon[k];
            if eps == 0.0 {
                return vec![vec![0.0; nv * nb]; d];
            }
            let kmat = dudv_at_points(disc, proj, k);
            theta
                .components
                .iter()
                .map(|comp| {
                    let tq = disc.volume_values(comp.element(k));
                    let mut kt = vec![vec![0.0; nq]; nv];
                    for q in 0..nq {
                        let t = &tq[q * nv..(q + 1) * nv];
                        let km = &kmat[q * nv * nv..(q + 1) * nv * nv];
                        for i in 0..nv {
                            kt[i][q] = eps * crate::linalg::dot(&km[i * nv..(i + 1) * nv], t);
                        }
                    }
                    let mut s = vec![0.0; nv * nb];
                    for i in 0..nv {
                        disc.refelem.pq.mul_vec_into(&kt[i], &mut s[i * nb..(i + 1) * nb]);
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut out: Vec<SolutionField> = (0..d).map(|_| disc.zero_field()).collect();
    for (k, b) in blocks.into_iter().enumerate() {
        for (m, s) in b.into_iter().enumerate() {
            out[m].element_mut(k).copy_from_slice(&s);
        }
    }
    out
}

/// Face traces of every component of σ, `[m][(k * nfp + q) * nv + i]`.
fn face_traces(disc: &Discretization, sigma: &[SolutionField]) -> Vec<Vec<f64>> {
    sigma
        .iter()
        .map(|s| {
            (0..disc.num_elements())
                .into_par_iter()
                .flat_map_iter(|k| disc.face_values(s.element(k)))
                .collect()
        })
        .collect()
}

/// Adds `g = Σ_m [ −(σ_m, ∂w/∂x_m) + ⟨σ̂_m n_m, w⟩ ]` to `out`. Elements with
/// `active[k] = false` must carry `σ = 0`; their volume term is skipped.
pub fn add_viscous_rhs(
    disc: &Discretization,
    sigma: &[SolutionField],
    active: &[bool],
    out: &mut [f64],
) {
    let d = disc.dim();
    let nv = disc.num_vars();
    let nb = disc.num_basis();
    let nq = disc.refelem.num_volume_points();
    let nfp = disc.face_points_per_element();
    let nfq = disc.refelem.face_points();
    let traces = face_traces(disc, sigma);

    out.par_chunks_mut(nv * nb)
        .enumerate()
        .for_each(|(k, block)| {
            let geom = &disc.mesh.elements[k];
            // skip elements whose own σ and every neighbour's σ vanish
            let touched = active[k]
                || (0..disc.mesh.num_faces())
                    .any(|f| match disc.mesh.face(k, f).neighbor {
                        crate::mesh::FaceNeighbor::Interior { element, .. } => active[element],
                        crate::mesh::FaceNeighbor::Wall => false,
                    });
            if !touched {
                return;
            }
            if active[k] {
                for a in 0..d {
                    let mut pts = vec![vec![0.0; nq]; nv];
                    for (m, s) in sigma.iter().enumerate() {
                        let c = geom.rx[a][m];
                        if c == 0.0 {
                            continue;
                        }
                        let sq = disc.volume_values(s.element(k));
                        for q in 0..nq {
                            for i in 0..nv {
                                pts[i][q] += c * sq[q * nv + i];
                            }
                        }
                    }
                    for i in 0..nv {
                        disc.refelem.weak_grad[a].mul_vec_add(
                            -1.0,
                            &pts[i],
                            &mut block[i * nb..(i + 1) * nb],
                        );
                    }
                }
            }
            let mut surface = vec![vec![0.0; nfp]; nv];
            for q in 0..nfp {
                let face = disc.mesh.face(k, q / nfq);
                let scale = face.surface_jacobian / geom.jacobian;
                for (m, tr) in traces.iter().enumerate() {
                    let Some(other) = disc.exterior_trace(tr, k, q) else {
                        continue;
                    };
                    let start = (k * nfp + q) * nv;
                    let mine = &tr[start..start + nv];
                    let nm = face.normal[m];
                    if nm == 0.0 {
                        continue;
                    }
                    for i in 0..nv {
                        let hat = 0.5 * (mine[i] + other[i]) + 0.5 * face.beta * (other[i] - mine[i]);
                        surface[i][q] += scale * hat * nm;
                    }
                }
            }
            for i in 0..nv {
                disc.refelem
                    .lift
                    .mul_vec_add(1.0, &surface[i], &mut block[i * nb..(i + 1) * nb]);
            }
        });
}

/// `g_visc` as a fresh array.
pub fn viscous_rhs(disc: &Discretization, sigma: &[SolutionField]) -> Vec<f64> {
    let mut out = vec![0.0; disc.num_elements() * disc.num_vars() * disc.num_basis()];
    let active = vec![true; disc.num_elements()];
    add_viscous_rhs(disc, sigma, &active, &mut out);
    out
}

/// Both sides of the dissipation identity `−Σ_k (g, Π_N v) = Σ_k ε_k (K Θ, Θ)`.
pub fn dissipation_identity(
    disc: &Discretization,
    proj: &EntropyProjection,
    epsilon: &[f64],
    theta: &GradientField,
) -> (f64, f64) {
    let sigma = viscous_flux(disc, proj, epsilon, theta);
    let g = viscous_rhs(disc, &sigma);
    let lhs = -disc.global_inner(&g, &proj.vh.data);
    let b = dissipation_denominator(disc, proj, theta);
    let rhs = compensated_sum(epsilon.iter().zip(&b).map(|(e, b)| e * b));
    (lhs, rhs)
}

/// The two surface sums of the dissipation identity,
/// `Σ_k ⟨σ̂·n, Π_N v⟩` and `Σ_k ⟨(v̂ − v⁻) n, σ⁻⟩`; they cancel on periodic meshes.
pub fn surface_sums(
    disc: &Discretization,
    proj: &EntropyProjection,
    sigma: &[SolutionField],
) -> (f64, f64) {
    let nv = disc.num_vars();
    let nfp = disc.face_points_per_element();
    let nfq = disc.refelem.face_points();
    let traces = face_traces(disc, sigma);
    let wf: Vec<f64> = disc.refelem.face_weights().collect();
    let parts: Vec<(f64, f64)> = (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let mut a = 0.0;
            let mut b = 0.0;
            for q in 0..nfp {
                let face = disc.mesh.face(k, q / nfq);
                let start = (k * nfp + q) * nv;
                let v_own = &proj.vh_face[start..start + nv];
                let Some(v_other) = disc.exterior_trace(&proj.vh_face, k, q) else {
                    continue;
                };
                let ws = wf[q] * face.surface_jacobian;
                for (m, tr) in traces.iter().enumerate() {
                    let s_own = &tr[start..start + nv];
                    let s_other = disc.exterior_trace(tr, k, q).unwrap();
                    let nm = face.normal[m];
                    for i in 0..nv {
                        let s_hat = 0.5 * (s_own[i] + s_other[i]) + 0.5 * face.beta * (s_other[i] - s_own[i]);
                        a += ws * s_hat * nm * v_own[i];
                        let v_jump = 0.5 * (1.0 - face.beta) * (v_other[i] - v_own[i]);
                        b += ws * v_jump * nm * s_own[i];
                    }
                }
            }
            (a, b)
        })
        .collect();
    (
        compensated_sum(parts.iter().map(|p| p.0)),
        compensated_sum(parts.iter().map(|p| p.1)),
    )
}

/// Per-element `‖Θ‖ / ‖∇Π_N v‖`; `None` where both norms are below `1e-13`.
pub fn gradient_ratios(disc: &Discretization, vh: &SolutionField, theta: &GradientField) -> Vec<Option<f64>> {
    let nv = disc.num_vars();
    let nq = disc.refelem.num_volume_points();
    let w = &disc.refelem.volume_quad.weights;
    (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let jac = disc.mesh.elements[k].jacobian;
            let grad = disc.volume_gradient(k, vh.element(k));
            let mut g2 = 0.0;
            let mut t2 = 0.0;
            for (m, comp) in theta.components.iter().enumerate() {
                let tq = disc.volume_values(comp.element(k));
                for q in 0..nq {
                    for i in 0..nv {
                        g2 += w[q] * grad[m][q * nv + i].powi(2);
                        t2 += w[q] * tq[q * nv + i].powi(2);
                    }
                }
            }
            let (g, t) = ((jac * g2).sqrt(), (jac * t2).sqrt());
            if g < 1e-13 && t < 1e-13 {
                None
            } else if g < 1e-13 {
                Some(f64::INFINITY)
            } else {
                Some(t / g)
            }
        })
        .collect()
}

/// Dense matrix of the linear map `Π_N v ↦ (Θ_1, …, Θ_d)` for a scalar field.
pub fn gradient_operator(disc: &Discretization) -> Matrix {
    assert_eq!(disc.num_vars(), 1, "gradient operator is assembled for scalar fields");
    let n = disc.num_elements() * disc.num_basis();
    let d = disc.dim();
    let mut op = Matrix::zeros(d * n, n);
    let mut e = disc.zero_field();
    for col in 0..n {
        e.data.iter_mut().for_each(|x| *x = 0.0);
        e.data[col] = 1.0;
        let face: Vec<f64> = (0..disc.num_elements())
            .flat_map(|k| disc.face_values(e.element(k)))
            .collect();
        let theta = ldg_gradient(disc, &e, &face);
        for (m, comp) in theta.components.iter().enumerate() {
            for (row, &x) in comp.data.iter().enumerate() {
                op.set(m * n + row, col, x);
            }
        }
    }
    op
}

/// Dense matrix of the broken gradient `Π_N v ↦ ∇Π_N v` for a scalar field.
pub fn broken_gradient_operator(disc: &Discretization) -> Matrix {
    assert_eq!(disc.num_vars(), 1);
    let n = disc.num_elements() * disc.num_basis();
    let nb = disc.num_basis();
    let d = disc.dim();
    let mut op = Matrix::zeros(d * n, n);
    for k in 0..disc.num_elements() {
        let geom = &disc.mesh.elements[k];
        for m in 0..d {
            for a in 0..d {
                let c = geom.rx[a][m];
                for r in 0..nb {
                    for s in 0..nb {
                        let idx = (m * n + k * nb + r, k * nb + s);
                        op.set(idx.0, idx.1, op.get(idx.0, idx.1) + c * disc.refelem.dr[a].get(r, s));
                    }
                }
            }
        }
    }
    op
}

/// `r_k = ‖δv‖² / ‖Π_N δv‖²` with `δv = v(u_h) − mean`; `None` when `δv = 0`.
pub fn projection_ratios(disc: &Discretization, proj: &EntropyProjection) -> Vec<Option<f64>> {
    let nv = disc.num_vars();
    let nq = disc.refelem.num_volume_points();
    let nb = disc.num_basis();
    let w = &disc.refelem.volume_quad.weights;
    let wsum: f64 = w.iter().sum();
    (0..disc.num_elements())
        .into_par_iter()
        .map(|k| {
            let uq = &proj.u_volume[k * nq * nv..(k + 1) * nq * nv];
            let mut v = vec![0.0; nq * nv];
            for q in 0..nq {
                disc.law
                    .entropy_variables(&uq[q * nv..(q + 1) * nv], &mut v[q * nv..(q + 1) * nv]);
            }
            let mut mean = [0.0; MAX_VARS];
            for q in 0..nq {
                for i in 0..nv {
                    mean[i] += w[q] * v[q * nv + i] / wsum;
                }
            }
            let mut full = 0.0;
            let mut projected = 0.0;
            let mut col = vec![0.0; nq];
            let mut coeff = vec![0.0; nb];
            for i in 0..nv {
                for q in 0..nq {
                    col[q] = v[q * nv + i] - mean[i];
                    full += w[q] * col[q] * col[q];
                }
                disc.refelem.pq.mul_vec_into(&col, &mut coeff);
                let back = disc.refelem.vq.mul_vec(&coeff);
                projected += back.iter().zip(w).map(|(b, wq)| wq * b * b).sum::<f64>();
            }
            let scale = mean[..nv].iter().map(|m| m.abs()).fold(1.0, f64::max);
            if full <= 1e-28 * scale * scale {
                None
            } else if projected == 0.0 {
                Some(f64::INFINITY)
            } else {
                Some(full / projected)
            }
        })
        .collect()
}
