//! Weak-form DG residual, entropy projection and the volume entropy residual.
//!
//! Coefficients are stored element by element and variable by variable:
//! entry `(k, i, j)` of a field lives at `(k * nv + i) * nb + j`. Point values
//! are state-major, `q * nv + i`, so a single state is a contiguous slice.

use crate::linalg::compensated_sum;
use crate::mesh::{FaceNeighbor, Mesh};
use crate::physics::{ConservationLaw, FluxKind, PhysicsError, MAX_VARS};
use crate::refelem::{ReferenceElement, Shape};
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DgError {
    #[error("element {element}, point {point}: {source}")]
    Physics {
        element: usize,
        point: usize,
        #[source]
        source: PhysicsError,
    },
    #[error("entropy projection left the admissible set in element {element}: {source}")]
    Projection {
        element: usize,
        #[source]
        source: PhysicsError,
    },
    #[error("law is {law}-dimensional but the mesh is {mesh}-dimensional")]
    DimensionMismatch { law: usize, mesh: usize },
    #[error("reference element is a {elem} but the mesh is made of {mesh}")]
    ShapeMismatch { elem: Shape, mesh: Shape },
    #[error("non-finite entropy residual or dissipation in element {element}")]
    NonFinite { element: usize },
    #[error("field has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Modal (or nodal) coefficients of every conserved variable on every element.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub num_elements: usize,
    pub num_vars: usize,
    pub num_basis: usize,
    pub data: Vec<f64>,
}

impl SolutionField {
    pub fn zeros(num_elements: usize, num_vars: usize, num_basis: usize) -> Self {
        Self {
            num_elements,
            num_vars,
            num_basis,
            data: vec![0.0; num_elements * num_vars * num_basis],
        }
    }

    pub fn block_len(&self) -> usize {
        self.num_vars * self.num_basis
    }

    pub fn element(&self, k: usize) -> &[f64] {
        let b = self.block_len();
        &self.data[k * b..(k + 1) * b]
    }

    pub fn element_mut(&mut self, k: usize) -> &mut [f64] {
        let b = self.block_len();
        &mut self.data[k * b..(k + 1) * b]
    }

    pub fn coefficients(&self, k: usize, var: usize) -> &[f64] {
        let nb = self.num_basis;
        let start = (k * self.num_vars + var) * nb;
        &self.data[start..start + nb]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// `Π_N v(u_h)` and the states `ũ = u(Π_N v)` on the element faces.
#[derive(Clone, Debug)]
pub struct EntropyProjection {
    /// Projected entropy variables, same layout as a [`SolutionField`].
    pub vh: SolutionField,
    /// `Π_N v` at the face points, `(k * nfp + q) * nv + i`.
    pub vh_face: Vec<f64>,
    /// `ũ` at the face points, same layout as `vh_face`.
    pub u_tilde_face: Vec<f64>,
    /// `u_h` at the volume points, `(k * nq + q) * nv + i`.
    pub u_volume: Vec<f64>,
}

/// A reference element, a mesh, a conservation law and an interface flux.
pub struct Discretization {
    pub refelem: ReferenceElement,
    pub mesh: Mesh,
    pub law: Arc<dyn ConservationLaw>,
    pub flux: FluxKind,
    reference_measure: f64,
}

impl Discretization {
    pub fn new(
        refelem: ReferenceElement,
        mesh: Mesh,
        law: Arc<dyn ConservationLaw>,
        flux: FluxKind,
    ) -> Result<Self, DgError> {
        if refelem.shape != mesh.shape {
            return Err(DgError::ShapeMismatch {
                elem: refelem.shape,
                mesh: mesh.shape,
            });
        }
        if law.dim() != mesh.shape.dim() {
            return Err(DgError::DimensionMismatch {
                law: law.dim(),
                mesh: mesh.shape.dim(),
            });
        }
        let reference_measure = refelem.volume_quad.weights.iter().sum();
        Ok(Self {
            refelem,
            mesh,
            law,
            flux,
            reference_measure,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.law.num_vars()
    }

    pub fn num_basis(&self) -> usize {
        self.refelem.num_basis()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn dim(&self) -> usize {
        self.mesh.shape.dim()
    }

    /// Face points per element, all faces together.
    pub fn face_points_per_element(&self) -> usize {
        self.refelem.vf.rows()
    }

    pub fn reference_measure(&self) -> f64 {
        self.reference_measure
    }

    pub fn zero_field(&self) -> SolutionField {
        SolutionField::zeros(self.num_elements(), self.num_vars(), self.num_basis())
    }

    pub fn check_len(&self, data: &[f64]) -> Result<(), DgError> {
        let expected = self.num_elements() * self.num_vars() * self.num_basis();
        if data.len() != expected {
            return Err(DgError::LengthMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(())
    }

    /// Physical coordinates of the volume points of element `k`.
    pub fn volume_points(&self, k: usize) -> Vec<[f64; 2]> {
        let g = &self.mesh.elements[k];
        self.refelem.volume_quad.points.iter().map(|&r| g.map(r)).collect()
    }

    /// Physical coordinates of the face points of element `k`, faces stacked.
    pub fn face_points(&self, k: usize) -> Vec<[f64; 2]> {
        let g = &self.mesh.elements[k];
        self.refelem
            .face_quad
            .iter()
            .flat_map(|f| f.points.iter().map(|&r| g.map(r)))
            .collect()
    }

    /// Index of the point on the neighbouring face that coincides with point
    /// `q` of the own face. Shared triangle edges run in opposite directions.
    pub fn matching_point(&self, q: usize) -> usize {
        match self.mesh.shape {
            Shape::Interval => q,
            Shape::Triangle => self.refelem.face_points() - 1 - q,
        }
    }

    /// Quadrature L² projection of `f` evaluated at the volume points.
    pub fn project<F>(&self, f: F) -> SolutionField
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        let nv = self.num_vars();
        let nb = self.num_basis();
        let nq = self.refelem.num_volume_points();
        let mut field = self.zero_field();
        field
            .data
            .par_chunks_mut(nv * nb)
            .enumerate()
            .for_each(|(k, block)| {
                let pts = self.volume_points(k);
                let mut vals = vec![0.0; nq];
                let values: Vec<Vec<f64>> = pts.iter().map(|&x| f(x)).collect();
                for i in 0..nv {
                    for q in 0..nq {
                        vals[q] = values[q][i];
                    }
                    self.refelem.pq.mul_vec_into(&vals, &mut block[i * nb..(i + 1) * nb]);
                }
            });
        field
    }

    /// Element block of coefficients → state-major point values through `v`.
    fn to_points(&self, v: &crate::linalg::Matrix, block: &[f64], out: &mut [f64]) {
        let nv = self.num_vars();
        let nb = self.num_basis();
        let np = v.rows();
        for q in 0..np {
            let row = v.row(q);
            for i in 0..nv {
                out[q * nv + i] = crate::linalg::dot(row, &block[i * nb..(i + 1) * nb]);
            }
        }
    }

    /// `u_h` at the volume points of element `k`, state-major.
    pub fn volume_values(&self, block: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.refelem.num_volume_points() * self.num_vars()];
        self.to_points(&self.refelem.vq, block, &mut out);
        out
    }

    /// Values at the stacked face points of one element, state-major.
    pub fn face_values(&self, block: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.face_points_per_element() * self.num_vars()];
        self.to_points(&self.refelem.vf, block, &mut out);
        out
    }

    /// Physical gradient of one element block at the volume points,
    /// `[direction][q * nv + i]`.
    pub fn volume_gradient(&self, k: usize, block: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let rx = self.mesh.elements[k].rx;
        let reference: Vec<Vec<f64>> = (0..d)
            .map(|a| {
                let mut out = vec![0.0; nq * nv];
                self.to_points(&self.refelem.vq_grad[a], block, &mut out);
                out
            })
            .collect();
        (0..d)
            .map(|m| {
                let mut g = vec![0.0; nq * nv];
                for (a, r) in reference.iter().enumerate() {
                    let c = rx[a][m];
                    for (gi, ri) in g.iter_mut().zip(r) {
                        *gi += c * ri;
                    }
                }
                g
            })
            .collect()
    }

    /// Entropy variables are projected element by element; `ũ` is formed on the faces.
    pub fn entropy_projection(&self, data: &[f64]) -> Result<EntropyProjection, DgError> {
        self.check_len(data)?;
        let nv = self.num_vars();
        let nb = self.num_basis();
        let nq = self.refelem.num_volume_points();
        let nfp = self.face_points_per_element();
        let law = self.law.as_ref();

        let results: Result<Vec<_>, DgError> = (0..self.num_elements())
            .into_par_iter()
            .map(|k| {
                let bl = nv * nb;
                let block = &data[k * bl..(k + 1) * bl];
                let uq = self.volume_values(block);
                let mut vq = vec![0.0; nq * nv];
                for q in 0..nq {
                    let u = &uq[q * nv..(q + 1) * nv];
                    law.check_admissible(u).map_err(|source| DgError::Physics {
                        element: k,
                        point: q,
                        source,
                    })?;
                    law.entropy_variables(u, &mut vq[q * nv..(q + 1) * nv]);
                }
                let mut vh = vec![0.0; nv * nb];
                let mut column = vec![0.0; nq];
                for i in 0..nv {
                    for q in 0..nq {
                        column[q] = vq[q * nv + i];
                    }
                    self.refelem.pq.mul_vec_into(&column, &mut vh[i * nb..(i + 1) * nb]);
                }
                let vf = self.face_values(&vh);
                let mut uf = vec![0.0; nfp * nv];
                for q in 0..nfp {
                    let s = q * nv..(q + 1) * nv;
                    law.conservative_from_entropy(&vf[s.clone()], &mut uf[s.clone()])
                        .and_then(|_| law.check_admissible(&uf[s]))
                        .map_err(|source| DgError::Projection { element: k, source })?;
                }
                Ok((vh, vf, uf, uq))
            })
            .collect();
        let results = results?;

        let mut vh = self.zero_field();
        let mut vh_face = Vec::with_capacity(self.num_elements() * nfp * nv);
        let mut u_tilde_face = Vec::with_capacity(self.num_elements() * nfp * nv);
        let mut u_volume = Vec::with_capacity(self.num_elements() * nq * nv);
        for (k, (v, vf, uf, uq)) in results.into_iter().enumerate() {
            vh.element_mut(k).copy_from_slice(&v);
            vh_face.extend(vf);
            u_tilde_face.extend(uf);
            u_volume.extend(uq);
        }
        Ok(EntropyProjection {
            vh,
            vh_face,
            u_tilde_face,
            u_volume,
        })
    }

    /// Exterior trace at face point `q` (stacked index) of element `k`.
    /// `traces` is laid out like [`EntropyProjection::vh_face`]. Returns `None`
    /// on wall faces.
    pub fn exterior_trace<'a>(&self, traces: &'a [f64], k: usize, q: usize) -> Option<&'a [f64]> {
        let nv = self.num_vars();
        let nfq = self.refelem.face_points();
        let nfp = self.face_points_per_element();
        let f = q / nfq;
        match self.mesh.face(k, f).neighbor {
            FaceNeighbor::Interior { element, face } => {
                let qn = face * nfq + self.matching_point(q % nfq);
                let start = (element * nfp + qn) * nv;
                Some(&traces[start..start + nv])
            }
            FaceNeighbor::Wall => None,
        }
    }

    /// Inviscid residual `du/dt` of the weak form, written into `out`.
    pub fn inviscid_rhs(
        &self,
        proj: &EntropyProjection,
        out: &mut [f64],
    ) -> Result<(), DgError> {
        self.check_len(out)?;
        let nv = self.num_vars();
        let nb = self.num_basis();
        let nq = self.refelem.num_volume_points();
        let nfp = self.face_points_per_element();
        let nfq = self.refelem.face_points();
        let d = self.dim();
        let law = self.law.as_ref();

        out.par_chunks_mut(nv * nb)
            .enumerate()
            .try_for_each(|(k, block)| -> Result<(), DgError> {
                block.iter_mut().for_each(|x| *x = 0.0);
                let geom = &self.mesh.elements[k];
                let uq = &proj.u_volume[k * nq * nv..(k + 1) * nq * nv];

                // volume: Σ_m Σ_a rx[a][m] · weak_grad[a] f_m(u_h)
                let mut f = [0.0; MAX_VARS];
                let mut flux_pts = vec![vec![0.0; nq]; nv];
                for a in 0..d {
                    for col in flux_pts.iter_mut() {
                        col.iter_mut().for_each(|x| *x = 0.0);
                    }
                    for q in 0..nq {
                        let u = &uq[q * nv..(q + 1) * nv];
                        for m in 0..d {
                            let c = geom.rx[a][m];
                            if c == 0.0 {
                                continue;
                            }
                            law.flux(u, m, &mut f[..nv]);
                            for i in 0..nv {
                                flux_pts[i][q] += c * f[i];
                            }
                        }
                    }
                    for i in 0..nv {
                        self.refelem.weak_grad[a].mul_vec_add(
                            1.0,
                            &flux_pts[i],
                            &mut block[i * nb..(i + 1) * nb],
                        );
                    }
                }

                // surface: −(1/J) lift(sJ f*)
                let mut surface = vec![vec![0.0; nfp]; nv];
                let mut ghost = [0.0; MAX_VARS];
                let mut fstar = [0.0; MAX_VARS];
                for q in 0..nfp {
                    let face = self.mesh.face(k, q / nfq);
                    let start = (k * nfp + q) * nv;
                    let own = &proj.u_tilde_face[start..start + nv];
                    let other = match self.exterior_trace(&proj.u_tilde_face, k, q) {
                        Some(t) => t,
                        None => {
                            law.wall_ghost(own, face.normal, &mut ghost[..nv]);
                            &ghost[..nv]
                        }
                    };
                    law.numerical_flux(self.flux, own, other, face.normal, &mut fstar[..nv])
                        .map_err(|source| DgError::Physics {
                            element: k,
                            point: q,
                            source,
                        })?;
                    let scale = face.surface_jacobian / geom.jacobian;
                    for i in 0..nv {
                        surface[i][q] = scale * fstar[i];
                    }
                }
                for i in 0..nv {
                    self.refelem
                        .lift
                        .mul_vec_add(-1.0, &surface[i], &mut block[i * nb..(i + 1) * nb]);
                }
                Ok(())
            })
    }

    /// `δ_k = Σ_m [ −(f_m(u_h), ∂Π_N v/∂x_m) + ⟨ψ_m(ũ) n_m, 1⟩ ]` per element.
    pub fn volume_entropy_residual(&self, proj: &EntropyProjection) -> Vec<f64> {
        (0..self.num_elements())
            .into_par_iter()
            .map(|k| self.element_entropy_residual(k, proj))
            .collect()
    }

    pub fn element_entropy_residual(&self, k: usize, proj: &EntropyProjection) -> f64 {
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let nfp = self.face_points_per_element();
        let nfq = self.refelem.face_points();
        let d = self.dim();
        let law = self.law.as_ref();
        let geom = &self.mesh.elements[k];
        let uq = &proj.u_volume[k * nq * nv..(k + 1) * nq * nv];
        let grad = self.volume_gradient(k, proj.vh.element(k));
        let w = &self.refelem.volume_quad.weights;

        let mut f = [0.0; MAX_VARS];
        let mut volume = 0.0;
        for q in 0..nq {
            let u = &uq[q * nv..(q + 1) * nv];
            let mut s = 0.0;
            for (m, g) in grad.iter().enumerate() {
                law.flux(u, m, &mut f[..nv]);
                s += crate::linalg::dot(&f[..nv], &g[q * nv..(q + 1) * nv]);
            }
            volume += w[q] * s;
        }
        volume *= -geom.jacobian;

        let mut surface = 0.0;
        for (q, wq) in self.refelem.face_weights().enumerate().take(nfp) {
            let face = self.mesh.face(k, q / nfq);
            let start = (k * nfp + q) * nv;
            let ut = &proj.u_tilde_face[start..start + nv];
            let mut psi_n = 0.0;
            for m in 0..d {
                psi_n += law.entropy_potential(ut, m) * face.normal[m];
            }
            surface += wq * face.surface_jacobian * psi_n;
        }
        volume + surface
    }

    /// `(a, b)_{D^k}` for two coefficient blocks of element `k`, summed over variables.
    pub fn element_inner(&self, k: usize, a: &[f64], b: &[f64]) -> f64 {
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let av = self.volume_values(a);
        let bv = self.volume_values(b);
        let w = &self.refelem.volume_quad.weights;
        let mut s = 0.0;
        for q in 0..nq {
            s += w[q] * crate::linalg::dot(&av[q * nv..(q + 1) * nv], &bv[q * nv..(q + 1) * nv]);
        }
        self.mesh.elements[k].jacobian * s
    }

    /// `Σ_k (a, b)_{D^k}` with a deterministic reduction.
    pub fn global_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let bl = self.num_vars() * self.num_basis();
        let parts: Vec<f64> = (0..self.num_elements())
            .into_par_iter()
            .map(|k| self.element_inner(k, &a[k * bl..(k + 1) * bl], &b[k * bl..(k + 1) * bl]))
            .collect();
        compensated_sum(parts)
    }

    /// `Σ_k (du/dt, Π_N v)_{D^k}`, the semi-discrete rate of change of the total entropy.
    pub fn entropy_rate(&self, rhs: &[f64], proj: &EntropyProjection) -> f64 {
        self.global_inner(rhs, &proj.vh.data)
    }

    /// Integral of every conserved variable over the domain.
    pub fn totals(&self, data: &[f64]) -> Vec<f64> {
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let bl = nv * self.num_basis();
        let w = &self.refelem.volume_quad.weights;
        let parts: Vec<Vec<f64>> = (0..self.num_elements())
            .into_par_iter()
            .map(|k| {
                let vals = self.volume_values(&data[k * bl..(k + 1) * bl]);
                let jac = self.mesh.elements[k].jacobian;
                (0..nv)
                    .map(|i| jac * (0..nq).map(|q| w[q] * vals[q * nv + i]).sum::<f64>())
                    .collect()
            })
            .collect();
        (0..nv)
            .map(|i| compensated_sum(parts.iter().map(|p| p[i])))
            .collect()
    }

    /// Total entropy `Σ_k (S(u_h), 1)_{D^k}`.
    pub fn total_entropy(&self, field: &SolutionField) -> f64 {
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let w = &self.refelem.volume_quad.weights;
        let parts: Vec<f64> = (0..self.num_elements())
            .into_par_iter()
            .map(|k| {
                let vals = self.volume_values(field.element(k));
                let s: f64 = (0..nq)
                    .map(|q| w[q] * self.law.entropy(&vals[q * nv..(q + 1) * nv]))
                    .sum();
                self.mesh.elements[k].jacobian * s
            })
            .collect();
        compensated_sum(parts)
    }

    /// Relative L² error over all conserved variables jointly, measured with
    /// the volume quadrature: `‖u_h − u‖ / ‖u‖`.
    pub fn relative_l2_error<F>(&self, field: &SolutionField, exact: F) -> f64
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        let (num, den) = self.l2_parts(&field.data, &exact);
        (num / den).sqrt()
    }

    /// Absolute L² norm of `u_h − u` over all conserved variables.
    pub fn l2_error<F>(&self, field: &SolutionField, exact: F) -> f64
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        self.l2_parts(&field.data, &exact).0.sqrt()
    }

    /// L² norm of a coefficient array over all variables.
    pub fn l2_norm(&self, data: &[f64]) -> f64 {
        self.l2_parts(data, &|_| vec![0.0; self.num_vars()]).0.sqrt()
    }

    fn l2_parts<F>(&self, data: &[f64], exact: &F) -> (f64, f64)
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        let nv = self.num_vars();
        let nq = self.refelem.num_volume_points();
        let bl = nv * self.num_basis();
        let w = &self.refelem.volume_quad.weights;
        let parts: Vec<(f64, f64)> = (0..self.num_elements())
            .into_par_iter()
            .map(|k| {
                let vals = self.volume_values(&data[k * bl..(k + 1) * bl]);
                let pts = self.volume_points(k);
                let jac = self.mesh.elements[k].jacobian;
                let mut num = 0.0;
                let mut den = 0.0;
                for q in 0..nq {
                    let e = exact(pts[q]);
                    for i in 0..nv {
                        let diff = vals[q * nv + i] - e[i];
                        num += w[q] * diff * diff;
                        den += w[q] * e[i] * e[i];
                    }
                }
                (jac * num, jac * den)
            })
            .collect();
        (
            compensated_sum(parts.iter().map(|p| p.0)),
            compensated_sum(parts.iter().map(|p| p.1)),
        )
    }

    /// Evaluate one variable of a field at arbitrary reference points of every element.
    pub fn sample(&self, field: &SolutionField, var: usize, reference_points: &[[f64; 2]]) -> Vec<([f64; 2], f64)> {
        let basis: Vec<Vec<f64>> = reference_points.iter().map(|&r| self.refelem.eval_basis(r)).collect();
        let mut out = Vec::with_capacity(self.num_elements() * reference_points.len());
        for k in 0..self.num_elements() {
            let g = &self.mesh.elements[k];
            let c = field.coefficients(k, var);
            for (r, phi) in reference_points.iter().zip(&basis) {
                out.push((g.map(*r), crate::linalg::dot(phi, c)));
            }
        }
        out
    }
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("shape", &self.mesh.shape)
            .field("degree", &self.refelem.degree)
            .field("formulation", &self.refelem.formulation)
            .field("elements", &self.num_elements())
            .field("law", &self.law.name())
            .field("flux", &self.flux)
            .finish()
    }
}
