//! Reference elements: basis, quadrature and the discrete operators built on them.
//!
//! Two formulations are supported:
//!
//! * **modal** — orthonormal Legendre (interval) or Koornwinder–Dubiner
//!   (triangle) basis with an over-integrating volume rule: `N + 2` Gauss–Legendre
//!   points on the interval, a collapsed Gauss rule exact for degree `2N` on
//!   the triangle. The mass matrix is the identity up to rounding.
//! * **nodal** — Lagrange basis on `N + 1` Gauss–Lobatto points with collocated
//!   quadrature (interval only). Coefficients are nodal values, `Vq = I`, and the
//!   mass matrix is the diagonal of quadrature weights.
//!
//! The reference triangle is the bi-unit triangle `(-1,-1)`, `(1,-1)`, `(-1,1)`,
//! so triangle volume weights sum to 2. Face `f` of the triangle runs from vertex
//! `f` to vertex `f + 1` (mod 3) and is parametrized by `t ∈ [-1, 1]`; face
//! rules are `N + 2`-point Gauss–Legendre in `t` with weights summing to 2.

pub mod polynomials;
pub mod quadrature;

use crate::linalg::Matrix;
use polynomials::{dubiner, dubiner_gradient, legendre, legendre_derivative, triangle_modes};
use quadrature::{gauss_legendre, gauss_lobatto, triangle_rule_exact_to, QuadratureRule};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Interval,
    Triangle,
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Interval => 1,
            Shape::Triangle => 2,
        }
    }

    pub fn num_faces(self) -> usize {
        match self {
            Shape::Interval => 2,
            Shape::Triangle => 3,
        }
    }

    pub fn vertices(self) -> &'static [[f64; 2]] {
        match self {
            Shape::Interval => &[[-1.0, 0.0], [1.0, 0.0]],
            Shape::Triangle => &[[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]],
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Interval => write!(f, "interval"),
            Shape::Triangle => write!(f, "triangle"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Formulation {
    Modal,
    Nodal,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formulation::Modal => write!(f, "modal"),
            Formulation::Nodal => write!(f, "nodal"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RefElemError {
    #[error("{formulation} formulation is not available on the {shape}")]
    Unsupported { shape: Shape, formulation: Formulation },
    #[error("expected {expected} point values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("volume quadrature is not exact enough for a degree-{degree} basis")]
    QuadratureTooWeak { degree: usize },
}

/// Basis, quadrature and discrete operators of one reference element.
///
/// All matrices are row-major. `vq` has one row per volume point and one
/// column per basis function; `vf` stacks the face points of every face.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    pub shape: Shape,
    pub formulation: Formulation,
    pub degree: usize,
    pub volume_quad: QuadratureRule,
    /// One rule per face, points in reference-element coordinates.
    pub face_quad: Vec<QuadratureRule>,
    /// Total polynomial degree of each basis function (modal) or `degree` (nodal).
    pub mode_degree: Vec<usize>,
    pub vq: Matrix,
    /// Reference gradient of the basis at volume points, one matrix per direction.
    pub vq_grad: Vec<Matrix>,
    /// Coefficient-to-coefficient reference differentiation, one per direction.
    pub dr: Vec<Matrix>,
    pub mass: Matrix,
    pub mass_inv: Matrix,
    /// Quadrature L² projection: point values → coefficients.
    pub pq: Matrix,
    pub vf: Matrix,
    /// `M⁻¹ (∂φ/∂r_a)ᵀ W`: weak derivative against volume point values.
    pub weak_grad: Vec<Matrix>,
    /// `M⁻¹ Vfᵀ W_f`: lifts face point values back into the element.
    pub lift: Matrix,
    nodal_inv_vandermonde: Option<Matrix>,
}

impl ReferenceElement {
    /// Build the reference element with the formulation's default quadrature.
    pub fn new(shape: Shape, degree: usize, formulation: Formulation) -> Result<Self, RefElemError> {
        match (shape, formulation) {
            (Shape::Interval, Formulation::Modal) => {
                Self::modal(shape, degree, gauss_legendre(degree + 2))
            }
            (Shape::Triangle, Formulation::Modal) => {
                Self::modal(shape, degree, triangle_rule_exact_to(2 * degree))
            }
            (Shape::Interval, Formulation::Nodal) => Self::nodal_interval(degree),
            (Shape::Triangle, Formulation::Nodal) => {
                Err(RefElemError::Unsupported { shape, formulation })
            }
        }
    }

    /// Modal element whose volume rule is exact to `quad_degree` (at least `2N`).
    pub fn with_quadrature_degree(
        shape: Shape,
        degree: usize,
        quad_degree: usize,
    ) -> Result<Self, RefElemError> {
        if quad_degree < 2 * degree {
            return Err(RefElemError::QuadratureTooWeak { degree });
        }
        let rule = match shape {
            Shape::Interval => gauss_legendre(quad_degree / 2 + 1),
            Shape::Triangle => triangle_rule_exact_to(quad_degree),
        };
        Self::modal(shape, degree, rule)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn num_basis(&self) -> usize {
        self.vq.cols()
    }

    pub fn num_volume_points(&self) -> usize {
        self.volume_quad.len()
    }

    pub fn num_faces(&self) -> usize {
        self.shape.num_faces()
    }

    pub fn face_points(&self) -> usize {
        self.face_quad[0].len()
    }

    /// Face weights stacked in the same order as the rows of `vf`.
    pub fn face_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.face_quad.iter().flat_map(|q| q.weights.iter().copied())
    }

    fn modal(shape: Shape, degree: usize, volume_quad: QuadratureRule) -> Result<Self, RefElemError> {
        let face_quad = face_rules(shape, degree);
        let (mode_degree, basis): (Vec<usize>, Vec<ModeFn>) = match shape {
            Shape::Interval => (0..=degree).map(|n| (n, ModeFn::Legendre(n))).unzip(),
            Shape::Triangle => triangle_modes(degree)
                .into_iter()
                .map(|(i, j)| (i + j, ModeFn::Dubiner(i, j)))
                .unzip(),
        };
        let np = basis.len();
        let dim = shape.dim();
        let tab = |pts: &[[f64; 2]]| Matrix::from_fn(pts.len(), np, |q, j| basis[j].value(pts[q]));
        let vq = tab(&volume_quad.points);
        let vq_grad = (0..dim)
            .map(|a| {
                Matrix::from_fn(volume_quad.len(), np, |q, j| {
                    basis[j].gradient(volume_quad.points[q])[a]
                })
            })
            .collect();
        let face_pts: Vec<[f64; 2]> = face_quad.iter().flat_map(|f| f.points.clone()).collect();
        let vf = tab(&face_pts);
        Self::assemble(
            shape,
            Formulation::Modal,
            degree,
            volume_quad,
            face_quad,
            mode_degree,
            vq,
            vq_grad,
            vf,
            None,
        )
    }

    fn nodal_interval(degree: usize) -> Result<Self, RefElemError> {
        if degree == 0 {
            return Err(RefElemError::Unsupported {
                shape: Shape::Interval,
                formulation: Formulation::Nodal,
            });
        }
        let volume_quad = gauss_lobatto(degree + 1);
        let np = degree + 1;
        let nodes: Vec<f64> = volume_quad.points.iter().map(|p| p[0]).collect();
        let vandermonde = Matrix::from_fn(np, np, |i, m| legendre(nodes[i], m));
        let vinv = vandermonde
            .try_inverse()
            .expect("Gauss-Lobatto Vandermonde matrix is nonsingular");
        let vq = Matrix::identity(np);
        let dvand = Matrix::from_fn(np, np, |i, m| legendre_derivative(nodes[i], m));
        let vq_grad = vec![dvand.matmul(&vinv)];
        let face_quad = face_rules(Shape::Interval, degree);
        let vf = Matrix::from_fn(2, np, |f, j| if (f == 0 && j == 0) || (f == 1 && j == np - 1) { 1.0 } else { 0.0 });
        Self::assemble(
            Shape::Interval,
            Formulation::Nodal,
            degree,
            volume_quad,
            face_quad,
            vec![degree; np],
            vq,
            vq_grad,
            vf,
            Some(vinv),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        shape: Shape,
        formulation: Formulation,
        degree: usize,
        volume_quad: QuadratureRule,
        face_quad: Vec<QuadratureRule>,
        mode_degree: Vec<usize>,
        vq: Matrix,
        vq_grad: Vec<Matrix>,
        vf: Matrix,
        nodal_inv_vandermonde: Option<Matrix>,
    ) -> Result<Self, RefElemError> {
        let w = &volume_quad.weights;
        let vtw = vq.transpose().scale_columns(w);
        let mass = vtw.matmul(&vq);
        let mass_inv = mass
            .try_inverse()
            .ok_or(RefElemError::QuadratureTooWeak { degree })?;
        let pq = mass_inv.matmul(&vtw);
        let dr = vq_grad.iter().map(|g| pq.matmul(g)).collect();
        let weak_grad = vq_grad
            .iter()
            .map(|g| mass_inv.matmul(&g.transpose().scale_columns(w)))
            .collect();
        let wf: Vec<f64> = face_quad.iter().flat_map(|q| q.weights.clone()).collect();
        let lift = mass_inv.matmul(&vf.transpose().scale_columns(&wf));
        Ok(Self {
            shape,
            formulation,
            degree,
            volume_quad,
            face_quad,
            mode_degree,
            vq,
            vq_grad,
            dr,
            mass,
            mass_inv,
            pq,
            vf,
            weak_grad,
            lift,
            nodal_inv_vandermonde,
        })
    }

    /// Basis values at an arbitrary reference point.
    pub fn eval_basis(&self, point: [f64; 2]) -> Vec<f64> {
        match (&self.nodal_inv_vandermonde, self.shape) {
            (Some(vinv), _) => {
                let modal: Vec<f64> = (0..=self.degree).map(|m| legendre(point[0], m)).collect();
                vinv.transpose().mul_vec(&modal)
            }
            (None, Shape::Interval) => (0..=self.degree).map(|n| legendre(point[0], n)).collect(),
            (None, Shape::Triangle) => triangle_modes(self.degree)
                .into_iter()
                .map(|(i, j)| dubiner(point[0], point[1], i, j))
                .collect(),
        }
    }

    /// Reference gradient of every basis function at a point, `[direction][basis]`.
    pub fn eval_basis_gradient(&self, point: [f64; 2]) -> Vec<Vec<f64>> {
        match (&self.nodal_inv_vandermonde, self.shape) {
            (Some(vinv), _) => {
                let modal: Vec<f64> = (0..=self.degree)
                    .map(|m| legendre_derivative(point[0], m))
                    .collect();
                vec![vinv.transpose().mul_vec(&modal)]
            }
            (None, Shape::Interval) => vec![(0..=self.degree)
                .map(|n| legendre_derivative(point[0], n))
                .collect()],
            (None, Shape::Triangle) => {
                let grads: Vec<(f64, f64)> = triangle_modes(self.degree)
                    .into_iter()
                    .map(|(i, j)| dubiner_gradient(point[0], point[1], i, j))
                    .collect();
                vec![
                    grads.iter().map(|g| g.0).collect(),
                    grads.iter().map(|g| g.1).collect(),
                ]
            }
        }
    }

    /// Quadrature L² projection of values given at the volume points.
    pub fn project(&self, point_values: &[f64]) -> Result<Vec<f64>, RefElemError> {
        self.check_len(point_values)?;
        Ok(self.pq.mul_vec(point_values))
    }

    /// `Σ w_i f_i` over the volume rule.
    pub fn integrate(&self, point_values: &[f64]) -> Result<f64, RefElemError> {
        self.check_len(point_values)?;
        Ok(crate::linalg::dot(&self.volume_quad.weights, point_values))
    }

    /// Coefficients → values at the volume points.
    pub fn evaluate(&self, coefficients: &[f64]) -> Vec<f64> {
        self.vq.mul_vec(coefficients)
    }

    /// Convert element coefficients to orthonormal-modal coefficients.
    ///
    /// Identity for the modal formulation; for the nodal formulation this is the
    /// Legendre transform of the nodal values.
    pub fn to_orthonormal_modes(&self, coefficients: &[f64]) -> Vec<f64> {
        match &self.nodal_inv_vandermonde {
            Some(vinv) => vinv.mul_vec(coefficients),
            None => coefficients.to_vec(),
        }
    }

    fn check_len(&self, values: &[f64]) -> Result<(), RefElemError> {
        if values.len() != self.num_volume_points() {
            return Err(RefElemError::LengthMismatch {
                expected: self.num_volume_points(),
                got: values.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum ModeFn {
    Legendre(usize),
    Dubiner(usize, usize),
}

impl ModeFn {
    fn value(self, p: [f64; 2]) -> f64 {
        match self {
            ModeFn::Legendre(n) => legendre(p[0], n),
            ModeFn::Dubiner(i, j) => dubiner(p[0], p[1], i, j),
        }
    }

    fn gradient(self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ModeFn::Legendre(n) => [legendre_derivative(p[0], n), 0.0],
            ModeFn::Dubiner(i, j) => {
                let (dr, ds) = dubiner_gradient(p[0], p[1], i, j);
                [dr, ds]
            }
        }
    }
}

fn face_rules(shape: Shape, degree: usize) -> Vec<QuadratureRule> {
    match shape {
        Shape::Interval => vec![
            QuadratureRule {
                points: vec![[-1.0, 0.0]],
                weights: vec![1.0],
            },
            QuadratureRule {
                points: vec![[1.0, 0.0]],
                weights: vec![1.0],
            },
        ],
        Shape::Triangle => {
            let g = gauss_legendre(degree + 2);
            let v = Shape::Triangle.vertices();
            (0..3)
                .map(|f| {
                    let a = v[f];
                    let b = v[(f + 1) % 3];
                    QuadratureRule {
                        points: g
                            .points
                            .iter()
                            .map(|t| {
                                let u = 0.5 * (1.0 + t[0]);
                                [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]
                            })
                            .collect(),
                        weights: g.weights.clone(),
                    }
                })
                .collect()
        }
    }
}
