//! Uniform interval and triangle meshes with periodic or wall boundaries.
//!
//! Triangles come from splitting each cell of a structured grid along the
//! lower-left to upper-right diagonal. Elements are counterclockwise, so a
//! shared edge is traversed in opposite directions by its two owners and face
//! quadrature points pair up in reversed order.

use crate::refelem::Shape;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Periodic,
    Wall,
}

/// What lies across a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceNeighbor {
    Interior { element: usize, face: usize },
    Wall,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub neighbor: FaceNeighbor,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Physical face measure per unit reference face weight.
    pub surface_jacobian: f64,
    /// LDG switch, one of -1, 0, +1.
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<[f64; 2]>,
    /// Determinant of the affine map, i.e. physical measure / reference measure.
    pub jacobian: f64,
    /// `rx[a][b] = ∂r_a / ∂x_b`.
    pub rx: [[f64; 2]; 2],
    /// Element diameter: length in 1D, longest edge on triangles.
    pub h: f64,
}

impl ElementGeometry {
    /// Physical coordinates of a reference point.
    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        let v = &self.vertices;
        match v.len() {
            2 => [v[0][0] + 0.5 * (r[0] + 1.0) * (v[1][0] - v[0][0]), 0.0],
            _ => {
                let a = 0.5 * (r[0] + 1.0);
                let b = 0.5 * (r[1] + 1.0);
                [
                    v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                    v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]),
                ]
            }
        }
    }

    pub fn measure(&self, reference_measure: f64) -> f64 {
        self.jacobian * reference_measure
    }
}

/// How LDG switches are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SwitchRule {
    /// `β = sign(v0 · n)`.
    Ldg([f64; 2]),
    /// `β = 0`.
    Br1,
}

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("need at least 2 elements per direction, got {0}")]
    TooFewElements(usize),
    #[error("degenerate domain [{lo:?}, {hi:?}]")]
    DegenerateDomain { lo: [f64; 2], hi: [f64; 2] },
    #[error("switch vector is orthogonal to face {face} of element {element}")]
    OrthogonalSwitch { element: usize, face: usize },
    #[error("element {0} has no face with beta = +1")]
    NoUpwindFace(usize),
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub shape: Shape,
    pub elements: Vec<ElementGeometry>,
    /// Indexed by `element * num_faces + local_face`.
    pub faces: Vec<Face>,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub boundary: [BoundaryKind; 2],
}

impl Mesh {
    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.shape.num_faces()
    }

    pub fn face(&self, element: usize, local: usize) -> &Face {
        &self.faces[element * self.num_faces() + local]
    }

    pub fn h_min(&self) -> f64 {
        self.elements.iter().map(|e| e.h).fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.elements.iter().map(|e| e.h).fold(0.0, f64::max)
    }

    /// Set `β` on every face; wall faces get `β = 0` since they carry no jump.
    pub fn assign_ldg_switches(&mut self, rule: SwitchRule) -> Result<(), MeshError> {
        let nf = self.num_faces();
        for (idx, face) in self.faces.iter_mut().enumerate() {
            face.beta = match (rule, face.neighbor) {
                (SwitchRule::Br1, _) | (_, FaceNeighbor::Wall) => 0.0,
                (SwitchRule::Ldg(v0), FaceNeighbor::Interior { .. }) => {
                    let d = v0[0] * face.normal[0] + v0[1] * face.normal[1];
                    if d.abs() < 1e-12 {
                        return Err(MeshError::OrthogonalSwitch {
                            element: idx / nf,
                            face: idx % nf,
                        });
                    }
                    d.signum()
                }
            };
        }
        if let SwitchRule::Ldg(_) = rule {
            for k in 0..self.num_elements() {
                if !(0..nf).any(|f| self.face(k, f).beta > 0.0) {
                    return Err(MeshError::NoUpwindFace(k));
                }
            }
        }
        Ok(())
    }

    pub fn with_switches(mut self, rule: SwitchRule) -> Result<Self, MeshError> {
        self.assign_ldg_switches(rule)?;
        Ok(self)
    }

    /// Plain-text summary: element count, element sizes and β histogram.
    pub fn summary(&self) -> String {
        let mut counts = [0usize; 3];
        for f in &self.faces {
            counts[(f.beta as i64 + 1) as usize] += 1;
        }
        let walls = self
            .faces
            .iter()
            .filter(|f| f.neighbor == FaceNeighbor::Wall)
            .count();
        let mut s = String::new();
        let _ = writeln!(s, "shape: {}", self.shape);
        let _ = writeln!(s, "elements: {}", self.num_elements());
        let _ = writeln!(s, "domain: {:?} x {:?}", self.lo, self.hi);
        let _ = writeln!(s, "h_min: {:.6e}", self.h_min());
        let _ = writeln!(s, "h_max: {:.6e}", self.h_max());
        let _ = writeln!(s, "wall faces: {walls}");
        let _ = writeln!(
            s,
            "beta histogram: -1: {}, 0: {}, +1: {}",
            counts[0], counts[1], counts[2]
        );
        s
    }
}

/// `K` equal elements on `[a, b]`.
pub fn uniform_interval_mesh(
    a: f64,
    b: f64,
    k: usize,
    boundary: BoundaryKind,
) -> Result<Mesh, MeshError> {
    if k < 2 {
        return Err(MeshError::TooFewElements(k));
    }
    if !(a < b) {
        return Err(MeshError::DegenerateDomain {
            lo: [a, 0.0],
            hi: [b, 0.0],
        });
    }
    let h = (b - a) / k as f64;
    let node = |i: usize| if i == k { b } else { a + h * i as f64 };
    let mut elements = Vec::with_capacity(k);
    let mut faces = Vec::with_capacity(2 * k);
    for e in 0..k {
        let (x0, x1) = (node(e), node(e + 1));
        let len = x1 - x0;
        elements.push(ElementGeometry {
            vertices: vec![[x0, 0.0], [x1, 0.0]],
            jacobian: 0.5 * len,
            rx: [[2.0 / len, 0.0], [0.0, 0.0]],
            h: len,
        });
        let left = match (e, boundary) {
            (0, BoundaryKind::Wall) => FaceNeighbor::Wall,
            _ => FaceNeighbor::Interior {
                element: (e + k - 1) % k,
                face: 1,
            },
        };
        let right = match (e + 1 == k, boundary) {
            (true, BoundaryKind::Wall) => FaceNeighbor::Wall,
            _ => FaceNeighbor::Interior {
                element: (e + 1) % k,
                face: 0,
            },
        };
        for (neighbor, nx) in [(left, -1.0), (right, 1.0)] {
            faces.push(Face {
                neighbor,
                normal: [nx, 0.0],
                surface_jacobian: 1.0,
                beta: 0.0,
            });
        }
    }
    Ok(Mesh {
        shape: Shape::Interval,
        elements,
        faces,
        lo: [a, 0.0],
        hi: [b, 0.0],
        boundary: [boundary, boundary],
    })
}

/// `2 Kx Ky` triangles on the rectangle `[lo, hi]`; `boundary[0]` applies to the
/// x-extremes, `boundary[1]` to the y-extremes.
pub fn uniform_triangle_mesh(
    lo: [f64; 2],
    hi: [f64; 2],
    kx: usize,
    ky: usize,
    boundary: [BoundaryKind; 2],
) -> Result<Mesh, MeshError> {
    if kx < 2 || ky < 2 {
        return Err(MeshError::TooFewElements(kx.min(ky)));
    }
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(MeshError::DegenerateDomain { lo, hi });
    }
    let dx = (hi[0] - lo[0]) / kx as f64;
    let dy = (hi[1] - lo[1]) / ky as f64;
    let px = |i: usize| if i == kx { hi[0] } else { lo[0] + dx * i as f64 };
    let py = |j: usize| if j == ky { hi[1] } else { lo[1] + dy * j as f64 };
    // Lower triangle of cell (i, j) is 2 (j kx + i), upper is that + 1.
    let lower = |i: usize, j: usize| 2 * (j * kx + i);
    let upper = |i: usize, j: usize| 2 * (j * kx + i) + 1;
    let wrap = |idx: isize, n: usize, kind: BoundaryKind| -> Option<usize> {
        if idx >= 0 && (idx as usize) < n {
            Some(idx as usize)
        } else if kind == BoundaryKind::Periodic {
            Some(idx.rem_euclid(n as isize) as usize)
        } else {
            None
        }
    };

    let mut elements = Vec::with_capacity(2 * kx * ky);
    let mut faces = Vec::with_capacity(6 * kx * ky);
    for j in 0..ky {
        for i in 0..kx {
            let v00 = [px(i), py(j)];
            let v10 = [px(i + 1), py(j)];
            let v11 = [px(i + 1), py(j + 1)];
            let v01 = [px(i), py(j + 1)];
            let below = wrap(j as isize - 1, ky, boundary[1]);
            let above = wrap(j as isize + 1, ky, boundary[1]);
            let left = wrap(i as isize - 1, kx, boundary[0]);
            let right = wrap(i as isize + 1, kx, boundary[0]);
            let interior = |e: Option<usize>, face: usize| match e {
                Some(element) => FaceNeighbor::Interior { element, face },
                None => FaceNeighbor::Wall,
            };

            let lower_neighbors = [
                interior(below.map(|jb| upper(i, jb)), 1),
                interior(right.map(|ir| upper(ir, j)), 2),
                interior(Some(upper(i, j)), 0),
            ];
            let upper_neighbors = [
                interior(Some(lower(i, j)), 2),
                interior(above.map(|ja| lower(i, ja)), 0),
                interior(left.map(|il| lower(il, j)), 1),
            ];
            for (verts, neighbors) in [
                ([v00, v10, v11], lower_neighbors),
                ([v00, v11, v01], upper_neighbors),
            ] {
                let (geom, local_faces) = triangle_geometry(verts, neighbors);
                elements.push(geom);
                faces.extend(local_faces);
            }
        }
    }
    Ok(Mesh {
        shape: Shape::Triangle,
        elements,
        faces,
        lo,
        hi,
        boundary,
    })
}

fn triangle_geometry(v: [[f64; 2]; 3], neighbors: [FaceNeighbor; 3]) -> (ElementGeometry, Vec<Face>) {
    let xr = 0.5 * (v[1][0] - v[0][0]);
    let xs = 0.5 * (v[2][0] - v[0][0]);
    let yr = 0.5 * (v[1][1] - v[0][1]);
    let ys = 0.5 * (v[2][1] - v[0][1]);
    let jac = xr * ys - xs * yr;
    let rx = [[ys / jac, -xs / jac], [-yr / jac, xr / jac]];
    let mut h: f64 = 0.0;
    let faces = (0..3)
        .map(|f| {
            let a = v[f];
            let b = v[(f + 1) % 3];
            let (tx, ty) = (b[0] - a[0], b[1] - a[1]);
            let len = tx.hypot(ty);
            h = h.max(len);
            Face {
                neighbor: neighbors[f],
                // counterclockwise, so the outward normal is the edge rotated clockwise
                normal: [ty / len, -tx / len],
                surface_jacobian: 0.5 * len,
                beta: 0.0,
            }
        })
        .collect();
    (
        ElementGeometry {
            vertices: v.to_vec(),
            jacobian: jac,
            rx,
            h,
        },
        faces,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_involution(mesh: &Mesh) {
        let nf = mesh.num_faces();
        for k in 0..mesh.num_elements() {
            for f in 0..nf {
                let face = mesh.face(k, f);
                if let FaceNeighbor::Interior { element, face: g } = face.neighbor {
                    let back = mesh.face(element, g);
                    assert_eq!(back.neighbor, FaceNeighbor::Interior { element: k, face: f });
                    assert!((back.normal[0] + face.normal[0]).abs() < 1e-14);
                    assert!((back.normal[1] + face.normal[1]).abs() < 1e-14);
                    assert!((back.surface_jacobian - face.surface_jacobian).abs() < 1e-14);
                    assert_eq!(back.beta, -face.beta);
                }
            }
        }
    }

    #[test]
    fn interval_mesh_sizes() {
        let m = uniform_interval_mesh(-1.0, 1.0, 80, BoundaryKind::Periodic).unwrap();
        assert_eq!(m.num_elements(), 80);
        assert!((m.h_min() - 0.025).abs() < 1e-15 && (m.h_max() - 0.025).abs() < 1e-15);
        let m = uniform_interval_mesh(-5.0, 5.0, 100, BoundaryKind::Periodic).unwrap();
        assert!((m.h_max() - 0.1).abs() < 1e-14);
        let total: f64 = m.elements.iter().map(|e| e.h).sum();
        assert!((total - 10.0).abs() < 1e-14);
        check_involution(&m);
    }

    #[test]
    fn interval_mesh_errors() {
        assert_eq!(
            uniform_interval_mesh(0.0, 1.0, 1, BoundaryKind::Periodic).unwrap_err(),
            MeshError::TooFewElements(1)
        );
        assert!(uniform_interval_mesh(1.0, 1.0, 4, BoundaryKind::Periodic).is_err());
    }

    #[test]
    fn one_dimensional_switches() {
        let m = uniform_interval_mesh(0.0, 1.0, 5, BoundaryKind::Periodic)
            .unwrap()
            .with_switches(SwitchRule::Ldg([1.0, 0.0]))
            .unwrap();
        for k in 0..5 {
            assert_eq!(m.face(k, 0).beta, -1.0);
            assert_eq!(m.face(k, 1).beta, 1.0);
        }
        check_involution(&m);
    }

    #[test]
    fn wall_interval_ends() {
        let m = uniform_interval_mesh(0.0, 1.0, 3, BoundaryKind::Wall).unwrap();
        assert_eq!(m.face(0, 0).neighbor, FaceNeighbor::Wall);
        assert_eq!(m.face(2, 1).neighbor, FaceNeighbor::Wall);
        check_involution(&m);
    }

    #[test]
    fn triangle_mesh_counts_and_area() {
        let m = uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], 30, 30, [BoundaryKind::Periodic; 2]).unwrap();
        assert_eq!(m.num_elements(), 1800);
        let area: f64 = m.elements.iter().map(|e| e.measure(2.0)).sum();
        assert!((area - 4.0).abs() < 1e-12);
        assert!(m.elements.iter().all(|e| e.jacobian > 0.0));
        check_involution(&m);

        let m = uniform_triangle_mesh(
            [0.0, 0.0],
            [2.0, 1.0],
            128,
            64,
            [BoundaryKind::Periodic, BoundaryKind::Wall],
        )
        .unwrap();
        assert_eq!(m.num_elements(), 16384);
        let walls = m.faces.iter().filter(|f| f.neighbor == FaceNeighbor::Wall).count();
        assert_eq!(walls, 2 * 128);
        for f in m.faces.iter().filter(|f| f.neighbor == FaceNeighbor::Wall) {
            assert_eq!(f.normal[0], 0.0);
            assert_eq!(f.normal[1].abs(), 1.0);
        }
        let area: f64 = m.elements.iter().map(|e| e.measure(2.0)).sum();
        assert!((area - 2.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_switches_have_upwind_face() {
        let m = uniform_triangle_mesh([-1.0, -1.0], [1.0, 1.0], 4, 4, [BoundaryKind::Periodic; 2])
            .unwrap()
            .with_switches(SwitchRule::Ldg([2.0, 1.0]))
            .unwrap();
        check_involution(&m);
        let br1 = m.clone().with_switches(SwitchRule::Br1).unwrap();
        assert!(br1.faces.iter().all(|f| f.beta == 0.0));
        // axis-aligned v0 = (1, 0) is orthogonal to the horizontal edges
        let err = m.with_switches(SwitchRule::Ldg([1.0, 0.0])).unwrap_err();
        assert!(matches!(err, MeshError::OrthogonalSwitch { .. }));
    }

    #[test]
    fn shared_edges_match_physically() {
        // the vertex pair of a face, seen from the neighbor, is reversed
        // (up to a periodic shift)
        let m = uniform_triangle_mesh([0.0, 0.0], [2.0, 1.0], 3, 2, [BoundaryKind::Periodic; 2]).unwrap();
        let period = [2.0, 1.0];
        let same = |a: [f64; 2], b: [f64; 2]| {
            (0..2).all(|d| {
                let diff = (a[d] - b[d]) / period[d];
                (diff - diff.round()).abs() < 1e-12
            })
        };
        for k in 0..m.num_elements() {
            for f in 0..3 {
                if let FaceNeighbor::Interior { element, face } = m.face(k, f).neighbor {
                    let v = &m.elements[k].vertices;
                    let w = &m.elements[element].vertices;
                    assert!(same(v[f], w[(face + 1) % 3]));
                    assert!(same(v[(f + 1) % 3], w[face]));
                }
            }
        }
    }

    #[test]
    fn affine_map_and_inverse() {
        let m = uniform_triangle_mesh([0.0, 0.0], [1.0, 2.0], 2, 3, [BoundaryKind::Wall; 2]).unwrap();
        for e in &m.elements {
            let h = 1e-6;
            let x0 = e.map([0.1, -0.3]);
            let xr = e.map([0.1 + h, -0.3]);
            let xs = e.map([0.1, -0.3 + h]);
            let jm = [[(xr[0] - x0[0]) / h, (xs[0] - x0[0]) / h], [(xr[1] - x0[1]) / h, (xs[1] - x0[1]) / h]];
            // rx * J = I
            for a in 0..2 {
                for b in 0..2 {
                    let v: f64 = (0..2).map(|c| e.rx[a][c] * jm[c][b]).sum();
                    assert!((v - if a == b { 1.0 } else { 0.0 }).abs() < 1e-8);
                }
            }
        }
        let s = m.summary();
        assert!(s.contains("elements: 12"));
    }
}
