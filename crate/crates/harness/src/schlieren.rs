//! Numerical Schlieren map `exp(−10 (g − g_min) / (g_max − g_min))`, `g = |∇ρ|`.

use ecav_core::dgcore::{Discretization, SolutionField};
use ecav_core::refelem::Shape;

/// Reference points used for field dumps: `n` per direction, strictly inside the element.
pub fn plot_points(shape: Shape, n: usize) -> Vec<[f64; 2]> {
    let n = n.max(1);
    match shape {
        Shape::Interval => (0..n).map(|i| [-1.0 + 2.0 * (i as f64 + 0.5) / n as f64, 0.0]).collect(),
        Shape::Triangle => {
            let mut pts = Vec::new();
            for j in 0..n {
                for i in 0..n - j {
                    pts.push([
                        -1.0 + 2.0 * (i as f64 + 1.0 / 3.0) / n as f64,
                        -1.0 + 2.0 * (j as f64 + 1.0 / 3.0) / n as f64,
                    ]);
                }
            }
            pts
        }
    }
}

/// `|∇ρ|` at the plot points of every element, density taken as variable 0.
pub fn density_gradient(disc: &Discretization, field: &SolutionField, points: &[[f64; 2]]) -> Vec<([f64; 2], f64)> {
    let d = disc.dim();
    let grads: Vec<Vec<Vec<f64>>> = points.iter().map(|&r| disc.refelem.eval_basis_gradient(r)).collect();
    let mut out = Vec::with_capacity(disc.num_elements() * points.len());
    for k in 0..disc.num_elements() {
        let g = &disc.mesh.elements[k];
        let c = field.coefficients(k, 0);
        for (r, dphi) in points.iter().zip(&grads) {
            let reference: Vec<f64> = (0..d).map(|a| dphi[a].iter().zip(c).map(|(p, c)| p * c).sum()).collect();
            let mut norm2 = 0.0;
            for m in 0..d {
                let gm: f64 = (0..d).map(|a| g.rx[a][m] * reference[a]).sum();
                norm2 += gm * gm;
            }
            out.push((g.map(*r), norm2.sqrt()));
        }
    }
    out
}

/// Maps gradient magnitudes to `(0, 1]`; a constant field maps to 1.
pub fn schlieren_values(g: &[f64]) -> Vec<f64> {
    let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![1.0; g.len()];
    }
    g.iter().map(|&v| (-10.0 * (v - lo) / (hi - lo)).exp()).collect()
}

pub fn schlieren(disc: &Discretization, field: &SolutionField, points_per_direction: usize) -> Vec<([f64; 2], f64)> {
    let pts = plot_points(disc.mesh.shape, points_per_direction);
    let grad = density_gradient(disc, field, &pts);
    let g: Vec<f64> = grad.iter().map(|p| p.1).collect();
    grad.iter().map(|p| p.0).zip(schlieren_values(&g)).collect()
}
