//! Quadrature rules on the reference interval and triangle.

use super::polynomials::legendre_classical;
use std::f64::consts::PI;

/// Points and positive weights on a reference domain.
///
/// Points are stored as `[r, s]`; interval rules leave `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference measure covered by the rule.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn apply(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }
}

fn newton<F: Fn(f64) -> (f64, f64)>(mut x: f64, f: F) -> f64 {
    for _ in 0..100 {
        let (v, dv) = f(x);
        let dx = v / dv;
        x -= dx;
        if dx.abs() < 1e-16 {
            break;
        }
    }
    x
}

/// `n`-point Gauss–Legendre rule, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let guess = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let x = newton(guess, |x| legendre_classical(x, n));
        let (_, dp) = legendre_classical(x, n);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    sort_rule(nodes, weights)
}

/// `n`-point Gauss–Lobatto rule (endpoints included), exact for degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> QuadratureRule {
    assert!(n >= 2);
    let p = n - 1;
    let pf = p as f64;
    let mut nodes = vec![-1.0; n];
    nodes[n - 1] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(n - 1).skip(1) {
        let guess = -(PI * i as f64 / pf).cos();
        // roots of P_p' via (1 - x^2) P_p'' = 2x P_p' - p(p+1) P_p
        *node = newton(guess, |x| {
            let (v, dv) = legendre_classical(x, p);
            let d2 = (2.0 * x * dv - pf * (pf + 1.0) * v) / (1.0 - x * x);
            (dv, d2)
        });
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (v, _) = legendre_classical(x, p);
            2.0 / (pf * (pf + 1.0) * v * v)
        })
        .collect();
    sort_rule(nodes, weights)
}

fn sort_rule(nodes: Vec<f64>, weights: Vec<f64>) -> QuadratureRule {
    let mut pairs: Vec<_> = nodes.into_iter().zip(weights).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadratureRule {
        points: pairs.iter().map(|(x, _)| [*x, 0.0]).collect(),
        weights: pairs.iter().map(|(_, w)| *w).collect(),
    }
}

/// Collapsed-coordinate (Duffy/Stroud) rule on the bi-unit triangle with `n`
/// Gauss–Legendre points per direction.
///
/// A degree-`p` polynomial becomes degree `p` in `a` and degree `p + 1` in `b`
/// after the Jacobian `(1 - b)/2`, so the rule is exact for total degree `2n - 2`.
/// Weights sum to the reference area 2.
pub fn triangle_collapsed(n: usize) -> QuadratureRule {
    let g = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (pb, wb) in g.points.iter().zip(&g.weights) {
        let b = pb[0];
        for (pa, wa) in g.points.iter().zip(&g.weights) {
            let a = pa[0];
            let r = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
            points.push([r, b]);
            weights.push(wa * wb * 0.5 * (1.0 - b));
        }
    }
    QuadratureRule { points, weights }
}

/// Triangle rule exact for total degree `degree`.
pub fn triangle_rule_exact_to(degree: usize) -> QuadratureRule {
    triangle_collapsed((degree + 3) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ r^p s^q over the bi-unit triangle, by mapping to the unit triangle
    /// where ∫ x^i y^j = i! j! / (i + j + 2)!.
    fn triangle_monomial(p: usize, q: usize) -> f64 {
        // r = 2x - 1, s = 2y - 1, dr ds = 4 dx dy
        let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
        let binom = |n: usize, k: usize| fact(n) / (fact(k) * fact(n - k));
        let mut total = 0.0;
        for i in 0..=p {
            for j in 0..=q {
                let coeff = binom(p, i)
                    * 2f64.powi(i as i32)
                    * (-1f64).powi((p - i) as i32)
                    * binom(q, j)
                    * 2f64.powi(j as i32)
                    * (-1f64).powi((q - j) as i32);
                total += coeff * fact(i) * fact(j) / fact(i + j + 2);
            }
        }
        4.0 * total
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..10 {
            let q = gauss_legendre(n);
            assert!((q.measure() - 2.0).abs() < 1e-14);
            for p in 0..2 * n {
                let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                let got = q.apply(|x| x[0].powi(p as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn gauss_lobatto_exactness_and_endpoints() {
        for n in 2..10 {
            let q = gauss_lobatto(n);
            assert_eq!(q.points[0][0], -1.0);
            assert_eq!(q.points[n - 1][0], 1.0);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for p in 0..=(2 * n - 3) {
                let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
                let got = q.apply(|x| x[0].powi(p as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn four_point_lobatto_nodes() {
        let q = gauss_lobatto(4);
        let inner = (1.0f64 / 5.0).sqrt();
        assert!((q.points[1][0] + inner).abs() < 1e-15);
        assert!((q.weights[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((q.weights[1] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_monomial_sweep() {
        for degree in 0..12 {
            let q = triangle_rule_exact_to(degree);
            assert!((q.measure() - 2.0).abs() < 1e-13);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for p in 0..=degree {
                for s in 0..=(degree - p) {
                    let got = q.apply(|x| x[0].powi(p as i32) * x[1].powi(s as i32));
                    let exact = triangle_monomial(p, s);
                    assert!(
                        (got - exact).abs() < 1e-12 * (1.0 + exact.abs()),
                        "deg {degree}: r^{p} s^{s}: {got} vs {exact}"
                    );
                }
            }
        }
    }
}
