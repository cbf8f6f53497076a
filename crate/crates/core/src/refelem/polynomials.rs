//! Orthonormal Jacobi polynomials and the Koornwinder–Dubiner triangle basis.
//!
//! Conventions follow the bi-unit reference triangle with vertices
//! `(-1,-1)`, `(1,-1)`, `(-1,1)` (area 2). Every basis here is orthonormal in
//! the unweighted L² inner product of its reference element.

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Normalized Jacobi polynomial `P_n^{(alpha, beta)}(x)`, `alpha`, `beta` integers.
///
/// Normalized so that `∫ (1-x)^alpha (1+x)^beta P_n(x)^2 dx = 1` on `[-1, 1]`.
pub fn jacobi(x: f64, alpha: usize, beta: usize, n: usize) -> f64 {
    let a = alpha as f64;
    let b = beta as f64;
    let gamma0 = 2f64.powf(a + b + 1.0) / (a + b + 1.0) * factorial(alpha) * factorial(beta)
        / factorial(alpha + beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let p1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut aold = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    let (mut pm1, mut p) = (p0, p1);
    for i in 1..n {
        let fi = i as f64;
        let h1 = 2.0 * fi + a + b;
        let anew = 2.0 / (h1 + 2.0)
            * ((fi + 1.0) * (fi + 1.0 + a + b) * (fi + 1.0 + a) * (fi + 1.0 + b)
                / (h1 + 1.0)
                / (h1 + 3.0))
                .sqrt();
        let bnew = -(a * a - b * b) / h1 / (h1 + 2.0);
        let pnext = (-aold * pm1 + (x - bnew) * p) / anew;
        pm1 = p;
        p = pnext;
        aold = anew;
    }
    p
}

/// Derivative of [`jacobi`].
pub fn jacobi_derivative(x: f64, alpha: usize, beta: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (nf * (nf + (alpha + beta) as f64 + 1.0)).sqrt() * jacobi(x, alpha + 1, beta + 1, n - 1)
}

/// Orthonormal Legendre polynomial on `[-1, 1]`.
pub fn legendre(x: f64, n: usize) -> f64 {
    jacobi(x, 0, 0, n)
}

pub fn legendre_derivative(x: f64, n: usize) -> f64 {
    jacobi_derivative(x, 0, 0, n)
}

/// Classical (unnormalized, `P_n(1) = 1`) Legendre polynomial and its derivative.
pub fn legendre_classical(x: f64, n: usize) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm1, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
    }
    let nf = n as f64;
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p - pm1) / (x * x - 1.0)
    };
    (p, dp)
}

/// Collapsed coordinates of a reference-triangle point.
pub fn rs_to_ab(r: f64, s: f64) -> (f64, f64) {
    let a = if (1.0 - s).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    (a, s)
}

/// `(i, j)` index pairs of the triangle basis, ordered by total degree.
pub fn triangle_modes(degree: usize) -> Vec<(usize, usize)> {
    let mut modes = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
    for d in 0..=degree {
        for i in (0..=d).rev() {
            modes.push((i, d - i));
        }
    }
    modes
}

/// Koornwinder–Dubiner mode `(i, j)` at `(r, s)`.
pub fn dubiner(r: f64, s: f64, i: usize, j: usize) -> f64 {
    let (a, b) = rs_to_ab(r, s);
    std::f64::consts::SQRT_2
        * jacobi(a, 0, 0, i)
        * jacobi(b, 2 * i + 1, 0, j)
        * (1.0 - b).powi(i as i32)
}

/// Gradient `(d/dr, d/ds)` of Koornwinder–Dubiner mode `(i, j)`.
pub fn dubiner_gradient(r: f64, s: f64, i: usize, j: usize) -> (f64, f64) {
    let (a, b) = rs_to_ab(r, s);
    let fa = jacobi(a, 0, 0, i);
    let dfa = jacobi_derivative(a, 0, 0, i);
    let gb = jacobi(b, 2 * i + 1, 0, j);
    let dgb = jacobi_derivative(b, 2 * i + 1, 0, j);
    let half = 0.5 * (1.0 - b);

    let mut dr = dfa * gb;
    if i > 0 {
        dr *= half.powi(i as i32 - 1);
    }
    let mut ds = dfa * (gb * (0.5 * (1.0 + a)));
    if i > 0 {
        ds *= half.powi(i as i32 - 1);
    }
    let mut tmp = dgb * half.powi(i as i32);
    if i > 0 {
        tmp -= 0.5 * i as f64 * gb * half.powi(i as i32 - 1);
    }
    ds += fa * tmp;

    let scale = 2f64.powf(i as f64 + 0.5);
    (dr * scale, ds * scale)
}
