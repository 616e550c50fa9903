//! Classical local matrices on non-interface triangles: linear Lagrange (P₁)
//! and lowest-order Nédélec (ND₀) elements.
//!
//! ND₀ local edge `k` runs from vertex `k` to vertex `k + 1` (counterclockwise)
//! with basis `φ_k = |e_k|(λ_k ∇λ_{k+1} − λ_{k+1} ∇λ_k)`, so that the average
//! tangential component of `φ_k` on `e_k` is one.

use nalgebra::Matrix3;

use crate::geometry::{barycentric, barycentric_gradients, Point};
use crate::quadrature::triangle_quadrature;

/// `β ∫_K ∇λ_i·∇λ_j`.
pub fn p1_stiffness(p: &[Point; 3], beta: f64) -> Matrix3<f64> {
    let g = barycentric_gradients(p);
    let area = crate::geometry::triangle_area(&p[0], &p[1], &p[2]);
    Matrix3::from_fn(|i, j| beta * area * g[i].dot(&g[j]))
}

/// `∫_K f λ_i` with a rule of the given degree.
pub fn p1_load(p: &[Point; 3], f: &dyn Fn(&Point) -> f64, degree: usize) -> [f64; 3] {
    let rule = triangle_quadrature(p, degree);
    let mut load = [0.0; 3];
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let lambda = barycentric(p, x);
        let fx = f(x);
        for i in 0..3 {
            load[i] += w * fx * lambda[i];
        }
    }
    load
}

pub fn nedelec_basis(p: &[Point; 3], k: usize, x: &Point) -> Point {
    let g = barycentric_gradients(p);
    let lambda = barycentric(p, x);
    let (a, b) = (k, (k + 1) % 3);
    let length = (p[b] - p[a]).norm();
    (g[b] * lambda[a] - g[a] * lambda[b]) * length
}

/// Constant curl of each local basis function, `|e_k| / |K|`.
pub fn nedelec_curls(p: &[Point; 3]) -> [f64; 3] {
    let area = crate::geometry::triangle_area(&p[0], &p[1], &p[2]);
    std::array::from_fn(|k| (p[(k + 1) % 3] - p[k]).norm() / area)
}

pub fn nedelec_curl_curl(p: &[Point; 3], alpha: f64) -> Matrix3<f64> {
    let area = crate::geometry::triangle_area(&p[0], &p[1], &p[2]);
    let c = nedelec_curls(p);
    Matrix3::from_fn(|i, j| alpha * area * c[i] * c[j])
}

/// `β ∫_K φ_i·φ_j`, exact (degree-2 rule).
pub fn nedelec_mass(p: &[Point; 3], beta: f64) -> Matrix3<f64> {
    let rule = triangle_quadrature(p, 2);
    let mut m = Matrix3::zeros();
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let phi: [Point; 3] = std::array::from_fn(|k| nedelec_basis(p, k, x));
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += beta * w * phi[i].dot(&phi[j]);
            }
        }
    }
    m
}

pub fn nedelec_load(p: &[Point; 3], f: &dyn Fn(&Point) -> Point, degree: usize) -> [f64; 3] {
    let rule = triangle_quadrature(p, degree);
    let mut load = [0.0; 3];
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        let fx = f(x);
        for (k, l) in load.iter_mut().enumerate() {
            *l += w * fx.dot(&nedelec_basis(p, k, x));
        }
    }
    load
}

/// Field of local ND₀ coefficients `d` (element orientation) at `x`.
pub fn nedelec_eval(p: &[Point; 3], d: &[f64; 3], x: &Point) -> Point {
    (0..3).map(|k| nedelec_basis(p, k, x) * d[k]).sum()
}
