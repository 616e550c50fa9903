//! Quadrature on triangles, convex polygons and segments.

use crate::geometry::{diameter, signed_area, Point};

/// Points with weights in physical units (area or length).
#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    fn append(&mut self, other: QuadratureRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// Highest polynomial degree supported on triangles and polygons.
pub const MAX_TRIANGLE_DEGREE: usize = 6;

/// Symmetric rules on the reference triangle as (barycentric orbit, weight),
/// weights normalized to sum to one.
fn reference_triangle_rule(degree: usize) -> Vec<([f64; 3], f64)> {
    fn orbit3(a: f64, w: f64) -> Vec<([f64; 3], f64)> {
        let b = 1.0 - 2.0 * a;
        vec![([a, a, b], w), ([a, b, a], w), ([b, a, a], w)]
    }
    fn orbit6(a: f64, b: f64, w: f64) -> Vec<([f64; 3], f64)> {
        let c = 1.0 - a - b;
        vec![
            ([a, b, c], w),
            ([a, c, b], w),
            ([b, a, c], w),
            ([b, c, a], w),
            ([c, a, b], w),
            ([c, b, a], w),
        ]
    }
    let third = 1.0 / 3.0;
    match degree {
        0 | 1 => vec![([third, third, third], 1.0)],
        2 => orbit3(1.0 / 6.0, third),
        3 | 4 => {
            let mut r = orbit3(0.445_948_490_915_965, 0.223_381_589_678_011);
            r.extend(orbit3(0.091_576_213_509_771, 0.109_951_743_655_322));
            r
        }
        5 => {
            let mut r = vec![([third, third, third], 0.225)];
            r.extend(orbit3(0.470_142_064_105_115, 0.132_394_152_788_506));
            r.extend(orbit3(0.101_286_507_323_456, 0.125_939_180_544_827));
            r
        }
        _ => {
            let mut r = orbit3(0.249_286_745_170_910, 0.116_786_275_726_379);
            r.extend(orbit3(0.063_089_014_491_502, 0.050_844_906_370_207));
            r.extend(orbit6(
                0.310_352_451_033_784,
                0.053_145_049_844_817,
                0.082_851_075_618_374,
            ));
            r
        }
    }
}

/// Symmetric Gauss rule on a triangle, exact for polynomials of the given degree
/// (capped at [`MAX_TRIANGLE_DEGREE`]).
pub fn triangle_quadrature(p: &[Point; 3], degree: usize) -> QuadratureRule {
    let area = 0.5 * crate::geometry::cross(&(p[1] - p[0]), &(p[2] - p[0]));
    let mut rule = QuadratureRule::default();
    for (l, w) in reference_triangle_rule(degree) {
        rule.points.push(p[0] * l[0] + p[1] * l[1] + p[2] * l[2]);
        rule.weights.push(w * area);
    }
    rule
}

/// Fan triangulation from vertex 0 with a symmetric rule on each fan
/// triangle. Degenerate polygons (area below `1e-14 · diam²`) give an empty rule.
pub fn polygon_quadrature(poly: &[Point], degree: usize) -> QuadratureRule {
    let mut rule = QuadratureRule::default();
    if poly.len() < 3 {
        return rule;
    }
    let d = diameter(poly);
    if signed_area(poly) < 1e-14 * d * d {
        return rule;
    }
    for k in 1..poly.len() - 1 {
        let tri = [poly[0], poly[k], poly[k + 1]];
        if crate::geometry::triangle_area(&tri[0], &tri[1], &tri[2]) > 0.0 {
            rule.append(triangle_quadrature(&tri, degree));
        }
    }
    rule
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule on the segment `[a, b]`, exact to the given degree.
/// A zero-length segment gives an empty rule.
pub fn edge_quadrature(a: &Point, b: &Point, degree: usize) -> QuadratureRule {
    let len = (b - a).norm();
    if len == 0.0 {
        return QuadratureRule::default();
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    QuadratureRule {
        points: x.iter().map(|s| a + (b - a) * (0.5 * (s + 1.0))).collect(),
        weights: w.iter().map(|wi| 0.5 * len * wi).collect(),
    }
}
