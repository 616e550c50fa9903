//! Small planar geometry helpers shared across the crate.

use nalgebra::Vector2;

/// Points and vectors in the plane share one representation.
pub type Point = Vector2<f64>;

/// Region label with respect to the (approximate) interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    /// Side of a signed level-set value; zero is counted on the plus side.
    pub fn of_value(phi: f64) -> Side {
        if phi < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];
}

/// z-component of the cross product.
#[inline]
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counterclockwise rotation by π/2: `(a, b) ↦ (-b, a)`.
#[inline]
pub fn rot90(v: &Point) -> Point {
    Point::new(-v.y, v.x)
}

/// Signed area, positive for counterclockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    // fan from the first vertex avoids cancellation far from the origin
    let o = poly[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        twice += cross(&(poly[i] - o), &(poly[i + 1] - o));
    }
    0.5 * twice
}

pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// degenerate input.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let area = signed_area(poly);
    if area.abs() < 1e-300 || n < 3 {
        let mut s = Point::zeros();
        for p in poly {
            s += p;
        }
        return s / n.max(1) as f64;
    }
    let o = poly[0];
    let mut c = Point::zeros();
    for i in 1..n - 1 {
        let (p, q) = (poly[i] - o, poly[i + 1] - o);
        c += (p + q) * cross(&p, &q);
    }
    o + c / (6.0 * area)
}

pub fn diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Inclusive point-in-convex-polygon test for counterclockwise polygons.
pub fn in_convex_polygon(poly: &[Point], x: &Point, tol: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        let e = b - a;
        cross(&e, &(x - a)) >= -tol * e.norm()
    })
}

/// Distance from `x` to the segment `[a, b]`.
pub fn point_segment_distance(x: &Point, a: &Point, b: &Point) -> f64 {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&e) / len2).clamp(0.0, 1.0);
    (x - (a + e * t)).norm()
}

/// Barycentric-coordinate gradients of a triangle.
pub fn barycentric_gradients(p: &[Point; 3]) -> [Point; 3] {
    let twice_area = cross(&(p[1] - p[0]), &(p[2] - p[0]));
    let mut g = [Point::zeros(); 3];
    for k in 0..3 {
        let a = &p[(k + 1) % 3];
        let b = &p[(k + 2) % 3];
        // outward normal of the opposite edge scaled by its length, negated
        g[k] = Point::new(a.y - b.y, b.x - a.x) / twice_area;
    }
    g
}

/// Barycentric coordinates of `x` in triangle `p`.
pub fn barycentric(p: &[Point; 3], x: &Point) -> [f64; 3] {
    let g = barycentric_gradients(p);
    let l1 = g[1].dot(&(x - p[0]));
    let l2 = g[2].dot(&(x - p[0]));
    [1.0 - l1 - l2, l1, l2]
}
