//! Level-set description of the interface. Negative values mark Ω⁻,
//! positive values Ω⁺.

use crate::geometry::{Point, Side};

pub trait LevelSet: Send + Sync {
    fn value(&self, x: &Point) -> f64;

    /// Gradient of the level set. Only used for diagnostics; the default is a
    /// central difference.
    fn gradient(&self, x: &Point) -> Point {
        let d = 1e-7;
        let ex = Point::new(d, 0.0);
        let ey = Point::new(0.0, d);
        Point::new(
            (self.value(&(x + ex)) - self.value(&(x - ex))) / (2.0 * d),
            (self.value(&(x + ey)) - self.value(&(x - ey))) / (2.0 * d),
        )
    }

    fn side(&self, x: &Point) -> Side {
        Side::of_value(self.value(x))
    }
}

/// `φ(x) = |x − center| − radius`; the disc interior is Ω⁻.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl LevelSet for Circle {
    fn value(&self, x: &Point) -> f64 {
        (x - self.center).norm() - self.radius
    }

    fn gradient(&self, x: &Point) -> Point {
        let d = x - self.center;
        let r = d.norm();
        if r == 0.0 {
            Point::zeros()
        } else {
            d / r
        }
    }
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Circle { center, radius }
    }

    /// Distance from `x` to the circle itself.
    pub fn distance(&self, x: &Point) -> f64 {
        self.value(x).abs()
    }
}

/// Straight line through `point`; `normal` points into Ω⁺.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: Point,
    pub normal: Point,
}

impl Line {
    pub fn new(point: Point, normal: Point) -> Self {
        Line {
            point,
            normal: normal.normalize(),
        }
    }
}

impl LevelSet for Line {
    fn value(&self, x: &Point) -> f64 {
        (x - self.point).dot(&self.normal)
    }

    fn gradient(&self, _x: &Point) -> Point {
        self.normal
    }
}

/// One of the built-in interface shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interface {
    Circle(Circle),
    Line(Line),
}

impl LevelSet for Interface {
    fn value(&self, x: &Point) -> f64 {
        match self {
            Interface::Circle(c) => c.value(x),
            Interface::Line(l) => l.value(x),
        }
    }

    fn gradient(&self, x: &Point) -> Point {
        match self {
            Interface::Circle(c) => c.gradient(x),
            Interface::Line(l) => l.gradient(x),
        }
    }
}

impl Interface {
    /// The same shape moved by `offset`.
    pub fn shifted(&self, offset: Point) -> Interface {
        match *self {
            Interface::Circle(c) => Interface::Circle(Circle::new(c.center + offset, c.radius)),
            Interface::Line(l) => Interface::Line(Line {
                point: l.point + offset,
                normal: l.normal,
            }),
        }
    }
}

/// Wraps a user-supplied closure as a level set.
pub struct FnLevelSet<F>(pub F);

impl<F> LevelSet for FnLevelSet<F>
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn value(&self, x: &Point) -> f64 {
        (self.0)(x)
    }
}

/// Level set with a constant value, handy for interface-free runs.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl LevelSet for Constant {
    fn value(&self, _x: &Point) -> f64 {
        self.0
    }

    fn gradient(&self, _x: &Point) -> Point {
        Point::zeros()
    }
}
