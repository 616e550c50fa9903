//! Manufactured solutions with per-region branches.
//!
//! Each solution carries its level set; [`ScalarSolution::exact`] and
//! [`VectorSolution::exact`] pick the branch from the exact interface, while
//! the branch methods let callers choose the side themselves.

use crate::geometry::{rot90, Point, Side};
use crate::ife::{jump_matrix, Coefficients};
use crate::level_set::{Circle, Interface, LevelSet, Line};
use crate::Result;

/// Scalar solution of `−div(β∇u) = f` with `[u] = 0`, `[β∇u·n] = 0` on Γ.
pub trait ScalarSolution: Send + Sync {
    fn level_set(&self) -> &dyn LevelSet;
    fn value(&self, x: &Point, side: Side) -> f64;
    fn gradient(&self, x: &Point, side: Side) -> Point;
    fn source(&self, x: &Point, side: Side) -> f64;

    fn exact(&self, x: &Point) -> f64 {
        self.value(x, self.level_set().side(x))
    }
}

/// Vector solution of `curl(α curl u) + βu = f` with `[u·t] = 0`,
/// `[α curl u] = 0` and `[βu·n] = 0` on Γ.
pub trait VectorSolution: Send + Sync {
    fn level_set(&self) -> &dyn LevelSet;
    fn value(&self, x: &Point, side: Side) -> Point;
    fn curl(&self, x: &Point, side: Side) -> f64;
    fn source(&self, x: &Point, side: Side) -> Point;

    fn exact(&self, x: &Point) -> Point {
        self.value(x, self.level_set().side(x))
    }
}

/// `u⁻ = r³/β⁻`, `u⁺ = r³/β⁺ + (1/β⁻ − 1/β⁺) r₀³` around a circle of radius
/// `r₀`; `f = −9r` on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleCubic {
    pub circle: Circle,
    pub coef: Coefficients,
}

impl ScalarSolution for CircleCubic {
    fn level_set(&self) -> &dyn LevelSet {
        &self.circle
    }

    fn value(&self, x: &Point, side: Side) -> f64 {
        let r = (x - self.circle.center).norm();
        let r0 = self.circle.radius;
        match side {
            Side::Minus => r.powi(3) / self.coef.beta_minus,
            Side::Plus => {
                r.powi(3) / self.coef.beta_plus
                    + (1.0 / self.coef.beta_minus - 1.0 / self.coef.beta_plus) * r0.powi(3)
            }
        }
    }

    fn gradient(&self, x: &Point, side: Side) -> Point {
        let d = x - self.circle.center;
        d * (3.0 * d.norm() / self.coef.beta(side))
    }

    fn source(&self, x: &Point, _side: Side) -> f64 {
        -9.0 * (x - self.circle.center).norm()
    }
}

/// `u = c0 + g·x` with uniform coefficients and `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPatch {
    pub c0: f64,
    pub gradient: Point,
    pub level_set: Interface,
}

impl ScalarSolution for LinearPatch {
    fn level_set(&self) -> &dyn LevelSet {
        &self.level_set
    }

    fn value(&self, x: &Point, _side: Side) -> f64 {
        self.c0 + self.gradient.dot(x)
    }

    fn gradient(&self, _x: &Point, _side: Side) -> Point {
        self.gradient
    }

    fn source(&self, _x: &Point, _side: Side) -> f64 {
        0.0
    }
}

/// Piecewise-linear solution across a straight interface: gradient `c` in
/// Ω⁻ and `M c` in Ω⁺, continuous on the line; `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIfe {
    pub line: Line,
    pub c0: f64,
    pub c_minus: Point,
    pub c_plus: Point,
}

impl LineIfe {
    pub fn new(line: Line, coef: &Coefficients, c0: f64, c_minus: Point) -> Result<Self> {
        let m = jump_matrix(&line.normal, coef.rho())?;
        Ok(LineIfe {
            line,
            c0,
            c_minus,
            c_plus: m.apply(&c_minus),
        })
    }
}

impl ScalarSolution for LineIfe {
    fn level_set(&self) -> &dyn LevelSet {
        &self.line
    }

    fn value(&self, x: &Point, side: Side) -> f64 {
        self.c0 + self.gradient(x, side).dot(&(x - self.line.point))
    }

    fn gradient(&self, _x: &Point, side: Side) -> Point {
        match side {
            Side::Plus => self.c_plus,
            Side::Minus => self.c_minus,
        }
    }

    fn source(&self, _x: &Point, _side: Side) -> f64 {
        0.0
    }
}

/// Rotational field `u = h(r) e_θ` around a circle of radius `r₀` with
/// `h⁻ = r/(2α⁻)`, `h⁺ = (r₀²/(2α⁻) + (r² − r₀²)/(2α⁺))/r`, so that
/// `α curl u ≡ 1` and `f = βu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRotational {
    pub circle: Circle,
    pub coef: Coefficients,
}

impl VectorSolution for CircleRotational {
    fn level_set(&self) -> &dyn LevelSet {
        &self.circle
    }

    fn value(&self, x: &Point, side: Side) -> Point {
        let d = x - self.circle.center;
        // h(r)/r times (−d_y, d_x)
        let scale = match side {
            Side::Minus => 0.5 / self.coef.alpha_minus,
            Side::Plus => {
                let r2 = d.norm_squared();
                let r02 = self.circle.radius.powi(2);
                (r02 / (2.0 * self.coef.alpha_minus) + (r2 - r02) / (2.0 * self.coef.alpha_plus))
                    / r2
            }
        };
        rot90(&d) * scale
    }

    fn curl(&self, _x: &Point, side: Side) -> f64 {
        1.0 / self.coef.alpha(side)
    }

    fn source(&self, x: &Point, side: Side) -> Point {
        self.value(x, side) * self.coef.beta(side)
    }
}

/// Curl-free field `u = ∇φ` with `φ` the [`CircleCubic`] solution, so that
/// `f = β∇φ = 3r(x − center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleGradient {
    pub potential: CircleCubic,
}

impl VectorSolution for CircleGradient {
    fn level_set(&self) -> &dyn LevelSet {
        &self.potential.circle
    }

    fn value(&self, x: &Point, side: Side) -> Point {
        self.potential.gradient(x, side)
    }

    fn curl(&self, _x: &Point, _side: Side) -> f64 {
        0.0
    }

    fn source(&self, x: &Point, side: Side) -> Point {
        self.value(x, side) * self.potential.coef.beta(side)
    }
}

/// Piecewise-constant field `c` in Ω⁻ and `M c` in Ω⁺ across a straight
/// interface; `f = βu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantIfeField {
    pub line: Line,
    pub coef: Coefficients,
    pub c_minus: Point,
    pub c_plus: Point,
}

impl ConstantIfeField {
    pub fn new(line: Line, coef: &Coefficients, c_minus: Point) -> Result<Self> {
        let m = jump_matrix(&line.normal, coef.rho())?;
        Ok(ConstantIfeField {
            line,
            coef: *coef,
            c_minus,
            c_plus: m.apply(&c_minus),
        })
    }
}

impl VectorSolution for ConstantIfeField {
    fn level_set(&self) -> &dyn LevelSet {
        &self.line
    }

    fn value(&self, _x: &Point, side: Side) -> Point {
        match side {
            Side::Plus => self.c_plus,
            Side::Minus => self.c_minus,
        }
    }

    fn curl(&self, _x: &Point, _side: Side) -> f64 {
        0.0
    }

    fn source(&self, x: &Point, side: Side) -> Point {
        self.value(x, side) * self.coef.beta(side)
    }
}
