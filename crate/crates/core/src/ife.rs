//! Explicit local immersed finite element (IFE) spaces on an interface element.
//!
//! Functions are parameterized by a scalar `c0` and a vector `c`, expanded
//! about the midpoint `x_m` of Γ^K_h. The jump matrix `M` maps minus-side
//! gradients to plus-side gradients. Evaluation never decides region
//! membership itself; callers pass the [`Side`].

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::cut::CutTopology;
use crate::geometry::{rot90, Point, Side};
use crate::{IvemError, Result};

/// Piecewise-constant coefficients β^± and α^±.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl Coefficients {
    pub fn new(beta_plus: f64, beta_minus: f64, alpha_plus: f64, alpha_minus: f64) -> Result<Self> {
        let c = Coefficients {
            beta_plus,
            beta_minus,
            alpha_plus,
            alpha_minus,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn uniform() -> Self {
        Coefficients {
            beta_plus: 1.0,
            beta_minus: 1.0,
            alpha_plus: 1.0,
            alpha_minus: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta_plus", self.beta_plus),
            ("beta_minus", self.beta_minus),
            ("alpha_plus", self.alpha_plus),
            ("alpha_minus", self.alpha_minus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(IvemError::Config {
                    field: format!("coefficients.{name}"),
                    message: format!("must be a positive finite number, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// ρ = β⁻ / β⁺.
    pub fn rho(&self) -> f64 {
        self.beta_minus / self.beta_plus
    }

    pub fn beta(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.beta_plus,
            Side::Minus => self.beta_minus,
        }
    }

    pub fn alpha(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.alpha_plus,
            Side::Minus => self.alpha_minus,
        }
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_plus.max(self.beta_minus)
    }
}

/// `M = [[n₂² + ρn₁², (ρ−1)n₁n₂], [(ρ−1)n₁n₂, n₁² + ρn₂²]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpMatrix {
    pub matrix: Matrix2<f64>,
    pub normal: Point,
    pub rho: f64,
}

impl JumpMatrix {
    pub fn apply(&self, v: &Point) -> Point {
        self.matrix * v
    }
}

pub fn jump_matrix(normal: &Point, rho: f64) -> Result<JumpMatrix> {
    if (normal.norm() - 1.0).abs() > 1e-12 {
        return Err(IvemError::InvalidArgument(format!(
            "jump matrix needs a unit normal, |n| = {}",
            normal.norm()
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(IvemError::InvalidArgument(format!(
            "rho must be positive, got {rho}"
        )));
    }
    let (n1, n2) = (normal.x, normal.y);
    let off = (rho - 1.0) * n1 * n2;
    let matrix = Matrix2::new(n2 * n2 + rho * n1 * n1, off, off, n1 * n1 + rho * n2 * n2);
    Ok(JumpMatrix {
        matrix,
        normal: *normal,
        rho,
    })
}

/// Jump matrix of an interface element for the given coefficients.
pub fn element_jump_matrix(cut: &CutTopology, coef: &Coefficients) -> JumpMatrix {
    // the cut normal is normalized at construction
    jump_matrix(&cut.normal, coef.rho()).expect("cut normal is a unit vector")
}

/// A piecewise-constant vector field on K⁺_h / K⁻_h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseConstantField {
    pub plus: Point,
    pub minus: Point,
}

impl PiecewiseConstantField {
    pub fn zero() -> Self {
        PiecewiseConstantField {
            plus: Point::zeros(),
            minus: Point::zeros(),
        }
    }

    pub fn get(&self, side: Side) -> Point {
        match side {
            Side::Plus => self.plus,
            Side::Minus => self.minus,
        }
    }

    /// The member of ∇S^n_h(K) with minus-side value `a`.
    pub fn from_minus(m: &JumpMatrix, a: Point) -> Self {
        PiecewiseConstantField {
            plus: m.apply(&a),
            minus: a,
        }
    }
}

/// `v = M c·(x − x_m) + c0` on K⁺_h and `c·(x − x_m) + c0` on K⁻_h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfeH1Function {
    pub c0: f64,
    pub c: Point,
    pub x_m: Point,
    pub m: Matrix2<f64>,
}

impl IfeH1Function {
    pub fn new(cut: &CutTopology, coef: &Coefficients, c0: f64, c: Point) -> Self {
        IfeH1Function {
            c0,
            c,
            x_m: cut.midpoint,
            m: element_jump_matrix(cut, coef).matrix,
        }
    }

    pub fn gradient(&self, side: Side) -> Point {
        match side {
            Side::Plus => self.m * self.c,
            Side::Minus => self.c,
        }
    }

    pub fn value(&self, x: &Point, side: Side) -> f64 {
        self.gradient(side).dot(&(x - self.x_m)) + self.c0
    }

    pub fn gradient_field(&self) -> PiecewiseConstantField {
        PiecewiseConstantField {
            plus: self.gradient(Side::Plus),
            minus: self.gradient(Side::Minus),
        }
    }
}

/// Basis of S^n_h(K) for `(c0, c) ∈ {(1, 0), (0, e₁), (0, e₂)}`.
pub fn h1_ife_basis(cut: &CutTopology, coef: &Coefficients) -> [IfeH1Function; 3] {
    [
        IfeH1Function::new(cut, coef, 1.0, Point::zeros()),
        IfeH1Function::new(cut, coef, 0.0, Point::new(1.0, 0.0)),
        IfeH1Function::new(cut, coef, 0.0, Point::new(0.0, 1.0)),
    ]
}

/// `v = M c + (c0/α^±)·(−(y − y_m), x − x_m)` on K^±_h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfeCurlFunction {
    pub c: Point,
    pub c0: f64,
    pub x_m: Point,
    pub m: Matrix2<f64>,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

impl IfeCurlFunction {
    pub fn new(cut: &CutTopology, coef: &Coefficients, c: Point, c0: f64) -> Self {
        IfeCurlFunction {
            c,
            c0,
            x_m: cut.midpoint,
            m: element_jump_matrix(cut, coef).matrix,
            alpha_plus: coef.alpha_plus,
            alpha_minus: coef.alpha_minus,
        }
    }

    fn alpha(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.alpha_plus,
            Side::Minus => self.alpha_minus,
        }
    }

    pub fn value(&self, x: &Point, side: Side) -> Point {
        let constant = match side {
            Side::Plus => self.m * self.c,
            Side::Minus => self.c,
        };
        constant + rot90(&(x - self.x_m)) * (self.c0 / self.alpha(side))
    }

    pub fn curl(&self, side: Side) -> f64 {
        2.0 * self.c0 / self.alpha(side)
    }

    /// `(curl⁺, curl⁻)`.
    pub fn curl_of(&self) -> (f64, f64) {
        (self.curl(Side::Plus), self.curl(Side::Minus))
    }
}

/// Basis of **S**^e_h(K) for `(c, c0) ∈ {(e₁, 0), (e₂, 0), (0, 1)}`.
pub fn curl_ife_basis(cut: &CutTopology, coef: &Coefficients) -> [IfeCurlFunction; 3] {
    [
        IfeCurlFunction::new(cut, coef, Point::new(1.0, 0.0), 0.0),
        IfeCurlFunction::new(cut, coef, Point::new(0.0, 1.0), 0.0),
        IfeCurlFunction::new(cut, coef, Point::zeros(), 1.0),
    ]
}

/// Member of the rotated space S̃^n_h(K): `φ = w^±·(x − x_m) + c0` with
/// vector curl `(∂_y φ, −∂_x φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfeRotH1Function {
    pub w_plus: Point,
    pub w_minus: Point,
    pub c0: f64,
    pub x_m: Point,
}

impl IfeRotH1Function {
    pub fn gradient(&self, side: Side) -> Point {
        match side {
            Side::Plus => self.w_plus,
            Side::Minus => self.w_minus,
        }
    }

    pub fn value(&self, x: &Point, side: Side) -> f64 {
        self.gradient(side).dot(&(x - self.x_m)) + self.c0
    }

    pub fn vector_curl(&self, side: Side) -> Point {
        let w = self.gradient(side);
        Point::new(w.y, -w.x)
    }
}

/// Potential φ ∈ S̃^n_h(K) with **curl** φ = β_h v, normalized so that
/// ∫_{∂K} φ ds = 0.
pub fn rot_h1_potential(
    v: &PiecewiseConstantField,
    cut: &CutTopology,
    coef: &Coefficients,
) -> Result<IfeRotH1Function> {
    let m = element_jump_matrix(cut, coef);
    let scale = v.plus.norm().max(v.minus.norm()).max(f64::MIN_POSITIVE);
    let mismatch = (v.plus - m.apply(&v.minus)).norm();
    if mismatch > 1e-10 * scale {
        return Err(IvemError::InvalidArgument(format!(
            "field is not in the gradient IFE space (|v⁺ − M v⁻| = {mismatch:e})"
        )));
    }
    // (w_y, −w_x) = β v  ⇔  w = rot90(β v)
    let w_plus = rot90(&(v.plus * coef.beta_plus));
    let w_minus = rot90(&(v.minus * coef.beta_minus));
    let mut phi = IfeRotH1Function {
        w_plus,
        w_minus,
        c0: 0.0,
        x_m: cut.midpoint,
    };
    let boundary_integral: f64 = cut
        .edges
        .iter()
        .map(|e| e.length * phi.value(&e.midpoint(), e.side))
        .sum();
    phi.c0 = -boundary_integral / cut.perimeter();
    Ok(phi)
}

/// Largest relative violation of the H¹ jump conditions (value and flux)
/// at `n` equally spaced points of Γ^K_h.
pub fn h1_jump_violation(
    f: &IfeH1Function,
    cut: &CutTopology,
    coef: &Coefficients,
    n: usize,
) -> f64 {
    let gp = f.gradient(Side::Plus);
    let gm = f.gradient(Side::Minus);
    let value_scale = f.c0.abs() + (gp.norm() + gm.norm()) * cut.diameter + f64::MIN_POSITIVE;
    let flux_scale = coef.beta_max() * (gp.norm() + gm.norm()) + f64::MIN_POSITIVE;
    let flux = (coef.beta_plus * gp.dot(&cut.normal) - coef.beta_minus * gm.dot(&cut.normal)).abs();
    cut.gamma_samples(n)
        .iter()
        .map(|x| (f.value(x, Side::Plus) - f.value(x, Side::Minus)).abs() / value_scale)
        .fold(flux / flux_scale, f64::max)
}

/// Largest relative violation of the H(curl) IFE jump conditions: tangential
/// continuity on Γ^K_h, α-curl continuity, β-normal continuity at `x_m`.
pub fn curl_jump_violation(
    f: &IfeCurlFunction,
    cut: &CutTopology,
    coef: &Coefficients,
    n: usize,
) -> f64 {
    let scale = |a: f64, b: f64| a.abs() + b.abs() + f64::MIN_POSITIVE;
    let mut worst: f64 = 0.0;
    for x in cut.gamma_samples(n) {
        let vp = f.value(&x, Side::Plus);
        let vm = f.value(&x, Side::Minus);
        let (tp, tm) = (vp.dot(&cut.tangent), vm.dot(&cut.tangent));
        worst = worst.max((tp - tm).abs() / scale(vp.norm(), vm.norm()));
    }
    let (cp, cm) = f.curl_of();
    let (ap, am) = (coef.alpha_plus * cp, coef.alpha_minus * cm);
    worst = worst.max((ap - am).abs() / scale(ap, am));
    let vp = f.value(&cut.midpoint, Side::Plus);
    let vm = f.value(&cut.midpoint, Side::Minus);
    let (np, nm) = (
        coef.beta_plus * vp.dot(&cut.normal),
        coef.beta_minus * vm.dot(&cut.normal),
    );
    worst.max((np - nm).abs() / scale(coef.beta_plus * vp.norm(), coef.beta_minus * vm.norm()))
}

/// Maximal violations of the local discrete de Rham structure.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactSequenceReport {
    /// ∇S^n_h(K) ⊂ **S**^e_h(K) ∩ ker curl.
    pub gradients_in_curl_space: f64,
    /// curl **S**^e_h(K) = Q^{α_h}_h(K).
    pub curl_onto_q: f64,
    /// β_h ∇S^n_h(K) = **curl** S̃^n_h(K), both inclusions.
    pub hodge: f64,
}

impl ExactSequenceReport {
    pub fn max_violation(&self) -> f64 {
        self.gradients_in_curl_space
            .max(self.curl_onto_q)
            .max(self.hodge)
    }
}

pub fn verify_exact_sequence(cut: &CutTopology, coef: &Coefficients) -> ExactSequenceReport {
    let m = element_jump_matrix(cut, coef);
    let mut report = ExactSequenceReport::default();

    for f in h1_ife_basis(cut, coef) {
        // the gradient {Mc, c} is the curl IFE function with the same c and c0 = 0
        let as_curl = IfeCurlFunction::new(cut, coef, f.c, 0.0);
        let mut v = curl_jump_violation(&as_curl, cut, coef, 10);
        let (cp, cm) = as_curl.curl_of();
        v = v.max(cp.abs()).max(cm.abs());
        for side in Side::BOTH {
            let g = f.gradient(side);
            let x = cut.midpoint + cut.normal * 0.1 * cut.diameter;
            v = v.max((as_curl.value(&x, side) - g).norm() / (g.norm() + 1.0));
        }
        report.gradients_in_curl_space = report.gradients_in_curl_space.max(v);
    }

    let rotational = &curl_ife_basis(cut, coef)[2];
    let (cp, cm) = rotational.curl_of();
    let (ap, am) = (coef.alpha_plus * cp, coef.alpha_minus * cm);
    report.curl_onto_q = if ap == 0.0 || am == 0.0 {
        1.0
    } else {
        (ap - am).abs() / ap.abs().max(am.abs())
    };

    let inverse_m = jump_matrix(&cut.normal, 1.0 / coef.rho()).expect("unit normal");
    for a in [Point::new(1.0, 0.0), Point::new(0.0, 1.0)] {
        // β_h ∇S ⊂ curl S̃
        let v = PiecewiseConstantField::from_minus(&m, a);
        let phi = rot_h1_potential(&v, cut, coef).expect("gradient field");
        let mut worst: f64 = 0.0;
        for side in Side::BOTH {
            let target = v.get(side) * coef.beta(side);
            worst = worst.max((phi.vector_curl(side) - target).norm() / (target.norm() + 1.0));
        }
        for x in cut.gamma_samples(10) {
            let jump = phi.value(&x, Side::Plus) - phi.value(&x, Side::Minus);
            worst = worst.max(jump.abs() / (coef.beta_max() * cut.diameter));
        }
        // β_h⁻¹ curl S̃ ⊂ ∇S: the rotated space has jump matrix M(n̄, 1/ρ)
        let w_minus = a;
        let w_plus = inverse_m.apply(&w_minus);
        let psi = IfeRotH1Function {
            w_plus,
            w_minus,
            c0: 0.0,
            x_m: cut.midpoint,
        };
        let back_plus = psi.vector_curl(Side::Plus) / coef.beta_plus;
        let back_minus = psi.vector_curl(Side::Minus) / coef.beta_minus;
        let mismatch = (back_plus - m.apply(&back_minus)).norm();
        worst = worst.max(mismatch / (back_plus.norm() + back_minus.norm()));
        report.hodge = report.hodge.max(worst);
    }
    report
}
