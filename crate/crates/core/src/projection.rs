//! DoF-computable projections from the virtual spaces onto the IFE spaces.
//!
//! [`H1Projection`] is the β_h-energy projection Π_K: V^n_h(K) → S^n_h(K) and
//! [`CurlProjection`] the β_h-weighted L² projection **Π**_K: **V**^e_h(K) →
//! ∇S^n_h(K). Both are stored as one coefficient set per local basis function,
//! so applying them is a matrix-vector product. All integrals are evaluated in
//! closed form since every integrand is piecewise linear.

use nalgebra::{Matrix2, Vector2};

use crate::cut::{CutTopology, ElementLabel};
use crate::error::SolverError;
use crate::geometry::{centroid, Point, Side};
use crate::ife::{
    element_jump_matrix, rot_h1_potential, Coefficients, IfeH1Function, JumpMatrix,
    PiecewiseConstantField,
};
use crate::{IvemError, Result};

/// Gram condition number above which a projection is reported as ill-conditioned.
pub const GRAM_CONDITION_WARNING: f64 = 1e12;

/// `G_jk = β⁺|K⁺_h| (M e_j)·(M e_k) + β⁻|K⁻_h| e_j·e_k`.
pub fn gradient_gram(cut: &CutTopology, coef: &Coefficients, m: &JumpMatrix) -> Matrix2<f64> {
    let mm = m.matrix.transpose() * m.matrix;
    mm * (coef.beta_plus * cut.area_plus) + Matrix2::identity() * (coef.beta_minus * cut.area_minus)
}

/// Spectral condition number of a symmetric positive definite 2×2 matrix.
pub fn condition_number(g: &Matrix2<f64>) -> f64 {
    let e = g.symmetric_eigenvalues();
    let (lo, hi) = (e.min(), e.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn solve_gram(g: &Matrix2<f64>, element: usize) -> Result<nalgebra::Cholesky<f64, nalgebra::U2>> {
    let cond = condition_number(g);
    if cond > GRAM_CONDITION_WARNING {
        log::warn!(
            "projection Gram matrix of triangle {element} is ill-conditioned (cond = {cond:e})"
        );
    }
    g.cholesky().ok_or_else(|| {
        IvemError::Solver(SolverError::NotPositiveDefinite {
            pivot: 0,
            value: g.determinant(),
        })
    })
}

/// Marker for elements whose projection is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity;

pub fn noninterface_projection(label: ElementLabel) -> Result<Identity> {
    match label {
        ElementLabel::Interface => Err(IvemError::InvalidArgument(
            "interface elements have a non-trivial projection".into(),
        )),
        _ => Ok(Identity),
    }
}

/// Curl data of an interface element: `curl^± = α^∓ C / (|K| α_K)` with `C`
/// the boundary circulation and `α_K = (|K⁺_h|α⁻ + |K⁻_h|α⁺)/|K|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementCurlData {
    pub alpha_k: f64,
    pub factor_plus: f64,
    pub factor_minus: f64,
    /// Length of each local sub-edge.
    pub lengths: Vec<f64>,
}

impl ElementCurlData {
    pub fn new(cut: &CutTopology, coef: &Coefficients) -> Self {
        let alpha_k =
            (cut.area_plus * coef.alpha_minus + cut.area_minus * coef.alpha_plus) / cut.area;
        ElementCurlData {
            alpha_k,
            factor_plus: coef.alpha_minus / (cut.area * alpha_k),
            factor_minus: coef.alpha_plus / (cut.area * alpha_k),
            lengths: cut.edges.iter().map(|e| e.length).collect(),
        }
    }

    pub fn circulation(&self, local: &[f64]) -> f64 {
        self.lengths.iter().zip(local).map(|(l, d)| l * d).sum()
    }

    /// `(curl⁺, curl⁻)` of the virtual function with local DoFs `local`.
    pub fn curls(&self, local: &[f64]) -> (f64, f64) {
        let c = self.circulation(local);
        (self.factor_plus * c, self.factor_minus * c)
    }
}

pub fn curl_from_dofs(cut: &CutTopology, coef: &Coefficients, local: &[f64]) -> (f64, f64) {
    ElementCurlData::new(cut, coef).curls(local)
}

/// Π_K on one interface element.
#[derive(Debug, Clone)]
pub struct H1Projection {
    pub element: usize,
    /// `(c0, c)` of Π_K χ_i for each local nodal basis function χ_i.
    pub coefficients: Vec<(f64, Point)>,
    pub gram: Matrix2<f64>,
    pub jump: JumpMatrix,
    pub x_m: Point,
}

impl H1Projection {
    pub fn build(cut: &CutTopology, coef: &Coefficients) -> Result<Self> {
        let jump = element_jump_matrix(cut, coef);
        let gram = gradient_gram(cut, coef, &jump);
        let chol = solve_gram(&gram, cut.element)?;
        let n = cut.n_nodes();
        let perimeter = cut.perimeter();
        let basis_gradient = |side: Side, j: usize| -> Point {
            let e = if j == 0 {
                Point::new(1.0, 0.0)
            } else {
                Point::new(0.0, 1.0)
            };
            match side {
                Side::Plus => jump.apply(&e),
                Side::Minus => e,
            }
        };

        let mut coefficients = Vec::with_capacity(n);
        for i in 0..n {
            // ∫_{∂K} β_h χ_i ∇w_j·n ds with χ_i the hat function on the boundary loop
            let mut r = Vector2::zeros();
            let mut boundary_integral = 0.0;
            for e in cut.edges.iter().filter(|e| e.start == i || e.end == i) {
                let half = 0.5 * e.length;
                boundary_integral += half;
                for j in 0..2 {
                    r[j] += coef.beta(e.side) * basis_gradient(e.side, j).dot(&e.normal) * half;
                }
            }
            let c: Point = chol.solve(&r);
            let f = IfeH1Function {
                c0: 0.0,
                c,
                x_m: cut.midpoint,
                m: jump.matrix,
            };
            let projected: f64 = cut
                .edges
                .iter()
                .map(|e| e.length * f.value(&e.midpoint(), e.side))
                .sum();
            coefficients.push(((boundary_integral - projected) / perimeter, c));
        }
        Ok(H1Projection {
            element: cut.element,
            coefficients,
            gram,
            jump,
            x_m: cut.midpoint,
        })
    }

    pub fn basis_projection(&self, i: usize) -> IfeH1Function {
        let (c0, c) = self.coefficients[i];
        IfeH1Function {
            c0,
            c,
            x_m: self.x_m,
            m: self.jump.matrix,
        }
    }

    pub fn apply(&self, local: &[f64]) -> IfeH1Function {
        let mut c0 = 0.0;
        let mut c = Point::zeros();
        for (v, (b0, b)) in local.iter().zip(&self.coefficients) {
            c0 += v * b0;
            c += b * *v;
        }
        IfeH1Function {
            c0,
            c,
            x_m: self.x_m,
            m: self.jump.matrix,
        }
    }

    pub fn gram_condition(&self) -> f64 {
        condition_number(&self.gram)
    }
}

/// **Π**_K on one interface element.
#[derive(Debug, Clone)]
pub struct CurlProjection {
    pub element: usize,
    /// Minus-side value `a_i` of **Π**_K φ_i (the plus side is `M a_i`).
    pub coefficients: Vec<Point>,
    pub gram: Matrix2<f64>,
    pub jump: JumpMatrix,
    pub curl: ElementCurlData,
}

impl CurlProjection {
    pub fn build(cut: &CutTopology, coef: &Coefficients) -> Result<Self> {
        let jump = element_jump_matrix(cut, coef);
        let gram = gradient_gram(cut, coef, &jump);
        let chol = solve_gram(&gram, cut.element)?;
        let curl = ElementCurlData::new(cut, coef);
        let potentials = [Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
            .map(|a| rot_h1_potential(&PiecewiseConstantField::from_minus(&jump, a), cut, coef));
        let [p0, p1] = potentials;
        let potentials = [p0?, p1?];
        let centroid_plus = centroid(&cut.sub_plus);
        let centroid_minus = centroid(&cut.sub_minus);

        let n = cut.edges.len();
        let mut coefficients = Vec::with_capacity(n);
        for i in 0..n {
            let e = &cut.edges[i];
            let (curl_plus, curl_minus) =
                (curl.factor_plus * e.length, curl.factor_minus * e.length);
            let mut r = Vector2::zeros();
            for (j, phi) in potentials.iter().enumerate() {
                r[j] = curl_plus * cut.area_plus * phi.value(&centroid_plus, Side::Plus)
                    + curl_minus * cut.area_minus * phi.value(&centroid_minus, Side::Minus)
                    - e.length * phi.value(&e.midpoint(), e.side);
            }
            coefficients.push(chol.solve(&r));
        }
        Ok(CurlProjection {
            element: cut.element,
            coefficients,
            gram,
            jump,
            curl,
        })
    }

    pub fn basis_projection(&self, i: usize) -> PiecewiseConstantField {
        PiecewiseConstantField::from_minus(&self.jump, self.coefficients[i])
    }

    pub fn apply(&self, local: &[f64]) -> PiecewiseConstantField {
        let a: Point = local
            .iter()
            .zip(&self.coefficients)
            .map(|(v, a)| a * *v)
            .sum();
        PiecewiseConstantField::from_minus(&self.jump, a)
    }

    pub fn gram_condition(&self) -> f64 {
        condition_number(&self.gram)
    }
}
