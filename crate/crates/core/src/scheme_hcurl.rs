//! Immersed virtual element scheme for `curl(α curl u) + βu = f` with
//! tangential boundary data.
//!
//! Non-interface triangles use the lowest-order Nédélec matrices. On an
//! interface element the local form is the exact curl–curl term computed
//! from the DoFs, the β_h-mass of the projections **Π**_K, and the tangential
//! stabilization `Σ_e w_e β_e |e| (d_e − **Π**_K v·t_e)(d_e − **Π**_K z·t_e)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::{CutTopology, InterfaceGeometry};
use crate::dofs::EdgeDofMap;
use crate::geometry::{Point, Side};
use crate::ife::{Coefficients, PiecewiseConstantField};
use crate::mesh::BackgroundMesh;
use crate::projection::{gradient_gram, CurlProjection};
use crate::quadrature::polygon_quadrature;
use crate::solver::{
    assemble, solve_with_boundary, CsrMatrix, DiscreteSolution, LocalSystem, SolveOptions,
};
use crate::standard::{nedelec_curl_curl, nedelec_curls, nedelec_eval, nedelec_load, nedelec_mass};
use crate::{IvemError, Result};

/// Weight `w_e` of the tangential stabilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stabilization {
    /// `w_e = 1`.
    #[default]
    #[serde(rename = "O1")]
    O1,
    /// `w_e = h_K`, the scaling of an h^{1/2}-weighted tangential norm.
    #[serde(rename = "sqrt_h")]
    SqrtH,
}

/// Curl–curl part `α⁺|K⁺_h| c⁺c⁺ᵀ + α⁻|K⁻_h| c⁻c⁻ᵀ`.
pub fn curl_curl_block(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &CurlProjection,
) -> DMatrix<f64> {
    let n = cut.edges.len();
    let cp: Vec<f64> = proj
        .curl
        .lengths
        .iter()
        .map(|l| proj.curl.factor_plus * l)
        .collect();
    let cm: Vec<f64> = proj
        .curl
        .lengths
        .iter()
        .map(|l| proj.curl.factor_minus * l)
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        coef.alpha_plus * cut.area_plus * cp[i] * cp[j]
            + coef.alpha_minus * cut.area_minus * cm[i] * cm[j]
    })
}

/// Mass part `a_iᵀ N a_j` of the projections.
pub fn projected_mass(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &CurlProjection,
) -> DMatrix<f64> {
    let g = gradient_gram(cut, coef, &proj.jump);
    let n = cut.edges.len();
    DMatrix::from_fn(n, n, |i, j| {
        proj.coefficients[i].dot(&(g * proj.coefficients[j]))
    })
}

pub fn curl_stabilization(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &CurlProjection,
    variant: Stabilization,
) -> DMatrix<f64> {
    let n = cut.edges.len();
    let weight = match variant {
        Stabilization::O1 => 1.0,
        Stabilization::SqrtH => cut.diameter,
    };
    let projected: Vec<PiecewiseConstantField> = (0..n).map(|i| proj.basis_projection(i)).collect();
    let mut s = DMatrix::zeros(n, n);
    for (k, e) in cut.edges.iter().enumerate() {
        let d = nalgebra::DVector::from_fn(n, |i, _| {
            let delta = if i == k { 1.0 } else { 0.0 };
            delta - projected[i].get(e.side).dot(&e.tangent)
        });
        s += &d * d.transpose() * (weight * coef.beta(e.side) * e.length);
    }
    s
}

pub fn local_curl_matrix(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &CurlProjection,
    variant: Stabilization,
) -> DMatrix<f64> {
    let a = curl_curl_block(cut, coef, proj)
        + projected_mass(cut, coef, proj)
        + curl_stabilization(cut, coef, proj, variant);
    (&a + a.transpose()) * 0.5
}

/// `∫_K f·**Π**_K φ_i`; the projections are constant on each side.
pub fn local_curl_load(
    cut: &CutTopology,
    proj: &CurlProjection,
    f: &(dyn Fn(&Point, Side) -> Point + Sync),
    degree: usize,
) -> Vec<f64> {
    let n = cut.edges.len();
    let mut load = vec![0.0; n];
    for side in Side::BOTH {
        let rule = polygon_quadrature(cut.sub_polygon(side), degree);
        let integral: Point = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| f(x, side) * *w)
            .sum();
        for (i, l) in load.iter_mut().enumerate() {
            *l += integral.dot(&proj.basis_projection(i).get(side));
        }
    }
    load
}

/// H(curl) discretization on a fixed mesh and interface.
pub struct CurlScheme<'a> {
    pub mesh: &'a BackgroundMesh,
    pub geom: &'a InterfaceGeometry,
    pub dofs: &'a EdgeDofMap,
    pub coef: Coefficients,
    pub stabilization: Stabilization,
    pub projections: Vec<Option<CurlProjection>>,
}

impl<'a> CurlScheme<'a> {
    pub fn new(
        mesh: &'a BackgroundMesh,
        geom: &'a InterfaceGeometry,
        dofs: &'a EdgeDofMap,
        coef: Coefficients,
        stabilization: Stabilization,
    ) -> Result<Self> {
        coef.validate()?;
        let projections = geom
            .cuts
            .par_iter()
            .map(|c| {
                c.as_ref()
                    .map(|c| CurlProjection::build(c, &coef))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurlScheme {
            mesh,
            geom,
            dofs,
            coef,
            stabilization,
            projections,
        })
    }

    fn side(&self, t: usize) -> Result<Side> {
        self.geom
            .element_side(t)
            .ok_or_else(|| IvemError::Consistency(format!("triangle {t} has no projection")))
    }

    pub fn local_system(
        &self,
        t: usize,
        f: &(dyn Fn(&Point, Side) -> Point + Sync),
        degree: usize,
    ) -> Result<LocalSystem> {
        let (dofs, signs): (Vec<usize>, Vec<f64>) =
            self.dofs.element_dofs(t).iter().copied().unzip();
        let (matrix, load) = match (self.geom.cut(t), &self.projections[t]) {
            (Some(cut), Some(proj)) => (
                local_curl_matrix(cut, &self.coef, proj, self.stabilization),
                local_curl_load(cut, proj, f, degree),
            ),
            _ => {
                let side = self.side(t)?;
                let p = self.mesh.triangle_points(t);
                let a = nedelec_curl_curl(&p, self.coef.alpha(side))
                    + nedelec_mass(&p, self.coef.beta(side));
                let load = nedelec_load(&p, &|x| f(x, side), degree);
                (DMatrix::from_fn(3, 3, |i, j| a[(i, j)]), load.to_vec())
            }
        };
        Ok(LocalSystem {
            element: t,
            dofs,
            signs,
            matrix,
            load,
        })
    }

    pub fn assemble(
        &self,
        f: &(dyn Fn(&Point, Side) -> Point + Sync),
        degree: usize,
    ) -> Result<(CsrMatrix, Vec<f64>)> {
        let locals = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| self.local_system(t, f, degree))
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(self.dofs.n_dofs(), &locals))
    }

    /// Assembles, imposes the average tangential components `boundary[i]`
    /// on every boundary DoF `i` and solves. Entries of `boundary` at
    /// interior DoFs are ignored.
    pub fn solve(
        &self,
        f: &(dyn Fn(&Point, Side) -> Point + Sync),
        boundary: &[f64],
        degree: usize,
        options: &SolveOptions,
    ) -> Result<DiscreteSolution> {
        let (matrix, load) = self.assemble(f, degree)?;
        Ok(solve_with_boundary(
            matrix,
            load,
            &self.dofs.is_boundary,
            boundary,
            options,
        )?)
    }

    /// **Π**_K (identity on non-interface elements) of the discrete field with
    /// global DoFs `u` on element `t`.
    pub fn projected(&self, t: usize, u: &[f64]) -> ProjectedCurl {
        let local = self.dofs.local_values(t, u);
        match (&self.projections[t], self.geom.cut(t)) {
            (Some(proj), Some(_)) => {
                let (curl_plus, curl_minus) = proj.curl.curls(&local);
                ProjectedCurl::Ife {
                    field: proj.apply(&local),
                    curl_plus,
                    curl_minus,
                }
            }
            _ => {
                let points = self.mesh.triangle_points(t);
                ProjectedCurl::Nedelec {
                    points,
                    dofs: [local[0], local[1], local[2]],
                }
            }
        }
    }
}

/// Element-wise explicit representative of a discrete H(curl) field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectedCurl {
    Nedelec {
        points: [Point; 3],
        dofs: [f64; 3],
    },
    Ife {
        field: PiecewiseConstantField,
        curl_plus: f64,
        curl_minus: f64,
    },
}

impl ProjectedCurl {
    pub fn value(&self, x: &Point, side: Side) -> Point {
        match self {
            ProjectedCurl::Nedelec { points, dofs } => nedelec_eval(points, dofs, x),
            ProjectedCurl::Ife { field, .. } => field.get(side),
        }
    }

    /// Curl of the discrete field itself (computable from the DoFs).
    pub fn curl(&self, side: Side) -> f64 {
        match self {
            ProjectedCurl::Nedelec { points, dofs } => {
                let c = nedelec_curls(points);
                c[0] * dofs[0] + c[1] * dofs[1] + c[2] * dofs[2]
            }
            ProjectedCurl::Ife {
                curl_plus,
                curl_minus,
                ..
            } => match side {
                Side::Plus => *curl_plus,
                Side::Minus => *curl_minus,
            },
        }
    }
}
