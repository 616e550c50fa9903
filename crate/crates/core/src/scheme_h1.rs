//! Immersed virtual element scheme for `−div(β∇u) = f` with Dirichlet data.
//!
//! Non-interface triangles use the classical P₁ stiffness matrix. On an
//! interface element the local form is the β_h-energy of the projections
//! Π_K plus the DoF-difference stabilization
//! `Σ_e β_e (w(b_e) − w(a_e))(z(b_e) − z(a_e))` on the non-projected parts.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cut::{CutTopology, InterfaceGeometry};
use crate::dofs::NodalDofMap;
use crate::geometry::{barycentric, Point, Side};
use crate::ife::{Coefficients, IfeH1Function};
use crate::mesh::BackgroundMesh;
use crate::projection::{gradient_gram, H1Projection};
use crate::quadrature::polygon_quadrature;
use crate::solver::{
    assemble, solve_with_boundary, CsrMatrix, DiscreteSolution, LocalSystem, SolveOptions,
};
use crate::standard::{p1_load, p1_stiffness};
use crate::{IvemError, Result};

/// Consistency part `Cᵀ G C` of an interface element matrix.
pub fn h1_consistency(cut: &CutTopology, coef: &Coefficients, proj: &H1Projection) -> DMatrix<f64> {
    let g = gradient_gram(cut, coef, &proj.jump);
    let n = cut.n_nodes();
    DMatrix::from_fn(n, n, |i, j| {
        proj.coefficients[i].1.dot(&(g * proj.coefficients[j].1))
    })
}

/// Stabilization `Σ_e β_e D_e Dᵀ_e` with `D_e,i` the endpoint difference of
/// `χ_i − Π_K χ_i` along sub-edge `e`.
pub fn h1_stabilization(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &H1Projection,
) -> DMatrix<f64> {
    let n = cut.n_nodes();
    // (χ_i − Π χ_i)(node k)
    let residual = DMatrix::from_fn(n, n, |k, i| {
        let delta = if i == k { 1.0 } else { 0.0 };
        delta
            - proj
                .basis_projection(i)
                .value(&cut.node_points[k], cut.node_eval_side(k))
    });
    let mut s = DMatrix::zeros(n, n);
    for e in &cut.edges {
        let d = residual.row(e.end) - residual.row(e.start);
        s += d.transpose() * d * coef.beta(e.side);
    }
    s
}

pub fn local_h1_matrix(
    cut: &CutTopology,
    coef: &Coefficients,
    proj: &H1Projection,
) -> DMatrix<f64> {
    let mut a = h1_consistency(cut, coef, proj) + h1_stabilization(cut, coef, proj);
    a = (&a + a.transpose()) * 0.5;
    a
}

/// `∫_K f Π_K χ_i` by quadrature of the given degree on each sub-polygon.
pub fn local_h1_load(
    cut: &CutTopology,
    proj: &H1Projection,
    f: &(dyn Fn(&Point, Side) -> f64 + Sync),
    degree: usize,
) -> Vec<f64> {
    let n = cut.n_nodes();
    let mut load = vec![0.0; n];
    for side in Side::BOTH {
        let rule = polygon_quadrature(cut.sub_polygon(side), degree);
        let basis: Vec<IfeH1Function> = (0..n).map(|i| proj.basis_projection(i)).collect();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let fx = w * f(x, side);
            for (l, b) in load.iter_mut().zip(&basis) {
                *l += fx * b.value(x, side);
            }
        }
    }
    load
}

/// H¹ discretization on a fixed mesh and interface.
pub struct H1Scheme<'a> {
    pub mesh: &'a BackgroundMesh,
    pub geom: &'a InterfaceGeometry,
    pub dofs: &'a NodalDofMap,
    pub coef: Coefficients,
    pub projections: Vec<Option<H1Projection>>,
}

impl<'a> H1Scheme<'a> {
    pub fn new(
        mesh: &'a BackgroundMesh,
        geom: &'a InterfaceGeometry,
        dofs: &'a NodalDofMap,
        coef: Coefficients,
    ) -> Result<Self> {
        coef.validate()?;
        let projections = geom
            .cuts
            .par_iter()
            .map(|c| {
                c.as_ref()
                    .map(|c| H1Projection::build(c, &coef))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(H1Scheme {
            mesh,
            geom,
            dofs,
            coef,
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
        f: &(dyn Fn(&Point, Side) -> f64 + Sync),
        degree: usize,
    ) -> Result<LocalSystem> {
        let dofs = self.dofs.element_dofs(t).to_vec();
        let signs = vec![1.0; dofs.len()];
        let (matrix, load) = match (self.geom.cut(t), &self.projections[t]) {
            (Some(cut), Some(proj)) => (
                local_h1_matrix(cut, &self.coef, proj),
                local_h1_load(cut, proj, f, degree),
            ),
            _ => {
                let side = self.side(t)?;
                let p = self.mesh.triangle_points(t);
                let a = p1_stiffness(&p, self.coef.beta(side));
                let load = p1_load(&p, &|x| f(x, side), degree);
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
        f: &(dyn Fn(&Point, Side) -> f64 + Sync),
        degree: usize,
    ) -> Result<(CsrMatrix, Vec<f64>)> {
        let locals = (0..self.mesh.n_triangles())
            .into_par_iter()
            .map(|t| self.local_system(t, f, degree))
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(self.dofs.n_dofs(), &locals))
    }

    /// Assembles, imposes `u = boundary[i]` on every boundary DoF `i` and
    /// solves. Entries of `boundary` at interior DoFs are ignored.
    pub fn solve(
        &self,
        f: &(dyn Fn(&Point, Side) -> f64 + Sync),
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

    /// Π_K of the discrete function with global DoFs `u` on element `t`.
    pub fn projected(&self, t: usize, u: &[f64]) -> ProjectedH1 {
        let local: Vec<f64> = self.dofs.element_dofs(t).iter().map(|&g| u[g]).collect();
        match &self.projections[t] {
            Some(proj) => ProjectedH1::Ife(proj.apply(&local)),
            None => ProjectedH1::Linear {
                points: self.mesh.triangle_points(t),
                values: [local[0], local[1], local[2]],
            },
        }
    }
}

/// Element-wise explicit representative of a discrete H¹ function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectedH1 {
    Linear {
        points: [Point; 3],
        values: [f64; 3],
    },
    Ife(IfeH1Function),
}

impl ProjectedH1 {
    /// Value at `x`; `side` selects the IFE piece and is ignored on
    /// non-interface elements.
    pub fn value(&self, x: &Point, side: Side) -> f64 {
        match self {
            ProjectedH1::Linear { points, values } => {
                let l = barycentric(points, x);
                l[0] * values[0] + l[1] * values[1] + l[2] * values[2]
            }
            ProjectedH1::Ife(f) => f.value(x, side),
        }
    }

    pub fn gradient(&self, side: Side) -> Point {
        match self {
            ProjectedH1::Linear { points, values } => {
                let g = crate::geometry::barycentric_gradients(points);
                g[0] * values[0] + g[1] * values[1] + g[2] * values[2]
            }
            ProjectedH1::Ife(f) => f.gradient(side),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofs::build_dof_maps;
    use crate::level_set::Line;

    fn single_cut(coef: &Coefficients) -> (CutTopology, H1Projection) {
        let mesh = BackgroundMesh::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let geom = InterfaceGeometry::new(
            &mesh,
            &Line::new(Point::new(0.0, 0.4), Point::new(0.3, 1.0)),
        )
        .unwrap();
        let cut = geom.cut(0).unwrap().clone();
        let proj = H1Projection::build(&cut, coef).unwrap();
        (cut, proj)
    }

    #[test]
    fn local_matrix_kernel_and_symmetry() {
        let coef = Coefficients::new(1.0, 10.0, 1.0, 1.0).unwrap();
        let (cut, proj) = single_cut(&coef);
        let a = local_h1_matrix(&cut, &coef, &proj);
        let ones = nalgebra::DVector::from_element(cut.n_nodes(), 1.0);
        assert!((&a * ones).amax() < 1e-12);
        assert!((&a - a.transpose()).amax() <= 1e-14 * a.amax());
        let eig = a.clone().symmetric_eigen().eigenvalues;
        let mut sorted: Vec<f64> = eig.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted[0].abs() < 1e-12 && sorted[1] > 1e-6);
    }

    #[test]
    fn stabilization_vanishes_on_ife_functions() {
        let coef = Coefficients::new(1.0, 10.0, 1.0, 1.0).unwrap();
        let (cut, proj) = single_cut(&coef);
        let s = h1_stabilization(&cut, &coef, &proj);
        let f = IfeH1Function::new(&cut, &coef, 0.2, Point::new(0.4, -1.0));
        let v = nalgebra::DVector::from_iterator(
            cut.n_nodes(),
            (0..cut.n_nodes()).map(|k| f.value(&cut.node_points[k], cut.node_eval_side(k))),
        );
        assert!((&s * v).amax() < 1e-12);
    }

    #[test]
    fn load_partition_of_unity() {
        let coef = Coefficients::new(1.0, 3.0, 1.0, 1.0).unwrap();
        let (cut, proj) = single_cut(&coef);
        let zero = local_h1_load(&cut, &proj, &|_, _| 0.0, 4);
        assert!(zero.iter().all(|v| *v == 0.0));
        let total: f64 = local_h1_load(&cut, &proj, &|_, _| 1.0, 4).iter().sum();
        assert!((total - cut.area).abs() < 1e-12);
    }

    #[test]
    fn zero_data_zero_solution() {
        let mesh = BackgroundMesh::uniform(&crate::mesh::Rectangle::unit_square(), 4).unwrap();
        let geom = InterfaceGeometry::new(
            &mesh,
            &Line::new(Point::new(0.0, 0.41), Point::new(0.2, 1.0)),
        )
        .unwrap();
        let (nodal, _) = build_dof_maps(&mesh, &geom).unwrap();
        let scheme = H1Scheme::new(
            &mesh,
            &geom,
            &nodal,
            Coefficients::new(1.0, 5.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let sol = scheme
            .solve(
                &|_, _| 0.0,
                &vec![0.0; nodal.n_dofs()],
                4,
                &SolveOptions::default(),
            )
            .unwrap();
        assert!(sol.dofs.iter().all(|v| *v == 0.0));
    }
}
