//! Global degrees of freedom for the nodal space V^n_h and the edge space
//! **V**^e_h, plus Lagrange and edge interpolation.
//!
//! Nodal DoFs are the mesh vertices followed by the canonical cut points in
//! background-edge order. Edge DoFs are average tangential components over
//! background edges, or over both halves of an edge cut by Γ_h. A DoF is
//! oriented from the lower to the higher vertex index of its host edge.

use rayon::prelude::*;

use crate::cut::{InterfaceGeometry, LocalNode};
use crate::geometry::Point;
use crate::mesh::BackgroundMesh;
use crate::quadrature::gauss_legendre;
use crate::{IvemError, Result};

#[derive(Debug, Clone)]
pub struct NodalDofMap {
    pub points: Vec<Point>,
    pub is_boundary: Vec<bool>,
    /// Global index of the cut point of each background edge.
    pub cut_dof: Vec<Option<usize>>,
    element_dofs: Vec<Vec<usize>>,
}

impl NodalDofMap {
    pub fn n_dofs(&self) -> usize {
        self.points.len()
    }

    /// Global indices of the local nodes 𝒩_K, counterclockwise.
    pub fn element_dofs(&self, t: usize) -> &[usize] {
        &self.element_dofs[t]
    }
}

/// One edge DoF: a background edge or one half of a cut background edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDof {
    pub host_edge: usize,
    /// Nodal DoF indices of the endpoints in global orientation.
    pub start: usize,
    pub end: usize,
    pub a: Point,
    pub b: Point,
    pub length: f64,
    pub tangent: Point,
}

#[derive(Debug, Clone)]
pub struct EdgeDofMap {
    pub dofs: Vec<EdgeDof>,
    pub is_boundary: Vec<bool>,
    element_dofs: Vec<Vec<(usize, f64)>>,
}

impl EdgeDofMap {
    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// `(global index, orientation sign)` of each local edge of element `t`
    /// in counterclockwise order.
    pub fn element_dofs(&self, t: usize) -> &[(usize, f64)] {
        &self.element_dofs[t]
    }

    /// Local DoFs of element `t` in element (counterclockwise) orientation.
    pub fn local_values(&self, t: usize, global: &[f64]) -> Vec<f64> {
        self.element_dofs[t]
            .iter()
            .map(|&(g, s)| s * global[g])
            .collect()
    }
}

pub fn build_dof_maps(
    mesh: &BackgroundMesh,
    geom: &InterfaceGeometry,
) -> Result<(NodalDofMap, EdgeDofMap)> {
    let boundary_vertices = mesh.boundary_vertices();
    let mut points = mesh.vertices.clone();
    let mut is_boundary = boundary_vertices;
    let mut cut_dof = vec![None; mesh.n_edges()];
    for (e, cut) in geom.edge_cuts.iter().enumerate() {
        if let Some(cut) = cut {
            cut_dof[e] = Some(points.len());
            points.push(cut.point);
            is_boundary.push(mesh.is_boundary_edge(e));
        }
    }

    let node_dof = |node: LocalNode| -> Result<usize> {
        match node {
            LocalNode::Vertex(v) => Ok(v),
            LocalNode::Cut(e) => cut_dof[e]
                .ok_or_else(|| IvemError::Consistency(format!("cut node on uncut edge {e}"))),
        }
    };

    let mut dofs = Vec::new();
    let mut edge_boundary = Vec::new();
    // first DoF of each background edge; cut edges own two consecutive DoFs
    let mut first_dof = Vec::with_capacity(mesh.n_edges());
    for (e, &[lo, hi]) in mesh.edges.iter().enumerate() {
        first_dof.push(dofs.len());
        let mut push = |start: usize, end: usize| {
            let (a, b) = (points[start], points[end]);
            let length = (b - a).norm();
            dofs.push(EdgeDof {
                host_edge: e,
                start,
                end,
                a,
                b,
                length,
                tangent: (b - a) / length,
            });
            edge_boundary.push(mesh.is_boundary_edge(e));
        };
        match cut_dof[e] {
            Some(c) => {
                push(lo, c);
                push(c, hi);
            }
            None => push(lo, hi),
        }
    }

    let mut nodal_elements = Vec::with_capacity(mesh.n_triangles());
    let mut edge_elements = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles[t];
        match geom.cut(t) {
            None => {
                nodal_elements.push(tri.to_vec());
                let mut local = Vec::with_capacity(3);
                for k in 0..3 {
                    let e = mesh.triangle_edges[t][k];
                    if cut_dof[e].is_some() {
                        return Err(IvemError::Consistency(format!(
                            "non-interface triangle {t} has cut edge {e}"
                        )));
                    }
                    let sign = if tri[k] < tri[(k + 1) % 3] { 1.0 } else { -1.0 };
                    local.push((first_dof[e], sign));
                }
                edge_elements.push(local);
            }
            Some(cut) => {
                let nodes = cut
                    .nodes
                    .iter()
                    .map(|&n| node_dof(n))
                    .collect::<Result<Vec<_>>>()?;
                let mut local = Vec::with_capacity(cut.edges.len());
                for sub in &cut.edges {
                    let e = sub.host_edge;
                    let [lo, hi] = mesh.edges[e];
                    let global_dir = mesh.vertices[hi] - mesh.vertices[lo];
                    let sign = if sub.tangent.dot(&global_dir) > 0.0 {
                        1.0
                    } else {
                        -1.0
                    };
                    let dof = match cut_dof[e] {
                        None => first_dof[e],
                        Some(_) => {
                            let touches_lo = [sub.start, sub.end]
                                .iter()
                                .any(|&k| cut.nodes[k] == LocalNode::Vertex(lo));
                            if touches_lo {
                                first_dof[e]
                            } else {
                                first_dof[e] + 1
                            }
                        }
                    };
                    let d = &dofs[dof];
                    let (s, f) = (nodes[sub.start], nodes[sub.end]);
                    if !((d.start == s && d.end == f) || (d.start == f && d.end == s)) {
                        return Err(IvemError::Consistency(format!(
                            "sub-edge of triangle {t} does not match edge DoF {dof}"
                        )));
                    }
                    local.push((dof, sign));
                }
                nodal_elements.push(nodes);
                edge_elements.push(local);
            }
        }
    }

    let nodal = NodalDofMap {
        points,
        is_boundary,
        cut_dof,
        element_dofs: nodal_elements,
    };
    let edge = EdgeDofMap {
        dofs,
        is_boundary: edge_boundary,
        element_dofs: edge_elements,
    };
    check_conformity(&edge)?;
    Ok((nodal, edge))
}

/// Every edge DoF is used once on the boundary, or twice with opposite signs
/// in the interior.
fn check_conformity(edge: &EdgeDofMap) -> Result<()> {
    let mut uses: Vec<Vec<f64>> = vec![Vec::new(); edge.n_dofs()];
    for local in &edge.element_dofs {
        for &(g, s) in local {
            uses[g].push(s);
        }
    }
    for (g, u) in uses.iter().enumerate() {
        let ok = if edge.is_boundary[g] {
            u.len() == 1
        } else {
            u.len() == 2 && u[0] == -u[1]
        };
        if !ok {
            return Err(IvemError::Consistency(format!(
                "edge DoF {g} referenced {} times with signs {u:?}",
                u.len()
            )));
        }
    }
    Ok(())
}

pub fn interpolate_nodal(map: &NodalDofMap, u: &(dyn Fn(&Point) -> f64 + Sync)) -> Vec<f64> {
    map.points.par_iter().map(u).collect()
}

/// Average tangential components `(1/|e|) ∫_e u·t ds` with an
/// `n_points`-point Gauss–Legendre rule per DoF.
pub fn interpolate_edge(
    map: &EdgeDofMap,
    u: &(dyn Fn(&Point) -> Point + Sync),
    n_points: usize,
) -> Vec<f64> {
    let (nodes, weights) = gauss_legendre(n_points);
    map.dofs
        .par_iter()
        .map(|d| {
            nodes
                .iter()
                .zip(&weights)
                .map(|(s, w)| {
                    let x = d.a + (d.b - d.a) * (0.5 * (s + 1.0));
                    0.5 * w * u(&x).dot(&d.tangent)
                })
                .sum()
        })
        .collect()
}

/// Edge DoFs of the gradient of the nodal function `p`.
pub fn discrete_gradient(map: &EdgeDofMap, p: &[f64]) -> Vec<f64> {
    map.dofs
        .iter()
        .map(|d| (p[d.end] - p[d.start]) / d.length)
        .collect()
}
