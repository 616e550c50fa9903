//! Background triangulations.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::{triangle_area, Point};
use crate::{IvemError, Result};

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rectangle {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        if !(max[0] > min[0] && max[1] > min[1]) {
            return Err(IvemError::InvalidArgument(format!(
                "degenerate rectangle {min:?}..{max:?}"
            )));
        }
        Ok(Rectangle { min, max })
    }

    pub fn unit_square() -> Self {
        Rectangle {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// A conforming triangulation with its deduplicated edge list.
///
/// Local edge `k` of triangle `t` joins `triangles[t][k]` and
/// `triangles[t][(k + 1) % 3]`; `triangle_edges[t][k]` is its global index.
/// Global edges are stored with the lower vertex index first, which also
/// fixes their global orientation.
#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub edge_triangles: Vec<Vec<usize>>,
    pub triangle_edges: Vec<[usize; 3]>,
    pub h: f64,
}

impl BackgroundMesh {
    /// Builds connectivity for the given triangles, which must be
    /// counterclockwise with positive area.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut h: f64 = 0.0;

        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(IvemError::InvalidArgument(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let area = triangle_area(&a, &b, &c);
            if !(area > 0.0) {
                return Err(IvemError::InvalidArgument(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
            h = h
                .max((b - a).norm())
                .max((c - b).norm())
                .max((a - c).norm());

            let mut local = [0usize; 3];
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                let key = [p.min(q), p.max(q)];
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[e].push(t);
                local[k] = e;
            }
            triangle_edges.push(local);
        }

        if let Some(e) = edge_triangles.iter().position(|ts| ts.len() > 2) {
            return Err(IvemError::InvalidArgument(format!(
                "edge {:?} is shared by more than two triangles",
                edges[e]
            )));
        }

        Ok(BackgroundMesh {
            vertices,
            triangles,
            edges,
            edge_triangles,
            triangle_edges,
            h,
        })
    }

    /// Uniform `n × n` grid of the rectangle, each cell split along its
    /// lower-left to upper-right diagonal into two right triangles.
    pub fn uniform(domain: &Rectangle, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(IvemError::InvalidArgument(format!(
                "uniform mesh needs at least 2 subdivisions per side, got {n}"
            )));
        }
        let (dx, dy) = (domain.width() / n as f64, domain.height() / n as f64);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(
                    domain.min[0] + i as f64 * dx,
                    domain.min[1] + j as f64 * dy,
                ));
            }
        }
        // pin the far boundary exactly
        for j in 0..=n {
            vertices[j * (n + 1) + n].x = domain.max[0];
        }
        for i in 0..=n {
            vertices[n * (n + 1) + i].y = domain.max[1];
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        BackgroundMesh::new(vertices, triangles)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        triangle_area(&a, &b, &c)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].len() == 1
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Flags vertices lying on a boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for (e, [a, b]) in self.edges.iter().enumerate() {
            if self.is_boundary_edge(e) {
                on[*a] = true;
                on[*b] = true;
            }
        }
        on
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_degrees(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let cos = u.dot(&v) / (u.norm() * v.norm());
                min = min.min(cos.clamp(-1.0, 1.0).acos().to_degrees());
            }
        }
        min
    }
}

/// Writes the plain-text mesh dump: `v x y`, `t i j k` and
/// `cut t bx1 by1 bx2 by2` records, one per line.
pub fn dump_mesh(mesh: &BackgroundMesh, cuts: &[(usize, Point, Point)]) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.17e} {:.17e}", v.x, v.y);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    for (t, b1, b2) in cuts {
        let _ = writeln!(
            out,
            "cut {} {:.17e} {:.17e} {:.17e} {:.17e}",
            t, b1.x, b1.y, b2.x, b2.y
        );
    }
    out
}
