//! Element classification and cut-cell topology against a level-set interface.
//!
//! Cut points are computed once per background edge and shared by both
//! adjacent elements, so neighbouring interface elements see bit-identical
//! coordinates. A cut closer than [`SNAP_TOLERANCE`] (relative to the edge
//! length) to a vertex is snapped: the vertex is marked as lying on the
//! interface and the edge is no longer considered cut.

use crate::geometry::{centroid, triangle_area, Point, Side};
use crate::level_set::LevelSet;
use crate::mesh::BackgroundMesh;
use crate::{IvemError, Result};

/// Relative distance below which a cut point is snapped onto a vertex.
pub const SNAP_TOLERANCE: f64 = 1e-10;
/// Relative bracket width at which bisection stops.
pub const ROOT_TOLERANCE: f64 = 1e-13;
/// Interior samples per edge used to detect crossings the vertex signs miss.
const EDGE_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSign {
    Minus,
    Zero,
    Plus,
}

impl VertexSign {
    fn of(phi: f64) -> VertexSign {
        if phi < 0.0 {
            VertexSign::Minus
        } else if phi > 0.0 {
            VertexSign::Plus
        } else {
            VertexSign::Zero
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            VertexSign::Minus => Some(Side::Minus),
            VertexSign::Plus => Some(Side::Plus),
            VertexSign::Zero => None,
        }
    }

    fn opposes(self, other: VertexSign) -> bool {
        matches!(
            (self, other),
            (VertexSign::Minus, VertexSign::Plus) | (VertexSign::Plus, VertexSign::Minus)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementLabel {
    Plus,
    Minus,
    Interface,
}

/// Canonical cut point of a background edge; `t` is measured from the lower
/// vertex index towards the higher one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCut {
    pub point: Point,
    pub t: f64,
}

/// A node on the boundary of an interface element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalNode {
    Vertex(usize),
    /// Cut point of the given background edge.
    Cut(usize),
}

/// A piece of a background edge lying on one side of Γ_h, traversed
/// counterclockwise around its element.
#[derive(Debug, Clone)]
pub struct SubEdge {
    /// Local node indices of the endpoints, in counterclockwise order.
    pub start: usize,
    pub end: usize,
    pub a: Point,
    pub b: Point,
    pub side: Side,
    pub host_edge: usize,
    pub length: f64,
    /// Unit tangent from `a` to `b`.
    pub tangent: Point,
    /// Unit outward normal of the element.
    pub normal: Point,
}

impl SubEdge {
    pub fn midpoint(&self) -> Point {
        (self.a + self.b) * 0.5
    }
}

/// Geometry of one interface element cut by a straight segment Γ^K_h.
#[derive(Debug, Clone)]
pub struct CutTopology {
    pub element: usize,
    pub vertices: [Point; 3],
    pub area: f64,
    pub diameter: f64,
    /// The two endpoints of Γ^K_h in counterclockwise boundary order.
    pub cut_points: [Point; 2],
    pub cut_nodes: [LocalNode; 2],
    /// Host background edge of each cut point (`None` for a snapped vertex).
    pub cut_hosts: [Option<usize>; 2],
    pub midpoint: Point,
    /// Unit normal of Γ^K_h pointing from K⁻_h into K⁺_h.
    pub normal: Point,
    /// `normal` rotated counterclockwise by π/2.
    pub tangent: Point,
    pub sub_plus: Vec<Point>,
    pub sub_minus: Vec<Point>,
    pub area_plus: f64,
    pub area_minus: f64,
    /// Boundary nodes 𝒩_K in counterclockwise order, starting at the first vertex.
    pub nodes: Vec<LocalNode>,
    pub node_points: Vec<Point>,
    /// Region of each node; `None` for nodes on Γ^K_h.
    pub node_sides: Vec<Option<Side>>,
    /// Sub-edges ℰ_K; sub-edge `i` joins node `i` and node `i + 1`.
    pub edges: Vec<SubEdge>,
}

impl CutTopology {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn sub_polygon(&self, side: Side) -> &[Point] {
        match side {
            Side::Plus => &self.sub_plus,
            Side::Minus => &self.sub_minus,
        }
    }

    pub fn sub_area(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.area_plus,
            Side::Minus => self.area_minus,
        }
    }

    /// Region of `x` relative to the line through Γ^K_h.
    pub fn side_of(&self, x: &Point) -> Side {
        if (x - self.midpoint).dot(&self.normal) >= 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    /// Side used to evaluate piecewise functions at boundary node `k`
    /// (either side is valid for nodes on Γ^K_h).
    pub fn node_eval_side(&self, k: usize) -> Side {
        self.node_sides[k].unwrap_or(Side::Minus)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn gamma_length(&self) -> f64 {
        (self.cut_points[1] - self.cut_points[0]).norm()
    }

    /// `n` equally spaced points on Γ^K_h, endpoints included.
    pub fn gamma_samples(&self, n: usize) -> Vec<Point> {
        let [b1, b2] = self.cut_points;
        (0..n)
            .map(|i| {
                let s = if n == 1 {
                    0.5
                } else {
                    i as f64 / (n - 1) as f64
                };
                b1 + (b2 - b1) * s
            })
            .collect()
    }
}

/// Classification, canonical cut points and cut topologies of a whole mesh.
#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    pub vertex_signs: Vec<VertexSign>,
    pub edge_cuts: Vec<Option<EdgeCut>>,
    pub labels: Vec<ElementLabel>,
    pub cuts: Vec<Option<CutTopology>>,
    /// Edges the interface crosses an even number of times between
    /// equal-signed endpoints; the enclosed sliver joins the mismatch region.
    pub unresolved_edges: Vec<usize>,
}

fn bisect(ls: &dyn LevelSet, a: &Point, b: &Point, fa: f64, edge: usize) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        if hi - lo <= ROOT_TOLERANCE {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        let f = ls.value(&(a + (b - a) * mid));
        if !f.is_finite() {
            return Err(IvemError::Geometry(format!(
                "level set is not finite on edge {edge}"
            )));
        }
        if f == 0.0 {
            return Ok(mid);
        }
        if (f < 0.0) == neg_at_a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(IvemError::Geometry(format!(
        "root finder did not converge on edge {edge}"
    )))
}

impl InterfaceGeometry {
    pub fn new(mesh: &BackgroundMesh, ls: &dyn LevelSet) -> Result<Self> {
        let phi: Vec<f64> = mesh.vertices.iter().map(|x| ls.value(x)).collect();
        if let Some(v) = phi.iter().position(|p| !p.is_finite()) {
            return Err(IvemError::Geometry(format!(
                "level set is not finite at vertex {v}"
            )));
        }
        let raw: Vec<VertexSign> = phi.iter().map(|&p| VertexSign::of(p)).collect();

        // roots of every raw sign-changing edge, then snapping
        let mut roots = vec![None; mesh.n_edges()];
        let mut signs = raw.clone();
        for (e, &[p, q]) in mesh.edges.iter().enumerate() {
            if raw[p].opposes(raw[q]) {
                let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
                let t = bisect(ls, &a, &b, phi[p], e)?;
                if t < SNAP_TOLERANCE {
                    signs[p] = VertexSign::Zero;
                } else if t > 1.0 - SNAP_TOLERANCE {
                    signs[q] = VertexSign::Zero;
                }
                roots[e] = Some(t);
            }
        }

        let mut edge_cuts = vec![None; mesh.n_edges()];
        for (e, &[p, q]) in mesh.edges.iter().enumerate() {
            if signs[p].opposes(signs[q]) {
                let t = roots[e].ok_or_else(|| {
                    IvemError::Consistency(format!("edge {e} lost its root after snapping"))
                })?;
                let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
                edge_cuts[e] = Some(EdgeCut {
                    point: a + (b - a) * t,
                    t,
                });
            }
        }

        // crossings between equal-signed endpoints are not resolved by the vertex signs
        let mut unresolved_edges = Vec::new();
        for (e, &[p, q]) in mesh.edges.iter().enumerate() {
            let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
            let mut seq: Vec<bool> = Vec::with_capacity(EDGE_SAMPLES + 2);
            if let Some(s) = signs[p].side() {
                seq.push(s == Side::Plus);
            }
            for i in 1..=EDGE_SAMPLES {
                let x = a + (b - a) * (i as f64 / (EDGE_SAMPLES + 1) as f64);
                let v = ls.value(&x);
                if v != 0.0 {
                    seq.push(v > 0.0);
                }
            }
            if let Some(s) = signs[q].side() {
                seq.push(s == Side::Plus);
            }
            let changes = seq.windows(2).filter(|w| w[0] != w[1]).count();
            if changes > usize::from(edge_cuts[e].is_some()) {
                unresolved_edges.push(e);
            }
        }
        if !unresolved_edges.is_empty() {
            log::warn!(
                "{} edge(s) crossed twice by the interface (first: edge {}); treated by vertex signs",
                unresolved_edges.len(),
                unresolved_edges[0]
            );
        }

        let mut labels = Vec::with_capacity(mesh.n_triangles());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let s = tri.map(|v| signs[v]);
            let plus = s.contains(&VertexSign::Plus);
            let minus = s.contains(&VertexSign::Minus);
            labels.push(match (plus, minus) {
                (true, true) => ElementLabel::Interface,
                (true, false) => ElementLabel::Plus,
                (false, true) => ElementLabel::Minus,
                (false, false) => {
                    return Err(IvemError::AssumptionViolation {
                        triangle: t,
                        detail: "all three vertices lie on the interface".into(),
                    })
                }
            });
        }

        let mut geom = InterfaceGeometry {
            vertex_signs: signs,
            edge_cuts,
            labels,
            cuts: Vec::new(),
            unresolved_edges,
        };
        let mut cuts = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            cuts.push(if geom.labels[t] == ElementLabel::Interface {
                Some(geom.build_topology(mesh, t)?)
            } else {
                None
            });
        }
        geom.cuts = cuts;
        Ok(geom)
    }

    pub fn label(&self, t: usize) -> ElementLabel {
        self.labels[t]
    }

    pub fn cut(&self, t: usize) -> Option<&CutTopology> {
        self.cuts[t].as_ref()
    }

    pub fn interface_elements(&self) -> impl Iterator<Item = &CutTopology> {
        self.cuts.iter().flatten()
    }

    pub fn n_interface(&self) -> usize {
        self.cuts.iter().flatten().count()
    }

    pub fn n_cut_edges(&self) -> usize {
        self.edge_cuts.iter().flatten().count()
    }

    /// Region of a non-interface element.
    pub fn element_side(&self, t: usize) -> Option<Side> {
        match self.labels[t] {
            ElementLabel::Plus => Some(Side::Plus),
            ElementLabel::Minus => Some(Side::Minus),
            ElementLabel::Interface => None,
        }
    }

    /// Largest distance from Γ_h to the zero level set, measured as `|φ|`
    /// along each cut segment (exact distance for signed-distance level sets).
    pub fn max_segment_deviation(&self, ls: &dyn LevelSet) -> f64 {
        self.interface_elements()
            .flat_map(|c| c.gamma_samples(17))
            .map(|x| ls.value(&x).abs())
            .fold(0.0, f64::max)
    }

    /// `(t, b1, b2)` records for the mesh dump.
    pub fn cut_records(&self) -> Vec<(usize, Point, Point)> {
        self.interface_elements()
            .map(|c| (c.element, c.cut_points[0], c.cut_points[1]))
            .collect()
    }

    fn build_topology(&self, mesh: &BackgroundMesh, t: usize) -> Result<CutTopology> {
        let tri = mesh.triangles[t];
        let vertices = mesh.triangle_points(t);
        let area = mesh.area(t);

        let mut nodes = Vec::with_capacity(5);
        let mut node_points = Vec::with_capacity(5);
        let mut node_sides = Vec::with_capacity(5);
        let mut node_hosts = Vec::with_capacity(5);
        for k in 0..3 {
            let v = tri[k];
            nodes.push(LocalNode::Vertex(v));
            node_points.push(vertices[k]);
            node_sides.push(self.vertex_signs[v].side());
            node_hosts.push(None);
            let e = mesh.triangle_edges[t][k];
            if let Some(cut) = &self.edge_cuts[e] {
                nodes.push(LocalNode::Cut(e));
                node_points.push(cut.point);
                node_sides.push(None);
                node_hosts.push(Some(e));
            }
        }

        let on_gamma: Vec<usize> = (0..nodes.len())
            .filter(|&k| node_sides[k].is_none())
            .collect();
        if on_gamma.len() != 2 {
            return Err(IvemError::AssumptionViolation {
                triangle: t,
                detail: format!("{} interface points instead of 2", on_gamma.len()),
            });
        }
        let cut_points = [node_points[on_gamma[0]], node_points[on_gamma[1]]];
        let cut_nodes = [nodes[on_gamma[0]], nodes[on_gamma[1]]];
        let cut_hosts = [node_hosts[on_gamma[0]], node_hosts[on_gamma[1]]];
        if let (Some(a), Some(b)) = (cut_hosts[0], cut_hosts[1]) {
            if a == b {
                return Err(IvemError::AssumptionViolation {
                    triangle: t,
                    detail: "both cut points on the same edge".into(),
                });
            }
        }

        let collect = |side: Side| -> Vec<Point> {
            (0..nodes.len())
                .filter(|&k| node_sides[k].is_none_or(|s| s == side))
                .map(|k| node_points[k])
                .collect()
        };
        let sub_plus = collect(Side::Plus);
        let sub_minus = collect(Side::Minus);
        let area_plus = crate::geometry::signed_area(&sub_plus);
        let area_minus = crate::geometry::signed_area(&sub_minus);

        let midpoint = (cut_points[0] + cut_points[1]) * 0.5;
        let seg = cut_points[1] - cut_points[0];
        if seg.norm() == 0.0 {
            return Err(IvemError::Geometry(format!(
                "zero-length interface segment in triangle {t}"
            )));
        }
        let mut normal = Point::new(seg.y, -seg.x).normalize();
        if (centroid(&sub_plus) - midpoint).dot(&normal) < 0.0 {
            normal = -normal;
        }
        let tangent = crate::geometry::rot90(&normal);

        let n = nodes.len();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (node_points[i], node_points[j]);
            let side = node_sides[i].or(node_sides[j]).ok_or_else(|| {
                IvemError::Consistency(format!(
                    "sub-edge {i} of triangle {t} lies on the interface"
                ))
            })?;
            // host: the local background edge containing both endpoints
            let host_edge = match (nodes[i], nodes[j]) {
                (LocalNode::Cut(e), _) | (_, LocalNode::Cut(e)) => e,
                (LocalNode::Vertex(p), LocalNode::Vertex(q)) => {
                    let k = (0..3)
                        .find(|&k| tri[k] == p && tri[(k + 1) % 3] == q)
                        .ok_or_else(|| {
                            IvemError::Consistency(format!("bad boundary loop in {t}"))
                        })?;
                    mesh.triangle_edges[t][k]
                }
            };
            let d = b - a;
            let length = d.norm();
            let tangent = d / length;
            edges.push(SubEdge {
                start: i,
                end: j,
                a,
                b,
                side,
                host_edge,
                length,
                tangent,
                normal: Point::new(tangent.y, -tangent.x),
            });
        }

        let diameter = crate::geometry::diameter(&vertices);
        debug_assert!(
            (area_plus + area_minus - triangle_area(&vertices[0], &vertices[1], &vertices[2]))
                .abs()
                <= 1e-12 * area
        );

        Ok(CutTopology {
            element: t,
            vertices,
            area,
            diameter,
            cut_points,
            cut_nodes,
            cut_hosts,
            midpoint,
            normal,
            tangent,
            sub_plus,
            sub_minus,
            area_plus,
            area_minus,
            nodes,
            node_points,
            node_sides,
            edges,
        })
    }
}

/// Per-triangle labels of the mesh against the level set.
pub fn classify_elements(mesh: &BackgroundMesh, ls: &dyn LevelSet) -> Result<Vec<ElementLabel>> {
    Ok(InterfaceGeometry::new(mesh, ls)?.labels)
}

/// Cut topology of one interface triangle, computed with the mesh-wide
/// canonical cut points.
pub fn compute_cut(mesh: &BackgroundMesh, t: usize, ls: &dyn LevelSet) -> Result<CutTopology> {
    let mut geom = InterfaceGeometry::new(mesh, ls)?;
    geom.cuts.get_mut(t).and_then(Option::take).ok_or_else(|| {
        IvemError::InvalidArgument(format!("triangle {t} is not an interface element"))
    })
}
