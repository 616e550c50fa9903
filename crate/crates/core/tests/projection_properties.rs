use std::collections::HashMap;

use ivem::cut::CutTopology;
use ivem::geometry::{barycentric_gradients, point_segment_distance, Point, Side};
use ivem::ife::{h1_ife_basis, Coefficients, IfeH1Function, PiecewiseConstantField};
use ivem::projection::{curl_from_dofs, CurlProjection, H1Projection, GRAM_CONDITION_WARNING};
use ivem::verify::{random_coefficients, random_cut};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fitted P1 mesh of a cut element: both sub-polygons fanned and uniformly
/// refined, nodes merged by exact coordinates.
struct Submesh {
    nodes: Vec<Point>,
    triangles: Vec<([usize; 3], Side)>,
}

fn submesh(cut: &CutTopology, levels: usize) -> Submesh {
    let mut tris: Vec<([Point; 3], Side)> = Vec::new();
    for side in Side::BOTH {
        let poly = cut.sub_polygon(side);
        for k in 1..poly.len() - 1 {
            tris.push(([poly[0], poly[k], poly[k + 1]], side));
        }
    }
    for _ in 0..levels {
        let mut next = Vec::with_capacity(4 * tris.len());
        for ([a, b, c], s) in tris {
            let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
            next.extend([
                ([a, ab, ca], s),
                ([ab, b, bc], s),
                ([ca, bc, c], s),
                ([ab, bc, ca], s),
            ]);
        }
        tris = next;
    }
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut id = |p: Point| {
        *index
            .entry((p.x.to_bits(), p.y.to_bits()))
            .or_insert_with(|| {
                nodes.push(p);
                nodes.len() - 1
            })
    };
    let triangles = tris.into_iter().map(|(t, s)| (t.map(&mut id), s)).collect();
    Submesh { nodes, triangles }
}

/// Trace of the virtual function at a boundary point: linear along the
/// sub-edge containing it.
fn boundary_value(cut: &CutTopology, dofs: &[f64], x: &Point) -> Option<f64> {
    let tol = 1e-12 * cut.diameter;
    cut.edges
        .iter()
        .find(|e| point_segment_distance(x, &e.a, &e.b) <= tol)
        .map(|e| {
            let s = (x - e.a).norm() / e.length;
            dofs[e.start] * (1.0 - s) + dofs[e.end] * s
        })
}

/// β_h-harmonic P1 extension of the boundary DoFs; returns the gradient on
/// each submesh triangle.
fn harmonic_extension(
    cut: &CutTopology,
    coef: &Coefficients,
    dofs: &[f64],
    mesh: &Submesh,
) -> Vec<Point> {
    let n = mesh.nodes.len();
    let fixed: Vec<Option<f64>> = mesh
        .nodes
        .iter()
        .map(|x| boundary_value(cut, dofs, x))
        .collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (t, side) in &mesh.triangles {
        let p = t.map(|i| mesh.nodes[i]);
        let g = barycentric_gradients(&p);
        let area = ivem::geometry::triangle_area(&p[0], &p[1], &p[2]);
        for i in 0..3 {
            for j in 0..3 {
                a[(t[i], t[j])] += coef.beta(*side) * area * g[i].dot(&g[j]);
            }
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let mut u: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
    let af = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let rhs = DVector::from_fn(free.len(), |i, _| {
        -(0..n).map(|j| a[(free[i], j)] * u[j]).sum::<f64>()
    });
    let x = af.cholesky().expect("SPD stiffness").solve(&rhs);
    for (k, &i) in free.iter().enumerate() {
        u[i] = x[k];
    }
    mesh.triangles
        .iter()
        .map(|(t, _)| {
            let p = t.map(|i| mesh.nodes[i]);
            let g = barycentric_gradients(&p);
            g[0] * u[t[0]] + g[1] * u[t[1]] + g[2] * u[t[2]]
        })
        .collect()
}

/// `(β_h(∇u − v), ∇χ)_K` over the submesh for each H¹ IFE basis function χ,
/// relative to `(β_h|∇u|, |∇χ|)_K`.
fn orthogonality_defect(
    cut: &CutTopology,
    coef: &Coefficients,
    mesh: &Submesh,
    grads: &[Point],
    v: impl Fn(Side) -> Point,
) -> f64 {
    let basis = h1_ife_basis(cut, coef);
    let mut worst: f64 = 0.0;
    for chi in &basis {
        let mut defect = 0.0;
        let mut scale = 0.0;
        for ((t, side), g) in mesh.triangles.iter().zip(grads) {
            let p = t.map(|i| mesh.nodes[i]);
            let area = ivem::geometry::triangle_area(&p[0], &p[1], &p[2]);
            let w = coef.beta(*side) * area;
            defect += w * (g - v(*side)).dot(&chi.gradient(*side));
            scale += w * g.norm() * chi.gradient(*side).norm();
        }
        worst = worst.max(defect.abs() / scale);
    }
    worst
}

fn random_dofs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn h1_projection_is_energy_orthogonal_against_fem_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let dofs = random_dofs(&mut rng, cut.n_nodes());
        let mesh = submesh(&cut, 3);
        let grads = harmonic_extension(&cut, &coef, &dofs, &mesh);
        let proj = H1Projection::build(&cut, &coef).unwrap().apply(&dofs);
        let defect = orthogonality_defect(&cut, &coef, &mesh, &grads, |s| proj.gradient(s));
        assert!(defect <= 1e-9, "energy orthogonality defect {defect:e}");
    }
}

#[test]
fn curl_projection_is_weighted_l2_orthogonal_on_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let nodal = random_dofs(&mut rng, cut.n_nodes());
        let mesh = submesh(&cut, 3);
        let grads = harmonic_extension(&cut, &coef, &nodal, &mesh);
        // tangential averages of the gradient field along each counterclockwise sub-edge
        let edge_dofs: Vec<f64> = cut
            .edges
            .iter()
            .map(|e| (nodal[e.end] - nodal[e.start]) / e.length)
            .collect();
        let (curl_plus, curl_minus) = curl_from_dofs(&cut, &coef, &edge_dofs);
        assert!(
            curl_plus.abs() + curl_minus.abs()
                <= 1e-10 * edge_dofs.iter().fold(0.0, |m: f64, d| m.max(d.abs()))
        );
        let proj = CurlProjection::build(&cut, &coef)
            .unwrap()
            .apply(&edge_dofs);
        let defect = orthogonality_defect(&cut, &coef, &mesh, &grads, |s| proj.get(s));
        assert!(
            defect <= 1e-9,
            "weighted L2 orthogonality defect {defect:e}"
        );
    }
}

#[test]
fn gram_condition_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let h1 = H1Projection::build(&cut, &coef).unwrap();
        let curl = CurlProjection::build(&cut, &coef).unwrap();
        for g in [h1.gram, curl.gram] {
            assert!(g.cholesky().is_some());
            assert!((g - g.transpose()).amax() == 0.0);
        }
        worst = worst.max(h1.gram_condition()).max(curl.gram_condition());
    }
    println!("max Gram condition number over 1000 cuts: {worst:.3e}");
    assert!(worst < GRAM_CONDITION_WARNING);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn projections_are_idempotent(seed in any::<u64>(), c0 in -1.0f64..1.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);

        let c = Point::new(cx, cy) / cut.diameter;
        let s = IfeH1Function::new(&cut, &coef, c0, c);
        let dofs: Vec<f64> = (0..cut.n_nodes()).map(|k| s.value(&cut.node_points[k], cut.node_eval_side(k))).collect();
        let h1 = H1Projection::build(&cut, &coef).unwrap();
        let p = h1.apply(&dofs);
        let energy = |v: Point| v.dot(&(h1.gram * v)).sqrt();
        let scale = dofs.iter().fold(c0.abs(), |m, v| m.max(v.abs()));
        prop_assert!((p.c0 - c0).abs() <= 1e-12 * scale);
        prop_assert!(energy(p.c - c) <= 1e-12 * energy(c));

        let curl = CurlProjection::build(&cut, &coef).unwrap();
        let v = PiecewiseConstantField::from_minus(&curl.jump, Point::new(cx, cy));
        let edge_dofs: Vec<f64> = cut.edges.iter().map(|e| v.get(e.side).dot(&e.tangent)).collect();
        let w = curl.apply(&edge_dofs);
        let mass = |v: Point| v.dot(&(curl.gram * v)).sqrt();
        prop_assert!(mass(w.minus - v.minus) <= 1e-12 * mass(v.minus));
    }

    #[test]
    fn curl_from_dofs_balances_alpha_curl(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let dofs = random_dofs(&mut rng, cut.edges.len());
        let (cp, cm) = curl_from_dofs(&cut, &coef, &dofs);
        let scale = (coef.alpha_plus * cp).abs().max(f64::MIN_POSITIVE);
        prop_assert!((coef.alpha_plus * cp - coef.alpha_minus * cm).abs() <= 1e-14 * scale);
        // Stokes: ∫_K curl = ∮ u·t
        let circulation: f64 = cut.edges.iter().zip(&dofs).map(|(e, d)| e.length * d).sum();
        let integral = cut.area_plus * cp + cut.area_minus * cm;
        prop_assert!((integral - circulation).abs() <= 1e-12 * circulation.abs().max(1e-300) + 1e-15 * cut.diameter);
    }
}
