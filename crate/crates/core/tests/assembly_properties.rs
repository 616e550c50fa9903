use ivem::cut::{CutTopology, InterfaceGeometry};
use ivem::dofs::{build_dof_maps, discrete_gradient, interpolate_edge, interpolate_nodal};
use ivem::geometry::{Point, Side};
use ivem::ife::{Coefficients, IfeH1Function};
use ivem::level_set::Circle;
use ivem::mesh::{BackgroundMesh, Rectangle};
use ivem::projection::{curl_from_dofs, CurlProjection, H1Projection};
use ivem::scheme_h1::{local_h1_matrix, H1Scheme};
use ivem::scheme_hcurl::{curl_curl_block, CurlScheme, Stabilization};
use ivem::solver::{assemble, cg_solve, CgOptions, LocalSystem, ProfileCholesky};
use ivem::standard::nedelec_curl_curl;
use ivem::verify::{random_coefficients, random_cut};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circle_geometry(n: usize, center: Point) -> (BackgroundMesh, InterfaceGeometry) {
    let mesh = BackgroundMesh::uniform(&Rectangle::unit_square(), n).unwrap();
    let geom = InterfaceGeometry::new(&mesh, &Circle::new(center, 0.3)).unwrap();
    (mesh, geom)
}

fn contrast() -> Coefficients {
    Coefficients::new(10.0, 1.0, 2.0, 1.0).unwrap()
}

fn vector_source(x: &Point, _: Side) -> Point {
    Point::new(x.y.sin(), x.x * x.y)
}

/// `∫_K β_h ∇χ_i·∇ℓ` for an IFE function ℓ equals `Σ_e β_e ∇ℓ·n_e |e|/2`
/// over the sub-edges touching node `i`, since χ_i is the boundary hat.
fn flux_oracle(cut: &CutTopology, coef: &Coefficients, l: &IfeH1Function) -> Vec<f64> {
    let mut out = vec![0.0; cut.n_nodes()];
    for e in &cut.edges {
        let flux = coef.beta(e.side) * l.gradient(e.side).dot(&e.normal) * e.length * 0.5;
        out[e.start] += flux;
        out[e.end] += flux;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn h1_element_matrix_is_consistent_on_ife_functions(seed in any::<u64>(), cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let proj = H1Projection::build(&cut, &coef).unwrap();
        let a = local_h1_matrix(&cut, &coef, &proj);
        let l = IfeH1Function::new(&cut, &coef, 0.7, Point::new(cx, cy));
        let dofs = nalgebra::DVector::from_fn(cut.n_nodes(), |k, _| l.value(&cut.node_points[k], cut.node_eval_side(k)));
        let got = &a * dofs;
        let expected = flux_oracle(&cut, &coef, &l);
        let scale = coef.beta_max() * (l.gradient(Side::Plus).norm() + l.gradient(Side::Minus).norm()) * cut.diameter;
        for (g, e) in got.iter().zip(&expected) {
            prop_assert!((g - e).abs() <= 1e-10 * scale, "{} vs {}", g, e);
        }
        prop_assert!((&a - a.transpose()).amax() == 0.0);
    }

    #[test]
    fn discrete_gradients_have_no_curl(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = Point::new(0.5 + rng.gen_range(-0.05..0.05), 0.5 + rng.gen_range(-0.05..0.05));
        let mesh = BackgroundMesh::uniform(&Rectangle::unit_square(), 8).unwrap();
        let geom = InterfaceGeometry::new(&mesh, &Circle::new(center, 0.3)).unwrap();
        let coef = random_coefficients(&mut rng);
        let (nodal, edge) = build_dof_maps(&mesh, &geom).unwrap();
        let p: Vec<f64> = (0..nodal.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = discrete_gradient(&edge, &p);
        for t in 0..mesh.n_triangles() {
            let local = edge.local_values(t, &g);
            let curl_norm = match geom.cut(t) {
                Some(cut) => {
                    let block = curl_curl_block(cut, &coef, &CurlProjection::build(cut, &coef).unwrap());
                    let (cp, cm) = curl_from_dofs(cut, &coef, &local);
                    prop_assert!(cp.abs() + cm.abs() <= 1e-13 * local.iter().fold(1.0, |m: f64, v| m.max(v.abs())) / cut.diameter);
                    (&block * nalgebra::DVector::from_vec(local.clone())).amax() / block.amax()
                }
                None => {
                    let b = nedelec_curl_curl(&mesh.triangle_points(t), 1.0);
                    (b * nalgebra::Vector3::new(local[0], local[1], local[2])).amax() / b.amax()
                }
            };
            prop_assert!(curl_norm <= 1e-13 * local.iter().fold(1.0, |m: f64, v| m.max(v.abs())));
        }
    }
}

#[test]
fn uncut_elements_use_the_classical_right_triangle_stiffness() {
    let (mesh, geom) = circle_geometry(8, Point::new(0.51, 0.52));
    let coef = contrast();
    let (nodal, _) = build_dof_maps(&mesh, &geom).unwrap();
    let scheme = H1Scheme::new(&mesh, &geom, &nodal, coef).unwrap();
    let f = |_: &Point, _: Side| 0.0;
    for t in (0..mesh.n_triangles()).filter(|&t| geom.cut(t).is_none()) {
        let local = scheme.local_system(t, &f, 2).unwrap();
        let beta = coef.beta(geom.element_side(t).unwrap());
        let p = mesh.triangle_points(t);
        // the right angle sits at the vertex whose two edges are orthogonal
        let right = (0..3)
            .find(|&i| (p[(i + 1) % 3] - p[i]).dot(&(p[(i + 2) % 3] - p[i])).abs() < 1e-14)
            .unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i == right, j == right, i == j) {
                    (true, true, _) => beta,
                    (false, false, true) => beta / 2.0,
                    (false, false, false) => 0.0,
                    _ => -beta / 2.0,
                };
                assert!(
                    (local.matrix[(i, j)] - expected).abs() <= 1e-14 * beta,
                    "t={t} ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn assembly_is_symmetric_and_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [8, 16] {
        let (mesh, geom) = circle_geometry(n, Point::new(0.5141, 0.5173));
        let coef = contrast();
        let (nodal, edge) = build_dof_maps(&mesh, &geom).unwrap();
        let h1 = H1Scheme::new(&mesh, &geom, &nodal, coef).unwrap();
        let curl = CurlScheme::new(&mesh, &geom, &edge, coef, Stabilization::O1).unwrap();
        let f = |x: &Point, _: Side| x.x * x.y;
        let h1_locals: Vec<LocalSystem> = (0..mesh.n_triangles())
            .map(|t| h1.local_system(t, &f, 4).unwrap())
            .collect();
        let curl_locals: Vec<LocalSystem> = (0..mesh.n_triangles())
            .map(|t| curl.local_system(t, &vector_source, 4).unwrap())
            .collect();
        for (dim, mut locals) in [(nodal.n_dofs(), h1_locals), (edge.n_dofs(), curl_locals)] {
            let (a, b) = assemble(dim, &locals);
            assert!(a.symmetry_error() <= 1e-13 * a.max_abs());
            locals.shuffle(&mut rng);
            let (a2, b2) = assemble(dim, &locals);
            assert_eq!(a.to_dense(), a2.to_dense());
            assert_eq!(b, b2);
        }
    }
}

#[test]
fn reduced_systems_are_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mesh, geom) = circle_geometry(16, Point::new(0.5141, 0.5173));
    let coef = contrast();
    let (nodal, edge) = build_dof_maps(&mesh, &geom).unwrap();
    let options = ivem::solver::SolveOptions::default();
    let h1 = H1Scheme::new(&mesh, &geom, &nodal, coef).unwrap();
    let h1_sol = h1
        .solve(
            &|_, _| 1.0,
            &interpolate_nodal(&nodal, &|x| x.x),
            4,
            &options,
        )
        .unwrap();
    let curl = CurlScheme::new(&mesh, &geom, &edge, coef, Stabilization::O1).unwrap();
    let boundary = interpolate_edge(&edge, &|x| Point::new(x.y, 0.0), 3);
    let curl_sol = curl.solve(&vector_source, &boundary, 4, &options).unwrap();
    for sol in [h1_sol, curl_sol] {
        let a = &sol.reduced.system.matrix;
        assert!(ProfileCholesky::factor(a).is_ok());
        for _ in 0..100 {
            let x: Vec<f64> = (0..a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(a.quadratic_form(&x) > 0.0);
        }
        let (_, report) = cg_solve(&sol.reduced.system, &CgOptions::default()).unwrap();
        assert!(report.ritz_min > 0.0 && report.ritz_min <= report.ritz_max);
        assert!(report.residual <= 1e-9);
    }
}

#[test]
fn stabilization_variants_differ_only_on_interface_elements() {
    let (mesh, geom) = circle_geometry(8, Point::new(0.5141, 0.5173));
    let coef = contrast();
    let (_, edge) = build_dof_maps(&mesh, &geom).unwrap();
    let o1 = CurlScheme::new(&mesh, &geom, &edge, coef, Stabilization::O1).unwrap();
    let sqrt_h = CurlScheme::new(&mesh, &geom, &edge, coef, Stabilization::SqrtH).unwrap();
    for t in 0..mesh.n_triangles() {
        let a = o1.local_system(t, &vector_source, 2).unwrap().matrix;
        let b = sqrt_h.local_system(t, &vector_source, 2).unwrap().matrix;
        if geom.cut(t).is_none() {
            assert_eq!(a, b);
        } else {
            assert!((a - b).amax() > 0.0);
        }
    }
}
