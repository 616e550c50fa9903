//! Structural property suite: jump-matrix eigenstructure, IFE jump
//! conditions, projection idempotence, the discrete complex, commutativity of
//! the curl with interpolation, and the Hodge identity.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cut::{CutTopology, InterfaceGeometry};
use crate::dofs::{build_dof_maps, discrete_gradient, interpolate_edge};
use crate::geometry::{rot90, Point, Side};
use crate::ife::{
    curl_ife_basis, curl_jump_violation, h1_ife_basis, h1_jump_violation, jump_matrix,
    verify_exact_sequence, Coefficients, IfeH1Function, PiecewiseConstantField,
};
use crate::level_set::{Circle, Line};
use crate::mesh::{BackgroundMesh, Rectangle};
use crate::projection::{curl_from_dofs, CurlProjection, H1Projection};
use crate::quadrature::{polygon_quadrature, triangle_quadrature};
use crate::scheme_hcurl::curl_curl_block;
use crate::standard::{nedelec_curl_curl, nedelec_curls};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub description: &'static str,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<4} {:<24} {:>8} {:>12} {:>10}  description",
            "", "check", "samples", "violation", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<4} {:<24} {:>8} {:>12.3e} {:>10.0e}  {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.max_violation,
                c.tolerance,
                c.description
            );
        }
        out
    }
}

/// Random interface element: a random well-shaped triangle of random size
/// cut by a random straight line. About one draw in eight passes the line
/// through a vertex, which yields a four-node element.
pub fn random_cut(rng: &mut impl Rng) -> CutTopology {
    loop {
        let scale = 10f64.powf(rng.gen_range(-2.0..0.0));
        let origin = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = [
            Point::new(0.0, 0.0),
            Point::new(1.0 + rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
            Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.5..1.2)),
        ]
        .map(|q| origin + q * scale);
        let k = rng.gen_range(0..3);
        let on_edge = |rng: &mut dyn rand::RngCore, e: usize| {
            let t: f64 = rng.gen_range(0.02..0.98);
            p[e] + (p[(e + 1) % 3] - p[e]) * t
        };
        let (b1, b2) = if rng.gen_bool(0.125) {
            (p[k], on_edge(rng, (k + 1) % 3))
        } else {
            (on_edge(rng, k), on_edge(rng, (k + 1) % 3))
        };
        let mut normal = rot90(&(b2 - b1));
        if rng.gen_bool(0.5) {
            normal = -normal;
        }
        let mesh = BackgroundMesh::new(p.to_vec(), vec![[0, 1, 2]]).expect("positive triangle");
        let Ok(geom) = InterfaceGeometry::new(&mesh, &Line::new(b1, normal)) else {
            continue;
        };
        if let Some(cut) = geom.cut(0) {
            return cut.clone();
        }
    }
}

/// Positive coefficients in `[10^-1.5, 10^1.5]`, so contrasts stay within
/// `[1e-3, 1e3]`.
pub fn random_coefficients(rng: &mut impl Rng) -> Coefficients {
    let mut draw = || 10f64.powf(rng.gen_range(-1.5..1.5));
    Coefficients::new(draw(), draw(), draw(), draw()).expect("positive")
}

pub fn check_jump_matrix(rng: &mut impl Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = Point::new(theta.cos(), theta.sin());
        let rho = 10f64.powf(rng.gen_range(-3.0..3.0));
        let m = jump_matrix(&n, rho).expect("unit normal");
        let t = rot90(&n);
        worst = worst.max((m.apply(&n) - n * rho).norm() / rho);
        worst = worst.max((m.apply(&t) - t).norm());
        worst = worst.max((m.matrix.determinant() - rho).abs() / rho.max(1.0));
        worst = worst.max((m.matrix - m.matrix.transpose()).amax());
    }
    CheckResult {
        name: "jump_matrix",
        description: "M n = rho n, M t = t, det M = rho",
        samples,
        max_violation: worst,
        tolerance: 1e-12,
    }
}

pub fn check_ife_jumps(rng: &mut impl Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cut = random_cut(rng);
        let coef = random_coefficients(rng);
        for f in h1_ife_basis(&cut, &coef) {
            worst = worst.max(h1_jump_violation(&f, &cut, &coef, 10));
        }
        for f in curl_ife_basis(&cut, &coef) {
            worst = worst.max(curl_jump_violation(&f, &cut, &coef, 10));
        }
    }
    CheckResult {
        name: "ife_jump_conditions",
        description: "H1 value/flux and curl tangential/alpha-curl/beta-normal jumps",
        samples,
        max_violation: worst,
        tolerance: 1e-12,
    }
}

pub fn check_idempotence(rng: &mut impl Rng, samples: usize) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cut = random_cut(rng);
        let coef = random_coefficients(rng);
        let h1 = H1Projection::build(&cut, &coef)?;
        let c0 = rng.gen_range(-1.0..1.0);
        let c = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / cut.diameter;
        let s = IfeH1Function::new(&cut, &coef, c0, c);
        let dofs: Vec<f64> = (0..cut.n_nodes())
            .map(|k| s.value(&cut.node_points[k], cut.node_eval_side(k)))
            .collect();
        let p = h1.apply(&dofs);
        // c0 relative to the data, gradients relative in the β_h-energy norm
        let scale = dofs.iter().fold(c0.abs(), |m, v| m.max(v.abs()));
        let energy = |v: Point| v.dot(&(h1.gram * v)).sqrt();
        worst = worst
            .max((p.c0 - c0).abs() / scale)
            .max(energy(p.c - c) / energy(c));

        let curl = CurlProjection::build(&cut, &coef)?;
        let a = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = PiecewiseConstantField::from_minus(&curl.jump, a);
        let dofs: Vec<f64> = cut
            .edges
            .iter()
            .map(|e| v.get(e.side).dot(&e.tangent))
            .collect();
        let w = curl.apply(&dofs);
        let mass = |v: Point| v.dot(&(curl.gram * v)).sqrt();
        worst = worst.max(mass(w.minus - v.minus) / mass(v.minus));
    }
    Ok(CheckResult {
        name: "projection_idempotence",
        description: "Pi(DoFs of S) = id and curl Pi(DoFs of grad S) = id (energy-relative)",
        samples,
        max_violation: worst,
        tolerance: 1e-12,
    })
}

fn circle_mesh(
    n: usize,
    rng: &mut impl Rng,
) -> Result<(BackgroundMesh, InterfaceGeometry, Coefficients)> {
    let mesh = BackgroundMesh::uniform(&Rectangle::unit_square(), n)?;
    let center = Point::new(
        0.5 + rng.gen_range(-0.05..0.05),
        0.5 + rng.gen_range(-0.05..0.05),
    );
    let geom = InterfaceGeometry::new(&mesh, &Circle::new(center, 0.3))?;
    Ok((mesh, geom, random_coefficients(rng)))
}

pub fn check_discrete_complex(rng: &mut impl Rng, meshes: usize) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for _ in 0..meshes {
        let (mesh, geom, coef) = circle_mesh(16, rng)?;
        let (nodal, edge) = build_dof_maps(&mesh, &geom)?;
        let p: Vec<f64> = (0..nodal.n_dofs())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let d = discrete_gradient(&edge, &p);
        for t in 0..mesh.n_triangles() {
            let local = nalgebra::DVector::from_vec(edge.local_values(t, &d));
            let block = match geom.cut(t) {
                Some(cut) => curl_curl_block(cut, &coef, &CurlProjection::build(cut, &coef)?),
                None => {
                    let side = geom.element_side(t).unwrap_or(Side::Plus);
                    let b = nedelec_curl_curl(&mesh.triangle_points(t), coef.alpha(side));
                    nalgebra::DMatrix::from_fn(3, 3, |i, j| b[(i, j)])
                }
            };
            let scale = block.amax() * local.amax();
            if scale > 0.0 {
                worst = worst.max((&block * &local).amax() / scale);
            }
            samples += 1;
        }
    }
    Ok(CheckResult {
        name: "discrete_complex",
        description: "discrete gradients lie in the kernel of the curl-curl block",
        samples,
        max_violation: worst,
        tolerance: 1e-13,
    })
}

/// Smooth polynomial test field and its curl.
fn smooth_field(x: &Point) -> Point {
    Point::new(
        x.x * x.x * x.y - x.y.powi(3) + 0.3 * x.x,
        x.x.powi(3) + x.x * x.y * x.y - 0.7 * x.y,
    )
}

fn smooth_curl(x: &Point) -> f64 {
    // ∂x u₂ − ∂y u₁
    3.0 * x.x * x.x + x.y * x.y - (x.x * x.x - 3.0 * x.y * x.y)
}

pub fn check_commutativity(rng: &mut impl Rng, meshes: usize) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for _ in 0..meshes {
        let (mesh, geom, coef) = circle_mesh(16, rng)?;
        let (_, edge) = build_dof_maps(&mesh, &geom)?;
        let d = interpolate_edge(&edge, &smooth_field, 4);
        for t in 0..mesh.n_triangles() {
            let local = edge.local_values(t, &d);
            let p = mesh.triangle_points(t);
            let integral = triangle_quadrature(&p, 4).integrate(smooth_curl);
            let (computed, expected) = match geom.cut(t) {
                Some(cut) => {
                    let (cp, cm) = curl_from_dofs(cut, &coef, &local);
                    // π^{α_h}: α^± q^± = κ with Σ_s |K^s| q^s = ∫_K curl u
                    let split: f64 = Side::BOTH
                        .iter()
                        .map(|&s| {
                            polygon_quadrature(cut.sub_polygon(s), 1).total_weight() / coef.alpha(s)
                        })
                        .sum();
                    let kappa = integral / split;
                    let expected = [kappa / coef.alpha_plus, kappa / coef.alpha_minus];
                    ([cp, cm], expected)
                }
                None => {
                    let c = nedelec_curls(&p);
                    let value = c[0] * local[0] + c[1] * local[1] + c[2] * local[2];
                    let mean = integral / mesh.area(t);
                    ([value, value], [mean, mean])
                }
            };
            let scale = expected[0].abs().max(expected[1].abs()).max(1.0);
            for i in 0..2 {
                worst = worst.max((computed[i] - expected[i]).abs() / scale);
            }
            samples += 1;
        }
    }
    Ok(CheckResult {
        name: "commutativity",
        description: "curl of the edge interpolant equals the alpha-weighted projection of curl",
        samples,
        max_violation: worst,
        tolerance: 1e-10,
    })
}

pub fn check_hodge(rng: &mut impl Rng, samples: usize) -> CheckResult {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cut = random_cut(rng);
        let coef = random_coefficients(rng);
        let report = verify_exact_sequence(&cut, &coef);
        worst = worst
            .max(report.hodge)
            .max(report.gradients_in_curl_space)
            .max(report.curl_onto_q);
    }
    CheckResult {
        name: "hodge_identity",
        description: "beta grad S = curl S~ and the local exact sequence",
        samples,
        max_violation: worst,
        tolerance: 1e-12,
    }
}

/// Runs every structural check with a deterministic random stream.
pub fn run_structural_suite(seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check_jump_matrix(&mut rng, 1000),
        check_ife_jumps(&mut rng, 200),
        check_idempotence(&mut rng, 200)?,
        check_discrete_complex(&mut rng, 3)?,
        check_commutativity(&mut rng, 3)?,
        check_hodge(&mut rng, 200),
    ];
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_cuts_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut four = 0;
        for _ in 0..200 {
            let cut = random_cut(&mut rng);
            assert!((cut.area_plus + cut.area_minus - cut.area).abs() <= 1e-12 * cut.area);
            if cut.n_nodes() == 4 {
                four += 1;
            }
        }
        assert!(four > 0);
    }

    #[test]
    fn suite_passes() {
        let report = run_structural_suite(7).unwrap();
        assert!(report.all_passed(), "{}", report.table());
        assert_eq!(report.checks.len(), 6);
    }
}
