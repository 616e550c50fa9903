use ivem::geometry::{rot90, Point, Side};
use ivem::ife::{
    curl_ife_basis, curl_jump_violation, h1_ife_basis, h1_jump_violation, jump_matrix,
    rot_h1_potential, verify_exact_sequence, Coefficients, IfeCurlFunction, IfeH1Function,
    PiecewiseConstantField,
};
use ivem::projection::{condition_number, gradient_gram};
use ivem::verify::{random_coefficients, random_cut};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(theta: f64) -> Point {
    Point::new(theta.cos(), theta.sin())
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn jump_matrix_eigenstructure(theta in 0.0..std::f64::consts::TAU, log_rho in -3.0f64..3.0) {
        let rho = 10f64.powf(log_rho);
        let n = unit(theta);
        let t = rot90(&n);
        let m = jump_matrix(&n, rho).unwrap();
        let scale = rho.max(1.0);
        prop_assert!((m.apply(&n) - n * rho).norm() <= 1e-12 * scale);
        prop_assert!((m.apply(&t) - t).norm() <= 1e-12 * scale);
        prop_assert!((m.matrix - m.matrix.transpose()).amax() == 0.0);
        prop_assert!((m.matrix.determinant() - rho).abs() <= 1e-12 * scale);
    }

    #[test]
    fn h1_ife_functions_satisfy_jump_conditions(seed in any::<u64>(), c0 in -2.0f64..2.0, cx in -2.0f64..2.0, cy in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let f = IfeH1Function::new(&cut, &coef, c0, Point::new(cx, cy) / cut.diameter);
        prop_assert!(h1_jump_violation(&f, &cut, &coef, 10) <= 1e-12);
        let flux_plus = coef.beta_plus * f.gradient(Side::Plus).dot(&cut.normal);
        let flux_minus = coef.beta_minus * f.gradient(Side::Minus).dot(&cut.normal);
        let scale = coef.beta_max() * (f.gradient(Side::Plus).norm() + f.gradient(Side::Minus).norm());
        prop_assert!((flux_plus - flux_minus).abs() <= 1e-12 * scale);
    }

    #[test]
    fn curl_ife_functions_satisfy_jump_conditions(seed in any::<u64>(), c0 in -2.0f64..2.0, cx in -2.0f64..2.0, cy in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let f = IfeCurlFunction::new(&cut, &coef, Point::new(cx, cy), c0 / cut.diameter);
        prop_assert!(curl_jump_violation(&f, &cut, &coef, 10) <= 1e-12);
        let (curl_plus, curl_minus) = f.curl_of();
        prop_assert!((coef.alpha_plus * curl_plus - coef.alpha_minus * curl_minus).abs() <= 1e-12 * (coef.alpha_plus * curl_plus).abs().max(1e-300));
    }

    #[test]
    fn ife_bases_span_three_dimensions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        // values at three vertices of the H1 basis, and (c0, c) coordinates of the curl basis
        let h1 = h1_ife_basis(&cut, &coef);
        let vals = nalgebra::Matrix3::from_fn(|i, j| {
            let x = cut.vertices[j];
            h1[i].value(&x, cut.side_of(&x))
        });
        prop_assert!(vals.determinant().abs() > 1e-14 * cut.area / cut.diameter.powi(2));
        let curl = curl_ife_basis(&cut, &coef);
        let coords = nalgebra::Matrix3::from_fn(|i, j| [curl[i].c.x, curl[i].c.y, curl[i].c0][j]);
        prop_assert!(coords.determinant().abs() > 0.0);
        let m = jump_matrix(&cut.normal, coef.rho()).unwrap();
        let g = gradient_gram(&cut, &coef, &m);
        prop_assert!(condition_number(&g).is_finite());
    }

    #[test]
    fn exact_sequence_and_hodge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        prop_assert!(verify_exact_sequence(&cut, &coef).max_violation() <= 1e-12);
    }

    #[test]
    fn rotated_potential_inverts_the_vector_curl(seed in any::<u64>(), ax in -1.0f64..1.0, ay in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cut = random_cut(&mut rng);
        let coef = random_coefficients(&mut rng);
        let m = jump_matrix(&cut.normal, coef.rho()).unwrap();
        let v = PiecewiseConstantField::from_minus(&m, Point::new(ax, ay));
        let phi = rot_h1_potential(&v, &cut, &coef).unwrap();
        for side in Side::BOTH {
            let target = v.get(side) * coef.beta(side);
            prop_assert!((phi.vector_curl(side) - target).norm() <= 1e-12 * target.norm().max(1e-300) * coef.beta_max());
        }
    }
}

/// As the contrasts tend to one the IFE functions become single polynomials.
#[test]
fn unit_contrast_limit_is_coefficientwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let cut = random_cut(&mut rng);
        let mut previous = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let coef = Coefficients::new(1.0 + eps, 1.0, 1.0 + eps, 1.0).unwrap();
            let f = IfeH1Function::new(&cut, &coef, 0.3, Point::new(1.0, -2.0));
            let h1_gap = (f.gradient(Side::Plus) - f.gradient(Side::Minus)).norm();
            let g = IfeCurlFunction::new(&cut, &coef, Point::new(0.5, 0.25), 1.0);
            let curl_gap = (g.curl(Side::Plus) - g.curl(Side::Minus)).abs();
            let field_gap =
                (g.value(&cut.midpoint, Side::Plus) - g.value(&cut.midpoint, Side::Minus)).norm();
            let gap = h1_gap + curl_gap + field_gap;
            // |ρ − 1|·|c| + 2|1/α⁺ − 1/α⁻| + |ρ − 1|·|c|
            let bound = eps * (5f64.sqrt() + 2.0 + 0.3125f64.sqrt());
            assert!(gap <= bound, "gap {gap} at eps {eps}");
            assert!(gap < previous);
            previous = gap;
        }
    }
}
