use ivem::scheme_hcurl::Stabilization;
use ivem::solver::SolverKind;
use ivem::study::{run_study, ConvergenceReport, StudyConfig, CSV_HEADER};

fn config(
    problem: &str,
    case: &str,
    beta: (f64, f64),
    alpha: (f64, f64),
    meshes: &[usize],
) -> StudyConfig {
    let text = format!(
        r#"
problem = "{problem}"
case = "{case}"
meshes = {meshes:?}

[interface]
kind = "circle"
center = [0.5141421356237310, 0.5173205080756888]
radius = 0.3

[coefficients]
beta_minus = {:?}
beta_plus = {:?}
alpha_minus = {:?}
alpha_plus = {:?}
"#,
        beta.0, beta.1, alpha.0, alpha.1
    );
    StudyConfig::from_toml(&text).unwrap()
}

fn ratio(report: &ConvergenceReport, k: usize, column: usize) -> f64 {
    report.levels[k - 1].errors.as_array()[column] / report.levels[k].errors.as_array()[column]
}

#[test]
fn energy_errors_decrease_for_every_builtin_circle_study() {
    let studies = [
        config("h1", "circle_cubic", (1.0, 10.0), (1.0, 1.0), &[8, 16, 32]),
        config("h1", "circle_cubic", (10.0, 1.0), (1.0, 1.0), &[8, 16, 32]),
        config(
            "h1",
            "circle_cubic",
            (1.0, 1000.0),
            (1.0, 1.0),
            &[8, 16, 32],
        ),
        config("hcurl", "rotational", (1.0, 10.0), (1.0, 2.0), &[8, 16, 32]),
        config("hcurl", "gradient", (1.0, 10.0), (1.0, 2.0), &[8, 16, 32]),
    ];
    for study in &studies {
        for stabilization in [Stabilization::O1, Stabilization::SqrtH] {
            let mut study = study.clone();
            study.stabilization = stabilization;
            let report = run_study(&study, None).unwrap();
            for k in 1..report.levels.len() {
                assert!(
                    ratio(&report, k, 0) > 1.0,
                    "{:?} {:?} level {k}",
                    study.case,
                    stabilization
                );
            }
            assert!(report
                .levels
                .iter()
                .all(|l| l.ritz_min.is_some_and(|r| r > 0.0)));
        }
    }
}

#[test]
fn h1_projected_error_halves_between_16_and_32() {
    let report = run_study(
        &config("h1", "circle_cubic", (1.0, 10.0), (1.0, 1.0), &[16, 32]),
        None,
    )
    .unwrap();
    assert!(
        ratio(&report, 1, 2) >= 1.85,
        "ratio {}",
        ratio(&report, 1, 2)
    );
}

#[test]
fn hcurl_energy_error_halves_between_32_and_64() {
    let report = run_study(
        &config("hcurl", "rotational", (1.0, 10.0), (1.0, 2.0), &[32, 64]),
        None,
    )
    .unwrap();
    assert!(
        ratio(&report, 1, 0) >= 1.85,
        "ratio {}",
        ratio(&report, 1, 0)
    );
}

#[test]
fn linear_patch_has_no_error() {
    let mut study = config("h1", "linear_patch", (2.0, 2.0), (1.0, 1.0), &[8, 16]);
    study.solver.kind = SolverKind::Dense;
    let report = run_study(&study, None).unwrap();
    for level in &report.levels {
        for e in level.errors.as_array() {
            assert!(e <= 1e-9, "{e}");
        }
    }
}

#[test]
fn csv_is_reproducible_and_seed_dependent() {
    let study = config("h1", "circle_cubic", (1.0, 10.0), (1.0, 1.0), &[8, 16]);
    let a = run_study(&study, None).unwrap().to_csv(false);
    let b = run_study(&study, None).unwrap().to_csv(false);
    assert_eq!(a, b);
    assert_eq!(a.lines().next(), Some(CSV_HEADER));
    assert!(a.ends_with('\n') && !a.contains('\r'));
    let s1 = run_study(&study, Some(1)).unwrap().to_csv(false);
    assert_eq!(s1, run_study(&study, Some(1)).unwrap().to_csv(false));
    assert_ne!(s1, a);
}

#[test]
fn plot_data_has_one_line_per_level() {
    let report = run_study(
        &config("hcurl", "rotational", (1.0, 10.0), (1.0, 2.0), &[8, 16]),
        None,
    )
    .unwrap();
    let data = report.plot_data();
    let rows: Vec<Vec<f64>> = data
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for (row, level) in rows.iter().zip(&report.levels) {
        assert_eq!(row.len(), 4);
        assert!((row[0] - level.h.ln()).abs() < 1e-11);
        assert!((row[1] - level.errors.energy_dof.ln()).abs() < 1e-11);
    }
}
