use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CONFIG: &str = r#"
problem = "h1"
case = "circle_cubic"
meshes = [4, 8]

[interface]
kind = "circle"
center = [0.5141421356237310, 0.5173205080756888]
radius = 0.3

[coefficients]
beta_minus = 1.0
beta_plus = 10.0
alpha_minus = 1.0
alpha_plus = 1.0
"#;

const HEADER: &str = "h,ndof,energy_dof,l2_proj,h1_proj,eoc_energy,eoc_l2,eoc_h1,cg_iters,seconds";

fn ivem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivem"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn run_writes_identical_csv_on_repeated_runs() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let mut tables = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = ivem(&["run", "study.toml", "--out", name], dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        tables.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let text = String::from_utf8(tables.remove(0)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[9], "0.000000000000e+00");
    }
}

#[test]
fn seed_moves_the_interface() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let plain = ivem(&["run", "study.toml"], dir.path());
    let seeded = ivem(&["run", "study.toml", "--seed", "1"], dir.path());
    let again = ivem(&["run", "study.toml", "--seed", "1"], dir.path());
    assert!(plain.status.success() && seeded.status.success());
    assert_eq!(seeded.stdout, again.stdout);
    assert_ne!(plain.stdout, seeded.stdout);
}

#[test]
fn config_flag_and_positional_argument_agree() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let positional = ivem(&["run", "study.toml"], dir.path());
    let flag = ivem(&["run", "--config", "study.toml"], dir.path());
    assert!(positional.status.success(), "{}", stderr(&positional));
    assert_eq!(positional.stdout, flag.stdout);
    assert!(stdout(&positional).starts_with(HEADER));
}

#[test]
fn output_key_is_used_when_out_is_absent() {
    let dir = TempDir::new().unwrap();
    let text = format!("output = \"results/study.csv\"\n{CONFIG}");
    write_config(&dir, "study.toml", &text);
    let out = ivem(&["run", "study.toml", "--plot-data"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let csv = fs::read_to_string(dir.path().join("results/study.csv")).unwrap();
    assert!(csv.starts_with(HEADER));
    let plot = fs::read_to_string(dir.path().join("results/study.plot.dat")).unwrap();
    let rows: Vec<&str> = plot.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let values: Vec<f64> = row.split_whitespace().map(|v| v.parse().unwrap()).collect();
        assert_eq!(values.len(), 4);
        assert!(values.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn timing_fills_the_seconds_column() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let out = ivem(&["run", "study.toml", "--timing"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let seconds: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(seconds.iter().all(|&s| s >= 0.0));
}

#[test]
fn dump_mesh_lists_vertices_triangles_and_cuts() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let out = ivem(&["dump-mesh", "study.toml", "1"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let count = |tag: &str| {
        text.lines()
            .filter(|l| l.split_whitespace().next() == Some(tag))
            .count()
    };
    // level 1 is the 8 x 8 mesh
    assert_eq!(count("v"), 81);
    assert_eq!(count("t"), 128);
    assert!(count("cut") > 0);
    for line in text.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let arity = match fields[0] {
            "v" => 3,
            "t" => 4,
            "cut" => 6,
            other => panic!("unexpected record {other}"),
        };
        assert_eq!(fields.len(), arity, "{line}");
    }
    for line in text.lines().filter(|l| l.starts_with("cut ")) {
        let f: Vec<f64> = line
            .split_whitespace()
            .skip(2)
            .map(|v| v.parse().unwrap())
            .collect();
        for p in [(f[0], f[1]), (f[2], f[3])] {
            let r = ((p.0 - 0.5141421356237310f64).powi(2) + (p.1 - 0.5173205080756888f64).powi(2))
                .sqrt();
            assert!((r - 0.3).abs() <= 1e-12, "{line}");
        }
    }
}

#[test]
fn dump_mesh_rejects_out_of_range_level() {
    let dir = TempDir::new().unwrap();
    write_config(&dir, "study.toml", CONFIG);
    let out = ivem(&["dump-mesh", "study.toml", "5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("level 5"));
}

#[test]
fn verify_prints_a_passing_table() {
    let dir = TempDir::new().unwrap();
    let out = ivem(&["verify"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().count() > 1);
    for line in text.lines().skip(1) {
        assert!(line.starts_with("PASS"), "{line}");
    }
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let text = CONFIG.replace("radius = 0.3", "radius = 0.3\nradus = 0.2");
    write_config(&dir, "bad.toml", &text);
    let out = ivem(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("radus"), "{}", stderr(&out));
}

#[test]
fn invalid_value_names_the_field() {
    let dir = TempDir::new().unwrap();
    let text = CONFIG.replace("beta_plus = 10.0", "beta_plus = -10.0");
    write_config(&dir, "bad.toml", &text);
    let out = ivem(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("beta_plus"), "{}", stderr(&out));
}

#[test]
fn missing_config_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let out = ivem(&["run", "absent.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.toml"));
}
