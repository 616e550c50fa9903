//! Convergence studies: configuration, error measures, CSV and plot output,
//! and the interface-position robustness sweep.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut::InterfaceGeometry;
use crate::dofs::{build_dof_maps, interpolate_edge, interpolate_nodal};
use crate::geometry::{Point, Side};
use crate::ife::Coefficients;
use crate::level_set::{Circle, Interface, LevelSet, Line};
use crate::manufactured::{
    CircleCubic, CircleGradient, CircleRotational, ConstantIfeField, LineIfe, LinearPatch,
    ScalarSolution, VectorSolution,
};
use crate::mesh::{BackgroundMesh, Rectangle};
use crate::quadrature::{polygon_quadrature, triangle_quadrature};
use crate::scheme_h1::H1Scheme;
use crate::scheme_hcurl::{CurlScheme, Stabilization};
use crate::solver::{CgOptions, DiscreteSolution, ProfileCholesky, SolveOptions, SolverKind};
use crate::{IvemError, Result};

pub const CSV_HEADER: &str =
    "h,ndof,energy_dof,l2_proj,h1_proj,eoc_energy,eoc_l2,eoc_h1,cg_iters,seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    H1,
    Hcurl,
}

/// Built-in manufactured solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    /// H¹: cubic radial solution around a circle.
    CircleCubic,
    /// H¹: `u = 1 + 2x + 3y` with uniform β.
    LinearPatch,
    /// H¹: piecewise-linear IFE function across a line.
    LineIfe,
    /// H(curl): rotational field around a circle.
    Rotational,
    /// H(curl): gradient of the cubic radial solution.
    Gradient,
    /// H(curl): piecewise-constant IFE field across a line.
    ConstantField,
}

impl CaseName {
    pub fn problem(self) -> ProblemKind {
        match self {
            CaseName::CircleCubic | CaseName::LinearPatch | CaseName::LineIfe => ProblemKind::H1,
            CaseName::Rotational | CaseName::Gradient | CaseName::ConstantField => {
                ProblemKind::Hcurl
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterfaceConfig {
    Circle { center: [f64; 2], radius: f64 },
    Line { point: [f64; 2], normal: [f64; 2] },
}

impl InterfaceConfig {
    pub fn to_interface(&self) -> Interface {
        match *self {
            InterfaceConfig::Circle { center, radius } => {
                Interface::Circle(Circle::new(Point::new(center[0], center[1]), radius))
            }
            InterfaceConfig::Line { point, normal } => Interface::Line(Line::new(
                Point::new(point[0], point[1]),
                Point::new(normal[0], normal[1]),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Degree of the volume rules for load vectors.
    #[serde(default = "default_volume_degree")]
    pub volume: usize,
    /// Degree of the edge rules for edge interpolation.
    #[serde(default = "default_edge_degree")]
    pub edge: usize,
    /// Degree of the volume rules for error norms.
    #[serde(default = "default_error_degree")]
    pub error: usize,
}

fn default_volume_degree() -> usize {
    4
}

fn default_edge_degree() -> usize {
    5
}

fn default_error_degree() -> usize {
    6
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            volume: 4,
            edge: 5,
            error: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub kind: SolverKind,
    /// Iteration cap; defaults to ten times the number of unknowns.
    #[serde(default)]
    pub max_iter: Option<usize>,
}

fn default_tol() -> f64 {
    1e-10
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            kind: SolverKind::Cg,
            max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            kind: self.kind,
            cg: CgOptions {
                tol: self.tol,
                max_iter: self.max_iter,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub case: CaseName,
    #[serde(default = "Rectangle::unit_square")]
    pub domain: Rectangle,
    pub interface: InterfaceConfig,
    pub coefficients: Coefficients,
    /// Subdivisions per side of each mesh level.
    pub meshes: Vec<usize>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub stabilization: Stabilization,
    #[serde(default)]
    pub output: Option<String>,
}

fn config_error(field: &str, message: impl Into<String>) -> IvemError {
    IvemError::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: StudyConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[s].lines().next().unwrap_or("").trim().to_string());
            config_error(field.as_deref().unwrap_or("<document>"), e.message())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficients.validate()?;
        if self.case.problem() != self.problem {
            return Err(config_error(
                "case",
                format!("{:?} is not a {:?} case", self.case, self.problem),
            ));
        }
        if self.meshes.is_empty() {
            return Err(config_error(
                "meshes",
                "at least one mesh level is required",
            ));
        }
        if let Some(&n) = self.meshes.iter().find(|&&n| n < 2) {
            return Err(config_error(
                "meshes",
                format!("every level needs n >= 2, got {n}"),
            ));
        }
        Rectangle::new(self.domain.min, self.domain.max)
            .map_err(|e| config_error("domain", e.to_string()))?;
        for (name, d) in [
            ("quadrature.volume", self.quadrature.volume),
            ("quadrature.error", self.quadrature.error),
        ] {
            if d == 0 || d > crate::quadrature::MAX_TRIANGLE_DEGREE {
                return Err(config_error(
                    name,
                    format!(
                        "degree must be in 1..={}",
                        crate::quadrature::MAX_TRIANGLE_DEGREE
                    ),
                ));
            }
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(config_error("solver.tol", "must lie in (0, 1)"));
        }
        match (&self.interface, self.case) {
            (InterfaceConfig::Circle { radius, .. }, _) if !(*radius > 0.0) => {
                return Err(config_error("interface.radius", "must be positive"))
            }
            (InterfaceConfig::Line { normal, .. }, _) if normal[0] == 0.0 && normal[1] == 0.0 => {
                return Err(config_error("interface.normal", "must be nonzero"))
            }
            (
                InterfaceConfig::Line { .. },
                CaseName::CircleCubic | CaseName::Rotational | CaseName::Gradient,
            ) => {
                return Err(config_error(
                    "interface",
                    format!("case {:?} needs a circle interface", self.case),
                ))
            }
            (InterfaceConfig::Circle { .. }, CaseName::LineIfe | CaseName::ConstantField) => {
                return Err(config_error(
                    "interface",
                    format!("case {:?} needs a line interface", self.case),
                ))
            }
            _ => {}
        }
        let c = &self.coefficients;
        let uniform_beta = c.beta_plus == c.beta_minus;
        if self.case == CaseName::LinearPatch && !uniform_beta {
            return Err(config_error(
                "coefficients",
                "linear_patch needs beta_plus == beta_minus",
            ));
        }
        Ok(())
    }
}

/// Built-in manufactured problem: scalar or vector.
pub enum Problem {
    Scalar(Box<dyn ScalarSolution>),
    Vector(Box<dyn VectorSolution>),
}

impl Problem {
    pub fn level_set(&self) -> &dyn LevelSet {
        match self {
            Problem::Scalar(s) => s.level_set(),
            Problem::Vector(v) => v.level_set(),
        }
    }
}

/// Instantiates the manufactured solution of `case` on `interface`.
pub fn make_problem(case: CaseName, interface: Interface, coef: &Coefficients) -> Result<Problem> {
    let wrong = |need: &str| {
        config_error(
            "interface",
            format!("case {case:?} needs a {need} interface"),
        )
    };
    Ok(match (case, interface) {
        (CaseName::CircleCubic, Interface::Circle(circle)) => {
            Problem::Scalar(Box::new(CircleCubic {
                circle,
                coef: *coef,
            }))
        }
        (CaseName::LinearPatch, level_set) => Problem::Scalar(Box::new(LinearPatch {
            c0: 1.0,
            gradient: Point::new(2.0, 3.0),
            level_set,
        })),
        (CaseName::LineIfe, Interface::Line(line)) => Problem::Scalar(Box::new(LineIfe::new(
            line,
            coef,
            1.0,
            Point::new(1.0, 2.0),
        )?)),
        (CaseName::Rotational, Interface::Circle(circle)) => {
            Problem::Vector(Box::new(CircleRotational {
                circle,
                coef: *coef,
            }))
        }
        (CaseName::Gradient, Interface::Circle(circle)) => {
            Problem::Vector(Box::new(CircleGradient {
                potential: CircleCubic {
                    circle,
                    coef: *coef,
                },
            }))
        }
        (CaseName::ConstantField, Interface::Line(line)) => Problem::Vector(Box::new(
            ConstantIfeField::new(line, coef, Point::new(1.0, -0.5))?,
        )),
        (CaseName::CircleCubic | CaseName::Rotational | CaseName::Gradient, _) => {
            return Err(wrong("circle"))
        }
        (CaseName::LineIfe | CaseName::ConstantField, _) => return Err(wrong("line")),
    })
}

/// Error measures of one discrete solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorRecord {
    /// `sqrt(eᵀ A e)` with `e = u_I − u_h` and `A` the global matrix.
    pub energy_dof: f64,
    /// Broken `L²` norm of `u − Π u_h`.
    pub l2_proj: f64,
    /// Broken `H¹` seminorm of `u − Π u_h` (H¹ problem), or the broken
    /// `H(curl)` norm `sqrt(‖curl u − curl u_h‖² + ‖u − Π u_h‖²)`.
    pub h1_proj: f64,
}

impl ErrorRecord {
    pub fn as_array(&self) -> [f64; 3] {
        [self.energy_dof, self.l2_proj, self.h1_proj]
    }
}

/// Quadrature points and weights over element `t`, split into the parts on
/// which the discrete function uses side `s`.
fn element_rules(
    mesh: &BackgroundMesh,
    geom: &InterfaceGeometry,
    t: usize,
    degree: usize,
) -> Vec<(Side, crate::quadrature::QuadratureRule)> {
    match (geom.cut(t), geom.element_side(t)) {
        (Some(cut), _) => Side::BOTH
            .iter()
            .map(|&s| (s, polygon_quadrature(cut.sub_polygon(s), degree)))
            .collect(),
        (None, side) => vec![(
            side.unwrap_or(Side::Plus),
            triangle_quadrature(&mesh.triangle_points(t), degree),
        )],
    }
}

fn energy_of_difference(sol: &DiscreteSolution, interpolant: &[f64]) -> f64 {
    let e: Vec<f64> = interpolant
        .iter()
        .zip(&sol.dofs)
        .map(|(a, b)| a - b)
        .collect();
    sol.matrix.quadratic_form(&e).max(0.0).sqrt()
}

pub fn compute_errors_h1(
    scheme: &H1Scheme,
    sol: &DiscreteSolution,
    exact: &dyn ScalarSolution,
    degree: usize,
) -> ErrorRecord {
    let interpolant = interpolate_nodal(scheme.dofs, &|x| exact.exact(x));
    let energy_dof = energy_of_difference(sol, &interpolant);
    let ls = exact.level_set();
    let (l2, h1) = (0..scheme.mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let projected = scheme.projected(t, &sol.dofs);
            let mut acc = (0.0, 0.0);
            for (side, rule) in element_rules(scheme.mesh, scheme.geom, t, degree) {
                let grad = projected.gradient(side);
                for (x, w) in rule.points.iter().zip(&rule.weights) {
                    let exact_side = ls.side(x);
                    let e = exact.value(x, exact_side) - projected.value(x, side);
                    let g = exact.gradient(x, exact_side) - grad;
                    acc.0 += w * e * e;
                    acc.1 += w * g.norm_squared();
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    ErrorRecord {
        energy_dof,
        l2_proj: l2.sqrt(),
        h1_proj: h1.sqrt(),
    }
}

pub fn compute_errors_hcurl(
    scheme: &CurlScheme,
    sol: &DiscreteSolution,
    exact: &dyn VectorSolution,
    degree: usize,
    edge_points: usize,
) -> ErrorRecord {
    let interpolant = interpolate_edge(scheme.dofs, &|x| exact.exact(x), edge_points);
    let energy_dof = energy_of_difference(sol, &interpolant);
    let ls = exact.level_set();
    let (l2, curl) = (0..scheme.mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let projected = scheme.projected(t, &sol.dofs);
            let mut acc = (0.0, 0.0);
            for (side, rule) in element_rules(scheme.mesh, scheme.geom, t, degree) {
                let curl_h = projected.curl(side);
                for (x, w) in rule.points.iter().zip(&rule.weights) {
                    let exact_side = ls.side(x);
                    let e = exact.value(x, exact_side) - projected.value(x, side);
                    let c = exact.curl(x, exact_side) - curl_h;
                    acc.0 += w * e.norm_squared();
                    acc.1 += w * c * c;
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    ErrorRecord {
        energy_dof,
        l2_proj: l2.sqrt(),
        h1_proj: (l2 + curl).sqrt(),
    }
}

/// Everything computed on one mesh level.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub mesh: BackgroundMesh,
    pub geometry: InterfaceGeometry,
    pub solution: DiscreteSolution,
    pub errors: ErrorRecord,
    pub ndof: usize,
}

/// Assembles, solves and measures errors for `problem` on an `n × n` mesh.
pub fn solve_level(config: &StudyConfig, interface: Interface, n: usize) -> Result<LevelRun> {
    let mesh = BackgroundMesh::uniform(&config.domain, n)?;
    let geometry = InterfaceGeometry::new(&mesh, &interface)?;
    let (nodal, edge) = build_dof_maps(&mesh, &geometry)?;
    let coef = config.coefficients;
    let problem = make_problem(config.case, interface, &coef)?;
    let q = config.quadrature;
    let edge_points = q.edge / 2 + 1;
    let options = config.solver.options();
    let (solution, errors, ndof) = match &problem {
        Problem::Scalar(exact) => {
            let scheme = H1Scheme::new(&mesh, &geometry, &nodal, coef)?;
            let boundary = interpolate_nodal(&nodal, &|x| exact.exact(x));
            let f = |x: &Point, s: Side| exact.source(x, s);
            let sol = scheme.solve(&f, &boundary, q.volume, &options)?;
            let errors = compute_errors_h1(&scheme, &sol, exact.as_ref(), q.error);
            (sol, errors, nodal.n_dofs())
        }
        Problem::Vector(exact) => {
            let scheme = CurlScheme::new(&mesh, &geometry, &edge, coef, config.stabilization)?;
            let boundary = interpolate_edge(&edge, &|x| exact.exact(x), edge_points);
            let f = |x: &Point, s: Side| exact.source(x, s);
            let sol = scheme.solve(&f, &boundary, q.volume, &options)?;
            let errors = compute_errors_hcurl(&scheme, &sol, exact.as_ref(), q.error, edge_points);
            (sol, errors, edge.n_dofs())
        }
    };
    Ok(LevelRun {
        mesh,
        geometry,
        solution,
        errors,
        ndof,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub ndof: usize,
    pub errors: ErrorRecord,
    pub cg_iters: usize,
    pub seconds: f64,
    pub n_interface: usize,
    pub ritz_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub problem: ProblemKind,
    pub levels: Vec<LevelResult>,
}

/// `log₂(e_coarse / e_fine)` scaled by the actual mesh-size ratio.
pub fn eoc(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (coarse / fine).ln() / (h_coarse / h_fine).ln()
}

impl ConvergenceReport {
    /// Orders `(energy, l2, h1)` between level `k − 1` and level `k`.
    pub fn eoc(&self, k: usize) -> Option<[f64; 3]> {
        if k == 0 || k >= self.levels.len() {
            return None;
        }
        let (a, b) = (&self.levels[k - 1], &self.levels[k]);
        let (ea, eb) = (a.errors.as_array(), b.errors.as_array());
        Some(std::array::from_fn(|i| eoc(ea[i], eb[i], a.h, b.h)))
    }

    /// Orders between the two finest levels.
    pub fn final_eoc(&self) -> Option<[f64; 3]> {
        self.eoc(self.levels.len().saturating_sub(1))
    }

    /// CSV table; the `seconds` column is zero unless `timing` is set so
    /// that repeated runs produce identical files.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (k, level) in self.levels.iter().enumerate() {
            let e = level.errors.as_array();
            let rates = self.eoc(k);
            let rate = |i: usize| rates.map(|r| format_sci(r[i])).unwrap_or_default();
            let seconds = if timing { level.seconds } else { 0.0 };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                format_sci(level.h),
                level.ndof,
                format_sci(e[0]),
                format_sci(e[1]),
                format_sci(e[2]),
                rate(0),
                rate(1),
                rate(2),
                level.cg_iters,
                format_sci(seconds)
            );
        }
        out
    }

    /// Whitespace-separated `(log h, log error)` pairs, one level per line:
    /// `log_h log_energy log_l2 log_h1`.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("# log_h log_energy_dof log_l2_proj log_h1_proj\n");
        for level in &self.levels {
            let e = level.errors.as_array();
            let _ = writeln!(
                out,
                "{} {} {} {}",
                format_sci(level.h.ln()),
                format_sci(e[0].ln()),
                format_sci(e[1].ln()),
                format_sci(e[2].ln())
            );
        }
        out
    }
}

/// C-style `%.12e` formatting: `1.234500000000e-02`.
pub fn format_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exponent.abs())
}

/// Uniform offset in `[-0.3, 0.3]²` (in units of the mesh size) drawn from `seed`.
pub fn seed_offset(seed: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Point::new(rng.gen_range(-0.3..=0.3), rng.gen_range(-0.3..=0.3))
}

/// Runs every level of the study. With a seed the interface is moved by
/// `h · seed_offset(seed)` on each level.
pub fn run_study(config: &StudyConfig, seed: Option<u64>) -> Result<ConvergenceReport> {
    config.validate()?;
    let base = config.interface.to_interface();
    let unit_offset = seed.map(seed_offset).unwrap_or_else(Point::zeros);
    let mut levels = Vec::with_capacity(config.meshes.len());
    for &n in &config.meshes {
        let start = Instant::now();
        let h = BackgroundMesh::uniform(&config.domain, n)?.h;
        let run =
            solve_level(config, base.shifted(unit_offset * h), n).map_err(|e| with_level(e, n))?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!(
            "n = {n}: ndof = {}, energy = {:.3e}, l2 = {:.3e}, h1 = {:.3e}, iterations = {}",
            run.ndof,
            run.errors.energy_dof,
            run.errors.l2_proj,
            run.errors.h1_proj,
            run.solution.report.iterations
        );
        levels.push(LevelResult {
            n,
            h: run.mesh.h,
            ndof: run.ndof,
            errors: run.errors,
            cg_iters: run.solution.report.iterations,
            seconds,
            n_interface: run.geometry.n_interface(),
            ritz_min: run.solution.report.ritz_min,
        });
    }
    Ok(ConvergenceReport {
        problem: config.problem,
        levels,
    })
}

fn with_level(e: IvemError, n: usize) -> IvemError {
    match e {
        IvemError::Geometry(m) => IvemError::Geometry(format!("level n = {n}: {m}")),
        IvemError::Consistency(m) => IvemError::Consistency(format!("level n = {n}: {m}")),
        IvemError::InvalidArgument(m) => IvemError::InvalidArgument(format!("level n = {n}: {m}")),
        other => {
            log::error!("level n = {n} failed");
            other
        }
    }
}

/// Outcome of the interface-position robustness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub baseline: ErrorRecord,
    pub trials: Vec<ErrorRecord>,
    /// Mesh edges crossed twice by the interface, summed over all runs.
    pub double_crossings: usize,
    /// Largest `max(e/e₀, e₀/e)` over trials for the projected errors.
    pub max_ratio: f64,
    /// Every reduced system admitted a Cholesky factorization.
    pub cholesky_ok: bool,
    pub max_symmetry_error: f64,
}

/// Moves the interface by uniform random offsets of at most `0.3h` per
/// coordinate and compares projected errors with the unperturbed run.
pub fn robustness_sweep(
    config: &StudyConfig,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    config.validate()?;
    let base = config.interface.to_interface();
    let mesh = BackgroundMesh::uniform(&config.domain, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = vec![Point::zeros()];
    offsets.extend(
        (0..trials)
            .map(|_| Point::new(rng.gen_range(-0.3..=0.3), rng.gen_range(-0.3..=0.3)) * mesh.h),
    );
    let runs = offsets
        .iter()
        .map(|&o| {
            let run = solve_level(config, base.shifted(o), n)?;
            let chol = ProfileCholesky::factor(&run.solution.reduced.system.matrix).is_ok();
            Ok((
                run.errors,
                chol,
                run.solution.matrix.symmetry_error(),
                run.geometry.unresolved_edges.len(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let baseline = runs[0].0;
    let mut max_ratio: f64 = 1.0;
    for (e, ..) in &runs[1..] {
        for (a, b) in [(e.l2_proj, baseline.l2_proj), (e.h1_proj, baseline.h1_proj)] {
            max_ratio = max_ratio.max(a / b).max(b / a);
        }
    }
    Ok(RobustnessReport {
        baseline,
        trials: runs[1..].iter().map(|r| r.0).collect(),
        double_crossings: runs.iter().map(|r| r.3).sum(),
        max_ratio,
        cholesky_ok: runs.iter().all(|r| r.1),
        max_symmetry_error: runs.iter().fold(0.0, |m, r| m.max(r.2)),
    })
}
