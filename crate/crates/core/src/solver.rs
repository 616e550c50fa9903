//! Sparse symmetric storage and SPD solvers.
//!
//! Assembly goes through [`TripletList`], whose entries are summed in
//! `(row, col, key)` order so the assembled matrix does not depend on the
//! order in which elements were visited.

use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;

/// Largest dimension accepted by [`dense_solve`].
pub const DENSE_MAX: usize = 2000;

#[derive(Debug, Clone, Default)]
pub struct TripletList {
    n: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl TripletList {
    pub fn new(n: usize) -> Self {
        TripletList {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `value` at `(row, col)`; `key` orders contributions to the same
    /// entry (the element index during assembly).
    pub fn push(&mut self, row: usize, col: usize, key: usize, value: f64) {
        self.entries.push((row, col, key, value));
    }

    pub fn extend(&mut self, other: TripletList) {
        self.entries.extend(other.entries);
    }

    pub fn into_csr(self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.n, self.entries)
    }
}

/// Square matrix in compressed sparse row format with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, usize, f64)>) -> Self {
        entries.sort_unstable_by(|a, b| {
            (a.0, a.1, a.2)
                .cmp(&(b.0, b.1, b.2))
                .then(a.3.total_cmp(&b.3))
        });
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, _, v) in entries {
            assert!(
                r < n && c < n,
                "triplet ({r}, {c}) outside a {n}x{n} matrix"
            );
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 0, 1.0)).collect())
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    entries.push((i, j, 0, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul(x))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij − a_ji| / max |a_ij|`.
    pub fn symmetry_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// Coordinate text format, one `i j value` line per stored entry.
    pub fn coordinate_dump(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.push_str(&format!("{i} {j} {v:.17e}\n"));
            }
        }
        out
    }

    /// Submatrix on the index set `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_index = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let mut entries = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if new_index[j] != usize::MAX {
                    entries.push((k, new_index[j], 0, v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), entries)
    }
}

/// A linear system `A x = b` with `A` symmetric positive definite.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Reduced system obtained by fixing some unknowns.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub system: SparseSystem,
    /// Full index of each reduced unknown.
    pub free: Vec<usize>,
    /// Full vector holding the fixed values (zero on free unknowns).
    pub fixed_values: Vec<f64>,
}

impl ReducedSystem {
    /// Full vector from a solution of the reduced system.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.fixed_values.clone();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x[k];
        }
        full
    }
}

/// Symmetric elimination of the unknowns with `fixed[i]`, whose values are
/// taken from `values`: `A_ff x_f = b_f − A_fc g_c`.
pub fn eliminate_dirichlet(
    a: &CsrMatrix,
    b: &[f64],
    fixed: &[bool],
    values: &[f64],
) -> ReducedSystem {
    let n = a.dim();
    let fixed_values: Vec<f64> = (0..n)
        .map(|i| if fixed[i] { values[i] } else { 0.0 })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let lifted = a.mul(&fixed_values);
    let rhs = free.iter().map(|&i| b[i] - lifted[i]).collect();
    ReducedSystem {
        system: SparseSystem {
            matrix: a.submatrix(&free),
            rhs,
        },
        free,
        fixed_values,
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual tolerance `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `10·N`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// True relative residual of the returned solution.
    pub residual: f64,
    /// Extreme Ritz values of the Jacobi-preconditioned operator from the
    /// Lanczos tridiagonal implied by the CG coefficients.
    pub ritz_min: f64,
    pub ritz_max: f64,
}

/// Jacobi-preconditioned conjugate gradients.
pub fn cg_solve(
    system: &SparseSystem,
    options: &CgOptions,
) -> Result<(Vec<f64>, CgReport), SolverError> {
    let a = &system.matrix;
    let b = &system.rhs;
    let n = a.dim();
    if b.len() != n {
        return Err(SolverError::Dimension(format!(
            "matrix is {n}x{n}, right-hand side has {}",
            b.len()
        )));
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        let report = CgReport {
            iterations: 0,
            residual: 0.0,
            ritz_min: f64::NAN,
            ritz_max: f64::NAN,
        };
        return Ok((vec![0.0; n], report));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let max_iter = options.max_iter.unwrap_or(10 * n.max(1));

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut iterations = 0;
    let mut residual = 1.0;
    while iterations < max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        let alpha = rz / pap;
        if !alpha.is_finite() {
            return Err(SolverError::NonFinite { iterations });
        }
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        alphas.push(alpha);
        residual = dot(&r, &r).sqrt() / b_norm;
        if !residual.is_finite() {
            return Err(SolverError::NonFinite { iterations });
        }
        if residual <= options.tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        betas.push(beta);
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let ax = a.mul(&x);
    let true_residual = ax
        .iter()
        .zip(b)
        .map(|(ax, b)| (b - ax) * (b - ax))
        .sum::<f64>()
        .sqrt()
        / b_norm;
    if residual > options.tol {
        return Err(SolverError::NotConverged {
            iterations,
            residual: true_residual,
        });
    }
    let (ritz_min, ritz_max) = lanczos_extremes(&alphas, &betas);
    Ok((
        x,
        CgReport {
            iterations,
            residual: true_residual,
            ritz_min,
            ritz_max,
        },
    ))
}

/// Smallest and largest eigenvalue of the Lanczos tridiagonal built from
/// CG step lengths `alphas` and direction updates `betas`.
fn lanczos_extremes(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    let mut diag = Vec::with_capacity(k);
    let mut off_sq = Vec::with_capacity(k.saturating_sub(1));
    for j in 0..k {
        let mut d = 1.0 / alphas[j];
        if j > 0 {
            d += betas[j - 1] / alphas[j - 1];
        }
        diag.push(d);
        if j + 1 < k {
            off_sq.push(betas[j] / (alphas[j] * alphas[j]));
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..k {
        let left = if j > 0 { off_sq[j - 1].sqrt() } else { 0.0 };
        let right = if j + 1 < k { off_sq[j].sqrt() } else { 0.0 };
        lo = lo.min(diag[j] - left - right);
        hi = hi.max(diag[j] + left + right);
    }
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for j in 0..k {
            let prev = if j > 0 { off_sq[j - 1] / q } else { 0.0 };
            q = diag[j] - x - prev;
            if q == 0.0 {
                q = -f64::EPSILON * (diag[j].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bisect = |target: usize| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(mid) > target {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(k - 1))
}

/// Dense Cholesky solve for systems with at most [`DENSE_MAX`] unknowns.
pub fn dense_solve(system: &SparseSystem) -> Result<Vec<f64>, SolverError> {
    let n = system.matrix.dim();
    if n > DENSE_MAX {
        return Err(SolverError::TooLarge { n, max: DENSE_MAX });
    }
    if system.rhs.len() != n {
        return Err(SolverError::Dimension(format!(
            "matrix is {n}x{n}, right-hand side has {}",
            system.rhs.len()
        )));
    }
    match system.matrix.to_dense().cholesky() {
        Some(chol) => Ok(chol
            .solve(&DVector::from_column_slice(&system.rhs))
            .as_slice()
            .to_vec()),
        None => Err(ProfileCholesky::factor(&system.matrix).err().unwrap_or(
            SolverError::NotPositiveDefinite {
                pivot: 0,
                value: f64::NAN,
            },
        )),
    }
}

/// Reverse Cuthill–McKee ordering of the matrix graph.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
            next.sort_by_key(|&j| (degree[j], j));
            for j in next {
                visited[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

/// Skyline Cholesky factorization `P A Pᵀ = L Lᵀ` under a reverse
/// Cuthill–McKee ordering. Success certifies positive definiteness.
#[derive(Debug, Clone)]
pub struct ProfileCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl ProfileCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inverse[i] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (k, &i) in perm.iter().enumerate() {
            for (j, _) in a.row(i) {
                first[k] = first[k].min(inverse[j]);
            }
        }
        let mut rows: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0; k - first[k] + 1]).collect();
        for (k, &i) in perm.iter().enumerate() {
            for (j, v) in a.row(i) {
                let c = inverse[j];
                if c <= k {
                    rows[k][c - first[k]] = v;
                }
            }
        }
        for k in 0..n {
            for c in first[k]..k {
                let start = first[k].max(first[c]);
                let mut s = rows[k][c - first[k]];
                for m in start..c {
                    s -= rows[k][m - first[k]] * rows[c][m - first[c]];
                }
                rows[k][c - first[k]] = s / rows[c][c - first[c]];
            }
            let mut d = rows[k][k - first[k]];
            for m in first[k]..k {
                let l = rows[k][m - first[k]];
                d -= l * l;
            }
            if !(d > 0.0) {
                return Err(SolverError::NotPositiveDefinite {
                    pivot: perm[k],
                    value: d,
                });
            }
            rows[k][k - first[k]] = d.sqrt();
        }
        Ok(ProfileCholesky { perm, first, rows })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for k in 0..n {
            let mut s = y[k];
            for m in self.first[k]..k {
                s -= self.rows[k][m - self.first[k]] * y[m];
            }
            y[k] = s / self.rows[k][k - self.first[k]];
        }
        for k in (0..n).rev() {
            y[k] /= self.rows[k][k - self.first[k]];
            let yk = y[k];
            for m in self.first[k]..k {
                y[m] -= self.rows[k][m - self.first[k]] * yk;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }

    /// Number of stored entries of the factor.
    pub fn profile_size(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Local element matrix and load with local-to-global indices and
/// orientation signs (all `1.0` for nodal spaces).
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub element: usize,
    pub dofs: Vec<usize>,
    pub signs: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub load: Vec<f64>,
}

/// Sums local systems into a global matrix and load vector. Contributions
/// to the same entry are added in element order regardless of the order of
/// `locals`.
pub fn assemble(n: usize, locals: &[LocalSystem]) -> (CsrMatrix, Vec<f64>) {
    let mut triplets = TripletList::new(n);
    let mut load_entries = Vec::new();
    for local in locals {
        let m = local.dofs.len();
        for i in 0..m {
            let (gi, si) = (local.dofs[i], local.signs[i]);
            load_entries.push((gi, local.element, si * local.load[i]));
            for j in 0..m {
                triplets.push(
                    gi,
                    local.dofs[j],
                    local.element,
                    si * local.signs[j] * local.matrix[(i, j)],
                );
            }
        }
    }
    load_entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut load = vec![0.0; n];
    for (i, _, v) in load_entries {
        load[i] += v;
    }
    (triplets.into_csr(), load)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Cg,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub kind: SolverKind,
    pub cg: CgOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            kind: SolverKind::Cg,
            cg: CgOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub ritz_min: Option<f64>,
}

/// Assembled problem together with its solution.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    /// Full DoF vector including boundary values.
    pub dofs: Vec<f64>,
    /// Global matrix before boundary elimination.
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
    pub reduced: ReducedSystem,
    pub report: SolveReport,
}

pub fn solve_system(
    system: &SparseSystem,
    options: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    match options.kind {
        SolverKind::Cg => {
            let (x, r) = cg_solve(system, &options.cg)?;
            let ritz_min = if r.ritz_min.is_nan() {
                None
            } else {
                Some(r.ritz_min)
            };
            Ok((
                x,
                SolveReport {
                    iterations: r.iterations,
                    residual: r.residual,
                    ritz_min,
                },
            ))
        }
        SolverKind::Dense => {
            let x = dense_solve(system)?;
            let ax = system.matrix.mul(&x);
            let b_norm = dot(&system.rhs, &system.rhs).sqrt();
            let r: f64 = ax
                .iter()
                .zip(&system.rhs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let residual = if b_norm > 0.0 { r / b_norm } else { r };
            Ok((
                x,
                SolveReport {
                    iterations: 0,
                    residual,
                    ritz_min: None,
                },
            ))
        }
    }
}

/// Eliminates the fixed DoFs and solves.
pub fn solve_with_boundary(
    matrix: CsrMatrix,
    load: Vec<f64>,
    fixed: &[bool],
    values: &[f64],
    options: &SolveOptions,
) -> Result<DiscreteSolution, SolverError> {
    let reduced = eliminate_dirichlet(&matrix, &load, fixed, values);
    let (x, report) = solve_system(&reduced.system, options)?;
    Ok(DiscreteSolution {
        dofs: reduced.expand(&x),
        matrix,
        load,
        reduced,
        report,
    })
}
