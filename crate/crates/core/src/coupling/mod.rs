//! Outer coupling matrices and the matrix machinery behind the adaptive laws.
//!
//! A coupling matrix `A` is row-sum-zero with nonnegative off-diagonal weights.
//! Row `i` lists the nodes node `i` listens to: `aᵢⱼ > 0` is an edge `j → i`.
//! The library only works with irreducible matrices (strongly connected
//! interaction graphs), for which the left null vector `ξ` is strictly positive
//! and unique up to scale.

mod generators;
mod time_varying;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

pub use generators::{
    generate_complete, generate_random_symmetric, generate_small_world_weighted,
    SmallWorldParams, MAX_GENERATOR_ATTEMPTS,
};
pub use time_varying::TimeVaryingCoupling;

/// Tolerance for structural equalities (row sums, symmetry).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for spectral residuals (null vectors, zero eigenvalues).
pub const SPECTRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CouplingError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("need at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("coupling graph is not strongly connected")]
    Reducible,
    #[error("zero eigenvalue has numerical multiplicity {0}, expected 1")]
    DegenerateSpectrum(usize),
    #[error("symmetrized matrix has a nonnegative nonzero eigenvalue {0}")]
    PositiveEigenvalue(f64),
    #[error("not a valid coupling matrix: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("left eigenvector weights must be finite and positive")]
    NonPositiveWeights,
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("no strongly connected graph after {0} attempts")]
    RetryCapExceeded(u32),
    #[error("shared left eigenvector fails at t = {t} (residual {residual})")]
    SharedXiMismatch { t: f64, residual: f64 },
    #[error("coupling matrix is not symmetric at t = {t}")]
    Asymmetric { t: f64 },
}

fn join_violations(v: &[Violation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for (k, violation) in v.iter().enumerate() {
        if k > 0 {
            s.push_str("; ");
        }
        let _ = write!(s, "{violation}");
    }
    s
}

/// Which of the two admissible coupling classes a matrix falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionClass {
    /// Row-sum zero, nonnegative off-diagonals, simple zero eigenvalue, irreducible.
    A1,
    /// A1 and symmetric.
    A2,
    Invalid,
}

impl fmt::Display for ConditionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionClass::A1 => "A1",
            ConditionClass::A2 => "A2",
            ConditionClass::Invalid => "invalid",
        })
    }
}

/// A single failed check reported by [`validate_condition`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    NonzeroRowSum { row: usize, sum: f64 },
    Reducible,
    /// The zero eigenvalue is not simple.
    ZeroEigenvalueMultiplicity(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeOffDiagonal { row, col, value } => {
                write!(f, "negative off-diagonal a[{row}][{col}] = {value}")
            }
            Violation::NonzeroRowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::Reducible => f.write_str("interaction graph is not strongly connected"),
            Violation::ZeroEigenvalueMultiplicity(m) => {
                write!(f, "zero eigenvalue has multiplicity {m}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub class: ConditionClass,
    pub symmetric: bool,
    pub irreducible: bool,
    pub violations: Vec<Violation>,
}

fn check_square(m: &DMatrix<f64>) -> Result<usize, CouplingError> {
    if m.nrows() != m.ncols() {
        return Err(CouplingError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

fn check_finite(m: &DMatrix<f64>) -> Result<(), CouplingError> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Err(CouplingError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn row_sum_tolerance(m: &DMatrix<f64>, row: usize) -> f64 {
    let n = m.ncols();
    let scale = m.row(row).iter().fold(1.0f64, |acc, v| acc.max(libm::fabs(*v)));
    STRUCTURAL_TOL * n as f64 * scale
}

/// Off-diagonal sign and row-sum checks only.
fn structural_violations(m: &DMatrix<f64>) -> Vec<Violation> {
    let n = m.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let a = m[(i, j)];
            sum += a;
            if i != j && a < 0.0 {
                out.push(Violation::NegativeOffDiagonal { row: i, col: j, value: a });
            }
        }
        if libm::fabs(sum) > row_sum_tolerance(m, i) {
            out.push(Violation::NonzeroRowSum { row: i, sum });
        }
    }
    out
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| {
        (i + 1..n).all(|j| {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            libm::fabs(a - b) <= STRUCTURAL_TOL * libm::fabs(a).max(libm::fabs(b)).max(1.0)
        })
    })
}

/// Classifies `matrix` as A1, A2 or invalid and lists every failed check.
///
/// Besides the sign and row-sum conditions, the matrix must be irreducible and
/// its zero eigenvalue must be numerically simple (counted from the singular
/// values). Row-sum-zero matrices with nonnegative off-diagonals have all other
/// eigenvalues in the open left half-plane by Gershgorin, so nullity one is
/// the remaining spectral condition.
pub fn validate_condition(matrix: &DMatrix<f64>) -> Result<ConditionReport, CouplingError> {
    let n = check_square(matrix)?;
    if n < 2 {
        return Err(CouplingError::TooFewNodes { min: 2, got: n });
    }
    check_finite(matrix)?;

    let mut violations = structural_violations(matrix);
    let irreducible = is_irreducible(matrix);
    if !irreducible {
        violations.push(Violation::Reducible);
    }
    let nullity = numerical_nullity(matrix);
    if nullity != 1 {
        violations.push(Violation::ZeroEigenvalueMultiplicity(nullity));
    }
    let symmetric = is_symmetric(matrix);
    let class = match (violations.is_empty(), symmetric) {
        (false, _) => ConditionClass::Invalid,
        (true, true) => ConditionClass::A2,
        (true, false) => ConditionClass::A1,
    };
    Ok(ConditionReport { class, symmetric, irreducible, violations })
}

fn numerical_nullity(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let tol = SPECTRAL_TOL * top.max(1.0);
    sv.iter().filter(|s| **s <= tol).count()
}

fn reachable_all(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if !seen[w] && w != v && edge(v, w) {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// True iff the graph with an edge `j → i` for every `aᵢⱼ > 0` (`i ≠ j`) is
/// strongly connected. Uses one reachability sweep on the graph and one on its
/// transpose, both from node 0.
pub fn is_irreducible(matrix: &DMatrix<f64>) -> bool {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return false;
    }
    reachable_all(n, |from, to| matrix[(to, from)] > 0.0)
        && reachable_all(n, |from, to| matrix[(from, to)] > 0.0)
}

/// Normalized, strictly positive left null vector `ξ` of a coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftEigenvector(Vec<f64>);

impl LeftEigenvector {
    /// Normalizes positive weights to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, CouplingError> {
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(CouplingError::NonPositiveWeights);
        }
        let total: f64 = weights.iter().sum();
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖ξᵀA‖∞`.
    pub fn residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let n = matrix.ncols();
        (0..n)
            .map(|j| libm::fabs((0..n).map(|i| self.0[i] * matrix[(i, j)]).sum::<f64>()))
            .fold(0.0, f64::max)
    }
}

/// Infinity norm (maximum absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| libm::fabs(*v)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Left null vector of an irreducible A1 matrix.
///
/// Takes the right singular vector of `Aᵀ` belonging to its smallest singular
/// value, fixes the sign and rescales it to sum to one.
pub fn left_eigenvector(matrix: &DMatrix<f64>) -> Result<LeftEigenvector, CouplingError> {
    let n = check_square(matrix)?;
    if n < 2 {
        return Err(CouplingError::TooFewNodes { min: 2, got: n });
    }
    check_finite(matrix)?;
    if !is_irreducible(matrix) {
        return Err(CouplingError::Reducible);
    }
    let svd = matrix.transpose().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sv = &svd.singular_values;
    let top = sv.iter().fold(0.0f64, |acc, s| acc.max(*s));
    let tol = SPECTRAL_TOL * top.max(1.0);
    let nullity = sv.iter().filter(|s| **s <= tol).count();
    if nullity != 1 {
        return Err(CouplingError::DegenerateSpectrum(nullity));
    }
    let (k, _) = sv
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if *s < best.1 { (i, *s) } else { best });
    let mut xi: Vec<f64> = v_t.row(k).iter().copied().collect();
    let total: f64 = xi.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(CouplingError::DegenerateSpectrum(nullity));
    }
    for w in xi.iter_mut() {
        *w /= total;
    }
    LeftEigenvector::from_weights(xi)
}

/// A validated, irreducible coupling matrix of class A1 or A2, together with
/// its normalized left eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
    class: ConditionClass,
    xi: LeftEigenvector,
}

impl CouplingMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self, CouplingError> {
        let report = validate_condition(&entries)?;
        if report.class == ConditionClass::Invalid {
            return Err(CouplingError::Invalid(report.violations));
        }
        let xi = left_eigenvector(&entries)?;
        Ok(Self { entries, class: report.class, xi })
    }

    /// Builds a matrix from nonnegative off-diagonal weights; the diagonal of
    /// `weights` is ignored and replaced by negative row sums.
    pub fn from_weights(mut weights: DMatrix<f64>) -> Result<Self, CouplingError> {
        set_laplacian_diagonal(&mut weights);
        Self::new(weights)
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn class(&self) -> ConditionClass {
        self.class
    }

    pub fn is_symmetric(&self) -> bool {
        self.class == ConditionClass::A2
    }

    pub fn xi(&self) -> &LeftEigenvector {
        &self.xi
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        (&self.entries + self.entries.transpose()) * 0.5
    }

    pub fn lambda2(&self) -> Result<f64, CouplingError> {
        lambda2(&self.entries, &self.xi)
    }

    pub fn projection(&self) -> ProjectionMatrix {
        ProjectionMatrix::new(&self.xi)
    }
}

pub(crate) fn set_laplacian_diagonal(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = 0.0;
        let off: f64 = m.row(i).iter().sum();
        m[(i, i)] = -off;
    }
}

/// `U = Ξ − ξξᵀ` with `Ξ = diag(ξ)`.
///
/// `−U` is itself an A2 matrix, and `Xᵀ(U⊗Iₙ)X` vanishes exactly on the
/// synchronization manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    u: DMatrix<f64>,
}

impl ProjectionMatrix {
    pub fn new(xi: &LeftEigenvector) -> Self {
        let w = xi.as_slice();
        let n = w.len();
        let u = DMatrix::from_fn(n, n, |i, j| {
            let outer = w[i] * w[j];
            if i == j {
                w[i] - outer
            } else {
                -outer
            }
        });
        debug_assert!(
            validate_condition(&(-&u)).map(|r| r.class == ConditionClass::A2).unwrap_or(false),
            "-U must be A2"
        );
        Self { u }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn n_nodes(&self) -> usize {
        self.u.nrows()
    }

    /// `Xᵀ(U⊗Iₙ)Y`, evaluated blockwise as `Σᵢⱼ uᵢⱼ xᵢ·yⱼ`.
    pub fn bilinear_form(&self, x: &[f64], y: &[f64], dim: usize) -> Result<f64, CouplingError> {
        let nodes = self.n_nodes();
        let expected = nodes * dim;
        for len in [x.len(), y.len()] {
            if len != expected {
                return Err(CouplingError::Length { expected, got: len });
            }
        }
        let mut total = 0.0;
        for i in 0..nodes {
            let xi = &x[i * dim..(i + 1) * dim];
            for j in 0..nodes {
                let yj = &y[j * dim..(j + 1) * dim];
                let dot: f64 = xi.iter().zip(yj).map(|(a, b)| a * b).sum();
                total += self.u[(i, j)] * dot;
            }
        }
        Ok(total)
    }

    pub fn quadratic_form(&self, x: &[f64], dim: usize) -> Result<f64, CouplingError> {
        self.bilinear_form(x, x, dim)
    }
}

/// Largest eigenvalue of `ΞA + AᵀΞ` other than the structural zero on `1`.
///
/// Fails when that eigenvalue is not strictly negative.
pub fn lambda2(matrix: &DMatrix<f64>, xi: &LeftEigenvector) -> Result<f64, CouplingError> {
    let n = check_square(matrix)?;
    if xi.len() != n {
        return Err(CouplingError::Length { expected: n, got: xi.len() });
    }
    let w = xi.as_slice();
    let sym = DMatrix::from_fn(n, n, |i, j| w[i] * matrix[(i, j)] + matrix[(j, i)] * w[j]);
    let eig = sym.clone().symmetric_eigen();
    // Drop the eigenpair whose vector is closest to the all-ones direction.
    let ones_alignment = |k: usize| libm::fabs(eig.eigenvectors.column(k).iter().sum::<f64>());
    let structural = (0..n)
        .max_by(|a, b| ones_alignment(*a).total_cmp(&ones_alignment(*b)))
        .unwrap_or(0);
    let best = (0..n)
        .filter(|k| *k != structural)
        .map(|k| eig.eigenvalues[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = SPECTRAL_TOL * inf_norm(&sym).max(1.0);
    if best > tol {
        Err(CouplingError::PositiveEigenvalue(best))
    } else if best >= -tol {
        Err(CouplingError::DegenerateSpectrum(2))
    } else {
        Ok(best)
    }
}
