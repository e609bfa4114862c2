//! Augmented right-hand sides `(Ẋ, ċ)` for the adaptive coupling schemes.
//!
//! Every scheme couples the network as `Ẋ = F(X) + c(t)·(coupling term)` and
//! evolves the scalar gain by a quadratic-form law:
//!
//! | kind                     | coupling term | `ċ`                          |
//! |--------------------------|---------------|------------------------------|
//! | `LinearKnown`            | `(A⊗Γ)X`      | `−(α/2) Xᵀ(Ξ⊗Iₙ)(A⊗Γ)X`      |
//! | `LinearUnknown`          | `(A⊗Γ)X`      | `−(α/2) Xᵀ(Ã⊗Iₙ)X`           |
//! | `LinearTimeVarying`      | `(A(t)⊗Γ)X`   | `−(α/2) Xᵀ(Ξ⊗Iₙ)(A(t)⊗Γ)X`   |
//! | `LinearDominated`        | `(A(t)⊗Γ)X`   | `−(α/2) Xᵀ(Â⊗Iₙ)X`           |
//! | `NonlinearKnown`         | `(A⊗Iₙ)G(X)`  | `−(α/2) Xᵀ(B⊗Iₙ)G(X)`        |
//! | `NonlinearTimeVarying`   | `(A(t)⊗Iₙ)G(X)` | `−(α/2) Xᵀ(A(t)⊗Iₙ)G(X)`   |
//!
//! with `B = (A + Aᵀ)/2`. Kronecker products are never materialized.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coupling::{
    CouplingError, CouplingMatrix, ConditionClass, LeftEigenvector, ProjectionMatrix,
    TimeVaryingCoupling, STRUCTURAL_TOL,
};
use crate::oscillators::NodeDynamics;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("{0}")]
    Config(String),
    #[error("state length mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("adaptation matrix does not dominate a[{row}][{col}](t) at t = {t}")]
    NotDominated { t: f64, row: usize, col: usize },
}

fn config_err(msg: &str) -> SchemeError {
    SchemeError::Config(msg.into())
}

/// Positive diagonal inner coupling `Γ = diag(γ₁, …, γₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerCoupling(Vec<f64>);

impl InnerCoupling {
    pub fn new(gamma: Vec<f64>) -> Result<Self, SchemeError> {
        if gamma.is_empty() || gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(config_err("inner coupling entries must be positive"));
        }
        Ok(Self(gamma))
    }

    pub fn identity(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A scalar map with slope bounded below by a positive `β`.
#[derive(Clone)]
pub enum MonotoneMap {
    Identity,
    /// `g(u) = u + tanh(u)`, slope in `(1, 2]`.
    TanhAugmented,
    Custom { map: Arc<dyn Fn(f64) -> f64 + Send + Sync>, beta: f64 },
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("Identity"),
            Self::TanhAugmented => f.write_str("TanhAugmented"),
            Self::Custom { beta, .. } => f.debug_struct("Custom").field("beta", beta).finish(),
        }
    }
}

impl MonotoneMap {
    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            Self::Identity => u,
            Self::TanhAugmented => u + libm::tanh(u),
            Self::Custom { map, .. } => map(u),
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Self::Identity | Self::TanhAugmented => 1.0,
            Self::Custom { beta, .. } => *beta,
        }
    }
}

/// Componentwise nonlinearity `g(x) = (g₁(x¹), …, gₙ(xⁿ))`.
///
/// A single map is applied to every coordinate.
#[derive(Debug, Clone)]
pub struct MonotoneCoupling {
    maps: Vec<MonotoneMap>,
}

impl MonotoneCoupling {
    pub fn uniform(map: MonotoneMap) -> Self {
        Self { maps: vec![map] }
    }

    pub fn componentwise(maps: Vec<MonotoneMap>) -> Result<Self, SchemeError> {
        if maps.is_empty() {
            return Err(config_err("nonlinearity needs at least one component"));
        }
        Ok(Self { maps })
    }

    /// Declared slope lower bound: the smallest `β` over components.
    pub fn beta(&self) -> f64 {
        self.maps.iter().map(MonotoneMap::beta).fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn apply(&self, coordinate: usize, u: f64) -> f64 {
        let map = if self.maps.len() == 1 { &self.maps[0] } else { &self.maps[coordinate] };
        map.apply(u)
    }

    fn supports_dim(&self, dim: usize) -> bool {
        self.maps.len() == 1 || self.maps.len() == dim
    }

    /// Smallest sampled difference quotient `(gₖ(u) − gₖ(v))/(u − v)` over
    /// `u ≠ v` drawn uniformly from `[lo, hi]`.
    pub fn sampled_min_slope(&self, lo: f64, hi: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min = f64::INFINITY;
        for map in &self.maps {
            for _ in 0..samples {
                let u = rng.random_range(lo..hi);
                let v = rng.random_range(lo..hi);
                if u == v {
                    continue;
                }
                min = min.min((map.apply(u) - map.apply(v)) / (u - v));
            }
        }
        min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    LinearKnown,
    LinearUnknown,
    LinearTimeVarying,
    LinearDominated,
    NonlinearKnown,
    NonlinearTimeVarying,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        Self::LinearKnown,
        Self::LinearUnknown,
        Self::LinearTimeVarying,
        Self::LinearDominated,
        Self::NonlinearKnown,
        Self::NonlinearTimeVarying,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LinearKnown => "linear-known",
            Self::LinearUnknown => "linear-unknown",
            Self::LinearTimeVarying => "linear-time-varying",
            Self::LinearDominated => "linear-dominated",
            Self::NonlinearKnown => "nonlinear",
            Self::NonlinearTimeVarying => "nonlinear-time-varying",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_nonlinear(self) -> bool {
        matches!(self, Self::NonlinearKnown | Self::NonlinearTimeVarying)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The outer coupling matrix that drives the network.
#[derive(Debug, Clone)]
pub enum DynamicsMatrix {
    Constant(CouplingMatrix),
    TimeVarying(TimeVaryingCoupling),
}

impl DynamicsMatrix {
    pub fn n_nodes(&self) -> usize {
        match self {
            Self::Constant(a) => a.n_nodes(),
            Self::TimeVarying(a) => a.n_nodes(),
        }
    }

    pub fn xi(&self) -> &LeftEigenvector {
        match self {
            Self::Constant(a) => a.xi(),
            Self::TimeVarying(a) => a.shared_xi(),
        }
    }
}

/// Unvalidated description of an adaptive scheme. See [`Scheme::new`].
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Adaptation gain `α`. Zero freezes `c` at its initial value.
    pub alpha: f64,
    /// Inner coupling `Γ`; identity when absent. Ignored by nonlinear kinds.
    pub gamma: Option<InnerCoupling>,
    pub dynamics: DynamicsMatrix,
    /// `Ã` for `LinearUnknown`, `Â` for `LinearDominated`; unused otherwise.
    pub adaptation: Option<CouplingMatrix>,
    /// Required by nonlinear kinds.
    pub nonlinearity: Option<MonotoneCoupling>,
    /// Let `NonlinearKnown` run on an asymmetric A1 matrix, adapting with
    /// `(A + Aᵀ)/2`. The sign of `ċ` is then no longer guaranteed.
    pub allow_asymmetric: bool,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, dynamics: DynamicsMatrix) -> Self {
        Self {
            kind,
            alpha: 1.0,
            gamma: None,
            dynamics,
            adaptation: None,
            nonlinearity: None,
            allow_asymmetric: false,
        }
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn gamma(mut self, gamma: InnerCoupling) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn adaptation(mut self, matrix: CouplingMatrix) -> Self {
        self.adaptation = Some(matrix);
        self
    }

    pub fn nonlinearity(mut self, g: MonotoneCoupling) -> Self {
        self.nonlinearity = Some(g);
        self
    }

    pub fn allow_asymmetric(mut self, allow: bool) -> Self {
        self.allow_asymmetric = allow;
        self
    }
}

/// Stacked node states `X ∈ R^{N·n}` with the coupling strength `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub x: Vec<f64>,
    pub c: f64,
}

impl AugmentedState {
    /// Starts at `c = 0`.
    pub fn new(x: Vec<f64>) -> Self {
        Self { x, c: 0.0 }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x.len() + 1);
        v.extend_from_slice(&self.x);
        v.push(self.c);
        v
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        let (x, c) = flat.split_at(flat.len() - 1);
        Self { x: x.to_vec(), c: c[0] }
    }
}

fn check_len(got: usize, expected: usize) -> Result<(), SchemeError> {
    if got != expected {
        return Err(SchemeError::Dimension { expected, got });
    }
    Ok(())
}

fn node_count(len: usize, dim: usize) -> Result<usize, SchemeError> {
    if dim == 0 || len % dim != 0 {
        return Err(SchemeError::Dimension { expected: dim * (len / dim.max(1) + 1), got: len });
    }
    Ok(len / dim)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Blockwise `F(X)`: the node field applied to each `n`-block of `x`.
pub fn network_drift<F: NodeDynamics + ?Sized>(
    model: &F,
    x: &[f64],
    t: f64,
    out: &mut [f64],
) -> Result<(), SchemeError> {
    node_count(x.len(), model.dim())?;
    check_len(out.len(), x.len())?;
    drift_unchecked(model, x, t, out);
    Ok(())
}

fn drift_unchecked<F: NodeDynamics + ?Sized>(model: &F, x: &[f64], t: f64, out: &mut [f64]) {
    let n = model.dim();
    for (xi, oi) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        model.field(xi, t, oi);
    }
}

/// `(A⊗Γ)X`: block `i` is `Σⱼ aᵢⱼ Γ xⱼ`.
pub fn linear_coupling_term(
    a: &DMatrix<f64>,
    gamma: &InnerCoupling,
    x: &[f64],
    out: &mut [f64],
) -> Result<(), SchemeError> {
    check_len(x.len(), a.nrows() * gamma.dim())?;
    check_len(out.len(), x.len())?;
    linear_unchecked(a, &residual_row_sums(a), gamma.diagonal(), x, out);
    Ok(())
}

/// Row sums of `m`, with those at rounding level set to exactly zero.
///
/// Coupling sums are evaluated as `Σⱼ≠ᵢ mᵢⱼ(yⱼ − yᵢ) + rᵢyᵢ`, so for a
/// Laplacian the result depends on differences only and vanishes exactly on
/// the synchronization manifold.
fn residual_row_sums(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    (0..n)
        .map(|i| {
            let row = m.row(i);
            let sum: f64 = row.iter().sum();
            let scale = row.iter().fold(1.0_f64, |acc, v| acc.max(libm::fabs(*v)));
            if libm::fabs(sum) <= STRUCTURAL_TOL * n as f64 * scale {
                0.0
            } else {
                sum
            }
        })
        .collect()
}

fn linear_unchecked(a: &DMatrix<f64>, rows: &[f64], gamma: &[f64], x: &[f64], out: &mut [f64]) {
    let n = gamma.len();
    let nodes = a.nrows();
    for i in 0..nodes {
        let xi = block(x, i, n);
        let oi = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            oi[k] = rows[i] * xi[k];
        }
        for j in 0..nodes {
            let aij = a[(i, j)];
            if j == i || aij == 0.0 {
                continue;
            }
            let xj = block(x, j, n);
            for k in 0..n {
                oi[k] += aij * (xj[k] - xi[k]);
            }
        }
        for k in 0..n {
            oi[k] *= gamma[k];
        }
    }
}

/// `(A⊗Iₙ)G(X)` with `gₖ` applied to coordinate `k` of every node.
pub fn nonlinear_coupling_term(
    a: &DMatrix<f64>,
    g: &MonotoneCoupling,
    x: &[f64],
    dim: usize,
    out: &mut [f64],
) -> Result<(), SchemeError> {
    check_len(x.len(), a.nrows() * dim)?;
    check_len(out.len(), x.len())?;
    if !g.supports_dim(dim) {
        return Err(config_err("nonlinearity component count does not match node dimension"));
    }
    let gx = apply_g(g, x, dim);
    linear_unchecked(a, &residual_row_sums(a), &vec![1.0; dim], &gx, out);
    Ok(())
}

fn apply_g(g: &MonotoneCoupling, x: &[f64], dim: usize) -> Vec<f64> {
    x.iter().enumerate().map(|(idx, v)| g.apply(idx % dim, *v)).collect()
}

fn block(v: &[f64], i: usize, dim: usize) -> &[f64] {
    &v[i * dim..(i + 1) * dim]
}

fn diff_dot(xi: &[f64], xj: &[f64], yi: &[f64], yj: &[f64]) -> f64 {
    (0..xi.len()).map(|k| (xi[k] - xj[k]) * (yi[k] - yj[k])).sum()
}

/// `Xᵀ(M⊗Iₙ)Y` from pair differences. A symmetric pair contributes
/// `−mᵢⱼ(xᵢ − xⱼ)·(yᵢ − yⱼ)`, so the sign is exact for a symmetric Laplacian
/// and a monotone `Y = G(X)`.
fn law_form(m: &DMatrix<f64>, rows: &[f64], x: &[f64], y: &[f64], dim: usize) -> f64 {
    let nodes = m.nrows();
    let mut total = 0.0;
    for i in 0..nodes {
        let (xi, yi) = (block(x, i, dim), block(y, i, dim));
        if rows[i] != 0.0 {
            total += rows[i] * dot(xi, yi);
        }
        for j in i + 1..nodes {
            let (mij, mji) = (m[(i, j)], m[(j, i)]);
            if mij == 0.0 && mji == 0.0 {
                continue;
            }
            let (xj, yj) = (block(x, j, dim), block(y, j, dim));
            if mij == mji {
                total -= mij * diff_dot(xi, xj, yi, yj);
            } else {
                let dy: Vec<f64> = yj.iter().zip(yi).map(|(b, a)| b - a).collect();
                total += mij * dot(xi, &dy) - mji * dot(xj, &dy);
            }
        }
    }
    total
}

/// `Xᵀ(Ξ⊗Iₙ)(A⊗Γ)X = −½ Σᵢ<ⱼ (ξᵢaᵢⱼ + ξⱼaⱼᵢ) Σₖ γₖ(xᵢᵏ − xⱼᵏ)²`, valid when
/// `ξᵀA = 0` and `A` has zero row sums.
fn xi_law(xi: &[f64], a: &DMatrix<f64>, gamma: &[f64], x: &[f64], dim: usize) -> f64 {
    let nodes = a.nrows();
    let mut total = 0.0;
    for i in 0..nodes {
        let xi_block = &x[i * dim..(i + 1) * dim];
        for j in i + 1..nodes {
            let w = xi[i] * a[(i, j)] + xi[j] * a[(j, i)];
            if w == 0.0 {
                continue;
            }
            let xj_block = &x[j * dim..(j + 1) * dim];
            let d2: f64 = (0..dim)
                .map(|k| {
                    let d = xi_block[k] - xj_block[k];
                    gamma[k] * d * d
                })
                .sum();
            total += w * d2;
        }
    }
    -0.5 * total
}

/// A validated adaptive scheme.
#[derive(Debug, Clone)]
pub struct Scheme {
    kind: SchemeKind,
    alpha: f64,
    gamma: Option<InnerCoupling>,
    dynamics: DynamicsMatrix,
    /// Fixed adaptation matrix: `Ã`, `Â` or `B`.
    adaptation: Option<DMatrix<f64>>,
    nonlinearity: Option<MonotoneCoupling>,
    projection: ProjectionMatrix,
    /// Residual row sums of the constant dynamics and adaptation matrices.
    dynamics_rows: Vec<f64>,
    adaptation_rows: Vec<f64>,
}

impl Scheme {
    /// Checks the pairing of scheme kind and matrices:
    ///
    /// - constant kinds need a constant matrix, time-varying kinds a
    ///   time-varying one (`LinearDominated` accepts either);
    /// - `LinearUnknown` and `LinearDominated` need an A2 adaptation matrix of
    ///   the same size;
    /// - nonlinear kinds need a nonlinearity, and `NonlinearKnown` needs an A2
    ///   matrix unless `allow_asymmetric` is set.
    pub fn new(config: SchemeConfig) -> Result<Self, SchemeError> {
        let SchemeConfig {
            kind,
            alpha,
            gamma,
            dynamics,
            adaptation,
            nonlinearity,
            allow_asymmetric,
        } = config;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(config_err("alpha must be finite and nonnegative"));
        }
        let n_nodes = dynamics.n_nodes();
        match (kind, &dynamics) {
            (SchemeKind::LinearKnown | SchemeKind::LinearUnknown, DynamicsMatrix::TimeVarying(_))
            | (SchemeKind::NonlinearKnown, DynamicsMatrix::TimeVarying(_)) => {
                return Err(SchemeError::Config(alloc::format!(
                    "scheme `{kind}` needs a constant coupling matrix"
                )));
            }
            (
                SchemeKind::LinearTimeVarying | SchemeKind::NonlinearTimeVarying,
                DynamicsMatrix::Constant(_),
            ) => {
                return Err(SchemeError::Config(alloc::format!(
                    "scheme `{kind}` needs a time-varying coupling matrix"
                )));
            }
            _ => {}
        }

        let needs_adaptation = matches!(kind, SchemeKind::LinearUnknown | SchemeKind::LinearDominated);
        let adaptation = match (needs_adaptation, adaptation) {
            (true, Some(m)) => {
                if m.class() != ConditionClass::A2 {
                    return Err(SchemeError::Config(alloc::format!(
                        "scheme `{kind}` needs a symmetric (A2) adaptation matrix"
                    )));
                }
                if m.n_nodes() != n_nodes {
                    return Err(config_err("adaptation matrix size differs from the network"));
                }
                Some(m.entries().clone())
            }
            (true, None) => {
                return Err(SchemeError::Config(alloc::format!(
                    "scheme `{kind}` needs an adaptation matrix"
                )))
            }
            (false, Some(_)) => {
                return Err(SchemeError::Config(alloc::format!(
                    "scheme `{kind}` derives its adaptation law; remove the adaptation matrix"
                )))
            }
            (false, None) => match (kind, &dynamics) {
                (SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(a)) => {
                    if !a.is_symmetric() && !allow_asymmetric {
                        return Err(config_err(
                            "scheme `nonlinear` needs a symmetric (A2) coupling matrix; \
                             set allow_asymmetric to adapt with (A + A^T)/2",
                        ));
                    }
                    Some(a.symmetrized())
                }
                _ => None,
            },
        };

        if kind.is_nonlinear() && nonlinearity.is_none() {
            return Err(SchemeError::Config(alloc::format!(
                "scheme `{kind}` needs a coupling nonlinearity"
            )));
        }
        if let Some(g) = &nonlinearity {
            if !(g.beta() > 0.0) {
                return Err(config_err("nonlinearity slope bound must be positive"));
            }
        }

        if let (SchemeKind::LinearDominated, DynamicsMatrix::Constant(a), Some(hat)) =
            (kind, &dynamics, &adaptation)
        {
            if !a.is_symmetric() {
                return Err(config_err("scheme `linear-dominated` needs an A2 coupling matrix"));
            }
            check_domination(hat, a.entries(), 0.0)?;
        }

        let projection = ProjectionMatrix::new(dynamics.xi());
        let dynamics_rows = match &dynamics {
            DynamicsMatrix::Constant(a) => residual_row_sums(a.entries()),
            DynamicsMatrix::TimeVarying(_) => Vec::new(),
        };
        let adaptation_rows = adaptation.as_ref().map(residual_row_sums).unwrap_or_default();
        Ok(Self {
            kind,
            alpha,
            gamma: if kind.is_nonlinear() { None } else { gamma },
            dynamics,
            adaptation,
            nonlinearity,
            projection,
            dynamics_rows,
            adaptation_rows,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_nodes(&self) -> usize {
        self.dynamics.n_nodes()
    }

    pub fn dynamics(&self) -> &DynamicsMatrix {
        &self.dynamics
    }

    pub fn xi(&self) -> &LeftEigenvector {
        self.dynamics.xi()
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    /// The fixed adaptation matrix (`Ã`, `Â` or `B`), if the kind uses one.
    pub fn adaptation_matrix(&self) -> Option<&DMatrix<f64>> {
        self.adaptation.as_ref()
    }

    /// Checks that the scheme can run with node dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<(), SchemeError> {
        if let Some(g) = &self.gamma {
            if g.dim() != dim {
                return Err(SchemeError::Dimension { expected: dim, got: g.dim() });
            }
        }
        if let Some(g) = &self.nonlinearity {
            if !g.supports_dim(dim) {
                return Err(config_err("nonlinearity component count does not match node dimension"));
            }
        }
        Ok(())
    }

    /// Verifies the time-dependent hypotheses at `t = 0, h, 2h, …, T`:
    /// a shared left eigenvector and A1 structure for every time-varying kind,
    /// symmetry for `LinearDominated`/`NonlinearTimeVarying`, `λ₂(t)` below the
    /// declared bound for `LinearTimeVarying`, and `âᵢⱼ ≥ aᵢⱼ(t)` for
    /// `LinearDominated`.
    pub fn check_horizon(&self, t_end: f64, step: f64) -> Result<(), SchemeError> {
        let DynamicsMatrix::TimeVarying(tv) = &self.dynamics else {
            return Ok(());
        };
        if !(step > 0.0 && t_end >= 0.0) {
            return Err(config_err("horizon check needs a positive step"));
        }
        let steps = libm::ceil(t_end / step) as usize;
        let times = move |stride: usize| (0..=steps).step_by(stride).map(move |k| k as f64 * step);
        // Structural checks on at most ~2000 samples, eigenvalue checks on ~200.
        let symmetric = matches!(
            self.kind,
            SchemeKind::LinearDominated | SchemeKind::NonlinearTimeVarying
        );
        tv.check_samples(times((steps / 2000).max(1)), symmetric)?;
        if self.kind == SchemeKind::LinearTimeVarying {
            for t in times((steps / 200).max(1)) {
                let l2 = tv.lambda2_at(t)?;
                if l2 > tv.lambda_bound() + crate::coupling::SPECTRAL_TOL * libm::fabs(l2).max(1.0) {
                    return Err(SchemeError::Config(alloc::format!(
                        "lambda2(t) = {l2} exceeds the declared bound {} at t = {t}",
                        tv.lambda_bound()
                    )));
                }
            }
        }
        if let (SchemeKind::LinearDominated, Some(hat)) = (self.kind, &self.adaptation) {
            for t in times(1) {
                check_domination(hat, &tv.entries_at(t), t)?;
            }
        }
        Ok(())
    }

    fn coupling_at(&self, t: f64) -> (Cow<'_, DMatrix<f64>>, Cow<'_, [f64]>) {
        match &self.dynamics {
            DynamicsMatrix::Constant(a) => {
                (Cow::Borrowed(a.entries()), Cow::Borrowed(&self.dynamics_rows))
            }
            DynamicsMatrix::TimeVarying(tv) => {
                let a = tv.entries_at(t);
                let rows = residual_row_sums(&a);
                (Cow::Owned(a), Cow::Owned(rows))
            }
        }
    }

    fn gamma_or_identity(&self, dim: usize) -> Cow<'_, [f64]> {
        match &self.gamma {
            Some(g) => Cow::Borrowed(g.diagonal()),
            None => Cow::Owned(vec![1.0; dim]),
        }
    }

    /// Writes the coupling term at `(x, t)` into `out` and returns `ċ`.
    fn coupling_and_rate(&self, x: &[f64], dim: usize, t: f64, out: &mut [f64]) -> f64 {
        let (a, rows) = self.coupling_at(t);
        let half_alpha = 0.5 * self.alpha;
        match self.kind {
            SchemeKind::NonlinearKnown | SchemeKind::NonlinearTimeVarying => {
                let g = self.nonlinearity.as_ref().expect("validated nonlinear scheme");
                let gx = apply_g(g, x, dim);
                linear_unchecked(&a, &rows, &vec![1.0; dim], &gx, out);
                let form = match &self.adaptation {
                    Some(law) => law_form(law, &self.adaptation_rows, x, &gx, dim),
                    None => law_form(&a, &rows, x, &gx, dim),
                };
                -half_alpha * form
            }
            _ => {
                let gamma = self.gamma_or_identity(dim);
                linear_unchecked(&a, &rows, &gamma, x, out);
                let form = match &self.adaptation {
                    Some(law) => law_form(law, &self.adaptation_rows, x, x, dim),
                    None => xi_law(self.xi().as_slice(), &a, &gamma, x, dim),
                };
                -half_alpha * form
            }
        }
    }

    fn expected_len(&self, dim: usize) -> usize {
        self.n_nodes() * dim
    }

    /// The coupling term alone (`(A⊗Γ)X` or `(A⊗Iₙ)G(X)`) at time `t`.
    pub fn coupling_term(
        &self,
        x: &[f64],
        dim: usize,
        t: f64,
        out: &mut [f64],
    ) -> Result<(), SchemeError> {
        self.check_dim(dim)?;
        check_len(x.len(), self.expected_len(dim))?;
        check_len(out.len(), x.len())?;
        self.coupling_and_rate(x, dim, t, out);
        Ok(())
    }

    /// `ċ` at `(x, t)`.
    pub fn adaptation_rate(&self, x: &[f64], dim: usize, t: f64) -> Result<f64, SchemeError> {
        self.check_dim(dim)?;
        check_len(x.len(), self.expected_len(dim))?;
        let mut scratch = vec![0.0; x.len()];
        Ok(self.coupling_and_rate(x, dim, t, &mut scratch))
    }

    /// Derivative of the flat augmented vector `[X, c]`; lengths are assumed
    /// checked by the caller.
    pub(crate) fn rhs_flat<F: NodeDynamics + ?Sized>(
        &self,
        model: &F,
        t: f64,
        y: &[f64],
        dy: &mut [f64],
        scratch: &mut [f64],
    ) {
        let dim = model.dim();
        let len = y.len() - 1;
        let (x, c) = (&y[..len], y[len]);
        let c_dot = self.coupling_and_rate(x, dim, t, scratch);
        drift_unchecked(model, x, t, &mut dy[..len]);
        for (d, s) in dy[..len].iter_mut().zip(scratch.iter()) {
            *d += c * s;
        }
        dy[len] = c_dot;
    }

    /// `(Ẋ, ċ) = (F(X) + c·coupling, adaptation law)` at `state` and `t`.
    pub fn augmented_rhs<F: NodeDynamics + ?Sized>(
        &self,
        model: &F,
        state: &AugmentedState,
        t: f64,
    ) -> Result<AugmentedState, SchemeError> {
        let dim = model.dim();
        self.check_dim(dim)?;
        check_len(state.x.len(), self.expected_len(dim))?;
        let y = state.to_flat();
        let mut dy = vec![0.0; y.len()];
        let mut scratch = vec![0.0; state.x.len()];
        self.rhs_flat(model, t, &y, &mut dy, &mut scratch);
        Ok(AugmentedState::from_flat(&dy))
    }

    /// `V = ½Xᵀ(U⊗Iₙ)X + (1/α)(c_ref − c)²`.
    ///
    /// With `α = 0` the second term is infinite unless `c = c_ref`.
    pub fn lyapunov_value(
        &self,
        state: &AugmentedState,
        dim: usize,
        c_ref: f64,
    ) -> Result<f64, SchemeError> {
        check_len(state.x.len(), self.expected_len(dim))?;
        let quad = self.projection.quadratic_form(&state.x, dim)?;
        Ok(lyapunov_from_parts(quad, state.c, self.alpha, c_ref))
    }
}

/// `½q + (1/α)(c_ref − c)²` from a precomputed `q = Xᵀ(U⊗Iₙ)X`.
pub fn lyapunov_from_parts(quad: f64, c: f64, alpha: f64, c_ref: f64) -> f64 {
    let gap = c_ref - c;
    let strength = if gap == 0.0 {
        0.0
    } else if alpha == 0.0 {
        f64::INFINITY
    } else {
        gap * gap / alpha
    };
    0.5 * quad + strength
}

fn check_domination(hat: &DMatrix<f64>, a: &DMatrix<f64>, t: f64) -> Result<(), SchemeError> {
    let n = hat.nrows();
    if a.nrows() != n {
        return Err(SchemeError::Dimension { expected: n, got: a.nrows() });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && hat[(i, j)] < a[(i, j)] {
                return Err(SchemeError::NotDominated { t, row: i, col: j });
            }
        }
    }
    Ok(())
}
