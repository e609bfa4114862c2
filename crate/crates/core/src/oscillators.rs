//! Node vector fields and a sampling probe for the QUAD condition.
//!
//! All four chaotic models are autonomous and globally defined. A field `f`
//! is in `QUAD(Δ, ϖ)` when
//! `(x−y)ᵀ[f(x)−f(y)] − (x−y)ᵀΔ(x−y) ≤ −ϖ(x−y)ᵀ(x−y)` for all `x, y`;
//! [`quad_probe`] evaluates the left side minus the right side on random
//! pairs, so a nonpositive maximum is consistent with the condition.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An `n`-dimensional node field `ẋ = f(x, t)`.
pub trait NodeDynamics {
    fn dim(&self) -> usize;

    /// Writes `f(x, t)` into `dx`. Both slices have length [`NodeDynamics::dim`].
    fn field(&self, x: &[f64], t: f64, dx: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (expected chua, chen, lorenz, rossler or linear)")]
    UnknownModel(String),
    #[error("model `{model}` has no parameter `{key}`")]
    UnknownParameter { model: &'static str, key: String },
    #[error("parameter `{0}` must be finite")]
    NonFinite(String),
    #[error("sample box is empty or has mismatched bounds")]
    EmptyBox,
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("need at least one sample")]
    NoSamples,
}

/// Chua's piecewise-linear nonlinearity `h(u) = (2/7)u − (3/14)(|u+1| − |u−1|)`.
pub fn chua_nonlinearity(u: f64) -> f64 {
    2.0 / 7.0 * u - 3.0 / 14.0 * (libm::fabs(u + 1.0) - libm::fabs(u - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChuaParams {
    pub m: f64,
    pub n: f64,
}

impl Default for ChuaParams {
    fn default() -> Self {
        // n = 14 2/7
        Self { m: 9.0, n: 100.0 / 7.0 }
    }
}

impl ChuaParams {
    pub fn field(&self, x: [f64; 3]) -> [f64; 3] {
        [self.m * (x[1] - chua_nonlinearity(x[0])), x[0] - x[1] + x[2], -self.n * x[1]]
    }

    /// Global Lipschitz constant of the field in the Euclidean norm.
    ///
    /// The field is continuous and piecewise linear with Jacobians
    /// `[[−m·s, m, 0], [1, −1, 1], [0, −n, 0]]`, `s ∈ {2/7, −1/7}`; the larger
    /// Frobenius norm of the two bounds the spectral norm of both.
    pub fn lipschitz_bound(&self) -> f64 {
        [2.0 / 7.0, -1.0 / 7.0]
            .iter()
            .map(|s| {
                let ms = self.m * s;
                libm::sqrt(ms * ms + self.m * self.m + 3.0 + self.n * self.n)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChenParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for ChenParams {
    fn default() -> Self {
        Self { a: 35.0, b: 3.0, c: 28.0 }
    }
}

impl ChenParams {
    pub fn field(&self, x: [f64; 3]) -> [f64; 3] {
        let Self { a, b, c } = *self;
        [a * (x[1] - x[0]), (c - a) * x[0] - x[0] * x[2] + c * x[1], x[0] * x[1] - b * x[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 }
    }
}

impl LorenzParams {
    pub fn field(&self, x: [f64; 3]) -> [f64; 3] {
        let Self { sigma, rho, beta } = *self;
        [sigma * (x[1] - x[0]), rho * x[0] - x[0] * x[2] - x[1], x[0] * x[1] - beta * x[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosslerParams {
    pub a: f64,
    pub b: f64,
    pub mu: f64,
}

impl Default for RosslerParams {
    fn default() -> Self {
        Self { a: 0.2, b: 0.2, mu: 5.7 }
    }
}

impl RosslerParams {
    pub fn field(&self, x: [f64; 3]) -> [f64; 3] {
        [-x[1] - x[2], x[0] + self.a * x[1], self.b + x[2] * (x[0] - self.mu)]
    }
}

pub fn chua_field(x: [f64; 3]) -> [f64; 3] {
    ChuaParams::default().field(x)
}

pub fn chen_field(x: [f64; 3]) -> [f64; 3] {
    ChenParams::default().field(x)
}

pub fn lorenz_field(x: [f64; 3]) -> [f64; 3] {
    LorenzParams::default().field(x)
}

pub fn rossler_field(x: [f64; 3]) -> [f64; 3] {
    RosslerParams::default().field(x)
}

/// The node models selectable by name.
#[derive(Debug, Clone, PartialEq)]
pub enum OscillatorModel {
    Chua(ChuaParams),
    Chen(ChenParams),
    Lorenz(LorenzParams),
    Rossler(RosslerParams),
    /// `f(x) = rate·x` in `dim` dimensions; a reference field for probes and tests.
    Linear { dim: usize, rate: f64 },
}

impl OscillatorModel {
    pub const NAMES: [&'static str; 5] = ["chua", "chen", "lorenz", "rossler", "linear"];

    pub fn from_name(name: &str) -> Result<Self, ModelError> {
        Ok(match name {
            "chua" => Self::Chua(ChuaParams::default()),
            "chen" => Self::Chen(ChenParams::default()),
            "lorenz" => Self::Lorenz(LorenzParams::default()),
            "rossler" => Self::Rossler(RosslerParams::default()),
            "linear" => Self::Linear { dim: 3, rate: -1.0 },
            other => return Err(ModelError::UnknownModel(other.into())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Chua(_) => "chua",
            Self::Chen(_) => "chen",
            Self::Lorenz(_) => "lorenz",
            Self::Rossler(_) => "rossler",
            Self::Linear { .. } => "linear",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Self::Chua(p) => vec![("m", p.m), ("n", p.n)],
            Self::Chen(p) => vec![("a", p.a), ("b", p.b), ("c", p.c)],
            Self::Lorenz(p) => vec![("sigma", p.sigma), ("rho", p.rho), ("beta", p.beta)],
            Self::Rossler(p) => vec![("a", p.a), ("b", p.b), ("mu", p.mu)],
            Self::Linear { dim, rate } => vec![("dim", *dim as f64), ("rate", *rate)],
        }
    }

    /// Overrides one named parameter.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<(), ModelError> {
        if !value.is_finite() {
            return Err(ModelError::NonFinite(key.into()));
        }
        let name = self.name();
        let slot = match (self, key) {
            (Self::Chua(p), "m") => &mut p.m,
            (Self::Chua(p), "n") => &mut p.n,
            (Self::Chen(p), "a") => &mut p.a,
            (Self::Chen(p), "b") => &mut p.b,
            (Self::Chen(p), "c") => &mut p.c,
            (Self::Lorenz(p), "sigma") => &mut p.sigma,
            (Self::Lorenz(p), "rho") => &mut p.rho,
            (Self::Lorenz(p), "beta") => &mut p.beta,
            (Self::Rossler(p), "a") => &mut p.a,
            (Self::Rossler(p), "b") => &mut p.b,
            (Self::Rossler(p), "mu") => &mut p.mu,
            (Self::Linear { rate, .. }, "rate") => rate,
            (Self::Linear { dim, .. }, "dim") => {
                if value < 1.0 || libm::trunc(value) != value {
                    return Err(ModelError::NonFinite(key.into()));
                }
                *dim = value as usize;
                return Ok(());
            }
            (_, other) => {
                return Err(ModelError::UnknownParameter { model: name, key: other.into() })
            }
        };
        *slot = value;
        Ok(())
    }

    /// A box covering the model's attractor, used for QUAD sampling and to
    /// scale initial conditions.
    pub fn default_box(&self) -> SampleBox {
        let (lo, hi) = match self {
            Self::Chua(_) => (vec![-5.0; 3], vec![5.0; 3]),
            Self::Chen(_) | Self::Lorenz(_) => (vec![-30.0; 3], vec![30.0; 3]),
            Self::Rossler(_) => (vec![-15.0, -15.0, 0.0], vec![15.0, 15.0, 30.0]),
            Self::Linear { dim, .. } => (vec![-1.0; *dim], vec![1.0; *dim]),
        };
        SampleBox { lo, hi }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.dim()];
        self.field(x, 0.0, &mut dx);
        dx
    }
}

impl NodeDynamics for OscillatorModel {
    fn dim(&self) -> usize {
        match self {
            Self::Linear { dim, .. } => *dim,
            _ => 3,
        }
    }

    fn field(&self, x: &[f64], _t: f64, dx: &mut [f64]) {
        let three = |x: &[f64]| [x[0], x[1], x[2]];
        let out = match self {
            Self::Chua(p) => p.field(three(x)),
            Self::Chen(p) => p.field(three(x)),
            Self::Lorenz(p) => p.field(three(x)),
            Self::Rossler(p) => p.field(three(x)),
            Self::Linear { rate, .. } => {
                for (d, v) in dx.iter_mut().zip(x) {
                    *d = rate * v;
                }
                return;
            }
        };
        dx.copy_from_slice(&out);
    }
}

/// Axis-aligned box `[lo₁, hi₁] × … × [loₙ, hiₙ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, ModelError> {
        if lo.is_empty()
            || lo.len() != hi.len()
            || lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b))
        {
            return Err(ModelError::EmptyBox);
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, ModelError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (b - a)).collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| if a == b { *a } else { rng.random_range(*a..*b) })
            .collect()
    }

    /// The box shrunk about its center by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let (c, h) = (self.center(), self.half_widths());
        Self {
            lo: c.iter().zip(&h).map(|(c, h)| c - factor * h).collect(),
            hi: c.iter().zip(&h).map(|(c, h)| c + factor * h).collect(),
        }
    }
}

/// Default shrink factor of the model box for initial states. Larger boxes
/// start piecewise-linear Chua circuits outside the double-scroll basin.
pub const DEFAULT_INITIAL_SCALE: f64 = 0.2;

/// `n_nodes` i.i.d. node states, uniform in `model.default_box().scaled(scale)`.
pub fn initial_state(model: &OscillatorModel, n_nodes: usize, scale: f64, seed: u64) -> Vec<f64> {
    let region = model.default_box().scaled(scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_nodes).flat_map(|_| region.sample(&mut rng)).collect()
}

/// Result of probing a candidate `(Δ, ϖ)` pair on random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadCertificate {
    /// Diagonal of `Δ`.
    pub delta: Vec<f64>,
    pub varpi: f64,
    pub sample_box: SampleBox,
    pub n_samples: usize,
    /// Largest residual seen; `≤ 0` means the samples are consistent with QUAD.
    pub max_violation: f64,
    /// The `(x, y)` pair attaining `max_violation`.
    pub argmax: (Vec<f64>, Vec<f64>),
}

impl QuadCertificate {
    pub fn holds(&self) -> bool {
        self.max_violation <= 0.0
    }
}

/// `(x−y)ᵀ[f(x)−f(y)] − (x−y)ᵀΔ(x−y) + ϖ(x−y)ᵀ(x−y)`.
///
/// Summed as `Σₖ dₖ·(Δfₖ − δₖdₖ + ϖdₖ)` so that exact cancellations (for
/// instance `f(x) = −x` with `Δ = 0, ϖ = 1`) stay exactly zero.
pub fn quad_residual<F: NodeDynamics + ?Sized>(
    field: &F,
    delta: &[f64],
    varpi: f64,
    x: &[f64],
    y: &[f64],
    t: f64,
) -> f64 {
    let n = field.dim();
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    field.field(x, t, &mut fx);
    field.field(y, t, &mut fy);
    (0..n)
        .map(|k| {
            let d = x[k] - y[k];
            d * ((fx[k] - fy[k]) - delta[k] * d + varpi * d)
        })
        .sum()
}

/// Evaluates the QUAD residual on `n_samples` uniform pairs from `sample_box`.
pub fn quad_probe<F: NodeDynamics + ?Sized>(
    field: &F,
    delta: &[f64],
    varpi: f64,
    sample_box: &SampleBox,
    n_samples: usize,
    seed: u64,
) -> Result<QuadCertificate, ModelError> {
    let n = field.dim();
    if delta.len() != n {
        return Err(ModelError::Dimension { expected: n, got: delta.len() });
    }
    if sample_box.dim() != n {
        return Err(ModelError::Dimension { expected: n, got: sample_box.dim() });
    }
    if n_samples == 0 {
        return Err(ModelError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut argmax = (Vec::new(), Vec::new());
    for _ in 0..n_samples {
        let x = sample_box.sample(&mut rng);
        let y = sample_box.sample(&mut rng);
        let r = quad_residual(field, delta, varpi, &x, &y, 0.0);
        if r > best || argmax.0.is_empty() {
            best = r;
            argmax = (x, y);
        }
    }
    Ok(QuadCertificate {
        delta: delta.to_vec(),
        varpi,
        sample_box: sample_box.clone(),
        n_samples,
        max_violation: best,
        argmax,
    })
}

/// Smallest `d` among `candidates` (tried in ascending order) for which
/// `Δ = d·I` passes [`quad_probe`], together with every probe result.
pub fn quad_grid_search<F: NodeDynamics + ?Sized>(
    field: &F,
    candidates: &[f64],
    varpi: f64,
    sample_box: &SampleBox,
    n_samples: usize,
    seed: u64,
) -> Result<(Option<f64>, Vec<QuadCertificate>), ModelError> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut found = None;
    let mut probes = Vec::with_capacity(sorted.len());
    for d in sorted {
        let cert = quad_probe(field, &vec![d; field.dim()], varpi, sample_box, n_samples, seed)?;
        if found.is_none() && cert.holds() {
            found = Some(d);
        }
        probes.push(cert);
    }
    Ok((found, probes))
}
