use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use super::{
    inf_norm, is_irreducible, is_symmetric, lambda2, structural_violations, CouplingError,
    CouplingMatrix, LeftEigenvector, SPECTRAL_TOL,
};

type Generator = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum Family {
    CirculantTriad { p: [f64; 3] },
    Modulated { base: DMatrix<f64>, amplitude: f64, frequency: f64 },
    Custom(Generator),
}

/// A coupling matrix `A(t)` whose left eigenvector `ξ` is the same for all `t`.
///
/// The declared `lambda_bound` is an upper bound `λ < 0` on the largest
/// nonzero eigenvalue of `ΞA(t) + A(t)ᵀΞ`; [`TimeVaryingCoupling::check_samples`]
/// verifies the structural claims at sampled times.
#[derive(Clone)]
pub struct TimeVaryingCoupling {
    family: Family,
    n_nodes: usize,
    shared_xi: LeftEigenvector,
    lambda_bound: f64,
}

impl fmt::Debug for TimeVaryingCoupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match &self.family {
            Family::CirculantTriad { .. } => "circulant-triad",
            Family::Modulated { .. } => "modulated",
            Family::Custom(_) => "custom",
        };
        f.debug_struct("TimeVaryingCoupling")
            .field("family", &family)
            .field("n_nodes", &self.n_nodes)
            .field("shared_xi", &self.shared_xi)
            .field("lambda_bound", &self.lambda_bound)
            .finish()
    }
}

fn triad_base(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = (libm::sin(t), libm::cos(t));
    let d = -5.0 - s - c;
    [[d, 3.0 + s, 2.0 + c], [2.0 + c, d, 3.0 + s], [3.0 + s, 2.0 + c, d]]
}

impl TimeVaryingCoupling {
    /// Three nodes coupled by `diag(p₁, p₂, p₃)·M(t)`, where `M(t)` is the
    /// circulant matrix with rows `(−5−sin t−cos t, 3+sin t, 2+cos t)` shifted
    /// cyclically. `M(t)` has zero row and column sums, so
    /// `ξ ∝ (1/p₁, 1/p₂, 1/p₃)` for every `t`, and the network is node-balanced
    /// when all `pᵢ` are equal.
    pub fn circulant_triad(p: [f64; 3]) -> Result<Self, CouplingError> {
        if p.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(CouplingError::Parameter("triad weights must be positive"));
        }
        let shared_xi = LeftEigenvector::from_weights(p.iter().map(|v| 1.0 / v).collect())?;
        // ΞA(t) = k·M(t) with k = 1/Σ(1/pⱼ); M + Mᵀ = (5 + sin t + cos t)·L with
        // L having eigenvalues {0, −3, −3}.
        let k = 1.0 / p.iter().map(|v| 1.0 / v).sum::<f64>();
        let lambda_bound = -3.0 * k * (5.0 - core::f64::consts::SQRT_2);
        Ok(Self { family: Family::CirculantTriad { p }, n_nodes: 3, shared_xi, lambda_bound })
    }

    /// `A(t) = (1 + amplitude·sin(frequency·t))·A₀` for a fixed irreducible `A₀`.
    pub fn modulated(
        base: &CouplingMatrix,
        amplitude: f64,
        frequency: f64,
    ) -> Result<Self, CouplingError> {
        if !(0.0..1.0).contains(&amplitude) || !frequency.is_finite() {
            return Err(CouplingError::Parameter("modulation amplitude must lie in [0, 1)"));
        }
        let lambda_bound = (1.0 - amplitude) * base.lambda2()?;
        Ok(Self {
            family: Family::Modulated { base: base.entries().clone(), amplitude, frequency },
            n_nodes: base.n_nodes(),
            shared_xi: base.xi().clone(),
            lambda_bound,
        })
    }

    /// Wraps an arbitrary generator. Its claims are only checked by sampling.
    pub fn custom<F>(
        n_nodes: usize,
        generator: F,
        shared_xi: LeftEigenvector,
        lambda_bound: f64,
    ) -> Result<Self, CouplingError>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if shared_xi.len() != n_nodes {
            return Err(CouplingError::Length { expected: n_nodes, got: shared_xi.len() });
        }
        if lambda_bound >= 0.0 {
            return Err(CouplingError::Parameter("lambda bound must be negative"));
        }
        Ok(Self { family: Family::Custom(Arc::new(generator)), n_nodes, shared_xi, lambda_bound })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn shared_xi(&self) -> &LeftEigenvector {
        &self.shared_xi
    }

    pub fn lambda_bound(&self) -> f64 {
        self.lambda_bound
    }

    /// Raw entries of `A(t)`.
    pub fn entries_at(&self, t: f64) -> DMatrix<f64> {
        match &self.family {
            Family::CirculantTriad { p } => {
                let m = triad_base(t);
                DMatrix::from_fn(3, 3, |i, j| p[i] * m[i][j])
            }
            Family::Modulated { base, amplitude, frequency } => {
                base * (1.0 + amplitude * libm::sin(frequency * t))
            }
            Family::Custom(g) => g(t),
        }
    }

    /// `A(t)` as a fully validated matrix.
    pub fn matrix_at(&self, t: f64) -> Result<CouplingMatrix, CouplingError> {
        CouplingMatrix::new(self.entries_at(t))
    }

    pub fn lambda2_at(&self, t: f64) -> Result<f64, CouplingError> {
        lambda2(&self.entries_at(t), &self.shared_xi)
    }

    /// Checks at every sampled `t` that `A(t)` is row-sum zero with nonnegative
    /// off-diagonals, irreducible, annihilated by the shared `ξ` from the left
    /// and, when `require_symmetric`, symmetric.
    pub fn check_samples<I>(&self, times: I, require_symmetric: bool) -> Result<(), CouplingError>
    where
        I: IntoIterator<Item = f64>,
    {
        for t in times {
            let a = self.entries_at(t);
            if a.nrows() != self.n_nodes || a.ncols() != self.n_nodes {
                return Err(CouplingError::NotSquare { rows: a.nrows(), cols: a.ncols() });
            }
            let violations: Vec<_> = structural_violations(&a);
            if !violations.is_empty() {
                return Err(CouplingError::Invalid(violations));
            }
            if !is_irreducible(&a) {
                return Err(CouplingError::Reducible);
            }
            let residual = self.shared_xi.residual(&a);
            if residual > SPECTRAL_TOL * inf_norm(&a).max(1.0) {
                return Err(CouplingError::SharedXiMismatch { t, residual });
            }
            if require_symmetric && !is_symmetric(&a) {
                return Err(CouplingError::Asymmetric { t });
            }
        }
        Ok(())
    }
}
