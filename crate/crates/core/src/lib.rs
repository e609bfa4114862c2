//! Adaptive coupling-strength synchronization of networks of chaotic oscillators.
//!
//! A network of `N` identical nodes `ẋᵢ = f(xᵢ) + c(t) Σⱼ aᵢⱼ Γ (xⱼ − xᵢ)` is driven
//! toward its synchronization manifold by a single scalar gain `c(t)` that grows
//! according to a quadratic-form law such as `ċ = −(α/2) Xᵀ(Ξ⊗Iₙ)(A⊗Γ)X`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized as:
//!
//! - [`coupling`]: outer coupling matrices, their condition classes, the left
//!   eigenvector `ξ`, the projection `U = Ξ − ξξᵀ`, `λ₂`, and network generators.
//! - [`oscillators`]: the Chua, Chen, Lorenz and Rössler node fields and a
//!   sampling probe for the QUAD condition.
//! - [`dynamics`]: the augmented right-hand side `(Ẋ, ċ)` for every adaptive scheme.
//! - [`integrate`]: fixed-step RK4/Euler integration and trajectory recording.
//! - [`analysis`]: synchronization error metrics and run summaries.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod coupling;
pub mod dynamics;
pub mod integrate;
pub mod oscillators;

pub use analysis::{summarize, sync_error, sync_error_pairwise, SyncCriteria, SyncReport};
pub use coupling::{
    CouplingError, CouplingMatrix, ConditionClass, ConditionReport, LeftEigenvector,
    ProjectionMatrix, TimeVaryingCoupling,
};
pub use dynamics::{
    AugmentedState, DynamicsMatrix, InnerCoupling, MonotoneCoupling, Scheme, SchemeConfig,
    SchemeError, SchemeKind,
};
pub use integrate::{integrate, IntegrateError, IntegratorConfig, Method, Trajectory};
pub use oscillators::{initial_state, NodeDynamics, OscillatorModel, QuadCertificate, SampleBox};
