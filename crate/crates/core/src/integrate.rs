//! Fixed-step integration of the augmented system and trajectory recording.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::sync_error;
use crate::dynamics::{lyapunov_from_parts, AugmentedState, Scheme, SchemeError};
use crate::oscillators::NodeDynamics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_end: f64,
    /// Record every `record_stride`-th step (the final step is always recorded).
    pub record_stride: usize,
    pub method: Method,
    /// Abort once `‖X‖∞` exceeds this bound.
    pub divergence_guard: f64,
    /// Keep full `X` snapshots at recorded steps.
    pub record_states: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 0.005,
            t_end: 50.0,
            record_stride: 20,
            method: Method::Rk4,
            divergence_guard: 1e6,
            record_states: false,
        }
    }
}

impl IntegratorConfig {
    /// Number of steps; `step · n_steps` is within one step of `t_end`.
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_end / self.step) as usize
    }

    fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(IntegrateError::Config("step must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(IntegrateError::Config("t_end must be positive"));
        }
        if self.record_stride == 0 {
            return Err(IntegrateError::Config("record_stride must be at least 1"));
        }
        if !(self.divergence_guard > 0.0) {
            return Err(IntegrateError::Config("divergence guard must be positive"));
        }
        Ok(())
    }
}

/// Sampled time series of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub c_series: Vec<f64>,
    /// Synchronization error `E(t)`.
    pub e_series: Vec<f64>,
    /// `Xᵀ(U⊗Iₙ)X` at each sample; combined with `c` it yields `V`.
    pub u_series: Vec<f64>,
    /// Lyapunov values, once a reference strength is chosen.
    pub v_series: Option<Vec<f64>>,
    pub snapshots: Option<Vec<Vec<f64>>>,
    pub final_state: AugmentedState,
    /// Set on the prefix returned with a divergence error.
    pub diverged: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Fills `v_series` with `½Xᵀ(U⊗Iₙ)X + (1/α)(c_ref − c)²`.
    pub fn attach_lyapunov(&mut self, alpha: f64, c_ref: f64) {
        self.v_series = Some(
            self.u_series
                .iter()
                .zip(&self.c_series)
                .map(|(q, c)| lyapunov_from_parts(*q, *c, alpha, c_ref))
                .collect(),
        );
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("initial state is not finite")]
    NonFiniteInitial,
    #[error("state diverged after t = {t}")]
    Diverged {
        /// Last time at which the state was finite and within the guard.
        t: f64,
        prefix: Box<Trajectory>,
    },
}

/// Classical four-stage Runge–Kutta stepper with reusable buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    /// Advances `y` from `t` to `t + h` in place.
    pub fn step<F>(&mut self, mut rhs: F, t: f64, y: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let half = 0.5 * h;
        rhs(t, y, &mut self.k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        rhs(t + half, &self.tmp, &mut self.k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        rhs(t + half, &self.tmp, &mut self.k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        rhs(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// One RK4 step of `ẏ = rhs(t, y)`, returning the new state.
pub fn step_rk4<F>(rhs: F, y: &[f64], t: f64, h: f64) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = y.to_vec();
    Rk4::new(y.len()).step(rhs, t, &mut out, h);
    out
}

/// One explicit Euler step of `ẏ = rhs(t, y)`, returning the new state.
pub fn step_euler<F>(mut rhs: F, y: &[f64], t: f64, h: f64) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut k = vec![0.0; y.len()];
    rhs(t, y, &mut k);
    y.iter().zip(&k).map(|(a, b)| a + h * b).collect()
}

struct Recorder {
    traj: Trajectory,
    dim: usize,
    record_states: bool,
}

impl Recorder {
    fn push(&mut self, scheme: &Scheme, t: f64, y: &[f64]) {
        let len = y.len() - 1;
        let x = &y[..len];
        self.traj.times.push(t);
        self.traj.c_series.push(y[len]);
        self.traj.e_series.push(sync_error(x, self.dim));
        let q = scheme.projection().quadratic_form(x, self.dim).unwrap_or(f64::NAN);
        self.traj.u_series.push(q);
        if self.record_states {
            self.traj.snapshots.get_or_insert_with(Vec::new).push(x.to_vec());
        }
        self.traj.final_state = AugmentedState::from_flat(y);
    }
}

fn within_guard(y: &[f64], guard: f64) -> bool {
    y[..y.len() - 1].iter().all(|v| v.is_finite() && libm::fabs(*v) <= guard)
        && y[y.len() - 1].is_finite()
}

/// Integrates from `x0` with `c(0) = 0`.
pub fn integrate<F: NodeDynamics + ?Sized>(
    scheme: &Scheme,
    model: &F,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    integrate_from(scheme, model, &AugmentedState::new(x0.to_vec()), config)
}

/// Integrates from an arbitrary augmented state.
///
/// Records `(t, c, E, XᵀUX)` at `t = 0` and every `record_stride` steps, and
/// always at the final step. Time-dependent hypotheses of the scheme are
/// checked over the horizon before the first step.
pub fn integrate_from<F: NodeDynamics + ?Sized>(
    scheme: &Scheme,
    model: &F,
    initial: &AugmentedState,
    config: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    config.validate()?;
    let dim = model.dim();
    scheme.check_dim(dim)?;
    let expected = scheme.n_nodes() * dim;
    if initial.x.len() != expected {
        return Err(SchemeError::Dimension { expected, got: initial.x.len() }.into());
    }
    if !within_guard(&initial.to_flat(), f64::INFINITY) {
        return Err(IntegrateError::NonFiniteInitial);
    }
    let n_steps = config.n_steps();
    scheme.check_horizon(n_steps as f64 * config.step, config.step)?;

    let mut y = initial.to_flat();
    let mut scratch = vec![0.0; expected];
    let mut rk4 = Rk4::new(y.len());
    let mut euler_k = vec![0.0; y.len()];
    let mut rec = Recorder {
        traj: Trajectory {
            times: Vec::new(),
            c_series: Vec::new(),
            e_series: Vec::new(),
            u_series: Vec::new(),
            v_series: None,
            snapshots: None,
            final_state: initial.clone(),
            diverged: false,
        },
        dim,
        record_states: config.record_states,
    };
    rec.push(scheme, 0.0, &y);

    let h = config.step;
    let mut last_good = y.clone();
    for k in 1..=n_steps {
        let t = (k - 1) as f64 * h;
        let mut rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            scheme.rhs_flat(model, t, y, dy, &mut scratch);
        };
        match config.method {
            Method::Rk4 => rk4.step(&mut rhs, t, &mut y, h),
            Method::Euler => {
                rhs(t, &y, &mut euler_k);
                for (v, d) in y.iter_mut().zip(&euler_k) {
                    *v += h * d;
                }
            }
        }
        if !within_guard(&y, config.divergence_guard) {
            let mut prefix = rec.traj;
            prefix.diverged = true;
            prefix.final_state = AugmentedState::from_flat(&last_good);
            return Err(IntegrateError::Diverged { t, prefix: Box::new(prefix) });
        }
        if k % config.record_stride == 0 || k == n_steps {
            rec.push(scheme, k as f64 * h, &y);
        }
        last_good.copy_from_slice(&y);
    }
    Ok(rec.traj)
}
