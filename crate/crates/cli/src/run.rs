//! Executing experiments and sweeps.

use adaptsync_core::{integrate, summarize, IntegrateError, SyncReport, Trajectory};
use rayon::prelude::*;

use crate::config::{ConfigError, Experiment};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error at {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Integrate(IntegrateError),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub alpha: f64,
    pub c_ref: f64,
    pub trajectory: Trajectory,
    pub report: SyncReport,
    /// Last finite time when the state blew up; the trajectory is then the prefix.
    pub diverged_at: Option<f64>,
}

impl RunResult {
    pub fn synchronized(&self) -> bool {
        self.diverged_at.is_none() && self.report.synchronized
    }
}

pub fn run_experiment(experiment: &Experiment) -> Result<RunResult, RunError> {
    let prepared = experiment.prepare()?;
    let (mut trajectory, diverged_at) =
        match integrate(&prepared.scheme, &prepared.model, &prepared.x0, &prepared.integrator) {
            Ok(t) => (t, None),
            Err(IntegrateError::Diverged { t, prefix }) => (*prefix, Some(t)),
            Err(e) => return Err(RunError::Integrate(e)),
        };
    let report = summarize(&trajectory, &prepared.criteria);
    let c_ref = experiment.c_ref.unwrap_or(2.0 * report.c_final);
    trajectory.attach_lyapunov(prepared.scheme.alpha(), c_ref);
    Ok(RunResult {
        name: experiment.name.clone(),
        alpha: experiment.alpha,
        c_ref,
        trajectory,
        report,
        diverged_at,
    })
}

#[derive(Debug)]
pub struct SweepRow {
    pub name: String,
    pub alpha: f64,
    pub outcome: Result<RunResult, String>,
}

/// One run per `α`, in parallel. Rows come back sorted by `α` (ties keep the
/// order given), whatever order the runs finish in.
pub fn sweep(experiment: &Experiment, alphas: &[f64]) -> Vec<SweepRow> {
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|a, b| alphas[*a].total_cmp(&alphas[*b]));
    order
        .par_iter()
        .map(|k| {
            let alpha = alphas[*k];
            let mut e = experiment.clone();
            e.alpha = alpha;
            let outcome = run_experiment(&e).map_err(|err| err.to_string());
            SweepRow { name: experiment.name.clone(), alpha, outcome }
        })
        .collect()
}
