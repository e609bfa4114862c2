//! Synchronization diagnostics.

use crate::coupling::LeftEigenvector;
use crate::integrate::Trajectory;

/// `E = sqrt(Σ_{j≥2} ‖xⱼ − x₁‖² / (N − 1))`, the RMS deviation of nodes
/// `2..N` from node 1. Zero for fewer than two nodes.
pub fn sync_error(x: &[f64], dim: usize) -> f64 {
    let nodes = x.len() / dim;
    if nodes < 2 {
        return 0.0;
    }
    let first = &x[..dim];
    let total: f64 = x[dim..]
        .chunks_exact(dim)
        .map(|node| node.iter().zip(first).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    libm::sqrt(total / (nodes - 1) as f64)
}

/// `Xᵀ(U⊗Iₙ)X` through the pairwise sum `½ Σᵢⱼ ξᵢξⱼ ‖xᵢ − xⱼ‖²`.
pub fn sync_error_pairwise(x: &[f64], xi: &LeftEigenvector, dim: usize) -> f64 {
    let w = xi.as_slice();
    let mut total = 0.0;
    for i in 0..w.len() {
        let xi_block = &x[i * dim..(i + 1) * dim];
        for j in i + 1..w.len() {
            let d2: f64 = xi_block
                .iter()
                .zip(&x[j * dim..(j + 1) * dim])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            total += w[i] * w[j] * d2;
        }
    }
    // Each unordered pair appears twice in the full double sum.
    total
}

/// Thresholds deciding whether a run synchronized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncCriteria {
    /// `E(T)` must be below this.
    pub threshold: f64,
    /// ... and at most `relative · E(0)`.
    pub relative: f64,
    /// Look-back for the plateau of `c`.
    pub window: f64,
    pub plateau_tol: f64,
}

impl Default for SyncCriteria {
    fn default() -> Self {
        Self { threshold: 1e-3, relative: 1e-3, window: 10.0, plateau_tol: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub e_initial: f64,
    pub e_final: f64,
    pub c_final: f64,
    pub t_final: f64,
    pub synchronized: bool,
    /// First sample time after which `E` stays below the threshold;
    /// `f64::INFINITY` if that never happens.
    pub time_to_sync: f64,
    /// `|c(T) − c(T − window)|`.
    pub c_plateau_delta: f64,
    pub plateaued: bool,
}

/// Value of `series` at time `t`, linearly interpolated between samples and
/// clamped to the first sample.
fn value_at(times: &[f64], series: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return series[0];
    }
    let k = times.partition_point(|s| *s <= t);
    if k >= times.len() {
        return series[series.len() - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let (v0, v1) = (series[k - 1], series[k]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Summarizes a trajectory. Panics on an empty trajectory.
pub fn summarize(traj: &Trajectory, criteria: &SyncCriteria) -> SyncReport {
    assert!(!traj.is_empty(), "cannot summarize an empty trajectory");
    let e = &traj.e_series;
    let e_initial = e[0];
    let e_final = e[e.len() - 1];
    let t_final = traj.final_time();
    let c_final = traj.c_series[traj.c_series.len() - 1];

    let tail_start = e.iter().rposition(|v| !(*v < criteria.threshold)).map_or(0, |k| k + 1);
    let time_to_sync = traj.times.get(tail_start).copied().unwrap_or(f64::INFINITY);

    let c_back = value_at(&traj.times, &traj.c_series, t_final - criteria.window);
    let c_plateau_delta = libm::fabs(c_final - c_back);

    let synchronized = !traj.diverged
        && e_final < criteria.threshold
        && e_final <= criteria.relative * e_initial;
    SyncReport {
        e_initial,
        e_final,
        c_final,
        t_final,
        synchronized,
        time_to_sync,
        c_plateau_delta,
        plateaued: c_plateau_delta < criteria.plateau_tol,
    }
}
