//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Runs without the libtest harness so the lines always reach the console.

use std::sync::OnceLock;
use std::time::Instant;

use adaptsync::presets;
use adaptsync::run::sweep;
use adaptsync_core::coupling::{
    generate_complete, generate_random_symmetric, generate_small_world_weighted, inf_norm,
    left_eigenvector, validate_condition, SmallWorldParams,
};
use adaptsync_core::dynamics::MonotoneMap;
use adaptsync_core::integrate::step_rk4;
use adaptsync_core::{
    initial_state, integrate, summarize, ConditionClass, CouplingMatrix, DynamicsMatrix,
    IntegratorConfig, LeftEigenvector, MonotoneCoupling, OscillatorModel, ProjectionMatrix, Scheme,
    SchemeConfig, SchemeKind, SyncCriteria, TimeVaryingCoupling, Trajectory,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 10;
const GRAPH_SEED: u64 = 1;
const INITIAL_SEED: u64 = 1;
const OSCILLATORS: [&str; 4] = ["chua", "chen", "lorenz", "rossler"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn small_world(symmetric: bool) -> CouplingMatrix {
    generate_small_world_weighted(SmallWorldParams { symmetric, ..SmallWorldParams::new(N) }, GRAPH_SEED)
        .unwrap()
}

fn tanh() -> MonotoneCoupling {
    MonotoneCoupling::uniform(MonotoneMap::TanhAugmented)
}

/// h = 0.005, T = 50, every step recorded.
fn run_config() -> IntegratorConfig {
    IntegratorConfig { step: 0.005, t_end: 50.0, record_stride: 1, ..Default::default() }
}

struct SyncRun {
    traj: Trajectory,
    seconds: f64,
}

fn simulate(scheme: &Scheme, model: &str) -> Result<SyncRun, String> {
    let model = OscillatorModel::from_name(model).unwrap();
    let x0 = initial_state(&model, scheme.n_nodes(), 0.2, INITIAL_SEED);
    let start = Instant::now();
    let traj = integrate(scheme, &model, &x0, &run_config()).map_err(|e| e.to_string())?;
    Ok(SyncRun { traj, seconds: start.elapsed().as_secs_f64() })
}

fn worst_c_drop(traj: &Trajectory) -> f64 {
    traj.c_series.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}

/// The four-part pass condition shared by the synchronization criteria.
fn judge(label: &str, run: Result<SyncRun, String>, time_limit: Option<f64>) -> (bool, String) {
    let run = match run {
        Ok(r) => r,
        Err(e) => return (false, format!("{label}: {e}")),
    };
    let report = summarize(&run.traj, &SyncCriteria::default());
    let drop = worst_c_drop(&run.traj);
    let fast = time_limit.is_none_or(|limit| run.seconds < limit);
    let pass = report.e_final < 1e-3
        && report.e_final < 1e-3 * report.e_initial
        && drop <= 1e-9
        && report.c_plateau_delta < 1e-2
        && fast;
    let detail = format!(
        "{label}: E(0)={:.3e} E(T)={:.3e} c(T)={:.4} max c drop={:.1e} plateau={:.1e} {:.1}s",
        report.e_initial, report.e_final, report.c_final, drop, report.c_plateau_delta, run.seconds
    );
    (pass, detail)
}

fn combine(parts: Vec<(bool, String)>) -> Outcome {
    let pass = parts.iter().all(|(p, _)| *p);
    let detail = parts
        .into_iter()
        .map(|(p, d)| format!("\n      {} {d}", if p { "ok  " } else { "FAIL" }))
        .collect::<String>();
    outcome(pass, detail)
}

fn linear_known_scheme() -> Scheme {
    Scheme::new(SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::Constant(small_world(false))))
        .unwrap()
}

static CHUA_LINEAR: OnceLock<Result<SyncRun, String>> = OnceLock::new();

fn chua_linear() -> &'static Result<SyncRun, String> {
    CHUA_LINEAR.get_or_init(|| simulate(&linear_known_scheme(), "chua"))
}

// 1. Both sides of the projection identity.
fn bilinear_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=20);
        let dim = rng.random_range(1..=4);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let x: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let xi = LeftEigenvector::from_weights(w).unwrap();
        let lhs = ProjectionMatrix::new(&xi).bilinear_form(&x, &y, dim).unwrap();
        let s = xi.as_slice();
        let mut rhs = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d: f64 = (0..dim)
                    .map(|k| (x[i * dim + k] - x[j * dim + k]) * (y[i * dim + k] - y[j * dim + k]))
                    .sum();
                rhs += 0.5 * s[i] * s[j] * d;
            }
        }
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-10 && secs < 5.0, format!("worst relative gap {worst:.2e}, {secs:.2}s"))
}

fn random_irreducible(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, (i + 1) % n)] = rng.random_range(0.05..1.0);
        for j in 0..n {
            if i != j && rng.random_bool(0.25) {
                a[(i, j)] = rng.random_range(0.0..2.0);
            }
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|j| *j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = -off;
    }
    a
}

/// Eigenvalue of `Aᵀ` nearest zero from the real Schur form, then its vector
/// by shifted inverse iteration.
fn eigen_oracle(a: &DMatrix<f64>) -> DVector<f64> {
    let at = a.transpose();
    let n = at.nrows();
    let lambda0 = at
        .complex_eigenvalues()
        .iter()
        .min_by(|p, q| p.norm().total_cmp(&q.norm()))
        .map(|z| z.re)
        .unwrap();
    let shift = lambda0 - 1e-9 * inf_norm(a).max(1.0);
    let lu = (&at - DMatrix::identity(n, n) * shift).lu();
    let mut v = DVector::from_element(n, 1.0);
    for _ in 0..4 {
        v = lu.solve(&v).unwrap();
        v /= v.amax();
    }
    let total = v.sum();
    v / total
}

// 2. Left null vector against an eigendecomposition oracle.
fn left_eigenvector_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_gap, mut worst_residual): (f64, f64) = (0.0, 0.0);
    let mut class_ok = true;
    for _ in 0..200 {
        let n = rng.random_range(2..=30);
        let a = random_irreducible(n, &mut rng);
        class_ok &= validate_condition(&a).unwrap().class != ConditionClass::Invalid;
        let xi = left_eigenvector(&a).unwrap();
        let oracle = eigen_oracle(&a);
        for i in 0..n {
            worst_gap = worst_gap.max((xi.as_slice()[i] - oracle[i]).abs());
        }
        worst_residual = worst_residual.max(xi.residual(&a) / inf_norm(&a));
    }
    outcome(
        class_ok && worst_gap <= 1e-8 && worst_residual <= 1e-10,
        format!("max |ξ − oracle| {worst_gap:.2e}, max residual/‖A‖∞ {worst_residual:.2e}"),
    )
}

// 3. Closed forms of the three-node family.
fn triad_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut xi_gap: f64 = 0.0;
    for _ in 0..20 {
        let p = [rng.random_range(0.1..5.0), rng.random_range(0.1..5.0), rng.random_range(0.1..5.0)];
        let tv = TimeVaryingCoupling::circulant_triad(p).unwrap();
        let raw: Vec<f64> = p.iter().map(|v| 1.0 / (3.0 * v)).collect();
        let total: f64 = raw.iter().sum();
        for k in 0..3 {
            xi_gap = xi_gap.max((tv.shared_xi().as_slice()[k] - raw[k] / total).abs());
        }
    }
    let tv = TimeVaryingCoupling::circulant_triad([1.0, 1.0, 1.0]).unwrap();
    let bound = -(5.0 - 2f64.sqrt());
    let (mut l2_gap, mut bound_excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for k in 0..100 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 100.0 + 0.01 * k as f64;
        let l2 = tv.lambda2_at(t).unwrap();
        l2_gap = l2_gap.max((l2 + 5.0 + t.sin() + t.cos()).abs());
        bound_excess = bound_excess.max(l2 - bound);
    }
    outcome(
        xi_gap <= 1e-12 && l2_gap <= 1e-9 && bound_excess <= 1e-9,
        format!("ξ gap {xi_gap:.1e}, λ₂ gap {l2_gap:.1e}, max λ₂ − bound {bound_excess:.1e}"),
    )
}

// 4. Known-matrix linear scheme.
fn linear_sync() -> Outcome {
    let mut parts = Vec::new();
    for model in OSCILLATORS {
        let run = if model == "chua" {
            match chua_linear() {
                Ok(r) => Ok(SyncRun { traj: r.traj.clone(), seconds: r.seconds }),
                Err(e) => Err(e.clone()),
            }
        } else {
            simulate(&linear_known_scheme(), model)
        };
        parts.push(judge(model, run, Some(30.0)));
    }
    combine(parts)
}

// 5. Unknown-matrix scheme, global and random adaptation matrices.
fn unknown_sync() -> Outcome {
    let adaptations = [
        ("complete", generate_complete(N).unwrap()),
        ("random A2", generate_random_symmetric(N, 0.3, 2).unwrap()),
    ];
    let mut parts = Vec::new();
    for (tag, tilde) in &adaptations {
        let scheme = Scheme::new(
            SchemeConfig::new(SchemeKind::LinearUnknown, DynamicsMatrix::Constant(small_world(false)))
                .adaptation(tilde.clone()),
        )
        .unwrap();
        for model in OSCILLATORS {
            parts.push(judge(&format!("{model}/{tag}"), simulate(&scheme, model), Some(30.0)));
        }
    }
    combine(parts)
}

// 6. Nonlinear coupling g(u) = u + tanh(u).
fn nonlinear_sync() -> Outcome {
    let scheme = Scheme::new(
        SchemeConfig::new(SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(small_world(true)))
            .nonlinearity(tanh()),
    )
    .unwrap();
    combine(OSCILLATORS.iter().map(|m| judge(m, simulate(&scheme, m), Some(30.0))).collect())
}

// 7. Three Chua circuits under the time-varying family.
fn time_varying_sync() -> Outcome {
    let mut parts = Vec::new();
    for p in [[1.0, 1.0, 1.0], [1.0, 1.0, 2.0]] {
        let tv = TimeVaryingCoupling::circulant_triad(p).unwrap();
        let scheme =
            Scheme::new(SchemeConfig::new(SchemeKind::LinearTimeVarying, DynamicsMatrix::TimeVarying(tv)))
                .unwrap();
        let label = format!("p={p:?}");
        match simulate(&scheme, "chua") {
            Ok(run) => {
                let r = summarize(&run.traj, &SyncCriteria::default());
                let rises = r.c_final > run.traj.c_series[0];
                parts.push((
                    r.e_final < 1e-3 && r.c_plateau_delta < 1e-2 && rises,
                    format!("{label}: E(T)={:.3e} c(T)={:.4} plateau={:.1e}", r.e_final, r.c_final, r.c_plateau_delta),
                ));
            }
            Err(e) => parts.push((false, format!("{label}: {e}"))),
        }
    }
    combine(parts)
}

fn schemes_by_kind() -> Vec<Scheme> {
    let asym = small_world(false);
    let sym = small_world(true);
    let hat = CouplingMatrix::new(sym.entries() * 1.5).unwrap();
    let configs = vec![
        SchemeConfig::new(SchemeKind::LinearKnown, DynamicsMatrix::Constant(asym.clone())),
        SchemeConfig::new(SchemeKind::LinearUnknown, DynamicsMatrix::Constant(asym.clone()))
            .adaptation(generate_complete(N).unwrap()),
        SchemeConfig::new(SchemeKind::LinearUnknown, DynamicsMatrix::Constant(asym.clone()))
            .adaptation(generate_random_symmetric(N, 0.3, 2).unwrap()),
        SchemeConfig::new(
            SchemeKind::LinearTimeVarying,
            DynamicsMatrix::TimeVarying(TimeVaryingCoupling::modulated(&asym, 0.5, 1.3).unwrap()),
        ),
        SchemeConfig::new(
            SchemeKind::LinearTimeVarying,
            DynamicsMatrix::TimeVarying(TimeVaryingCoupling::circulant_triad([1.0, 1.0, 2.0]).unwrap()),
        ),
        SchemeConfig::new(SchemeKind::LinearDominated, DynamicsMatrix::Constant(sym.clone())).adaptation(hat),
        SchemeConfig::new(SchemeKind::NonlinearKnown, DynamicsMatrix::Constant(sym.clone())).nonlinearity(tanh()),
        SchemeConfig::new(
            SchemeKind::NonlinearTimeVarying,
            DynamicsMatrix::TimeVarying(TimeVaryingCoupling::modulated(&sym, 0.3, 2.0).unwrap()),
        )
        .nonlinearity(tanh()),
    ];
    configs.into_iter().map(|c| Scheme::new(c).unwrap()).collect()
}

// 8. ċ ≥ 0 on random states.
fn adaptation_sign() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = f64::INFINITY;
    let mut kinds = std::collections::BTreeSet::new();
    for scheme in schemes_by_kind() {
        kinds.insert(scheme.kind().name());
        let len = 3 * scheme.n_nodes();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..len).map(|_| rng.random_range(-30.0..30.0)).collect();
            let t = rng.random_range(0.0..100.0);
            worst = worst.min(scheme.adaptation_rate(&x, 3, t).unwrap());
        }
    }
    outcome(
        worst >= -1e-12 && kinds.len() == SchemeKind::ALL.len(),
        format!("{} kinds, min rate {worst:.3e}", kinds.len()),
    )
}

// 9. Lyapunov function along the chua run from #4.
fn lyapunov_monotone() -> Outcome {
    let run = match chua_linear() {
        Ok(r) => r,
        Err(e) => return outcome(false, e.clone()),
    };
    let mut traj = run.traj.clone();
    let c_ref = 2.0 * summarize(&traj, &SyncCriteria::default()).c_final;
    traj.attach_lyapunov(1.0, c_ref);
    let v = traj.v_series.as_ref().unwrap();
    let (mut worst, mut at, mut violations) = (f64::NEG_INFINITY, 0.0, 0usize);
    for (k, w) in v.windows(2).enumerate() {
        let rise = w[1] - w[0];
        if rise > 1e-6 {
            violations += 1;
        }
        if rise > worst {
            worst = rise;
            at = traj.times[k + 1];
        }
    }
    outcome(
        violations == 0,
        format!(
            "c_ref = {c_ref:.4}, largest rise {worst:.3e} at t = {at:.3}, {violations} of {} steps above 1e-6",
            v.len() - 1
        ),
    )
}

// 10. RK4 order on y' = −y.
fn rk4_order() -> Outcome {
    let err = |steps: usize| {
        let h = 1.0 / steps as f64;
        let mut y = vec![1.0];
        for k in 0..steps {
            y = step_rk4(|_, y: &[f64], d: &mut [f64]| d[0] = -y[0], &y, k as f64 * h, h);
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let ratios: Vec<f64> = [10, 20, 40].iter().map(|s| err(*s) / err(2 * s)).collect();
    let pass = ratios.iter().all(|r| (12.0..=20.0).contains(r));
    outcome(pass, format!("error ratios {:.3?} for h = 0.1, 0.05, 0.025", ratios))
}

// 11. α sweep on the chua preset.
fn alpha_sweep() -> Outcome {
    let mut experiment = presets::preset("fig1-linear-chua", Some(N)).unwrap().remove(0);
    // Adaptation slows as 1/α, so the horizon is the preset's 50 scaled by 1/α_min.
    experiment.integrator.t_end = 500.0;
    let rows = sweep(&experiment, &[0.1, 1.0, 10.0]);
    let mut parts = Vec::new();
    for row in rows {
        match row.outcome {
            Ok(run) => parts.push((
                run.synchronized(),
                format!(
                    "α={}: synchronized={} c(T)={:.4} t_sync={:.2} E(T)={:.2e}",
                    row.alpha,
                    run.synchronized(),
                    run.report.c_final,
                    run.report.time_to_sync,
                    run.report.e_final
                ),
            )),
            Err(e) => parts.push((false, format!("α={}: {e}", row.alpha))),
        }
    }
    let produced = parts.len() == 3;
    let mut o = combine(parts);
    o.pass &= produced;
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("projection identity", bilinear_identity),
        ("left eigenvector vs eigen oracle", left_eigenvector_oracle),
        ("three-node closed forms", triad_closed_forms),
        ("linear scheme synchronizes", linear_sync),
        ("unknown-matrix scheme synchronizes", unknown_sync),
        ("nonlinear scheme synchronizes", nonlinear_sync),
        ("time-varying scheme synchronizes", time_varying_sync),
        ("adaptation rate is nonnegative", adaptation_sign),
        ("Lyapunov series non-increasing, c_ref = 2c(T)", lyapunov_monotone),
        ("RK4 convergence ratio", rk4_order),
        ("alpha sweep on the chua preset", alpha_sweep),
    ];
    let mut failed = Vec::new();
    for (k, (title, check)) in criteria.iter().enumerate() {
        let id = k + 1;
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance #{id:<2} {verdict} {title} ({:.2}s): {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: {} of 11 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
