//! Bundled experiments, grouped by figure number.
//!
//! Odd figures 1, 3, 5, 7 pair a linear and a nonlinear run for Chua, Chen,
//! Lorenz and Rössler; even figures 2, 4, 6, 8 run the unknown-matrix scheme
//! with a global and a random adaptation matrix; figure 9 couples three Chua
//! circuits through the circulant time-varying family.

use crate::config::{
    CriteriaSpec, Experiment, InitialSpec, IntegratorSpec, ModelSpec, NetworkSpec, Nonlinearity,
    OutputSpec,
};

pub const DEFAULT_PRESET_NODES: usize = 100;

const OSCILLATORS: [(&str, u32); 4] = [("chua", 1), ("chen", 3), ("lorenz", 5), ("rossler", 7)];

/// Default RK4 settings up to `N = 10`; beyond that the step shrinks as `1/N`,
/// because the adapted `c` (and with it `c·ρ(A)·h`) grows with the network.
pub fn integrator_for(n: usize) -> IntegratorSpec {
    let mut spec = IntegratorSpec::default();
    if n > 10 {
        spec.step = 0.05 / n as f64;
        spec.record_stride = (0.1 / spec.step).round() as usize;
    }
    spec
}

fn base(name: String, model: &str, scheme: &str, network: NetworkSpec) -> Experiment {
    let n = match &network {
        NetworkSpec::SmallWorld { n_nodes, .. } => *n_nodes,
        _ => 3,
    };
    Experiment {
        name,
        model: ModelSpec { name: model.into(), params: Default::default() },
        scheme: scheme.into(),
        network,
        adaptation: None,
        nonlinearity: None,
        allow_asymmetric: false,
        gamma: None,
        alpha: 1.0,
        integrator: integrator_for(n),
        initial: InitialSpec::default(),
        criteria: CriteriaSpec::default(),
        c_ref: None,
        output: OutputSpec::default(),
    }
}

fn small_world(n: usize, symmetric: bool) -> NetworkSpec {
    NetworkSpec::SmallWorld { n_nodes: n, mean_degree: 4, rewire_prob: 0.1, symmetric, seed: 1 }
}

fn linear(model: &str, fig: u32, n: usize) -> Experiment {
    base(format!("fig{fig}-linear-{model}"), model, "linear-known", small_world(n, false))
}

// The nonlinear law needs a symmetric matrix for ċ ≥ 0, so these runs use the
// symmetric-weight variant of the same small-world construction.
fn nonlinear(model: &str, fig: u32, n: usize) -> Experiment {
    let mut e = base(format!("fig{fig}-nonlinear-{model}"), model, "nonlinear", small_world(n, true));
    e.nonlinearity = Some(Nonlinearity::Tanh);
    e
}

fn unknown(model: &str, fig: u32, n: usize, global: bool) -> Experiment {
    let tag = if global { "global" } else { "random" };
    let mut e = base(format!("fig{fig}-unknown-{tag}-{model}"), model, "linear-unknown", small_world(n, false));
    e.adaptation = Some(if global {
        NetworkSpec::Complete { n_nodes: n }
    } else {
        NetworkSpec::RandomSymmetric { n_nodes: n, edge_prob: 0.3, seed: 2 }
    });
    e
}

fn triad(p: [f64; 3]) -> Experiment {
    let tag: Vec<String> = p.iter().map(|v| v.to_string()).collect();
    base(format!("fig9-timevarying-chua-p{}", tag.join("")), "chua", "linear-time-varying", NetworkSpec::Triad { p })
}

/// Every preset name, in listing order.
pub fn names() -> Vec<String> {
    let mut out = Vec::new();
    for (model, fig) in OSCILLATORS {
        out.push(format!("fig{fig}-{model}"));
        out.push(format!("fig{fig}-linear-{model}"));
        out.push(format!("fig{fig}-nonlinear-{model}"));
        let even = fig + 1;
        out.push(format!("fig{even}-{model}"));
        out.push(format!("fig{even}-unknown-global-{model}"));
        out.push(format!("fig{even}-unknown-random-{model}"));
    }
    out.push("fig9-timevarying-chua".into());
    out
}

/// Experiments for a preset. `n_nodes` defaults to 100 and is ignored by the
/// three-node figure 9 runs.
pub fn preset(name: &str, n_nodes: Option<usize>) -> Option<Vec<Experiment>> {
    let n = n_nodes.unwrap_or(DEFAULT_PRESET_NODES);
    if name == "fig9-timevarying-chua" {
        return Some(vec![triad([1.0, 1.0, 2.0]), triad([1.0, 1.0, 1.0])]);
    }
    for (model, fig) in OSCILLATORS {
        let even = fig + 1;
        let runs = match name.strip_prefix(&format!("fig{fig}-")) {
            Some(rest) if rest == model => vec![linear(model, fig, n), nonlinear(model, fig, n)],
            Some(rest) if rest == format!("linear-{model}") => vec![linear(model, fig, n)],
            Some(rest) if rest == format!("nonlinear-{model}") => vec![nonlinear(model, fig, n)],
            _ => match name.strip_prefix(&format!("fig{even}-")) {
                Some(rest) if rest == model => {
                    vec![unknown(model, even, n, true), unknown(model, even, n, false)]
                }
                Some(rest) if rest == format!("unknown-global-{model}") => vec![unknown(model, even, n, true)],
                Some(rest) if rest == format!("unknown-random-{model}") => vec![unknown(model, even, n, false)],
                _ => continue,
            },
        };
        return Some(runs);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves_and_validates() {
        for name in names() {
            let runs = preset(&name, Some(10)).unwrap_or_else(|| panic!("{name}"));
            for e in runs {
                e.prepare().unwrap_or_else(|err| panic!("{name}: {err}"));
            }
        }
        assert!(preset("fig10", None).is_none());
        assert_eq!(preset("fig9-timevarying-chua", None).unwrap().len(), 2);
    }

    #[test]
    fn default_size_is_one_hundred() {
        let e = &preset("fig1-linear-chua", None).unwrap()[0];
        assert!(matches!(e.network, NetworkSpec::SmallWorld { n_nodes: 100, .. }));
        assert_eq!(e.integrator.step, 0.0005);
        assert_eq!(e.integrator.record_stride, 200);
        let small = &preset("fig1-linear-chua", Some(10)).unwrap()[0];
        assert_eq!(small.integrator, IntegratorSpec::default());
    }
}
