//! Subcommands. Each returns the process exit code: 0 for success or a
//! synchronized run, 2 for a negative verdict, 1 for errors.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use adaptsync_core::coupling::validate_condition;
use adaptsync_core::oscillators::{quad_grid_search, quad_probe};
use adaptsync_core::{ConditionClass, CouplingMatrix, SampleBox};
use clap::{Args, Parser, Subcommand};

use crate::config::{load_experiments, Experiment, ModelSpec};
use crate::matrix_io::read_matrix;
use crate::output::{summary_csv, summary_json, sweep_csv, trajectory_csv, trajectory_svg};
use crate::presets;
use crate::run::{run_experiment, sweep, RunResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "adaptsync", version, about = "Adaptive coupling-strength synchronization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one or more experiments and write their artifacts.
    Run {
        #[command(flatten)]
        source: Source,
        /// Adaptation gain α.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Repeat an experiment for several α values.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated α values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        alpha: Vec<f64>,
    },
    /// Classify a coupling matrix file.
    ValidateMatrix { path: PathBuf },
    /// Probe the QUAD inequality of a node field on random pairs.
    QuadCheck(QuadArgs),
    /// List the bundled presets.
    Presets,
}

/// Where experiments come from, plus overrides. Flags beat `ADAPTSYNC_SEED`,
/// which beats the config file.
#[derive(Debug, Args)]
pub struct Source {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// Initial-condition seed.
    #[arg(long, env = "ADAPTSYNC_SEED")]
    pub seed: Option<u64>,
    /// Node count of generated networks.
    #[arg(long)]
    pub n_nodes: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write a two-panel SVG per run.
    #[arg(long)]
    pub svg: bool,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub dump_config: bool,
    /// Model parameter override, `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_key_value)]
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    pub model: String,
    /// Diagonal of Δ: one value for every coordinate, or one per coordinate.
    #[arg(long, value_delimiter = ',', required_unless_present = "grid")]
    pub delta: Vec<f64>,
    /// Candidate gains `d` for `Δ = d·I`; reports the smallest that holds.
    #[arg(long, value_delimiter = ',', conflicts_with = "delta")]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub varpi: f64,
    /// Sampling cube `lo,hi`; the model's attractor box by default.
    #[arg(long = "box", value_delimiter = ',', num_args = 2)]
    pub sample_box: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "param", value_parser = parse_key_value)]
    pub params: Vec<(String, f64)>,
}

fn parse_key_value(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run { source, alpha } => cmd_run(&source, alpha),
        Command::Sweep { source, alpha } => cmd_sweep(&source, &alpha),
        Command::ValidateMatrix { path } => cmd_validate_matrix(&path),
        Command::QuadCheck(args) => cmd_quad_check(&args),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(EXIT_OK)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

/// Loads experiments and applies overrides.
pub fn resolve(source: &Source, alpha: Option<f64>) -> Result<Vec<Experiment>, String> {
    let mut experiments = match (&source.config, &source.preset) {
        (Some(path), _) => load_experiments(path).map_err(|e| format!("config error at {e}"))?,
        (None, Some(name)) => presets::preset(name, source.n_nodes)
            .ok_or_else(|| format!("unknown preset `{name}` (see `adaptsync presets`)"))?,
        (None, None) => return Err("either --config or --preset is required".into()),
    };
    for e in &mut experiments {
        if let Some(n) = source.n_nodes {
            e.network.set_n_nodes(n).map_err(|m| format!("{}: --n-nodes: {m}", e.name))?;
            if let Some(a) = &mut e.adaptation {
                a.set_n_nodes(n).map_err(|m| format!("{}: --n-nodes: {m}", e.name))?;
            }
        }
        if let Some(seed) = source.seed {
            e.initial.seed = seed;
        }
        if let Some(a) = alpha {
            e.alpha = a;
        }
        if let Some(t) = source.t_end {
            e.integrator.t_end = t;
        }
        if let Some(h) = source.step {
            e.integrator.step = h;
        }
        if let Some(dir) = &source.out_dir {
            e.output.dir = Some(dir.clone());
        }
        if source.svg {
            e.output.svg = true;
        }
        let ModelSpec { params, .. } = &mut e.model;
        for (k, v) in &source.params {
            params.insert(k.clone(), *v);
        }
    }
    Ok(experiments)
}

fn dump(experiments: &[Experiment]) -> Result<i32, String> {
    let text = if experiments.len() == 1 {
        serde_json::to_string_pretty(&experiments[0])
    } else {
        serde_json::to_string_pretty(experiments)
    }
    .map_err(|e| e.to_string())?;
    println!("{text}");
    Ok(EXIT_OK)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn out_dir(e: &Experiment) -> PathBuf {
    e.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn write_artifacts(e: &Experiment, run: &RunResult) -> Result<(), String> {
    let dir = out_dir(e);
    std::fs::create_dir_all(&dir).map_err(|err| format!("{}: {err}", dir.display()))?;
    let stem = file_stem(&e.name);
    write(&dir.join(format!("{stem}.csv")), &trajectory_csv(run))?;
    write(&dir.join(format!("{stem}.summary.csv")), &summary_csv(&[run]))?;
    let json = serde_json::to_string_pretty(&summary_json(run)).map_err(|err| err.to_string())?;
    write(&dir.join(format!("{stem}.summary.json")), &(json + "\n"))?;
    if e.output.svg {
        write(&dir.join(format!("{stem}.svg")), &trajectory_svg(run))?;
    }
    Ok(())
}

pub fn cmd_run(source: &Source, alpha: Option<f64>) -> Result<i32, String> {
    let experiments = resolve(source, alpha)?;
    if source.dump_config {
        return dump(&experiments);
    }
    let mut code = EXIT_OK;
    let mut done = Vec::new();
    for e in &experiments {
        match run_experiment(e) {
            Ok(run) => {
                write_artifacts(e, &run)?;
                if let Some(t) = run.diverged_at {
                    eprintln!("error: {}: state diverged after t = {t}", e.name);
                    code = EXIT_ERROR;
                } else if !run.synchronized() && code == EXIT_OK {
                    code = EXIT_NEGATIVE;
                }
                done.push(run);
            }
            Err(err) => {
                eprintln!("error: {}: {err}", e.name);
                code = EXIT_ERROR;
            }
        }
    }
    let refs: Vec<&RunResult> = done.iter().collect();
    print!("{}", summary_csv(&refs));
    std::io::stdout().flush().ok();
    Ok(code)
}

pub fn cmd_sweep(source: &Source, alphas: &[f64]) -> Result<i32, String> {
    if alphas.is_empty() {
        return Err("the alpha list is empty".into());
    }
    if let Some(bad) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(format!("alpha must be finite and nonnegative, got {bad}"));
    }
    let experiments = resolve(source, None)?;
    if source.dump_config {
        return dump(&experiments);
    }
    let mut table = String::new();
    let mut code = EXIT_OK;
    for (k, e) in experiments.iter().enumerate() {
        let rows = sweep(e, alphas);
        for row in &rows {
            match &row.outcome {
                Ok(run) if run.diverged_at.is_some() => code = EXIT_ERROR,
                Ok(run) if !run.synchronized() && code == EXIT_OK => code = EXIT_NEGATIVE,
                Ok(_) => {}
                Err(_) => code = EXIT_ERROR,
            }
        }
        let csv = sweep_csv(&rows);
        table.push_str(if k == 0 { &csv } else { csv.split_once('\n').map_or("", |(_, body)| body) });
    }
    let dir = experiments.first().map(out_dir).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|err| format!("{}: {err}", dir.display()))?;
    let stem = if experiments.len() == 1 {
        file_stem(&experiments[0].name)
    } else {
        source.preset.as_deref().map(file_stem).unwrap_or_else(|| "sweep".into())
    };
    write(&dir.join(format!("{stem}.sweep.csv")), &table)?;
    print!("{table}");
    Ok(code)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Prints the condition class and, for a valid matrix, `ξ`, `λ₂` and the
/// `−U ∈ A2` check. `λ₂` is the largest nonzero eigenvalue of `ΞA + AᵀΞ`;
/// the value for `½(ΞA + AᵀΞ)` is printed alongside.
pub fn validate_matrix_report(path: &Path) -> Result<(String, bool), String> {
    let m = read_matrix(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let report = validate_condition(&m).map_err(|e| e.to_string())?;
    let mut out = String::new();
    let class = match report.class {
        ConditionClass::A2 => "A2",
        ConditionClass::A1 => "A1",
        ConditionClass::Invalid => "invalid",
    };
    writeln!(out, "class: {class}").unwrap();
    writeln!(out, "symmetric: {}", report.symmetric).unwrap();
    writeln!(out, "irreducible: {}", report.irreducible).unwrap();
    for v in &report.violations {
        writeln!(out, "violation: {v}").unwrap();
    }
    if report.class == ConditionClass::Invalid {
        return Ok((out, false));
    }
    let a = CouplingMatrix::new(m).map_err(|e| e.to_string())?;
    writeln!(out, "xi: ({})", join(a.xi().as_slice())).unwrap();
    let l2 = a.lambda2().map_err(|e| e.to_string())?;
    writeln!(out, "lambda2: {l2}").unwrap();
    writeln!(out, "lambda2_half: {}", 0.5 * l2).unwrap();
    let minus_u = -a.projection().matrix().clone();
    let u_ok = validate_condition(&minus_u).map(|r| r.class == ConditionClass::A2).unwrap_or(false);
    writeln!(out, "minus_u_in_a2: {u_ok}").unwrap();
    Ok((out, true))
}

pub fn cmd_validate_matrix(path: &Path) -> Result<i32, String> {
    let (text, valid) = validate_matrix_report(path)?;
    print!("{text}");
    Ok(if valid { EXIT_OK } else { EXIT_NEGATIVE })
}

pub fn cmd_quad_check(args: &QuadArgs) -> Result<i32, String> {
    let mut spec = ModelSpec { name: args.model.clone(), params: Default::default() };
    for (k, v) in &args.params {
        spec.params.insert(k.clone(), *v);
    }
    let model = spec.build().map_err(|e| e.to_string())?;
    let dim = adaptsync_core::NodeDynamics::dim(&model);
    let region = match args.sample_box.as_slice() {
        [] => model.default_box(),
        [lo, hi] => SampleBox::cube(dim, *lo, *hi).map_err(|e| e.to_string())?,
        _ => return Err("--box takes lo,hi".into()),
    };
    println!("model: {}", model.name());
    println!("varpi: {}", args.varpi);
    println!("samples: {}", args.samples);
    println!("seed: {}", args.seed);
    if !args.grid.is_empty() {
        let (best, certs) = quad_grid_search(&model, &args.grid, args.varpi, &region, args.samples, args.seed)
            .map_err(|e| e.to_string())?;
        for c in &certs {
            println!("d = {}: max_violation = {}, holds = {}", c.delta[0], c.max_violation, c.holds());
        }
        return Ok(match best {
            Some(d) => {
                println!("smallest: {d}");
                EXIT_OK
            }
            None => {
                println!("smallest: none");
                EXIT_NEGATIVE
            }
        });
    }
    let delta = match args.delta.as_slice() {
        [d] => vec![*d; dim],
        d => d.to_vec(),
    };
    let cert = quad_probe(&model, &delta, args.varpi, &region, args.samples, args.seed).map_err(|e| e.to_string())?;
    println!("delta: ({})", join(&cert.delta));
    println!("max_violation: {}", cert.max_violation);
    println!("argmax_x: ({})", join(&cert.argmax.0));
    println!("argmax_y: ({})", join(&cert.argmax.1));
    println!("holds: {}", cert.holds());
    Ok(if cert.holds() { EXIT_OK } else { EXIT_NEGATIVE })
}
