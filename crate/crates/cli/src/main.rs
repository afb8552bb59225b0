mod demo;

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use motorprim::dmp::{
    imitation_learn, multi_dof_rollout, write_weights, CanonicalSystem, LearningConfig,
    MultiDofDmp, PrimitiveKind, WeightRecord,
};
use motorprim::scenarios::{
    build_scenario_variant, metrics, run, ControllerKind, Metrics, Override, ScenarioId,
    ScenarioSpec, SimTrace, Variant, TRACE_SCHEMA,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "motorprim",
    version,
    about = "Run DMP and EDA scenarios on a planar chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trace and metrics.
    Run(RunArgs),
    /// Learn DMP weights from a demonstration CSV.
    Learn(LearnArgs),
    /// Run both controllers on one scenario and tabulate the outcome.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Built-in scenario id.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    scenario: Option<ScenarioId>,
    /// Scenario JSON document.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Scenario variant for ablations.
    #[arg(long, default_value = "default", conflicts_with = "spec")]
    variant: Variant,
    /// Integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Dotted-path override such as `duration_s=5`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value = "dmp", conflicts_with = "spec")]
    controller: ControllerKind,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Trace formats to write.
    #[arg(long, value_enum, default_values_t = [Format::Csv])]
    format: Vec<Format>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scenario: ScenarioId,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Demonstration CSV with columns t, y, ydot, yddot per DOF.
    #[arg(long)]
    demo: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Discrete)]
    kind: Kind,
    /// Period of a rhythmic demonstration in seconds.
    #[arg(long, required_if_eq("kind", "rhythmic"))]
    period: Option<f64>,
    /// Time constant of a discrete primitive; defaults to the demo duration.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "basis", default_value_t = 50)]
    n_basis: usize,
    #[arg(long, default_value_t = 10.0)]
    alpha_z: f64,
    #[arg(long, default_value_t = 2.5)]
    beta_z: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_s: f64,
    /// Rhythmic amplitude.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Rollout step used for the reproduction error.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Weight file to write.
    #[arg(long, default_value = "weights.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Discrete,
    Rhythmic,
}

enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Learn(args) => cmd_learn(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn overrides(dt: Option<f64>, set: &[String]) -> Result<Vec<Override>> {
    let mut out = set
        .iter()
        .map(|s| Override::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(dt) = dt {
        out.push(Override::dt(dt));
    }
    Ok(out)
}

fn load_spec(args: &SpecArgs, controller: ControllerKind) -> Result<ScenarioSpec> {
    let ov = overrides(args.dt, &args.set)?;
    match (&args.spec, args.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let spec = ScenarioSpec::from_json(&text)
                .with_context(|| format!("cannot parse {}", path.display()))?;
            Ok(spec.with_overrides(&ov)?)
        }
        (None, Some(id)) => Ok(build_scenario_variant(id, controller, args.variant, &ov)?),
        (None, None) => bail!("either --scenario or --spec is required"),
    }
}

fn write_trace_csv(path: &Path, trace: &SimTrace) -> Result<()> {
    let mut file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    writeln!(file, "# {TRACE_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(trace.csv_header())?;
    for row in &trace.rows {
        w.write_record(
            trace
                .csv_row(row)
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<Outcome> {
    let spec = load_spec(&args.spec, args.controller)?;
    let trace = run(&spec)?;
    let m = metrics(&trace, spec.tolerance);
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for format in &args.format {
        match format {
            Format::Csv => write_trace_csv(&args.out.join("trace.csv"), &trace)?,
            Format::Json => write_json(&args.out.join("trace.json"), &trace)?,
        }
    }
    write_json(&args.out.join("metrics.json"), &m)?;
    let kind = spec.controller.kind();
    match &m.failure {
        Some(f) => {
            println!(
                "{} {kind}: FAILED at {:.4} s ({})",
                spec.id, f.time, f.reason
            );
            Ok(Outcome::Failed)
        }
        None => {
            println!(
                "{} {kind}: rms {:.3e} terminal {:.3e}",
                spec.id, m.rms_tracking_error, m.terminal_error
            );
            Ok(Outcome::Ok)
        }
    }
}

#[derive(Serialize)]
struct Comparison {
    scenario: ScenarioId,
    dmp: Metrics,
    eda: Metrics,
    lower_tracking_rms: Option<ControllerKind>,
    dmp_failed: bool,
    eda_failed: bool,
    max_l_c_j: Option<f64>,
}

fn cmd_compare(args: CompareArgs) -> Result<Outcome> {
    let ov = overrides(args.dt, &args.set)?;
    let mut results = Vec::new();
    for c in [ControllerKind::Dmp, ControllerKind::Eda] {
        let spec = build_scenario_variant(args.scenario, c, Variant::Default, &ov)
            .with_context(|| format!("{} has no {c} counterpart", args.scenario))?;
        results.push(metrics(&run(&spec)?, spec.tolerance));
    }
    let eda = results.pop().expect("two runs");
    let dmp = results.pop().expect("two runs");
    let lower_tracking_rms = match (dmp.failure.is_some(), eda.failure.is_some()) {
        (false, false) if dmp.rms_tracking_error < eda.rms_tracking_error => {
            Some(ControllerKind::Dmp)
        }
        (false, false) => Some(ControllerKind::Eda),
        (true, false) => Some(ControllerKind::Eda),
        (false, true) => Some(ControllerKind::Dmp),
        (true, true) => None,
    };
    let table = Comparison {
        scenario: args.scenario,
        dmp_failed: dmp.failure.is_some(),
        eda_failed: eda.failure.is_some(),
        max_l_c_j: eda.max_l_c,
        lower_tracking_rms,
        dmp,
        eda,
    };
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_json(&args.out.join("compare.json"), &table)?;
    println!("{}", serde_json::to_string_pretty(&table)?);
    Ok(Outcome::Ok)
}

fn cmd_learn(args: LearnArgs) -> Result<Outcome> {
    let demo = demo::read_demo(&args.demo)?;
    let times = demo.times();
    let span = times[times.len() - 1] - times[0];
    let cs = match args.kind {
        Kind::Discrete => CanonicalSystem::discrete(args.tau.unwrap_or(span), args.alpha_s)?,
        Kind::Rhythmic => {
            CanonicalSystem::rhythmic_with_period(args.period.context("--period is required")?)?
        }
    };
    let config = LearningConfig {
        alpha_z: args.alpha_z,
        beta_z: args.beta_z,
        n_basis: args.n_basis,
        amplitude: args.amplitude,
    };
    let learned = imitation_learn(&demo, &cs, &config)?;
    let records: Vec<WeightRecord> = learned
        .iter()
        .map(|l| {
            WeightRecord::from_forcing(&l.forcing, &cs, args.alpha_z, args.beta_z)
                .with_anchors(l.goal, l.y0)
        })
        .collect();
    fs::write(&args.out, write_weights(&records)? + "\n")
        .with_context(|| format!("cannot write {}", args.out.display()))?;

    let mut dmp = MultiDofDmp::from_learned(cs, args.alpha_z, args.beta_z, &learned)?;
    let rollout = multi_dof_rollout(&mut dmp, span, args.dt)?;
    let mut sq = 0.0;
    for d in 0..demo.n_dof() {
        for (t, y) in times.iter().zip(demo.position(d)) {
            sq += (rollout.position_at(d, t - times[0]) - y).powi(2);
        }
    }
    let rms = (sq / (demo.n_dof() * times.len()) as f64).sqrt();
    let kind = match cs.kind() {
        PrimitiveKind::Discrete => "discrete",
        PrimitiveKind::Rhythmic => "rhythmic",
    };
    println!(
        "learned {} {kind} DOF(s), N={}, tau={:.6} s, reproduction rms {rms:.3e}",
        demo.n_dof(),
        args.n_basis,
        cs.tau()
    );
    Ok(Outcome::Ok)
}
