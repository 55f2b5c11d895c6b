use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use gflow_core::flow_ode::{integrate, trajectory_commutation, ReducedState, Scenario, ScenarioKind};
use gflow_core::tduality::{dualize, DualPairConfig};
use gflow_core::verify::{self, Options, Suite};

mod components;

use components::Components;

#[derive(Parser)]
#[command(name = "gflow", version, about = "Generalized Ricci flow and T-duality laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a reduced homogeneous flow and write a CSV trajectory.
    Flow(FlowArgs),
    /// T-dualize pointwise components given as JSON.
    Dualize(DualizeArgs),
    /// Run a verification suite and print a residual table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FlowArgs {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long = "A", allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long = "B", allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Complex dimension of the projective base.
    #[arg(long)]
    n: Option<usize>,
    /// Einstein constant of the projective base.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also integrate the dual flow and report the commutation residual.
    #[arg(long)]
    dual: bool,
    /// Largest acceptable commutation residual with `--dual`.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowConfig {
    scenario: Option<String>,
    #[serde(rename = "A")]
    a: Option<f64>,
    #[serde(rename = "B")]
    b: Option<f64>,
    dt: Option<f64>,
    t_max: Option<f64>,
    n: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
    dual: Option<bool>,
    tolerance: Option<f64>,
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DualizeArgs {
    /// JSON file with `phi`, `a`, `h`, `eta`, `mu`.
    #[arg(long, conflicts_with_all = ["json", "hopf"])]
    config: Option<PathBuf>,
    /// Inline JSON components.
    #[arg(long, conflicts_with = "hopf")]
    json: Option<String>,
    /// Override the fibre length.
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Use the Hopf configuration with coefficients `--A`, `--B`.
    #[arg(long)]
    hopf: bool,
    #[arg(long = "A", requires = "hopf", default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long = "B", requires = "hopf", default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    /// Dualize twice.
    #[arg(long)]
    twice: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random samples per identity.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Drop the dilaton shift from the dual family (expected to fail).
    #[arg(long)]
    omit_dilaton: bool,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(anyhow::Error),
    Check(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Flow(args) => cmd_flow(args),
        Command::Dualize(args) => cmd_dualize(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Shortest round-trip representation, switching to exponent form for very
/// small or large magnitudes.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_flow(args: FlowArgs) -> std::result::Result<(), Failure> {
    let file: FlowConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => FlowConfig::default(),
    };
    let name = args.scenario.or(file.scenario).ok_or_else(|| anyhow!("missing --scenario"))?;
    let kind: ScenarioKind = name.parse().map_err(anyhow::Error::from)?;
    let a = args.a.or(file.a).ok_or_else(|| anyhow!("missing --A"))?;
    let b = args.b.or(file.b).ok_or_else(|| anyhow!("missing --B"))?;
    let dt = args.dt.or(file.dt).unwrap_or(1e-3);
    let t_max = args.t_max.or(file.t_max).ok_or_else(|| anyhow!("missing --t-max"))?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let dual = args.dual || file.dual.unwrap_or(false);
    let tolerance = args.tolerance.or(file.tolerance);
    let output = args.output.or(file.output);
    let n = args.n.or(file.n);
    let lambda = args.lambda.or(file.lambda);

    let scenario = match kind {
        ScenarioKind::Hopf | ScenarioKind::HopfDual => {
            if n.is_some_and(|n| n != 1) || lambda.is_some_and(|l| l != 1.0) {
                return Err(anyhow!("Hopf scenarios fix n = 1 and lambda = 1").into());
            }
            Scenario { kind, n: 1, lambda: 1.0 }
        }
        ScenarioKind::Cpn | ScenarioKind::CpnDual => {
            Scenario { kind, n: n.unwrap_or(2), lambda: lambda.unwrap_or(1.0) }
        }
    };
    let s0 = ReducedState::new(scenario, a, b).map_err(anyhow::Error::from)?;
    let traj = integrate(&s0, dt, t_max).map_err(anyhow::Error::from)?;

    let mut csv = String::new();
    let mut residual = None;
    if dual {
        let report = trajectory_commutation(&traj).map_err(|e| Failure::Check(e.into()))?;
        csv.push_str("t,A,B,Abar,Bbar,commutation_residual\n");
        for ((p, d), r) in traj.states.iter().zip(&report.dual.states).zip(&report.pointwise) {
            let row = [p.t, p.a, p.b, d.a, d.b, *r].map(num);
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        residual = Some(report.residual);
    } else {
        csv.push_str("t,A,B\n");
        for p in &traj.states {
            csv.push_str(&[p.t, p.a, p.b].map(num).join(","));
            csv.push('\n');
        }
    }
    csv.push_str(&format!(
        "# scenario={} n={} lambda={} dt={} t_max={} seed={} termination={}",
        scenario.kind.name(),
        scenario.n,
        scenario.lambda,
        num(dt),
        num(t_max),
        seed,
        traj.termination.name()
    ));
    if let Some(r) = residual {
        csv.push_str(&format!(" commutation_residual={}", num(r)));
    }
    csv.push('\n');
    write_output(output.as_deref(), &csv)?;

    if let (Some(r), Some(tol)) = (residual, tolerance) {
        if r > tol {
            return Err(Failure::Check(anyhow!("commutation residual {r:e} exceeds {tol:e}")));
        }
    }
    Ok(())
}

fn cmd_dualize(args: DualizeArgs) -> std::result::Result<(), Failure> {
    let mut input = if args.hopf {
        let pair = DualPairConfig::hopf(args.a, args.b, &components::HOPF_POINT).map_err(anyhow::Error::from)?;
        Components::from_config(&pair.point().map_err(anyhow::Error::from)?)
    } else if let Some(p) = &args.config {
        read_json(p)?
    } else if let Some(text) = &args.json {
        serde_json::from_str(text).context("parsing --json")?
    } else if args.phi.is_some() {
        Components::default()
    } else {
        return Err(anyhow!("give --config, --json, --phi or --hopf").into());
    };
    if let Some(phi) = args.phi {
        input.phi = phi;
    }
    let config = input.to_config()?;
    let mut dual = dualize(&config).map_err(anyhow::Error::from)?;
    if args.twice {
        dual = dualize(&dual).map_err(anyhow::Error::from)?;
    }
    let mut text = serde_json::to_string_pretty(&Components::from_config(&dual)).map_err(anyhow::Error::from)?;
    text.push('\n');
    write_output(args.output.as_deref(), &text)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> std::result::Result<(), Failure> {
    let suite: Suite = args.suite.parse().map_err(anyhow::Error::from)?;
    if args.n == 0 {
        return Err(anyhow!("--n must be positive").into());
    }
    let options = Options { seed: args.seed, samples: args.n, omit_dilaton: args.omit_dilaton };
    let report = verify::run(suite, &options).map_err(|e| Failure::Check(e.into()))?;
    println!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check(anyhow!("{} identities failed", report.rows.iter().filter(|r| !r.passed).count())))
    }
}
