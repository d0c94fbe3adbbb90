use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use model_space::basis::{
    aob_constants, aob_verdict, basis_report, subspace_angle_cosine, AngleOptions,
};
use model_space::inner::{
    clark_inner, validate_window, ClarkInner, InnerFunction, InnerFunctionSpec, MeromorphicInner,
    SeparatedSequence, TailPolicy,
};
use model_space::io::{self, NodeList};
use model_space::kernels::{gram_closed_form, KernelSystem};
use model_space::scenario::{
    self, generate, list_scenarios, ScenarioConfig, ScenarioName, SequenceSpec, DEFAULT_SEED,
};
use model_space::toeplitz::{
    invertibility_verdict, unitary_plus_compact_verdict, Symbol, CLUSTER_TAU,
};
use model_space::C64;

#[derive(Parser)]
#[command(
    name = "model-space",
    version,
    about = "Model-space experiments: Clark inner functions, kernel Grams, Toeplitz sections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Directory for CSV and structured-text outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized patterns and test sets.
    #[arg(long)]
    seed: Option<u64>,
    /// Circle grid size (a power of two, at least 8).
    #[arg(long)]
    grid: Option<usize>,
    /// Index window `a..b`, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
}

#[derive(Args, Clone)]
struct SequenceArgs {
    /// `lattice`, `perturbed:<δ>:<alternating|shift|uniform>`,
    /// `decaying:<δ>:<rate>` or `file:<nodes.csv>`.
    #[arg(long, default_value = "lattice")]
    sequence: String,
    /// Clark weight of every node.
    #[arg(long, default_value_t = 1.0 / PI)]
    weight: f64,
    /// Exponential type `a` of `Θ = e^{iaz}`.
    #[arg(long, default_value_t = 2.0 * PI)]
    exp_type: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Load a spec document and report on the inner function it describes.
    Validate {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build a Clark inner function and dump its circle trace and nodes.
    Clark {
        /// Spec document with a `[clark]` block; otherwise `--sequence`.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, value_enum, default_value = "lattice-tail")]
        tail: TailArg,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form Gram matrix of normalized kernels over a window.
    Gram {
        #[command(flatten)]
        seq: SequenceArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Riesz bounds over nested central windows.
    Riesz {
        #[command(flatten)]
        seq: SequenceArgs,
        /// Window sizes, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        sizes: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Tail constants `c_N, C_N` and the asymptotic verdict.
    Aob {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0i64, 5, 10, 15, 20])]
        starts: Vec<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Cosine of the angle between kernel tails and `IH²`.
    Angle {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [5i64, 10, 20, 40])]
        starts: Vec<i64>,
        /// Clark nodes `−h..=h` for `I`.
        #[arg(long, default_value_t = 2048)]
        clark_half_width: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Finite sections of `T_{ΘĪ}` and the operator verdicts.
    Toeplitz {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [128usize, 256, 512])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = CLUSTER_TAU)]
        tau: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run or list scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Run one scenario; exit 2 when a check fails.
    Run {
        name: String,
        /// Config document; keys it leaves out keep the scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// List scenarios and what they check.
    List {
        /// Keep scenarios whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
        /// One JSON document instead of text.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TailArg {
    Plain,
    SymmetricPairing,
    LatticeTail,
}

fn window_or(common: &Common, default: (i64, i64)) -> Result<(i64, i64)> {
    match &common.window {
        Some(w) => Ok(io::parse_window(w)?),
        None => Ok(default),
    }
}

fn sequence(
    args: &SequenceArgs,
    common: &Common,
    first: i64,
    last: i64,
) -> Result<SeparatedSequence> {
    let spec: SequenceSpec = args.sequence.parse()?;
    let seed = common.seed.unwrap_or(DEFAULT_SEED);
    let lambdas = generate(&spec, first, last, seed)?;
    let nus = vec![args.weight; lambdas.len()];
    Ok(validate_window(first, &lambdas, &nus)?)
}

fn theta(args: &SequenceArgs) -> Result<Arc<dyn InnerFunction>> {
    Ok(Arc::new(MeromorphicInner::exponential(args.exp_type)?))
}

fn grid(common: &Common) -> usize {
    common.grid.unwrap_or(4096)
}

fn emit(common: &Common, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = &common.out {
        let path = dir.join(name);
        io::write_text(&path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn clark_trace(inner: &ClarkInner, points: usize) -> Result<String> {
    let symbol = Symbol::Line(model_space::hardy::LineFunction::new(
        model_space::hardy::DecayClass::L1Pi,
        {
            let inner = inner.clone();
            move |t| {
                inner
                    .eval(C64::new(t, 0.0))
                    .unwrap_or(C64::new(f64::NAN, f64::NAN))
            }
        },
    ));
    Ok(io::write_trace_csv(&symbol.trace(points)?))
}

fn worst_node_deviation(inner: &ClarkInner, limit: usize) -> Result<f64> {
    let seq = inner.sequence();
    let skip = seq.len().saturating_sub(limit) / 2;
    let mut worst: f64 = 0.0;
    for &l in seq.lambdas().iter().skip(skip).take(limit) {
        worst = worst.max((inner.eval(C64::new(l, 0.0))? - 1.0).norm());
    }
    Ok(worst)
}

fn validate(spec: &Path, common: &Common) -> Result<ExitCode> {
    let inner = io::load_inner_spec(spec)?;
    let mut lines = vec![format!("origin = \"{}\"", inner.origin())];
    match &inner {
        InnerFunctionSpec::Explicit(theta) => {
            lines.push(format!("exp_type = {}", theta.exp_type()));
            lines.push(format!("zeros = {}", theta.zeros().len()));
            lines.push(format!(
                "derivative_bound = {}",
                theta.derivative_bound().unwrap_or(f64::NAN)
            ));
        }
        InnerFunctionSpec::Clark(clark) => {
            let seq = clark.sequence();
            lines.push(format!(
                "window = \"{}..{}\"",
                seq.first_index(),
                seq.last_index()
            ));
            lines.push(format!("nodes = {}", seq.len()));
            lines.push(format!("separation = {}", seq.delta()));
            lines.push(format!("discrepancy = {}", seq.discrepancy()));
            lines.push(format!("tail = \"{}\"", clark.tail()));
            lines.push(format!(
                "max_node_deviation = {:e}",
                worst_node_deviation(clark, 200)?
            ));
        }
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    emit(common, "validate.toml", &text)?;
    Ok(ExitCode::SUCCESS)
}

fn tail_policy(tail: TailArg, weight: f64) -> TailPolicy {
    match tail {
        TailArg::Plain => TailPolicy::Plain,
        TailArg::SymmetricPairing => TailPolicy::SymmetricPairing,
        TailArg::LatticeTail => TailPolicy::LatticeTail { weight },
    }
}

fn clark(
    spec: Option<&Path>,
    seq: &SequenceArgs,
    tail: TailArg,
    common: &Common,
) -> Result<ExitCode> {
    let inner = match spec {
        Some(path) => match io::load_inner_spec(path)? {
            InnerFunctionSpec::Clark(c) => c,
            InnerFunctionSpec::Explicit(_) => bail!("{} has no [clark] block", path.display()),
        },
        None => {
            let (a, b) = window_or(common, (-2048, 2048))?;
            let nodes = sequence(seq, common, a, b)?;
            clark_inner(&nodes, tail_policy(tail, seq.weight))?
        }
    };
    let s = inner.sequence();
    println!("window = \"{}..{}\"", s.first_index(), s.last_index());
    println!("tail = \"{}\"", inner.tail());
    println!(
        "max_node_deviation = {:e}",
        worst_node_deviation(&inner, 200)?
    );
    emit(
        common,
        "nodes.csv",
        &io::write_node_csv(&NodeList {
            first_index: s.first_index(),
            values: s.lambdas().to_vec(),
        }),
    )?;
    emit(
        common,
        "clark_trace.csv",
        &clark_trace(&inner, grid(common))?,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn system(seq: &SequenceArgs, common: &Common, default: (i64, i64)) -> Result<KernelSystem> {
    let (a, b) = window_or(common, default)?;
    Ok(KernelSystem::new(
        theta(seq)?,
        sequence(seq, common, a, b)?,
    )?)
}

fn gram(seq: &SequenceArgs, common: &Common) -> Result<ExitCode> {
    let g = gram_closed_form(&system(seq, common, (-32, 31))?).with_conditioning();
    let meta = g.meta();
    println!("{}", io::write_gram_meta(&meta).trim_end());
    emit(common, "gram.csv", &io::write_gram_csv(&g))?;
    emit(common, "gram.toml", &io::write_gram_meta(&meta))?;
    Ok(ExitCode::SUCCESS)
}

fn riesz(seq: &SequenceArgs, sizes: &[usize], common: &Common) -> Result<ExitCode> {
    let g = gram_closed_form(&system(seq, common, (-32, 31))?);
    let report = basis_report(&g, sizes, &[0])?;
    print!("{}", report.to_csv());
    emit(common, "riesz.csv", &report.to_csv())?;
    emit(common, "riesz.json", &report.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn aob(seq: &SequenceArgs, starts: &[i64], common: &Common) -> Result<ExitCode> {
    let g = gram_closed_form(&system(seq, common, (-40, 40))?);
    let tails = aob_constants(&g, starts)?;
    let verdict = aob_verdict(&tails);
    let mut csv = String::from("start,size,c_N,C_N,gap\n");
    for t in &tails {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t.start,
            t.size,
            scenario::num(t.lower),
            scenario::num(t.upper),
            scenario::num(t.gap())
        ));
    }
    print!("{csv}");
    println!("aob = {}", verdict.holds);
    emit(common, "aob.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn angle(seq: &SequenceArgs, starts: &[i64], half: i64, common: &Common) -> Result<ExitCode> {
    let sys = system(seq, common, (-64, 64))?;
    let nodes = sequence(seq, common, -half, half)?;
    let inner = clark_inner(&nodes, TailPolicy::LatticeTail { weight: seq.weight })?;
    let opts = AngleOptions {
        circle_points: common.grid,
        ..AngleOptions::default()
    };
    let mut csv = String::from("start,tail_size,cosine,circle_points\n");
    for &s in starts {
        let a = subspace_angle_cosine(&sys, &inner, s, &opts)?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            a.start,
            a.tail_size,
            scenario::num(a.cosine),
            a.circle_points
        ));
    }
    print!("{csv}");
    emit(common, "angle.csv", &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn toeplitz(seq: &SequenceArgs, sizes: &[usize], tau: f64, common: &Common) -> Result<ExitCode> {
    let (a, b) = window_or(common, (-2048, 2048))?;
    let inner = clark_inner(
        &sequence(seq, common, a, b)?,
        TailPolicy::LatticeTail { weight: seq.weight },
    )?;
    let symbol = Symbol::InnerRatio {
        theta: theta(seq)?,
        inner: Arc::new(inner),
    };
    let trace = symbol.trace(grid(common))?;
    let inv = invertibility_verdict(&trace, sizes)?;
    let upc = unitary_plus_compact_verdict(&trace, sizes, tau)?;
    println!("invertible = \"{}\"", inv.verdict);
    println!("unitary_plus_compact = \"{}\"", upc.verdict);
    println!("sigma_min = {:?}", inv.spectrum.sigma_min);
    println!("outliers = {:?}", upc.spectrum.outliers);
    emit(common, "spectrum.csv", &inv.spectrum.to_csv())?;
    emit(common, "trace.csv", &io::write_trace_csv(&trace))?;
    let evidence = serde_json::json!({ "invertibility": inv, "unitary_plus_compact": upc });
    emit(
        common,
        "verdicts.json",
        &serde_json::to_string_pretty(&evidence)?,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn scenario_run(name: &str, config: Option<&Path>, common: &Common) -> Result<ExitCode> {
    let scenario: ScenarioName = name.parse()?;
    let mut cfg = match config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::defaults(scenario),
    };
    if cfg.scenario != scenario {
        bail!("config describes {}, not {scenario}", cfg.scenario);
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(g) = common.grid {
        cfg.circle_points = g;
    }
    if let Some(w) = &common.window {
        io::parse_window(w)?;
        cfg.aob_window = w.clone();
    }
    let report = scenario::run(&cfg)?;
    print!("{}", report.summary());
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("reports"));
    for path in report.write(&dir)? {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn scenario_list(filter: Option<&str>, json: bool) -> Result<ExitCode> {
    let entries = list_scenarios(filter);
    if json {
        let docs: Vec<_> = entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "name": e.name,
                    "statement": e.statement,
                    "checks": e.checks,
                    "defaults": ScenarioConfig::defaults(e.name),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&docs)?);
    } else {
        for e in entries {
            let d = ScenarioConfig::defaults(e.name);
            println!("{}", e.name);
            println!("    {}", e.statement);
            println!("    checks: {}", e.checks);
            println!(
                "    defaults: circle_points={} gram_size={} clark=±{} sections={:?}",
                d.circle_points, d.gram_size, d.clark.half_width, d.sections
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { spec, common } => validate(&spec, &common),
        Command::Clark {
            spec,
            seq,
            tail,
            common,
        } => clark(spec.as_deref(), &seq, tail, &common),
        Command::Gram { seq, common } => gram(&seq, &common),
        Command::Riesz { seq, sizes, common } => riesz(&seq, &sizes, &common),
        Command::Aob {
            seq,
            starts,
            common,
        } => aob(&seq, &starts, &common),
        Command::Angle {
            seq,
            starts,
            clark_half_width,
            common,
        } => angle(&seq, &starts, clark_half_width, &common),
        Command::Toeplitz {
            seq,
            sizes,
            tau,
            common,
        } => toeplitz(&seq, &sizes, tau, &common),
        Command::Scenario { action } => match action {
            ScenarioAction::Run {
                name,
                config,
                common,
            } => scenario_run(&name, config.as_deref(), &common),
            ScenarioAction::List { filter, json } => scenario_list(filter.as_deref(), json),
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
