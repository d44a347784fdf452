//! `qpc`: run quantum private comparison scenarios and print JSON results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qpc_core::adversary::{Channel, TpKind};
use qpc_core::harness::{
    predict_attack_detection, predict_eve_detection, round_sig6, run_trials_with, InputPolicy,
    Scenario,
};
use qpc_core::protocol::{run_protocol, ProtocolConfig, Variant};
use qpc_core::{vectors, Error};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "qpc", version, about = "Quantum private comparison simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run many seeded trials and print aggregate statistics.
    Run(Box<RunArgs>),
    /// Print closed-form detection probabilities.
    Predict(PredictArgs),
    /// Recompute the frozen hash and permutation vectors and compare.
    Vectors(VectorArgs),
    /// One transcript of each canonical scenario.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Parser)]
struct RunArgs {
    /// honest, attack-original, attack-improved or eve
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// JSON file with ProtocolConfig fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n_pairs: Option<usize>,
    #[arg(long)]
    hash_len: Option<usize>,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long)]
    tp: Option<TpArg>,
    /// Comma separated: tp-b, tp-c, b-tp, c-tp
    #[arg(long, value_delimiter = ',', value_parser = parse_channel)]
    eve: Option<Vec<Channel>>,
    #[arg(long)]
    reveal_fraction: Option<f64>,
    /// Sampling inconsistency threshold
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    decoys: Option<usize>,
    #[arg(long)]
    decoy_threshold: Option<f64>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
    /// How trial inputs are chosen; defaults to fixed when --x or --y is given
    #[arg(long)]
    inputs: Option<InputsArg>,
    /// Write every transcript as one JSON line
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Parser)]
struct PredictArgs {
    /// Checked sampling pairs
    #[arg(long, required_unless_present = "eve_decoys")]
    attack_sampling: Option<u32>,
    /// Decoys on a tapped channel
    #[arg(long)]
    eve_decoys: Option<u32>,
}

#[derive(Parser)]
struct VectorArgs {
    #[arg(long)]
    hash_vectors: Option<PathBuf>,
    #[arg(long)]
    permutation_vectors: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Improved,
}

#[derive(Clone, Copy, ValueEnum)]
enum TpArg {
    Honest,
    SameState,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputsArg {
    Fixed,
    Equal,
    Random,
}

fn parse_channel(s: &str) -> Result<Channel, String> {
    Channel::parse(s.trim()).ok_or_else(|| format!("unknown channel {s:?}"))
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::TooFewTrials(_) | Error::Fixture { .. } => Failure::Usage(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Run(args) => run(*args),
        Command::Predict(args) => Ok(predict(args)),
        Command::Vectors(args) => check_vectors(args),
        Command::Demo { seed } => demo(seed),
    };
    match out {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
            match writeln!(std::io::stdout().lock(), "{text}") {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn build_scenario(args: &RunArgs) -> Result<Scenario, Failure> {
    let mut scenario = match (&args.scenario, &args.config) {
        (Some(name), _) => Scenario::named(name).ok_or_else(|| {
            Failure::Usage(format!("unknown scenario {name:?}, expected one of {}", Scenario::NAMES.join(", ")))
        })?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let config: ProtocolConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
            Scenario {
                name: "custom".into(),
                config,
                trials: 1000,
                base_seed: 0,
                inputs: InputPolicy::RandomPairs,
            }
        }
        (None, None) => Scenario {
            name: "custom".into(),
            config: ProtocolConfig::default(),
            trials: 1000,
            base_seed: 0,
            inputs: InputPolicy::RandomPairs,
        },
    };
    scenario.base_seed = args.seed;
    if let Some(t) = args.trials {
        scenario.trials = t;
    }
    let c = &mut scenario.config;
    if let Some(v) = args.n_pairs {
        c.n_pairs = v;
    }
    if let Some(v) = args.hash_len {
        c.hash_len = v;
    }
    if let Some(v) = args.variant {
        c.variant = match v {
            VariantArg::Original => Variant::Original,
            VariantArg::Improved => Variant::Improved,
        };
    }
    if let Some(v) = args.tp {
        c.tp_behavior = match v {
            TpArg::Honest => TpKind::Honest,
            TpArg::SameState => TpKind::SameStateAttack,
        };
    }
    if let Some(v) = &args.eve {
        c.eve_on = v.iter().copied().collect();
    }
    if let Some(v) = args.reveal_fraction {
        c.reveal_fraction_sampling = v;
    }
    if let Some(v) = args.threshold {
        c.inconsistency_threshold = v;
    }
    if let Some(v) = args.decoys {
        c.decoy_count_per_channel = v;
    }
    if let Some(v) = args.decoy_threshold {
        c.decoy_threshold = v;
    }
    let explicit_inputs = args.x.is_some() || args.y.is_some();
    if let Some(x) = &args.x {
        c.x = x.clone();
    }
    if let Some(y) = &args.y {
        c.y = y.clone();
    }
    scenario.inputs = match args.inputs {
        Some(InputsArg::Fixed) => InputPolicy::Fixed,
        Some(InputsArg::Equal) => InputPolicy::EqualPairs,
        Some(InputsArg::Random) => InputPolicy::RandomPairs,
        None if explicit_inputs || args.config.is_some() => InputPolicy::Fixed,
        None => scenario.inputs,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn run(args: RunArgs) -> Result<Value, Failure> {
    let scenario = build_scenario(&args)?;
    eprintln!(
        "running {} trials of {} from base seed {}",
        scenario.trials, scenario.name, scenario.base_seed
    );
    let mut sink = match &args.transcripts {
        Some(path) => Some(BufWriter::new(
            File::create(path).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => None,
    };
    let mut io_error = None;
    let stats = run_trials_with(&scenario, |t, tr| {
        if let Some(w) = sink.as_mut() {
            let line = json!({ "trial": t, "transcript": tr });
            if let Err(e) = writeln!(w, "{line}") {
                io_error.get_or_insert(e.to_string());
            }
        }
        Ok(())
    })?;
    if let Some(e) = io_error {
        return Err(internal(e));
    }
    if let Some(mut w) = sink {
        w.flush().map_err(internal)?;
    }
    eprintln!(
        "wrong verdicts {}, tp cheating detected {}, eavesdropper detected {}",
        stats.wrong_verdicts, stats.detection_count, stats.eavesdropper_detections
    );
    serde_json::to_value(&stats).map_err(internal)
}

fn predict(args: PredictArgs) -> Value {
    let mut out = serde_json::Map::new();
    if let Some(s) = args.attack_sampling {
        out.insert("attack_sampling".into(), json!(s));
        out.insert("attack_detection".into(), json!(round_sig6(predict_attack_detection(s))));
    }
    if let Some(d) = args.eve_decoys {
        out.insert("eve_decoys".into(), json!(d));
        out.insert("eve_detection".into(), json!(round_sig6(predict_eve_detection(d))));
    }
    Value::Object(out)
}

fn check_vectors(args: VectorArgs) -> Result<Value, Failure> {
    let read = |p: &PathBuf| {
        std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
    };
    let hash = match &args.hash_vectors {
        Some(p) => read(p)?,
        None => vectors::HASH_VECTORS.to_string(),
    };
    let perm = match &args.permutation_vectors {
        Some(p) => read(p)?,
        None => vectors::PERMUTATION_VECTORS.to_string(),
    };
    let report = vectors::verify(&hash, &perm)?;
    eprintln!(
        "{} hash vectors, {} permutation vectors, {}",
        report.hash_vectors,
        report.permutation_vectors,
        if report.ok { "all match" } else { "MISMATCH" }
    );
    if !report.ok {
        return Err(Failure::Internal(serde_json::to_string(&report).map_err(internal)?));
    }
    serde_json::to_value(&report).map_err(internal)
}

fn demo(seed: u64) -> Result<Value, Failure> {
    let mut runs = Vec::new();
    for name in Scenario::NAMES {
        let scenario = Scenario::named(name).expect("canonical scenario");
        let mut config = scenario.trial_config(0);
        config.seed = seed;
        let t = run_protocol(&config)?;
        eprintln!(
            "{name}: x={:?} y={:?} verdict {:?}, truth equal {}, tp inference {:?}",
            config.x, config.y, t.participant_verdict, t.ground_truth_equal, t.tp_inference
        );
        if let Some(check) = &t.sampling_check {
            eprintln!(
                "  sampling: {} checked, {} mismatched",
                check.checked_positions.len(),
                check.mismatches
            );
        }
        for (ch, check) in &t.decoy_check_results {
            if check.mismatches > 0 {
                eprintln!("  decoys on {ch}: {}/{} wrong", check.mismatches, check.checked);
            }
        }
        runs.push(json!({ "scenario": name, "transcript": t }));
    }
    Ok(Value::Array(runs))
}
