// Copyright 2026 su2opt Contributors
// SPDX-License-Identifier: Apache-2.0

//! `su2opt`: synthesize, check and inspect time-optimal two-axis pulse sequences.

mod settings;
mod target;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use su2opt::catalog::{enumerate_templates, SequenceLength};
use su2opt::export::{oracle_json, read_result, sequence_csv, synthesis_json, SCHEMA};
use su2opt::geometry::{bloch_trajectory, round_sig, sig, trajectory_csv, Vector3};
use su2opt::oracle::{brute_force_min_time, region_csv, region_scan, OracleOptions, RegionOptions};
use su2opt::search::{synthesize, SynthesisOptions};
use su2opt::{ControlConfig, Error, Mode, UnitQuaternion};

#[derive(Parser)]
#[command(
    name = "su2opt",
    version,
    about = "Time-optimal single-qubit synthesis from two control axes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cheapest admissible sequence for a target.
    Synth(SynthArgs),
    /// Discretized exhaustive search, for cross-checking `synth`.
    Oracle(OracleArgs),
    /// Admissible structure templates at a configuration.
    Catalog(Common),
    /// Replay a result document and sample the Bloch trajectory.
    Trajectory(TrajectoryArgs),
    /// Admissibility map over (alpha, t_x) for n-sequences.
    Regions(RegionArgs),
}

#[derive(Args)]
struct Common {
    /// Angle between the control axes, radians.
    #[arg(long)]
    alpha: Option<f64>,
    /// Time ratio of V to X rotations, in ]0, 1].
    #[arg(long)]
    kappa: Option<f64>,
    /// `positive` (default) or `bidirectional`
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Output format (default json)
    #[arg(long, value_enum)]
    out: Option<Format>,
    /// File of `key = value` defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    /// axis=x,y,z:angle=r | gate=I|X_pi|Y_pi|Z_pi|H | quat=w,x,y,z
    #[arg(long)]
    target: Option<String>,
    /// Phase-blind residual accepted, in ]0, 1e-6]
    #[arg(long)]
    tol: Option<f64>,
    /// Scan resolution over the internal angle of n >= 4 rows.
    #[arg(long)]
    grid: Option<usize>,
    /// Run every target listed in this file, one per line.
    #[arg(long)]
    seed_suite: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    target: Option<String>,
    /// Phase-blind residual accepted, in ]0, 1e-6]
    #[arg(long)]
    tol: Option<f64>,
    /// Samples per pulse angle.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Input format of the result document read from stdin or --input.
    #[arg(long, value_enum, default_value = "json")]
    from: InputFormat,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Initial Bloch vector.
    #[arg(long, default_value = "1,0,0")]
    r0: String,
    #[arg(long, default_value_t = 16)]
    samples: usize,
    #[arg(long, value_enum)]
    out: Option<Format>,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, value_parser = parse_mode, default_value = "positive")]
    mode: Mode,
    #[arg(long, default_value_t = 40)]
    alpha_steps: usize,
    #[arg(long, default_value_t = 40)]
    tx_steps: usize,
    /// Samples per outer angle.
    #[arg(long, default_value_t = 12)]
    outer_grid: usize,
    #[arg(long, value_enum)]
    out: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Json,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "positive" => Ok(Mode::PositiveOnly),
        "bidirectional" => Ok(Mode::Bidirectional),
        _ => Err(format!("mode must be positive or bidirectional, not {s:?}")),
    }
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Flags merged over the optional defaults file.
struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
                settings::parse(&text).map_err(usage)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { file })
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| usage(format!("bad value {v:?} for {key} in config file")))
            })
            .transpose()
    }

    fn text(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.file.get(key).cloned())
    }

    fn config(&self, c: &Common) -> Result<ControlConfig, Failure> {
        let alpha = self
            .pick(c.alpha, "alpha")?
            .ok_or_else(|| usage("--alpha is required"))?;
        let kappa = self
            .pick(c.kappa, "kappa")?
            .ok_or_else(|| usage("--kappa is required"))?;
        let mode = match (c.mode, self.file.get("mode")) {
            (Some(m), _) => m,
            (None, Some(s)) => parse_mode(s).map_err(usage)?,
            (None, None) => Mode::PositiveOnly,
        };
        Ok(ControlConfig::new(alpha, kappa, mode)?)
    }

    fn format(&self, flag: Option<Format>) -> Result<Format, Failure> {
        match (flag, self.file.get("out")) {
            (Some(f), _) => Ok(f),
            (None, Some(s)) => {
                Format::from_str(s, true).map_err(|_| usage(format!("bad out format {s:?}")))
            }
            (None, None) => Ok(Format::Json),
        }
    }

    fn target(&self, flag: Option<String>) -> Result<UnitQuaternion, Failure> {
        let spec = self
            .text(flag, "target")
            .ok_or_else(|| usage("--target is required"))?;
        parse_target(&spec)
    }
}

fn parse_target(spec: &str) -> Result<UnitQuaternion, Failure> {
    let parsed = target::parse(spec).map_err(usage)?;
    for w in parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.target)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn synth_cmd(a: SynthArgs) -> Outcome {
    let s = Settings::load(a.common.config.as_ref())?;
    let config = s.config(&a.common)?;
    let format = s.format(a.common.out)?;
    let mut opts = SynthesisOptions::default();
    if let Some(t) = s.pick(a.tol, "tol")? {
        opts.tolerance = t;
    }
    if let Some(g) = s.pick(a.grid, "grid")? {
        opts.grid = g;
    }
    let Some(path) = a.seed_suite else {
        let target = s.target(a.target)?;
        let r = synthesize(&target, &config, &opts)?;
        return Ok(match format {
            Format::Json => pretty(&synthesis_json(&target, &config, &r)),
            Format::Csv => sequence_csv(&r.best),
        });
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let targets: Vec<UnitQuaternion> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_target)
        .collect::<Result<_, _>>()?;
    let mut failed = None;
    let mut docs = Vec::new();
    let mut csv = String::from("index,n,total_cost,residual,template\n");
    for (i, t) in targets.iter().enumerate() {
        match synthesize(t, &config, &opts) {
            Ok(r) => {
                csv.push_str(&format!(
                    "{i},{},{},{},{}\n",
                    r.best.len(),
                    sig(r.best.total_cost(), 15),
                    sig(r.residual, 15),
                    r.template_id
                ));
                docs.push(synthesis_json(t, &config, &r));
            }
            Err(e @ Error::SynthesisFailure { best_residual }) => {
                csv.push_str(&format!("{i},,,{},\n", sig(best_residual, 15)));
                docs.push(json!({ "schema": SCHEMA, "index": i, "error": e.to_string() }));
                failed = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let body = match format {
        Format::Json => pretty(&Value::Array(docs)),
        Format::Csv => csv,
    };
    match failed {
        // the batch is still printed; the exit code reports the failure
        Some(e) => {
            print!("{body}");
            Err(e.into())
        }
        None => Ok(body),
    }
}

fn oracle_cmd(a: OracleArgs) -> Outcome {
    let s = Settings::load(a.common.config.as_ref())?;
    let config = s.config(&a.common)?;
    let format = s.format(a.common.out)?;
    let target = s.target(a.target)?;
    let mut opts = OracleOptions::default();
    if let Some(t) = s.pick(a.tol, "tol")? {
        opts.tolerance = t;
    }
    if let Some(g) = s.pick(a.grid, "grid")? {
        opts.angle_grid = g;
    }
    if let Some(m) = s.pick(a.max_len, "max-len")? {
        opts.max_len = m;
    }
    let r = brute_force_min_time(&target, &config, &opts)?;
    Ok(match format {
        Format::Json => pretty(&oracle_json(&target, &config, &r)),
        Format::Csv => sequence_csv(&r.sequence),
    })
}

fn catalog_cmd(c: Common) -> Outcome {
    let s = Settings::load(c.config.as_ref())?;
    let config = s.config(&c)?;
    let rows = enumerate_templates(&config);
    Ok(match s.format(c.out)? {
        Format::Json => pretty(&serde_json::to_value(&rows).expect("templates serialize")),
        Format::Csv => {
            let mut out = String::from("id,n,tabulated,t_max\n");
            for r in &rows {
                let n = match r.length {
                    SequenceLength::Finite(n) => n.to_string(),
                    SequenceLength::Infinite => "inf".into(),
                };
                let t_max = r.t_max.map(|t| sig(t, 15)).unwrap_or_default();
                out.push_str(&format!("{},{n},{},{t_max}\n", r.id, r.tabulated));
            }
            out
        }
    })
}

fn trajectory_cmd(a: TrajectoryArgs) -> Outcome {
    let InputFormat::Json = a.from;
    let mut text = String::new();
    match &a.input {
        Some(p) => {
            text = std::fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?
        }
        None => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
        }
    }
    let (config, seq) = read_result(&text)?;
    let r0: Vec<f64> =
        a.r0.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("bad --r0 component {p:?}")))
            })
            .collect::<Result<_, _>>()?;
    let [x, y, z] = r0[..] else {
        return Err(usage("--r0 needs three components"));
    };
    let samples = bloch_trajectory(&seq, &Vector3::new(x, y, z), a.samples, &config)?;
    if a.out == Some(Format::Csv) {
        return Ok(trajectory_csv(&samples));
    }
    let end = seq.unitary(&config)?;
    let num = |v: f64| json!(round_sig(v, 15));
    let points: Vec<Value> = samples
        .iter()
        .map(|(t, r)| json!({ "t": num(*t), "r": [num(r.x), num(r.y), num(r.z)] }))
        .collect();
    Ok(pretty(&json!({
        "schema": SCHEMA,
        "config": config,
        "total_cost": num(seq.total_cost()),
        "endpoint": { "w": num(end.w()), "x": num(end.v().x), "y": num(end.v().y), "z": num(end.v().z) },
        "samples": points,
    })))
}

fn regions_cmd(a: RegionArgs) -> Outcome {
    if a.alpha_steps == 0 || a.tx_steps == 0 {
        return Err(usage("--alpha-steps and --tx-steps must be positive"));
    }
    let span = if a.mode == Mode::PositiveOnly {
        2.0 * PI
    } else {
        PI
    };
    let mid = |i: usize, m: usize, w: f64| (i as f64 + 0.5) * w / m as f64;
    let alphas: Vec<f64> = (0..a.alpha_steps)
        .map(|i| mid(i, a.alpha_steps, PI))
        .collect();
    let t_xs: Vec<f64> = (0..a.tx_steps).map(|j| mid(j, a.tx_steps, span)).collect();
    let opts = RegionOptions {
        outer_grid: a.outer_grid,
        ..RegionOptions::default()
    };
    let cells = region_scan(&alphas, &t_xs, a.n, a.kappa, a.mode, &opts)?;
    Ok(match a.out.unwrap_or(Format::Csv) {
        Format::Csv => region_csv(&cells),
        Format::Json => pretty(&serde_json::to_value(&cells).expect("cells serialize")),
    })
}

fn threads_from_env() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SU2OPT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        usage(format!(
            "SU2OPT_THREADS must be a positive integer, not {v:?}"
        ))
    })?;
    if n == 0 {
        return Err(usage("SU2OPT_THREADS must be at least 1"));
    }
    // a second call from the same process is harmless, so the error is ignored
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    threads_from_env()?;
    match cli.command {
        Command::Synth(a) => synth_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Catalog(c) => catalog_cmd(c),
        Command::Trajectory(a) => trajectory_cmd(a),
        Command::Regions(a) => regions_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(body) => {
            print!("{body}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `su2opt --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Domain(_) | Error::DegenerateRotation => 2,
                Error::SynthesisFailure { .. } | Error::OracleMiss { .. } => 3,
                Error::Internal(_) => 1,
            })
        }
    }
}
