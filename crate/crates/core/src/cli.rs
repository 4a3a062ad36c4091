//! Command-line front end: argument parsing, truth sidecars, table output.
//!
//! Tables are comma-separated with a `# key = value` metadata header that
//! [`RunConfig::from_header`] turns back into a runnable configuration.
//! Thread count and output path are not recorded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::decoders::{bf_decode, mv_decode};
use crate::embedding::{broken_chains, build_embedding};
use crate::error::{invalid, Error, Result};
use crate::experiments::{run_experiment, sweep_landscape, Arm, ExperimentSpec, Landscape, SuccessCurve};
use crate::instances::{
    generate_instance, read_instance, solve_exhaustive, write_instance, GroundTruth, LogicalProblem,
};
use crate::parity::PairCodebook;
use crate::sampler::Scheme;
use crate::spin::{SpinConfig, RNG_NAME};

pub const TABLE_FORMAT: &str = "parity-bench-table/1";
pub const THREADS_ENV: &str = "PARITY_BENCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "parity-bench", version, about = "Success-probability benchmarks for embedded Ising problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random all-to-all instance.
    Gen(GenArgs),
    /// Enumerate the ground states and write the truth sidecar.
    Solve(SolveArgs),
    /// Success probability against sample size for one (scheme, arm, beta, gamma).
    Run(RunArgs),
    /// Success-probability landscape over a beta x gamma grid.
    Sweep(SweepArgs),
    /// Decode one readout file (BF for slhz/slhz3, MV for me).
    Decode(DecodeArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Couplings are uniform in [-range, range].
    #[arg(long, default_value_t = 0.25)]
    pub range: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Sidecar path; defaults to `<instance>.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct CommonRunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub scheme: String,
    #[arg(long)]
    pub arm: String,
    /// Sample size M.
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = crate::experiments::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output table; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonRunArgs,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonRunArgs,
    /// Comma-separated beta grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub betas: Vec<f64>,
    /// Comma-separated gamma grid.
    #[arg(long, value_delimiter = ',', required = true)]
    pub gammas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub scheme: String,
    /// Logical spin count.
    #[arg(long)]
    pub n: usize,
    /// Whitespace or comma separated ±1 values; `#` starts a comment.
    #[arg(long)]
    pub readout: PathBuf,
    #[arg(long, default_value_t = crate::decoders::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Coin seed for majority-vote ties.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Fully resolved `run` / `sweep` configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub instance: PathBuf,
    pub truth: PathBuf,
    pub scheme: Scheme,
    pub arm: Arm,
    pub beta: f64,
    pub gamma: f64,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub samples: u64,
    pub reps: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn default_truth_path(instance: &Path) -> PathBuf {
    instance.with_extension("truth.json")
}

impl RunConfig {
    fn from_common(command: &str, c: &CommonRunArgs) -> Result<Self> {
        Ok(RunConfig {
            command: command.into(),
            instance: c.instance.clone(),
            truth: c.truth.clone().unwrap_or_else(|| default_truth_path(&c.instance)),
            scheme: c.scheme.parse()?,
            arm: c.arm.parse()?,
            beta: 0.0,
            gamma: 0.0,
            betas: Vec::new(),
            gammas: Vec::new(),
            samples: c.samples,
            reps: c.reps,
            seed: c.seed,
            output: c.out.clone(),
            threads: c.threads,
        })
    }

    pub fn from_run(a: &RunArgs) -> Result<Self> {
        Ok(RunConfig { beta: a.beta, gamma: a.gamma, ..Self::from_common("run", &a.common)? })
    }

    pub fn from_sweep(a: &SweepArgs) -> Result<Self> {
        Ok(RunConfig { betas: a.betas.clone(), gammas: a.gammas.clone(), ..Self::from_common("sweep", &a.common)? })
    }

    pub fn spec(&self, instance_id: &str) -> ExperimentSpec {
        ExperimentSpec {
            scheme: self.scheme,
            arm: self.arm,
            beta: self.beta,
            gamma: self.gamma,
            samples: self.samples,
            reps: self.reps,
            seed: self.seed,
            instance_id: instance_id.into(),
        }
    }

    fn header_entries(&self, instance_id: &str) -> Vec<(&'static str, String)> {
        let mut h = vec![
            ("format", TABLE_FORMAT.to_string()),
            ("tool_version", env!("CARGO_PKG_VERSION").to_string()),
            ("command", self.command.clone()),
            ("instance", self.instance.display().to_string()),
            ("truth", self.truth.display().to_string()),
            ("instance_id", instance_id.to_string()),
            ("scheme", self.scheme.to_string()),
            ("arm", self.arm.to_string()),
        ];
        if self.command == "sweep" {
            h.push(("betas", join(&self.betas)));
            h.push(("gammas", join(&self.gammas)));
        } else {
            h.push(("beta", self.beta.to_string()));
            h.push(("gamma", self.gamma.to_string()));
        }
        h.push(("samples", self.samples.to_string()));
        h.push(("reps", self.reps.to_string()));
        h.push(("seed", self.seed.to_string()));
        h.push(("rng", RNG_NAME.to_string()));
        h
    }

    /// Rebuilds the configuration recorded in a table header.
    pub fn from_header(table: &str) -> Result<Self> {
        let map = parse_header(table);
        let get = |k: &str| map.get(k).cloned().ok_or_else(|| Error::Parse(format!("header lacks {k:?}")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Parse(format!("bad {k}"))) };
        let list = |k: &str| -> Result<Vec<f64>> {
            get(k)?.split(',').map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad {k}")))).collect()
        };
        if get("format")? != TABLE_FORMAT {
            return Err(Error::Parse("unknown table format".into()));
        }
        let command = get("command")?;
        let sweep = command == "sweep";
        Ok(RunConfig {
            instance: get("instance")?.into(),
            truth: get("truth")?.into(),
            scheme: get("scheme")?.parse()?,
            arm: get("arm")?.parse()?,
            beta: if sweep { 0.0 } else { num("beta")? },
            gamma: if sweep { 0.0 } else { num("gamma")? },
            betas: if sweep { list("betas")? } else { Vec::new() },
            gammas: if sweep { list("gammas")? } else { Vec::new() },
            samples: get("samples")?.parse().map_err(|_| Error::Parse("bad samples".into()))?,
            reps: get("reps")?.parse().map_err(|_| Error::Parse("bad reps".into()))?,
            seed: get("seed")?.parse().map_err(|_| Error::Parse("bad seed".into()))?,
            command,
            output: None,
            threads: None,
        })
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// `# key = value` lines at the top of a table.
pub fn parse_header(table: &str) -> BTreeMap<String, String> {
    table
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.trim_start_matches('#').split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

fn write_header(out: &mut String, entries: &[(&str, String)]) {
    for (k, v) in entries {
        writeln!(out, "# {k} = {v}").unwrap();
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthFile {
    format_version: u32,
    instance_id: String,
    #[serde(flatten)]
    truth: GroundTruth,
}

pub fn write_truth(truth: &GroundTruth, instance_id: &str, path: &Path) -> Result<()> {
    let file = TruthFile { format_version: 1, instance_id: instance_id.into(), truth: truth.clone() };
    let text = serde_json::to_string_pretty(&file).expect("truth serialization cannot fail") + "\n";
    fs::write(path, text)?;
    Ok(())
}

/// Loads a sidecar and checks that it belongs to `problem`.
pub fn read_truth(path: &Path, problem: &LogicalProblem) -> Result<GroundTruth> {
    let text = fs::read_to_string(path)?;
    let file: TruthFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if file.instance_id != problem.id() {
        return Err(Error::Validation(format!(
            "truth sidecar {} belongs to instance {}, not {}",
            path.display(),
            file.instance_id,
            problem.id()
        )));
    }
    Ok(file.truth)
}

pub fn curve_table(cfg: &RunConfig, instance_id: &str, curve: &SuccessCurve) -> String {
    let mut out = String::new();
    write_header(&mut out, &cfg.header_entries(instance_id));
    out.push_str("scheme,arm,beta,gamma,M,success,stderr,reps\n");
    let s = &curve.spec;
    for ((m, p), e) in curve.checkpoints.iter().zip(&curve.success).zip(&curve.stderr) {
        writeln!(out, "{},{},{},{},{m},{p},{e},{}", s.scheme, s.arm, s.beta, s.gamma, s.reps).unwrap();
    }
    out
}

pub fn landscape_table(cfg: &RunConfig, instance_id: &str, land: &Landscape) -> String {
    let mut out = String::new();
    let mut entries = cfg.header_entries(instance_id);
    let best = land.best();
    entries.push(("argmax_beta", best.beta.to_string()));
    entries.push(("argmax_gamma", best.gamma.to_string()));
    write_header(&mut out, &entries);
    out.push_str("scheme,arm,beta,gamma,M,success,stderr\n");
    for c in &land.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            land.base.scheme, land.base.arm, c.beta, c.gamma, land.base.samples, c.success, c.stderr
        )
        .unwrap();
    }
    out
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return invalid("thread count must be at least 1");
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Resource(e.to_string()))?;
    Ok(pool.install(f))
}

/// Executes a `run` or `sweep` configuration and returns the table text.
pub fn execute(cfg: &RunConfig) -> Result<String> {
    let problem = read_instance(&cfg.instance)?;
    let truth = read_truth(&cfg.truth, &problem)?;
    let id = problem.id();
    let spec = cfg.spec(&id);
    match cfg.command.as_str() {
        "run" => {
            let curve = with_threads(cfg.threads, || run_experiment(&spec, &problem, &truth))??;
            Ok(curve_table(cfg, &id, &curve))
        }
        "sweep" => {
            let land = with_threads(cfg.threads, || {
                sweep_landscape(&spec, &cfg.betas, &cfg.gammas, cfg.samples, &problem, &truth)
            })??;
            Ok(landscape_table(cfg, &id, &land))
        }
        other => invalid(format!("unknown command {other}")),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_gen(a: &GenArgs) -> Result<String> {
    let problem = generate_instance(a.n, a.range, a.seed)?;
    write_instance(&problem, &a.out)?;
    let mut s = format!(
        "wrote {} (n={}, {} couplings, id {})\n",
        a.out.display(),
        a.n,
        problem.couplings().len(),
        problem.id()
    );
    for scheme in [Scheme::Slhz, Scheme::Slhz3, Scheme::Me] {
        writeln!(s, "{scheme} k={}", scheme.size(a.n)).unwrap();
    }
    Ok(s)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<String> {
    let problem = read_instance(&a.instance)?;
    let truth = solve_exhaustive(&problem)?;
    let path = a.truth.clone().unwrap_or_else(|| default_truth_path(&a.instance));
    write_truth(&truth, &problem.id(), &path)?;
    let mut s = format!(
        "energy={}\nstates={}\np_exhaustive={}\ntruth={}\n",
        truth.energy,
        truth.states.len(),
        truth.p_exhaustive,
        path.display()
    );
    for z in truth.representatives() {
        writeln!(s, "ground {z:?}").unwrap();
    }
    Ok(s)
}

pub fn parse_readout(text: &str) -> Result<SpinConfig> {
    let values: Vec<i8> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(Error::Parse(format!("readout value {other:?} is not ±1"))),
        })
        .collect::<Result<_>>()?;
    SpinConfig::new(values)
}

pub fn cmd_decode(a: &DecodeArgs) -> Result<String> {
    let scheme: Scheme = a.scheme.parse()?;
    let r = parse_readout(&fs::read_to_string(&a.readout)?)?;
    let expected = scheme.size(a.n);
    if r.len() != expected {
        return invalid(format!("readout has {} values, scheme {scheme} with n={} needs {expected}", r.len(), a.n));
    }
    match scheme {
        Scheme::Slhz | Scheme::Slhz3 => {
            let out = bf_decode(&r, &PairCodebook::new(a.n)?, a.max_iter)?;
            Ok(format!(
                "converged={}\niterations={}\ncodeword={}\nlogical={}\n",
                out.converged, out.iterations, out.codeword, out.logical
            ))
        }
        Scheme::Me => {
            let e = build_embedding(a.n)?;
            let broken: Vec<String> = broken_chains(&r, &e).iter().map(|c| c.to_string()).collect();
            let logical = mv_decode(&r, &e, a.seed)?;
            Ok(format!("broken_chains={}\nlogical={logical}\n", broken.join(",")))
        }
        Scheme::Logical => invalid("scheme logical has no decoder"),
    }
}

/// Runs one parsed command line; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a).and_then(|s| emit(&s, None)),
        Command::Solve(a) => cmd_solve(a).and_then(|s| emit(&s, None)),
        Command::Decode(a) => cmd_decode(a).and_then(|s| emit(&s, None)),
        Command::Run(a) => RunConfig::from_run(a).and_then(|c| execute(&c).and_then(|t| emit(&t, c.output.as_deref()))),
        Command::Sweep(a) => {
            RunConfig::from_sweep(a).and_then(|c| execute(&c).and_then(|t| emit(&t, c.output.as_deref())))
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("parity-bench: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 1,
        _ => 2,
    }
}
