//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 an experiment criterion failed,
//! 3 runtime error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::experiments::{
    aq_clt_experiment, graph_fluctuation_experiment, lln_experiment, rq_clt_experiment,
    with_threads, ExperimentConfig, ExperimentReport, ModelSpec, SCHEMA_VERSION,
};
use crate::graphgen::{decompose, read_graph, write_graph, MultiGraph};
use crate::ising1d::IsingParams;
use crate::limits::{cm12_limits, Cm12Limits};
use crate::mcmc::{
    estimate_moments, heat_bath_sweep, run_chain, write_trace_csv, MomentEstimate, SpinState,
};
use crate::observables::{quenched_observables, ConfigurationSampler, QuenchedObservables};
use crate::rng::{stream, Domain};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cmising",
    version,
    about = "Ising models on degree-1/2 configuration-model random graphs"
)]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "CMISING_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random graph and write it in edge-list format.
    Generate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact logZ, mean and variance of S_N on one graph.
    Exact {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        ising: IsingArgs,
        /// Read the graph from a file instead of drawing one.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw spin sums S_N on one graph (exact, or heat-bath for degrees above 2).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        ising: IsingArgs,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long = "M", default_value_t = 1000)]
        samples: usize,
        /// Heat-bath burn-in sweeps when no exact sampler applies (default 10 N).
        #[arg(long)]
        burn_in: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Central-limit experiments.
    Clt {
        #[arg(long, value_enum)]
        mode: CltMode,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Law-of-large-numbers deviation probabilities along a grid of sizes.
    Lln {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Comma-separated increasing system sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 1000, 10000])]
        grid: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Limiting chi, sigma_G^2 and sigma_aq^2 for degree-{1,2} graphs.
    VarianceTable {
        /// One or more comma-separated degree-2 fractions.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[command(flatten)]
        ising: IsingArgs,
        #[arg(long = "T")]
        truncation: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Heat-bath estimates of mean and variance of S_N against exact values.
    McmcCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        ising: IsingArgs,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        sweeps: usize,
        /// Discarded sweeps (default 10 N, capped below the sweep count).
        #[arg(long)]
        burn_in: Option<usize>,
        /// Also write the (sweep, S_N) trace of a separate run to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CltMode {
    Rq,
    Aq,
    Xn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// cm2, cm12 or custom.
    #[arg(long, default_value = "cm2")]
    pub model: String,
    /// Fraction of degree-2 vertices (cm12).
    #[arg(long)]
    pub p: Option<f64>,
    /// Degree law for custom models, e.g. "1:0.2,3:0.8".
    #[arg(long)]
    pub pmf: Option<String>,
    #[arg(long = "N", default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct IsingArgs {
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long = "B", default_value_t = 0.2, allow_hyphen_values = true)]
    pub field: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ising: IsingArgs,
    #[arg(long = "R", default_value_t = 1)]
    pub replicas: usize,
    #[arg(long = "M", default_value_t = 1000)]
    pub samples: usize,
    #[arg(long = "T")]
    pub truncation: Option<usize>,
    /// Significance level of the normality tests.
    #[arg(long, default_value_t = 0.01)]
    pub level: f64,
    /// Relative tolerance of the variance checks.
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    #[arg(long)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code. Messages go to stderr, results to stdout or `--out`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return EXIT_USAGE;
    }
    let threads = cli.threads;
    match with_threads(threads, move || execute(cli.command)) {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Ok(Err(Failure::Runtime(msg))) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn params(ising: IsingArgs) -> Result<IsingParams, Failure> {
    IsingParams::new(ising.beta, ising.field).map_err(usage)
}

fn model_spec(m: &ModelArgs) -> Result<ModelSpec, Failure> {
    ModelSpec::from_parts(&m.model, m.p, m.pmf.as_deref()).map_err(usage)
}

/// The graph named by `--graph`, or replica 0 of the model under `--seed`.
fn load_graph(
    m: &ModelArgs,
    graph: &Option<PathBuf>,
) -> Result<(MultiGraph, Option<u64>), Failure> {
    match graph {
        Some(path) => {
            let file = File::open(path).map_err(|e| {
                Failure::Runtime(format!("cannot read graph file {}: {e}", path.display()))
            })?;
            let (g, seed) = read_graph(BufReader::new(file))?;
            Ok((g, Some(seed)))
        }
        None => {
            let model = model_spec(m)?;
            if m.n == 0 {
                return Err(Failure::Usage("N must be positive".into()));
            }
            Ok((model.replica_graph(m.n, m.seed, 0)?, None))
        }
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| {
                Failure::Runtime(format!("cannot write output file {}: {e}", path.display()))
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn write_err(path: &Option<PathBuf>, e: impl std::fmt::Display) -> Failure {
    let target = path
        .as_deref()
        .map(Path::display)
        .map(|d| d.to_string())
        .unwrap_or_else(|| "stdout".into());
    Failure::Runtime(format!("cannot write output to {target}: {e}"))
}

/// Emits `{schema_version, command, config, result}` as JSON, or for CSV a
/// `# config:` comment line followed by `body`.
fn emit<C: Serialize, R: Serialize>(
    output: &OutputArgs,
    default: Format,
    command: &str,
    config: &C,
    result: &R,
    csv_body: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
) -> Result<(), Failure> {
    let mut w = open_output(&output.out)?;
    let res: crate::Result<()> = (|| {
        match output.format.unwrap_or(default) {
            Format::Json => {
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": command,
                    "config": config,
                    "result": result,
                });
                serde_json::to_writer_pretty(&mut w, &doc)?;
                writeln!(w)?;
            }
            Format::Csv => {
                writeln!(
                    w,
                    "# config: {}",
                    serde_json::json!({"schema_version": SCHEMA_VERSION, "command": command, "config": config})
                )?;
                csv_body(&mut w)?;
            }
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e| write_err(&output.out, e))
}

fn emit_report(output: &OutputArgs, report: &ExperimentReport) -> Result<i32, Failure> {
    let mut w = open_output(&output.out)?;
    let res: crate::Result<()> = (|| {
        match output.format.unwrap_or(Format::Json) {
            Format::Json => {
                report.write_json(&mut w)?;
                writeln!(w)?;
            }
            Format::Csv => report.write_csv(&mut w)?,
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e| write_err(&output.out, e))?;
    for c in &report.criteria {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAIL })
}

fn experiment_config(a: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let mut c = ExperimentConfig::new(model_spec(&a.model)?, a.model.n, params(a.ising)?);
    c.seed = a.model.seed;
    c.replicas = a.replicas;
    c.samples = a.samples;
    c.truncation = a.truncation;
    c.level = a.level;
    c.variance_tolerance = a.tolerance;
    c.burn_in = a.burn_in;
    c.validate().map_err(usage)?;
    Ok(c)
}

#[derive(Serialize)]
struct GraphEcho<'a> {
    model: &'a str,
    p: Option<f64>,
    pmf: Option<&'a str>,
    #[serde(rename = "N")]
    n: usize,
    seed: Option<u64>,
    graph: Option<String>,
    beta: f64,
    #[serde(rename = "B")]
    field: f64,
}

impl<'a> GraphEcho<'a> {
    fn new(
        m: &'a ModelArgs,
        graph: &Option<PathBuf>,
        g: &MultiGraph,
        seed: Option<u64>,
        p: IsingParams,
    ) -> Self {
        let from_file = graph.is_some();
        GraphEcho {
            model: if from_file { "file" } else { &m.model },
            p: if from_file { None } else { m.p },
            pmf: if from_file { None } else { m.pmf.as_deref() },
            n: g.n(),
            seed: seed.or(Some(m.seed)),
            graph: graph.as_ref().map(|p| p.display().to_string()),
            beta: p.beta,
            field: p.field,
        }
    }
}

#[derive(Serialize)]
struct SampleResult {
    exact: bool,
    #[serde(rename = "S_N")]
    sums: Vec<i64>,
}

#[derive(Serialize)]
struct McmcResult {
    sweeps: usize,
    burn_in: usize,
    estimate: MomentEstimate,
    exact: Option<QuenchedObservables>,
    passed: Option<bool>,
}

fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Generate { model, out } => {
            let chosen = model_spec(&model)?;
            let g = chosen
                .replica_graph(model.n, model.seed, 0)
                .map_err(usage)?;
            let mut w = open_output(&out)?;
            write_graph(&g, model.seed, &mut w).map_err(|e| write_err(&out, e))?;
            w.flush().map_err(|e| write_err(&out, e))?;
            Ok(EXIT_OK)
        }
        Command::Exact {
            model,
            ising,
            graph,
            output,
        } => {
            let p = params(ising)?;
            let (g, seed) = load_graph(&model, &graph)?;
            let decomp = decompose(&g)?;
            let obs = quenched_observables(p, &decomp);
            let echo = GraphEcho::new(&model, &graph, &g, seed, p);
            emit(&output, Format::Json, "exact", &echo, &obs, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.serialize(obs)?;
                c.flush()?;
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Sample {
            model,
            ising,
            graph,
            samples,
            burn_in,
            output,
        } => {
            let p = params(ising)?;
            let (g, seed) = load_graph(&model, &graph)?;
            let seed = seed.unwrap_or(model.seed);
            let (exact, sums) = match decompose(&g) {
                Ok(decomp) => {
                    let mut rng = stream(seed, Domain::Spins, 0);
                    let mut sampler = ConfigurationSampler::new(p, &decomp);
                    (
                        true,
                        (0..samples).map(|_| sampler.sample_sum(&mut rng)).collect(),
                    )
                }
                Err(_) => {
                    let adj = g.adjacency();
                    let mut rng = stream(seed, Domain::Chain, 0);
                    let mut state = SpinState::random(&adj, &mut rng);
                    for _ in 0..burn_in.unwrap_or(10 * g.n()) {
                        heat_bath_sweep(&mut state, p, &adj, &mut rng);
                    }
                    (false, run_chain(&mut state, p, &adj, samples, &mut rng))
                }
            };
            let echo = GraphEcho::new(&model, &graph, &g, Some(seed), p);
            let result = SampleResult { exact, sums };
            emit(&output, Format::Json, "sample", &echo, &result, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["sample", "S_N"])?;
                for (i, s) in result.sums.iter().enumerate() {
                    c.serialize((i, s))?;
                }
                c.flush()?;
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::Clt { mode, exp, output } => {
            let config = experiment_config(&exp)?;
            let report = match mode {
                CltMode::Rq => rq_clt_experiment(&config),
                CltMode::Aq => aq_clt_experiment(&config),
                CltMode::Xn => graph_fluctuation_experiment(&config),
            }
            .map_err(|e| match e {
                Error::InvalidParams(_) => usage(e),
                other => other.into(),
            })?;
            emit_report(&output, &report)
        }
        Command::Lln {
            exp,
            eps,
            grid,
            output,
        } => {
            let config = experiment_config(&exp)?;
            let report = lln_experiment(&config, eps, &grid).map_err(|e| match e {
                Error::InvalidParams(_) | Error::TooLarge { .. } => usage(e),
                other => other.into(),
            })?;
            emit_report(&output, &report)
        }
        Command::VarianceTable {
            p,
            ising,
            truncation,
            output,
        } => {
            let params = params(ising)?;
            if let Some(bad) = p.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return Err(Failure::Usage(format!("p = {bad} is not in [0, 1)")));
            }
            if truncation.is_some_and(|t| t < 2) {
                return Err(Failure::Usage("T must be at least 2".into()));
            }
            let rows: Vec<Cm12Limits> = p
                .iter()
                .map(|&q| cm12_limits(params, q, truncation))
                .collect();
            let echo = serde_json::json!({"p": p, "beta": params.beta, "B": params.field, "T": truncation});
            emit(&output, Format::Csv, "variance-table", &echo, &rows, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record([
                    "p",
                    "beta",
                    "B",
                    "T",
                    "pressure",
                    "magnetization",
                    "chi",
                    "sigma_G2",
                    "sigma_aq2",
                    "tail_bound",
                ])?;
                for r in &rows {
                    c.serialize((
                        r.p,
                        params.beta,
                        params.field,
                        r.truncation,
                        r.pressure,
                        r.magnetization,
                        r.chi,
                        r.sigma_g2,
                        r.sigma_aq2,
                        r.tail_bound,
                    ))?;
                }
                c.flush()?;
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
        Command::McmcCheck {
            model,
            ising,
            graph,
            sweeps,
            burn_in,
            trace,
            output,
        } => {
            let p = params(ising)?;
            let (g, seed) = load_graph(&model, &graph)?;
            let seed = seed.unwrap_or(model.seed);
            let burn_in = burn_in.unwrap_or(10 * g.n()).min(sweeps.saturating_sub(1));
            let mut rng = stream(seed, Domain::Chain, 0);
            let estimate = estimate_moments(&g, p, sweeps, burn_in, &mut rng).map_err(usage)?;
            if let Some(path) = &trace {
                let adj = g.adjacency();
                let mut rng = stream(seed, Domain::Chain, 1);
                let mut state = SpinState::random(&adj, &mut rng);
                let series = run_chain(&mut state, p, &adj, sweeps, &mut rng);
                let f = File::create(path).map_err(|e| {
                    Failure::Runtime(format!("cannot write trace file {}: {e}", path.display()))
                })?;
                write_trace_csv(&series, 1, BufWriter::new(f)).map_err(|e| write_err(&trace, e))?;
            }
            let exact = decompose(&g).ok().map(|d| quenched_observables(p, &d));
            let passed = exact.map(|x| {
                (estimate.mean_s - x.mean_s).abs() <= 4.0 * estimate.mean_s_se
                    && (estimate.var_s - x.var_s).abs() <= 4.0 * estimate.var_s_se
            });
            let echo = GraphEcho::new(&model, &graph, &g, Some(seed), p);
            let result = McmcResult {
                sweeps,
                burn_in,
                estimate,
                exact,
                passed,
            };
            emit(&output, Format::Json, "mcmc-check", &echo, &result, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record([
                    "meanS",
                    "meanS_se",
                    "varS",
                    "varS_se",
                    "exact_meanS",
                    "exact_varS",
                    "passed",
                ])?;
                c.serialize((
                    estimate.mean_s,
                    estimate.mean_s_se,
                    estimate.var_s,
                    estimate.var_s_se,
                    exact.map(|x| x.mean_s),
                    exact.map(|x| x.var_s),
                    passed,
                ))?;
                c.flush()?;
                Ok(())
            })?;
            Ok(if passed == Some(false) {
                EXIT_FAIL
            } else {
                EXIT_OK
            })
        }
    }
}
