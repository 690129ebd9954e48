//! Finite-N statistical checks of the limit theorems.
//!
//! Every replica draws its graph and its spins from its own stream, replicas
//! run in parallel and results are merged in replica order, so a report
//! depends on the configuration and seed only, never on the worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphgen::{
    cm12, cm2, decompose, line_length_pmf, pair_half_edges, DegreeModel, MultiGraph,
};
use crate::ising1d::{magnetization_1d, susceptibility_1d, IsingParams};
use crate::limits::{
    chi_cm12, covariance_h, default_truncation, gammas, magnetization_cm12, sigma_g2,
    sigma_g2_double_diagonal, DEFAULT_TAIL_TOLERANCE,
};
use crate::mcmc::{heat_bath_sweep, SpinState};
use crate::observables::{spin_moments, ConfigurationSampler};
use crate::rng::{stream, Domain};
use crate::stats::{histogram, ks_test, linear_fit, normal_cdf, summarize, Histogram, KsResult};

pub use crate::stats::{binomial_deviation_probability, kolmogorov_sf, ks_statistic};

pub const SCHEMA_VERSION: u32 = 1;

/// Spin draws per stream block; blocks are the unit of parallel work
/// within one graph.
const BLOCK: usize = 4096;
const BLOCK_BITS: u32 = 24;

fn spin_stream(seed: u64, graph_index: u64, block: u64) -> crate::rng::Stream {
    stream(seed, Domain::Spins, (graph_index << BLOCK_BITS) | block)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Cm2,
    Cm12 { p: f64 },
    Custom { pmf: DegreeModel },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cm2 => "cm2",
            ModelSpec::Cm12 { .. } => "cm12",
            ModelSpec::Custom { .. } => "custom",
        }
    }

    /// Builds a model from its name plus `p` (cm12) or a pmf string (custom).
    pub fn from_parts(name: &str, p: Option<f64>, pmf: Option<&str>) -> Result<Self> {
        let model = match name {
            "cm2" => ModelSpec::Cm2,
            "cm12" => ModelSpec::Cm12 {
                p: p.ok_or_else(|| Error::InvalidParams("model cm12 needs p".into()))?,
            },
            "custom" => ModelSpec::Custom {
                pmf: DegreeModel::parse(
                    pmf.ok_or_else(|| Error::InvalidParams("model custom needs a pmf".into()))?,
                )?,
            },
            other => return Err(Error::InvalidParams(format!("unknown model {other:?}"))),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if let ModelSpec::Cm12 { p } = self {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidParams(format!("p = {p} is not in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<MultiGraph> {
        match self {
            ModelSpec::Cm2 => cm2(n, rng),
            ModelSpec::Cm12 { p } => cm12(n, *p, rng),
            ModelSpec::Custom { pmf } => Ok(pair_half_edges(&pmf.degree_sequence(n)?, rng)),
        }
    }

    /// Graph of replica `index` under `seed`.
    pub fn replica_graph(&self, n: usize, seed: u64, index: u64) -> Result<MultiGraph> {
        self.generate(n, &mut stream(seed, Domain::Graph, index))
    }

    /// Thermodynamic-limit susceptibility, where known.
    pub fn chi_limit(&self, params: IsingParams, t: usize) -> Option<f64> {
        match self {
            ModelSpec::Cm2 => Some(susceptibility_1d(params)),
            ModelSpec::Cm12 { p } => Some(chi_cm12(params, *p, t).value),
            ModelSpec::Custom { .. } => None,
        }
    }

    /// Thermodynamic-limit magnetization, where known.
    pub fn magnetization_limit(&self, params: IsingParams, t: usize) -> Option<f64> {
        match self {
            ModelSpec::Cm2 => Some(magnetization_1d(params)),
            ModelSpec::Cm12 { p } => Some(magnetization_cm12(params, *p, t).value),
            ModelSpec::Custom { .. } => None,
        }
    }

    fn truncation(&self, params: IsingParams, t: Option<usize>) -> usize {
        match (t, self) {
            (Some(t), _) => t,
            (None, ModelSpec::Cm12 { p }) => default_truncation(params, *p, DEFAULT_TAIL_TOLERANCE),
            (None, _) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(flatten)]
    pub params: IsingParams,
    #[serde(rename = "R")]
    pub replicas: usize,
    #[serde(rename = "M")]
    pub samples: usize,
    pub seed: u64,
    /// Line-length truncation for cm12 series; chosen from the tail bound when absent.
    #[serde(rename = "T")]
    pub truncation: Option<usize>,
    /// Significance level of the normality tests.
    pub level: f64,
    /// Relative tolerance of the variance checks.
    pub variance_tolerance: f64,
    /// Heat-bath sweeps discarded before sampling, for graphs without an
    /// exact solver. Defaults to `10 N`.
    pub burn_in: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, n: usize, params: IsingParams) -> Self {
        ExperimentConfig {
            model,
            n,
            params,
            replicas: 1,
            samples: 1000,
            seed: 0,
            truncation: None,
            level: 0.01,
            variance_tolerance: 0.05,
            burn_in: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n < 100 {
            return Err(Error::InvalidParams(format!("N = {} is below 100", self.n)));
        }
        if self.replicas == 0 || self.samples == 0 {
            return Err(Error::InvalidParams("R and M must be at least 1".into()));
        }
        if self.replicas >= 1 << 20 || self.samples >= BLOCK << BLOCK_BITS {
            return Err(Error::TooLarge {
                max: 1 << 20,
                got: self.replicas.max(self.samples),
            });
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParams(format!(
                "level {} is not in (0, 1)",
                self.level
            )));
        }
        if self.variance_tolerance.is_nan() || self.variance_tolerance <= 0.0 {
            return Err(Error::InvalidParams(
                "variance tolerance must be positive".into(),
            ));
        }
        IsingParams::new(self.params.beta, self.params.field)?;
        Ok(())
    }

    fn resolved_truncation(&self) -> usize {
        self.model.truncation(self.params, self.truncation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|observed - reference| <= allowed`
    Within,
    /// `observed > reference`
    Above,
    /// `observed < reference`
    Below,
}

/// One pass/fail decision together with the numbers it was made from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub check: Check,
    pub observed: f64,
    pub reference: f64,
    pub allowed: f64,
    pub passed: bool,
}

impl Criterion {
    pub fn within(name: &str, observed: f64, reference: f64, allowed: f64) -> Self {
        Criterion::new(name, Check::Within, observed, reference, allowed)
    }

    pub fn above(name: &str, observed: f64, reference: f64) -> Self {
        Criterion::new(name, Check::Above, observed, reference, 0.0)
    }

    pub fn below(name: &str, observed: f64, reference: f64) -> Self {
        Criterion::new(name, Check::Below, observed, reference, 0.0)
    }

    fn new(name: &str, check: Check, observed: f64, reference: f64, allowed: f64) -> Self {
        let mut c = Criterion {
            name: name.to_string(),
            check,
            observed,
            reference,
            allowed,
            passed: false,
        };
        c.passed = c.evaluate();
        c
    }

    /// Recomputes the verdict from the recorded numbers.
    pub fn evaluate(&self) -> bool {
        match self.check {
            Check::Within => (self.observed - self.reference).abs() <= self.allowed,
            Check::Above => self.observed > self.reference,
            Check::Below => self.observed < self.reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub se: Option<f64>,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Quantity { value, se: None }
    }

    pub fn estimate(value: f64, se: f64) -> Self {
        Quantity {
            value,
            se: Some(se),
        }
    }
}

/// Deviation-probability estimates at one system size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnCell {
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: u64,
    pub rq_hits: u64,
    /// `hits / trials`, or the rule-of-three bound `3 / trials` with no hits.
    pub rq_probability: f64,
    pub rq_upper_bound: bool,
    pub aq_hits: u64,
    pub aq_probability: f64,
    pub aq_upper_bound: bool,
    /// Exact probability where it is available.
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub quantities: BTreeMap<String, Quantity>,
    pub ks: Option<KsResult>,
    pub criteria: Vec<Criterion>,
    pub histogram: Option<Histogram>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<LlnCell>,
    pub passed: bool,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    fn new(experiment: &str, config: &ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config: config.clone(),
            quantities: BTreeMap::new(),
            ks: None,
            criteria: Vec::new(),
            histogram: None,
            cells: Vec::new(),
            passed: true,
            runtime_seconds: 0.0,
        }
    }

    fn put(&mut self, name: &str, q: Quantity) {
        self.quantities.insert(name.to_string(), q);
    }

    fn check(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    fn finish(mut self, started: Instant) -> Self {
        self.passed = self.criteria.iter().all(|c| c.passed);
        self.runtime_seconds = started.elapsed().as_secs_f64();
        self
    }

    pub fn quantity(&self, name: &str) -> Option<Quantity> {
        self.quantities.get(name).copied()
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// The report with the wall-clock field cleared, for comparisons.
    pub fn without_runtime(&self) -> Self {
        ExperimentReport {
            runtime_seconds: 0.0,
            ..self.clone()
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Flat `field,value` summary: config, quantities, KS, criteria.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["field", "value"])?;
        let mut row = |k: &str, v: String| w.write_record([k, v.as_str()]);
        row("schema_version", self.schema_version.to_string())?;
        row("experiment", self.experiment.clone())?;
        if let serde_json::Value::Object(cfg) = serde_json::to_value(&self.config)? {
            for (k, v) in cfg {
                row(&format!("config.{k}"), compact_json(&v))?;
            }
        }
        for (k, q) in &self.quantities {
            row(k, q.value.to_string())?;
            if let Some(se) = q.se {
                row(&format!("{k}.se"), se.to_string())?;
            }
        }
        if let Some(ks) = &self.ks {
            row("ks.n", ks.n.to_string())?;
            row("ks.statistic", ks.statistic.to_string())?;
            row("ks.p_value", ks.p_value.to_string())?;
        }
        for c in &self.criteria {
            row(
                &format!("criterion.{}", c.name),
                if c.passed { "PASS" } else { "FAIL" }.to_string(),
            )?;
        }
        row("passed", self.passed.to_string())?;
        row("runtime_seconds", self.runtime_seconds.to_string())?;
        w.flush()?;
        Ok(())
    }
}

fn compact_json(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs `f` on a pool of `threads` workers (the global pool when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::InvalidParams(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// `count` exact draws of `S_N` on one decomposed graph, in stream-block order.
fn exact_sums(
    params: IsingParams,
    decomp: &crate::graphgen::ComponentDecomposition,
    count: usize,
    seed: u64,
    graph_index: u64,
) -> Vec<i64> {
    let blocks = count.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = spin_stream(seed, graph_index, b as u64);
            let mut sampler = ConfigurationSampler::new(params, decomp);
            let len = BLOCK.min(count - b * BLOCK);
            (0..len)
                .map(|_| sampler.sample_sum(&mut rng))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect()
}

/// Heat-bath draws of `S_N`, `thin` sweeps apart after `burn_in` sweeps.
fn chain_sums(
    graph: &MultiGraph,
    params: IsingParams,
    count: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Vec<i64> {
    let adj = graph.adjacency();
    let mut rng = stream(seed, Domain::Chain, 0);
    let mut state = SpinState::random(&adj, &mut rng);
    for _ in 0..burn_in {
        heat_bath_sweep(&mut state, params, &adj, &mut rng);
    }
    (0..count)
        .map(|_| {
            for _ in 0..thin {
                heat_bath_sweep(&mut state, params, &adj, &mut rng);
            }
            state.sum()
        })
        .collect()
}

const HIST_RANGE: f64 = 4.0;
const HIST_BINS: usize = 40;
const CHAIN_THIN: usize = 10;

/// Random-quenched CLT: one graph, `M` spin draws, `V_N = (S_N - N M_N)/sqrt(N)`.
pub fn rq_clt_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let mut report = ExperimentReport::new("rq_clt", config);
    let params = config.params;
    let n = config.n;
    let sqrt_n = (n as f64).sqrt();
    let t = config.resolved_truncation();
    let graph = config.model.replica_graph(n, config.seed, 0)?;

    let (center, chi_n, sums) = match decompose(&graph) {
        Ok(decomp) => {
            let (mean_s, var_s) = spin_moments(params, &decomp);
            let sums = exact_sums(params, &decomp, config.samples, config.seed, 0);
            (mean_s, Some(var_s / n as f64), sums)
        }
        Err(_) => {
            let burn_in = config.burn_in.unwrap_or(10 * n);
            let sums = chain_sums(
                &graph,
                params,
                config.samples,
                burn_in,
                CHAIN_THIN,
                config.seed,
            );
            let mean = sums.iter().map(|&s| s as f64).sum::<f64>() / sums.len() as f64;
            report.put("burn_in", Quantity::exact(burn_in as f64));
            (mean, None, sums)
        }
    };
    let v: Vec<f64> = sums.iter().map(|&s| (s as f64 - center) / sqrt_n).collect();
    let summary = summarize(&v);
    report.put("N", Quantity::exact(n as f64));
    report.put("M_N", Quantity::exact(center / n as f64));
    report.put(
        "sample_mean",
        Quantity::estimate(summary.mean, summary.mean_se),
    );
    report.put(
        "sample_variance",
        Quantity::estimate(summary.variance, summary.variance_se),
    );

    let scale = chi_n.unwrap_or(summary.variance);
    if v.len() >= crate::stats::KS_MIN_SAMPLES && scale > 0.0 {
        let ks = ks_test(&v, normal_cdf(scale.sqrt()))?;
        report.check(Criterion::above("ks_normality", ks.p_value, config.level));
        report.ks = Some(ks);
    }
    if scale > 0.0 {
        let z: Vec<f64> = v.iter().map(|x| x / scale.sqrt()).collect();
        report.histogram = Some(histogram(&z, -HIST_RANGE, HIST_RANGE, HIST_BINS));
    }
    if let Some(chi_n) = chi_n {
        report.put("chi_N", Quantity::exact(chi_n));
        report.check(Criterion::within(
            "variance_vs_chi_N",
            summary.variance,
            chi_n,
            config.variance_tolerance * chi_n,
        ));
    }
    if let Some(chi) = config.model.chi_limit(params, t) {
        report.put("chi_limit", Quantity::exact(chi));
        report.put("T", Quantity::exact(t as f64));
        // three standard errors plus a finite-size allowance of order 1/sqrt(N)
        report.check(Criterion::within(
            "variance_vs_chi_limit",
            summary.variance,
            chi,
            3.0 * summary.variance_se + chi / sqrt_n,
        ));
    }
    Ok(report.finish(started))
}

struct AqReplica {
    mean_s: f64,
    var_s: f64,
    sums: Vec<i64>,
}

/// Averaged-quenched CLT: `R` graphs with `M` exact draws each, pooled and
/// centred by the mean over replicas of the exact `P(S_N)`.
pub fn aq_clt_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if matches!(config.model, ModelSpec::Custom { .. }) {
        return Err(Error::InvalidParams(
            "averaged-quenched experiment needs model cm2 or cm12".into(),
        ));
    }
    let started = Instant::now();
    let mut report = ExperimentReport::new("aq_clt", config);
    let params = config.params;
    let (n, r, m) = (config.n, config.replicas, config.samples);
    let nf = n as f64;
    let t = config.resolved_truncation();

    let replicas: Vec<AqReplica> = (0..r as u64)
        .into_par_iter()
        .map(|i| {
            let graph = config.model.replica_graph(n, config.seed, i)?;
            let decomp = decompose(&graph)?;
            let (mean_s, var_s) = spin_moments(params, &decomp);
            let mut rng = spin_stream(config.seed, i, 0);
            let mut sampler = ConfigurationSampler::new(params, &decomp);
            let sums = (0..m).map(|_| sampler.sample_sum(&mut rng)).collect();
            Ok(AqReplica {
                mean_s,
                var_s,
                sums,
            })
        })
        .collect::<Result<_>>()?;

    let rf = r as f64;
    let p_bar = replicas.iter().map(|x| x.mean_s).sum::<f64>() / rf;

    // mean(chi_N) + Var(sqrt(N) M_N), from the exact per-graph moments
    let chi_ns: Vec<f64> = replicas.iter().map(|x| x.var_s / nf).collect();
    let between: Vec<f64> = replicas
        .iter()
        .map(|x| (x.mean_s - p_bar).powi(2) / nf)
        .collect();
    let correction = if r > 1 { rf / (rf - 1.0) } else { 1.0 };
    let contrib: Vec<f64> = chi_ns
        .iter()
        .zip(&between)
        .map(|(c, b)| c + b * correction)
        .collect();
    let pooled = summarize(&contrib);
    let chi_summary = summarize(&chi_ns);
    let between_summary = summarize(&between.iter().map(|b| b * correction).collect::<Vec<_>>());

    // pooled sample of standardized sums
    let y: Vec<f64> = replicas
        .iter()
        .flat_map(|x| x.sums.iter().map(|&s| (s as f64 - p_bar) / nf.sqrt()))
        .collect();
    let per_replica_sq: Vec<f64> = replicas
        .iter()
        .map(|x| {
            x.sums
                .iter()
                .map(|&s| (s as f64 - p_bar).powi(2) / nf)
                .sum::<f64>()
                / m as f64
        })
        .collect();
    let sampled = summarize(&per_replica_sq);

    // the same sampled data through two formulas
    let total = (r * m) as f64;
    let grand = replicas
        .iter()
        .flat_map(|x| x.sums.iter())
        .map(|&s| s as f64)
        .sum::<f64>()
        / total;
    let direct = replicas
        .iter()
        .flat_map(|x| x.sums.iter())
        .map(|&s| (s as f64 - grand).powi(2))
        .sum::<f64>()
        / total
        / nf;
    let (mut within, mut across) = (0.0, 0.0);
    for x in &replicas {
        let mr = x.sums.iter().map(|&s| s as f64).sum::<f64>() / m as f64;
        within += x.sums.iter().map(|&s| (s as f64 - mr).powi(2)).sum::<f64>() / m as f64;
        across += (mr - grand).powi(2);
    }
    let (within, across) = (within / rf / nf, across / rf / nf);

    let (target, chi) = match &config.model {
        ModelSpec::Cm2 => {
            let chi = susceptibility_1d(params);
            (chi, chi)
        }
        ModelSpec::Cm12 { p } => {
            let chi = chi_cm12(params, *p, t).value;
            let sg = sigma_g2(params, *p, t);
            report.put("sigma_G2", Quantity::exact(sg.value));
            report.put("sigma_G2_tail_bound", Quantity::exact(sg.tail_bound));
            report.put("T", Quantity::exact(t as f64));
            (chi + sg.value, chi)
        }
        ModelSpec::Custom { .. } => unreachable!(),
    };

    report.put("P_bar", Quantity::exact(p_bar));
    report.put(
        "pooled_variance",
        Quantity::estimate(pooled.mean, pooled.mean_se),
    );
    report.put(
        "pooled_variance_sampled",
        Quantity::estimate(sampled.mean, sampled.mean_se),
    );
    report.put(
        "mean_chi_N",
        Quantity::estimate(chi_summary.mean, chi_summary.mean_se),
    );
    report.put(
        "var_sqrtN_M_N",
        Quantity::estimate(between_summary.mean, between_summary.mean_se),
    );
    report.put("target_variance", Quantity::exact(target));
    report.put("chi_limit", Quantity::exact(chi));
    report.put("identity_direct", Quantity::exact(direct));
    report.put("identity_within", Quantity::exact(within));
    report.put("identity_between", Quantity::exact(across));

    if y.len() >= crate::stats::KS_MIN_SAMPLES && target > 0.0 {
        let ks = ks_test(&y, normal_cdf(target.sqrt()))?;
        report.check(Criterion::above("ks_normality", ks.p_value, config.level));
        report.ks = Some(ks);
        let z: Vec<f64> = y.iter().map(|v| v / target.sqrt()).collect();
        report.histogram = Some(histogram(&z, -HIST_RANGE, HIST_RANGE, HIST_BINS));
    }
    let tol = config.variance_tolerance * target;
    report.check(Criterion::within(
        "pooled_variance_vs_target",
        pooled.mean,
        target,
        tol,
    ));
    report.check(Criterion::within(
        "sampled_variance_vs_target",
        sampled.mean,
        target,
        tol,
    ));
    if matches!(config.model, ModelSpec::Cm12 { .. }) {
        report.check(Criterion::above(
            "pooled_variance_exceeds_chi",
            pooled.mean - chi,
            3.0 * pooled.mean_se,
        ));
    }
    report.check(Criterion::within(
        "total_variance_identity",
        within + across,
        direct,
        1e-9 * direct.abs(),
    ));
    Ok(report.finish(started))
}

struct GraphLines {
    n1: usize,
    n2: usize,
    counts: Vec<usize>,
}

/// Graph fluctuations: `X_N = sqrt(N) sum_{l<=T} (p_l - mean p_l) gamma_l`
/// over `R` graphs, and the standardized count of lines of length two.
pub fn graph_fluctuation_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let p = match config.model {
        ModelSpec::Cm12 { p } => p,
        _ => {
            return Err(Error::InvalidParams(
                "graph fluctuations need model cm12".into(),
            ))
        }
    };
    let started = Instant::now();
    let mut report = ExperimentReport::new("graph_fluctuations", config);
    let params = config.params;
    let (n, r) = (config.n, config.replicas);
    let nf = n as f64;
    let t = config.resolved_truncation();

    let graphs: Vec<GraphLines> = (0..r as u64)
        .into_par_iter()
        .map(|i| {
            let graph = config.model.replica_graph(n, config.seed, i)?;
            let decomp = decompose(&graph)?;
            let mut counts = vec![0usize; t + 1];
            for (len, c) in decomp.line_counts() {
                if len <= t {
                    counts[len] = c;
                }
            }
            let n1 = graph.degrees().count_of(1);
            Ok(GraphLines {
                n1,
                n2: n - n1,
                counts,
            })
        })
        .collect::<Result<_>>()?;

    let rf = r as f64;
    let g = gammas(params, t);
    let mean_p: Vec<f64> = (2..=t)
        .map(|l| graphs.iter().map(|x| x.counts[l] as f64 / nf).sum::<f64>() / rf)
        .collect();
    let xs: Vec<f64> = graphs
        .iter()
        .map(|x| {
            nf.sqrt()
                * (2..=t)
                    .zip(&mean_p)
                    .zip(&g)
                    .map(|((l, mp), gl)| (x.counts[l] as f64 / nf - mp) * gl)
                    .sum::<f64>()
        })
        .collect();
    let sg = sigma_g2(params, p, t);
    let printed = sigma_g2_double_diagonal(params, p, t);
    let xs_summary = summarize(&xs);
    report.put("T", Quantity::exact(t as f64));
    report.put("sigma_G2", Quantity::exact(sg.value));
    report.put("sigma_G2_tail_bound", Quantity::exact(sg.tail_bound));
    report.put("sigma_G2_double_diagonal", Quantity::exact(printed));
    report.put(
        "var_X",
        Quantity::estimate(xs_summary.variance, xs_summary.variance_se),
    );
    report.put(
        "mean_X",
        Quantity::estimate(xs_summary.mean, xs_summary.mean_se),
    );

    if sg.value > 0.0 {
        report.check(Criterion::within(
            "var_X_vs_sigma_G2",
            xs_summary.variance,
            sg.value,
            3.0 * xs_summary.variance_se,
        ));
        if xs.len() >= crate::stats::KS_MIN_SAMPLES {
            let ks = ks_test(&xs, normal_cdf(sg.value.sqrt()))?;
            report.check(Criterion::above("ks_normality", ks.p_value, config.level));
            report.ks = Some(ks);
            let z: Vec<f64> = xs.iter().map(|v| v / sg.value.sqrt()).collect();
            report.histogram = Some(histogram(&z, -HIST_RANGE, HIST_RANGE, HIST_BINS));
        }
    } else {
        let max = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        report.check(Criterion::within("X_identically_zero", max, 0.0, 0.0));
    }

    // lines of length two, standardized by the exact expectation
    let lambda: Vec<f64> = graphs
        .iter()
        .map(|x| {
            let half = x.n1 as f64 / 2.0;
            (x.counts.get(2).copied().unwrap_or(0) as f64 - half * line_length_pmf(x.n1, x.n2, 2))
                / half.sqrt()
        })
        .collect();
    let lam = summarize(&lambda);
    let first = &graphs[0];
    let alpha = 2.0 * first.n2 as f64 / first.n1 as f64;
    let h22 = covariance_h(alpha, 2, 2);
    report.put("alpha_N", Quantity::exact(alpha));
    report.put("H22", Quantity::exact(h22));
    report.put(
        "var_Lambda2_star",
        Quantity::estimate(lam.variance, lam.variance_se),
    );
    report.put(
        "mean_Lambda2_star",
        Quantity::estimate(lam.mean, lam.mean_se),
    );
    report.check(Criterion::within(
        "var_Lambda2_vs_H22",
        lam.variance,
        h22,
        3.0 * lam.variance_se,
    ));
    Ok(report.finish(started))
}

/// Law of large numbers: estimates `P(|S_N/N - M| > eps)` along `grid`,
/// random-quenched (one graph, `R M` draws) and averaged-quenched (`R`
/// graphs, `M` draws each), and fits the log-probability against `N`.
pub fn lln_experiment(
    config: &ExperimentConfig,
    eps: f64,
    grid: &[usize],
) -> Result<ExperimentReport> {
    config.validate()?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "eps = {eps} must be positive"
        )));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 100 {
        return Err(Error::InvalidParams(
            "grid must be increasing, starting at N >= 100".into(),
        ));
    }
    if grid.len() > 16 {
        return Err(Error::TooLarge {
            max: 16,
            got: grid.len(),
        });
    }
    let started = Instant::now();
    let mut report = ExperimentReport::new("lln", config);
    let params = config.params;
    let t = config.resolved_truncation();
    let mag = config.model.magnetization_limit(params, t).ok_or_else(|| {
        Error::InvalidParams("limit magnetization unknown for custom models".into())
    })?;
    let (r, m) = (config.replicas, config.samples);
    let trials = (r * m) as u64;
    report.put("M_limit", Quantity::exact(mag));
    report.put("eps", Quantity::exact(eps));

    for (gi, &n) in grid.iter().enumerate() {
        let nf = n as f64;
        let hit = |s: i64| ((s as f64 / nf) - mag).abs() > eps;
        let base = (gi as u64) << 20;
        let graph = config.model.replica_graph(n, config.seed, base)?;
        let decomp = decompose(&graph)?;
        let rq_hits = exact_sums(params, &decomp, r * m, config.seed, base)
            .into_iter()
            .filter(|&s| hit(s))
            .count() as u64;
        let aq_hits: u64 = (0..r as u64)
            .into_par_iter()
            .map(|i| {
                let graph = config.model.replica_graph(n, config.seed, base | i)?;
                let decomp = decompose(&graph)?;
                let mut rng = spin_stream(config.seed, base | i, 1 << (BLOCK_BITS - 1));
                let mut sampler = ConfigurationSampler::new(params, &decomp);
                Ok((0..m).filter(|_| hit(sampler.sample_sum(&mut rng))).count() as u64)
            })
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .sum();
        let estimate = |hits: u64| {
            if hits == 0 {
                (3.0 / trials as f64, true)
            } else {
                (hits as f64 / trials as f64, false)
            }
        };
        let (rq_probability, rq_upper_bound) = estimate(rq_hits);
        let (aq_probability, aq_upper_bound) = estimate(aq_hits);
        let exact = if eps >= 1.0 + mag.abs() {
            Some(0.0)
        } else if params.beta == 0.0 {
            let q = (1.0 + params.field.tanh()) / 2.0;
            Some(binomial_deviation_probability(n as u64, q, mag, eps))
        } else {
            None
        };
        report.cells.push(LlnCell {
            n,
            trials,
            rq_hits,
            rq_probability,
            rq_upper_bound,
            aq_hits,
            aq_probability,
            aq_upper_bound,
            exact,
        });
    }

    let slope = |pick: &dyn Fn(&LlnCell) -> (u64, f64)| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = report
            .cells
            .iter()
            .filter(|c| pick(c).0 > 0)
            .map(|c| (c.n as f64, pick(c).1.ln()))
            .unzip();
        linear_fit(&xs, &ys).map(|(s, _)| s)
    };
    let rq_slope = slope(&|c| (c.rq_hits, c.rq_probability));
    let aq_slope = slope(&|c| (c.aq_hits, c.aq_probability));
    if let Some(s) = rq_slope {
        report.put("rq_log_slope", Quantity::exact(s));
        report.check(Criterion::below("rq_log_slope_negative", s, 0.0));
    }
    if let Some(s) = aq_slope {
        report.put("aq_log_slope", Quantity::exact(s));
    }
    // point estimates (zero with no hits) must not increase along the grid
    let increases = report
        .cells
        .windows(2)
        .filter(|w| w[1].rq_hits as f64 > w[0].rq_hits as f64)
        .count();
    report.check(Criterion::within(
        "rq_non_increasing",
        increases as f64,
        0.0,
        0.0,
    ));
    let mut exact_checks = Vec::new();
    for c in &report.cells {
        if let Some(p) = c.exact {
            let est = c.rq_hits as f64 / c.trials as f64;
            let se = (p * (1.0 - p) / c.trials as f64).sqrt();
            exact_checks.push(Criterion::within(
                &format!("exact_probability_N{}", c.n),
                est,
                p,
                4.0 * se,
            ));
        }
    }
    for c in exact_checks {
        report.check(c);
    }
    Ok(report.finish(started))
}
