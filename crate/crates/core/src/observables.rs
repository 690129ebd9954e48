//! Exact per-graph quantities for a fixed degree-{1,2} multigraph.
//!
//! Components are disjoint, so the partition function factorizes and the
//! spin sums of different components are independent under the Gibbs
//! measure. Every quantity here is a sum over distinct `(kind, length)`
//! classes of the decomposition; the edge list is never touched.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graphgen::ComponentDecomposition;
use crate::ising1d::{core_f64, core_jet, ChainSampler, IsingParams};
use crate::jet::{Jet, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchedObservables {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "logZ")]
    pub log_z: f64,
    /// `log Z / N`
    pub pressure: f64,
    #[serde(rename = "meanS")]
    pub mean_s: f64,
    #[serde(rename = "varS")]
    pub var_s: f64,
    /// `var_s / N`
    #[serde(rename = "chiN")]
    pub chi_n: f64,
}

/// `log Z` of the whole graph and its first two field derivatives.
pub fn log_partition_graph_jet(params: IsingParams, decomp: &ComponentDecomposition) -> Jet {
    let core = core_jet(params);
    decomp
        .length_counts()
        .into_iter()
        .fold(Jet::constant(0.0), |acc, ((kind, len), count)| {
            acc + Jet::constant(count as f64) * core.log_component(kind, len as u64)
        })
}

pub fn log_partition_graph(params: IsingParams, decomp: &ComponentDecomposition) -> f64 {
    let core = core_f64(params);
    decomp
        .length_counts()
        .into_iter()
        .map(|((kind, len), count)| count as f64 * core.log_component(kind, len as u64))
        .sum()
}

/// Mean and variance of the total spin `S_N` under the Gibbs measure.
pub fn spin_moments(params: IsingParams, decomp: &ComponentDecomposition) -> (f64, f64) {
    let j = log_partition_graph_jet(params, decomp);
    (j.d1, j.d2)
}

pub fn quenched_observables(
    params: IsingParams,
    decomp: &ComponentDecomposition,
) -> QuenchedObservables {
    let j = log_partition_graph_jet(params, decomp);
    let n = decomp.n();
    QuenchedObservables {
        n,
        log_z: j.v,
        pressure: j.v / n as f64,
        mean_s: j.d1,
        var_s: j.d2,
        chi_n: j.d2 / n as f64,
    }
}

/// Scaled cumulant generating function `psi_N(beta, B + t) - psi_N(beta, B)`.
pub fn scgf(params: IsingParams, decomp: &ComponentDecomposition, t: f64) -> f64 {
    let n = decomp.n() as f64;
    (log_partition_graph(params.shifted(t), decomp) - log_partition_graph(params, decomp)) / n
}

/// Exact i.i.d. draws of whole-graph configurations, one chain at a time.
#[derive(Debug, Clone)]
pub struct ConfigurationSampler<'a> {
    decomp: &'a ComponentDecomposition,
    chain: ChainSampler,
    buf: Vec<i8>,
}

impl<'a> ConfigurationSampler<'a> {
    pub fn new(params: IsingParams, decomp: &'a ComponentDecomposition) -> Self {
        let longest = decomp.components().map(|c| c.1).max().unwrap_or(0);
        ConfigurationSampler {
            decomp,
            chain: ChainSampler::new(params),
            buf: vec![0; longest],
        }
    }

    /// Draws a configuration and returns only `S_N`.
    pub fn sample_sum<R: Rng + ?Sized>(&mut self, rng: &mut R) -> i64 {
        let mut total = 0;
        for (kind, len) in self.decomp.components() {
            total += self.chain.sample_into(kind, &mut self.buf[..len], rng);
        }
        total
    }

    /// Draws a configuration into `spins` (indexed by vertex) and returns `S_N`.
    pub fn sample_spins<R: Rng + ?Sized>(&mut self, spins: &mut [i8], rng: &mut R) -> i64 {
        let order = self.decomp.order();
        let mut offset = 0;
        let mut total = 0;
        for (kind, len) in self.decomp.components() {
            let chunk = &mut self.buf[..len];
            total += self.chain.sample_into(kind, chunk, rng);
            for (&v, &s) in order[offset..offset + len].iter().zip(chunk.iter()) {
                spins[v as usize] = s;
            }
            offset += len;
        }
        total
    }
}

/// One exact configuration (indexed by vertex) and its total spin.
pub fn sample_configuration<R: Rng + ?Sized>(
    params: IsingParams,
    decomp: &ComponentDecomposition,
    rng: &mut R,
) -> (Vec<i8>, i64) {
    let mut spins = vec![0i8; decomp.n()];
    let s = ConfigurationSampler::new(params, decomp).sample_spins(&mut spins, rng);
    (spins, s)
}

/// Normalized number of lines of each length, `p_l = #{lines of length l} / N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineDensity {
    pub n: usize,
    pub density: BTreeMap<usize, f64>,
}

impl LineDensity {
    pub fn get(&self, l: usize) -> f64 {
        self.density.get(&l).copied().unwrap_or(0.0)
    }

    /// `sum_l p_l`, the number of lines over `N`.
    pub fn line_fraction(&self) -> f64 {
        self.density.values().sum()
    }

    /// `sum_l l p_l`, the fraction of vertices lying on lines.
    pub fn vertex_fraction(&self) -> f64 {
        self.density.iter().map(|(&l, &p)| l as f64 * p).sum()
    }
}

pub fn line_empirical_density(decomp: &ComponentDecomposition) -> LineDensity {
    let n = decomp.n();
    let density = decomp
        .line_counts()
        .into_iter()
        .map(|(l, c)| (l, c as f64 / n as f64))
        .collect();
    LineDensity { n, density }
}

/// One row of an observable dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub replica: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    #[serde(rename = "B")]
    pub field: f64,
    #[serde(rename = "logZ")]
    pub log_z: f64,
    #[serde(rename = "meanS")]
    pub mean_s: f64,
    #[serde(rename = "varS")]
    pub var_s: f64,
    #[serde(rename = "chiN")]
    pub chi_n: f64,
}

impl ObservableRow {
    pub fn new(replica: u64, params: IsingParams, obs: &QuenchedObservables) -> Self {
        ObservableRow {
            replica,
            n: obs.n,
            beta: params.beta,
            field: params.field,
            log_z: obs.log_z,
            mean_s: obs.mean_s,
            var_s: obs.var_s,
            chi_n: obs.chi_n,
        }
    }
}

/// CSV with columns `replica,N,beta,B,logZ,meanS,varS,chiN`.
pub fn write_observables_csv<W: Write>(rows: &[ObservableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
