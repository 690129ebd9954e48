//! Heat-bath (Glauber) dynamics on arbitrary multigraphs.
//!
//! Used where no exact component solver exists and as an independent check
//! of the exact machinery. Self-loops add the constant `beta` to the energy
//! whatever the spin, so they are left out of the local fields; parallel
//! edges count with their multiplicity.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphgen::{Adjacency, MultiGraph};
use crate::ising1d::IsingParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    spins: Vec<i8>,
    fields: Vec<i64>,
    sum: i64,
}

impl SpinState {
    pub fn new(adj: &Adjacency, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != adj.n() {
            return Err(Error::InvalidParams(format!(
                "{} spins for a graph on {} vertices",
                spins.len(),
                adj.n()
            )));
        }
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParams(format!(
                "spin value {s} is not +1 or -1"
            )));
        }
        let fields = local_fields(adj, &spins);
        let sum = spins.iter().map(|&s| s as i64).sum();
        Ok(SpinState { spins, fields, sum })
    }

    pub fn all_up(adj: &Adjacency) -> Self {
        SpinState::new(adj, vec![1; adj.n()]).expect("valid by construction")
    }

    pub fn random<R: Rng + ?Sized>(adj: &Adjacency, rng: &mut R) -> Self {
        let spins = (0..adj.n())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        SpinState::new(adj, spins).expect("valid by construction")
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// `m_i`, the multiplicity-weighted sum of neighbouring spins.
    pub fn field(&self, i: usize) -> i64 {
        self.fields[i]
    }

    /// `S_N`
    pub fn sum(&self) -> i64 {
        self.sum
    }

    /// Whether the cached fields and total agree with a fresh computation.
    pub fn is_consistent(&self, adj: &Adjacency) -> bool {
        self.spins.len() == adj.n()
            && self.fields == local_fields(adj, &self.spins)
            && self.sum == self.spins.iter().map(|&s| s as i64).sum::<i64>()
    }

    pub fn set(&mut self, adj: &Adjacency, i: usize, spin: i8) {
        let old = self.spins[i];
        if old == spin {
            return;
        }
        let delta = (spin - old) as i64;
        self.spins[i] = spin;
        self.sum += delta;
        for &(j, _) in adj.incident(i) {
            if j as usize != i {
                self.fields[j as usize] += delta;
            }
        }
    }
}

fn local_fields(adj: &Adjacency, spins: &[i8]) -> Vec<i64> {
    (0..adj.n())
        .map(|i| {
            adj.incident(i)
                .iter()
                .filter(|&&(j, _)| j as usize != i)
                .map(|&(j, _)| spins[j as usize] as i64)
                .sum()
        })
        .collect()
}

/// Heat-bath probability that a spin with local field `m` is set to `+1`.
pub fn heat_bath_probability_up(params: IsingParams, m: i64) -> f64 {
    let h = params.beta * m as f64 + params.field;
    1.0 / (1.0 + (-2.0 * h).exp())
}

/// Resamples spin `i` from its conditional law using the uniform variate `u`.
pub fn heat_bath_update(
    state: &mut SpinState,
    adj: &Adjacency,
    params: IsingParams,
    i: usize,
    u: f64,
) {
    let up = u < heat_bath_probability_up(params, state.fields[i]);
    state.set(adj, i, if up { 1 } else { -1 });
}

/// One random-scan sweep: `N` updates at uniformly chosen sites.
pub fn heat_bath_sweep<R: Rng + ?Sized>(
    state: &mut SpinState,
    params: IsingParams,
    adj: &Adjacency,
    rng: &mut R,
) {
    debug_assert!(
        state.is_consistent(adj),
        "spin state out of sync with graph"
    );
    let n = adj.n();
    for _ in 0..n {
        let i = rng.random_range(0..n);
        let u: f64 = rng.random();
        heat_bath_update(state, adj, params, i, u);
    }
    debug_assert!(state.is_consistent(adj));
}

/// Runs `sweeps` sweeps and records `S_N` after each one.
pub fn run_chain<R: Rng + ?Sized>(
    state: &mut SpinState,
    params: IsingParams,
    adj: &Adjacency,
    sweeps: usize,
    rng: &mut R,
) -> Vec<i64> {
    (0..sweeps)
        .map(|_| {
            heat_bath_sweep(state, params, adj, rng);
            state.sum()
        })
        .collect()
}

/// Writes a `sweep,S_N` trace; `first_sweep` labels the first entry.
pub fn write_trace_csv<W: Write>(trace: &[i64], first_sweep: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "S_N"])?;
    for (k, s) in trace.iter().enumerate() {
        w.serialize((first_sweep + k, s))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    #[serde(rename = "meanS")]
    pub mean_s: f64,
    #[serde(rename = "meanS_se")]
    pub mean_s_se: f64,
    #[serde(rename = "varS")]
    pub var_s: f64,
    #[serde(rename = "varS_se")]
    pub var_s_se: f64,
    pub samples: usize,
    pub batches: usize,
}

pub const MIN_BATCHES: usize = 20;
const MIN_BATCH_LEN: usize = 5;

/// Batch-means estimates of the mean and variance of `S_N` from a
/// correlated series. Uses `max(20, floor(sqrt(n)))` batches.
pub fn batch_means(series: &[i64]) -> Result<MomentEstimate> {
    let n = series.len();
    if n < MIN_BATCHES * MIN_BATCH_LEN {
        return Err(Error::InsufficientSamples(format!(
            "{n} recorded sweeps; batch means needs at least {}",
            MIN_BATCHES * MIN_BATCH_LEN
        )));
    }
    let batches = MIN_BATCHES
        .max((n as f64).sqrt() as usize)
        .min(n / MIN_BATCH_LEN);
    let len = n / batches;
    let used = &series[n - batches * len..];
    let mean = used.iter().map(|&s| s as f64).sum::<f64>() / used.len() as f64;
    let (mut bm, mut bv) = (Vec::with_capacity(batches), Vec::with_capacity(batches));
    for chunk in used.chunks_exact(len) {
        bm.push(chunk.iter().map(|&s| s as f64).sum::<f64>() / len as f64);
        bv.push(
            chunk
                .iter()
                .map(|&s| (s as f64 - mean).powi(2))
                .sum::<f64>()
                / len as f64,
        );
    }
    let se = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        (m, (v / xs.len() as f64).sqrt())
    };
    let (_, mean_se) = se(&bm);
    let (var, var_se) = se(&bv);
    Ok(MomentEstimate {
        mean_s: mean,
        mean_s_se: mean_se,
        var_s: var,
        var_s_se: var_se,
        samples: used.len(),
        batches,
    })
}

/// Runs a chain from a random start for `sweeps` sweeps in total, discards
/// the first `burn_in`, and returns batch-means estimates of `P(S_N)` and
/// `Var(S_N)`.
pub fn estimate_moments<R: Rng + ?Sized>(
    graph: &MultiGraph,
    params: IsingParams,
    sweeps: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<MomentEstimate> {
    if sweeps <= burn_in {
        return Err(Error::InsufficientSamples(format!(
            "sweeps ({sweeps}) must exceed burn-in ({burn_in})"
        )));
    }
    if sweeps - burn_in < MIN_BATCHES * MIN_BATCH_LEN {
        return Err(Error::InsufficientSamples(format!(
            "{} measured sweeps; at least {} needed",
            sweeps - burn_in,
            MIN_BATCHES * MIN_BATCH_LEN
        )));
    }
    let adj = graph.adjacency();
    let mut state = SpinState::random(&adj, rng);
    for _ in 0..burn_in {
        heat_bath_sweep(&mut state, params, &adj, rng);
    }
    let trace = run_chain(&mut state, params, &adj, sweeps - burn_in, rng);
    batch_means(&trace)
}
