//! Exact one-dimensional Ising solver.
//!
//! The 2x2 transfer matrix
//! `D[s, t] = exp(beta*s*t + field*(s + t)/2)` has eigenvalues
//! `lambda± = e^beta [cosh B ± sqrt(sinh^2 B + e^{-4 beta})]`.
//! A cycle of `L` sites has `Z = Tr D^L = lambda+^L + lambda-^L`; a free
//! line has `Z = v^T D^{L-1} v = A+ lambda+^L + A- lambda-^L` with
//! `v = (e^{B/2}, e^{-B/2})` and `A± = (v . v±)^2 / lambda±`.
//!
//! Everything is carried in the log domain with the `lambda+^L` growth
//! factored out, so components with millions of sites stay finite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Real};

/// Inverse temperature and external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub beta: f64,
    #[serde(rename = "B")]
    pub field: f64,
}

impl IsingParams {
    pub fn new(beta: f64, field: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and non-negative, got {beta}"
            )));
        }
        if !field.is_finite() {
            return Err(Error::InvalidParams(format!(
                "field must be finite, got {field}"
            )));
        }
        Ok(IsingParams { beta, field })
    }

    /// Same temperature, field shifted by `t`.
    pub fn shifted(self, t: f64) -> Self {
        IsingParams {
            beta: self.beta,
            field: self.field + t,
        }
    }
}

/// Connected component of a degree-{1,2} graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// Periodic chain (torus). Length 1 is a self-loop, length 2 a double edge.
    Cycle,
    /// Open chain with two degree-1 endpoints, length at least 2.
    Line,
}

impl ComponentKind {
    pub fn min_len(self) -> usize {
        match self {
            ComponentKind::Cycle => 1,
            ComponentKind::Line => 2,
        }
    }

    pub fn check_len(self, len: usize) -> Result<()> {
        if len < self.min_len() {
            return Err(Error::InvalidLength {
                length: len,
                kind: self.name(),
            });
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Cycle => "cycle",
            ComponentKind::Line => "line",
        }
    }
}

/// Transfer-matrix eigenvalues and free-boundary weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `lambda_minus / lambda_plus`
    pub r: f64,
    pub a_plus: f64,
    /// Zero at `beta = 0`, where it is the `beta -> 0` limit of the closed form.
    pub a_minus: f64,
    /// `a_minus / a_plus`
    pub a: f64,
}

/// Spectrum with exact first and second field derivatives.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumJet {
    pub lambda_plus: Jet,
    pub lambda_minus: Jet,
    pub r: Jet,
    pub a_plus: Jet,
    pub a_minus: Jet,
    pub a: Jet,
}

/// Eigen-decomposition pieces shared by every closed form.
///
/// `w± = (v . v±)^2` are the squared overlaps of the boundary vector with the
/// normalized eigenvectors, so `Z_line(L) = w+ lambda+^{L-1} + w- lambda-^{L-1}`.
/// `e1±` is the squared first coordinate of `v±`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TransferCore<T> {
    pub lambda_plus: T,
    pub lambda_minus: T,
    pub w_plus: T,
    pub w_minus: T,
    pub e1_plus: T,
    pub e1_minus: T,
}

pub(crate) fn transfer_core<T: Real>(beta: f64, field: T) -> TransferCore<T> {
    let e4 = (-4.0 * beta).exp();
    let eb = beta.exp();
    let emb = (-beta).exp();
    let s = field.sinh();
    let c = field.cosh();
    let root = (s * s + T::constant(e4)).sqrt();
    let lambda_plus = T::constant(eb) * (c + root);
    // cosh^2 - (sinh^2 + e4) = 1 - e4, avoids cancellation for large |B|
    let lambda_minus = T::constant(eb * -(-4.0 * beta).exp_m1()) / (c + root);

    // u = lambda_plus - e^{beta + B} = e^beta (root - sinh B)
    let u = if s.value() >= 0.0 {
        T::constant((-3.0 * beta).exp()) / (root + s)
    } else {
        T::constant(eb) * (root - s)
    };
    let norm2 = T::constant(emb * emb) + u * u;
    let half = field * T::constant(0.5);
    let ehp = half.exp();
    let ehm = (-half).exp();
    let w_plus = (ehp * T::constant(emb) + ehm * u).square() / norm2;
    let w_minus = (ehp * u - ehm * T::constant(emb)).square() / norm2;
    TransferCore {
        lambda_plus,
        lambda_minus,
        w_plus,
        w_minus,
        e1_plus: T::constant(emb * emb) / norm2,
        e1_minus: u * u / norm2,
    }
}

impl<T: Real> TransferCore<T> {
    pub fn r(&self) -> T {
        self.lambda_minus / self.lambda_plus
    }

    pub fn a_plus(&self) -> T {
        self.w_plus / self.lambda_plus
    }

    /// `log Z_cycle(L) = L log lambda+ + log(1 + r^L)`
    pub fn log_cycle(&self, len: u64) -> T {
        T::constant(len as f64) * self.lambda_plus.ln() + self.r().powu(len).ln_1p()
    }

    /// `log Z_line(L) = L log lambda+ + log(A+ + A- r^L)`, with
    /// `A- r^L` written as `(w- / lambda+) r^{L-1}` so that `lambda- = 0` is harmless.
    pub fn log_line(&self, len: u64) -> T {
        T::constant(len as f64) * self.lambda_plus.ln() + self.line_boundary(len).ln()
    }

    /// `A+ + A- r^L`
    pub fn line_boundary(&self, len: u64) -> T {
        self.a_plus() + self.w_minus / self.lambda_plus * self.r().powu(len - 1)
    }

    /// `a r^L = (A- / A+) r^L = (w- / w+) r^{L-1}`
    pub fn line_excess(&self, len: u64) -> T {
        self.w_minus / self.w_plus * self.r().powu(len - 1)
    }

    pub fn log_component(&self, kind: ComponentKind, len: u64) -> T {
        match kind {
            ComponentKind::Cycle => self.log_cycle(len),
            ComponentKind::Line => self.log_line(len),
        }
    }
}

pub(crate) fn core_f64(params: IsingParams) -> TransferCore<f64> {
    transfer_core(params.beta, params.field)
}

pub(crate) fn core_jet(params: IsingParams) -> TransferCore<Jet> {
    transfer_core(params.beta, Jet::variable(params.field))
}

pub fn spectrum(params: IsingParams) -> Spectrum {
    let c = core_f64(params);
    let a_minus = if c.lambda_minus > 0.0 {
        c.w_minus / c.lambda_minus
    } else {
        0.0
    };
    let a_plus = c.a_plus();
    Spectrum {
        lambda_plus: c.lambda_plus,
        lambda_minus: c.lambda_minus,
        r: c.r(),
        a_plus,
        a_minus,
        a: a_minus / a_plus,
    }
}

/// Field derivatives of the spectrum. `a_minus` and `a` are only meaningful
/// for `beta > 0`; at `beta = 0` they are reported as zero jets.
pub fn spectrum_jet(params: IsingParams) -> SpectrumJet {
    let c = core_jet(params);
    let a_plus = c.a_plus();
    let (a_minus, a) = if c.lambda_minus.v > 0.0 {
        let am = c.w_minus / c.lambda_minus;
        (am, am / a_plus)
    } else {
        (Jet::constant(0.0), Jet::constant(0.0))
    };
    SpectrumJet {
        lambda_plus: c.lambda_plus,
        lambda_minus: c.lambda_minus,
        r: c.r(),
        a_plus,
        a_minus,
        a,
    }
}

pub fn log_partition_cycle(params: IsingParams, len: usize) -> Result<f64> {
    ComponentKind::Cycle.check_len(len)?;
    Ok(core_f64(params).log_cycle(len as u64))
}

pub fn log_partition_line(params: IsingParams, len: usize) -> Result<f64> {
    ComponentKind::Line.check_len(len)?;
    Ok(core_f64(params).log_line(len as u64))
}

pub fn log_partition(params: IsingParams, kind: ComponentKind, len: usize) -> Result<f64> {
    kind.check_len(len)?;
    Ok(core_f64(params).log_component(kind, len as u64))
}

/// `log Z` of one component together with its first two field derivatives,
/// i.e. the mean and variance of the component's spin sum.
pub fn log_partition_jet(params: IsingParams, kind: ComponentKind, len: usize) -> Result<Jet> {
    kind.check_len(len)?;
    Ok(core_jet(params).log_component(kind, len as u64))
}

/// `d^order/dB^order log Z` for one component (`order` 1 or 2).
pub fn d_log_z_db(params: IsingParams, len: usize, kind: ComponentKind, order: u8) -> Result<f64> {
    let j = log_partition_jet(params, kind, len)?;
    match order {
        1 => Ok(j.d1),
        2 => Ok(j.d2),
        _ => Err(Error::InvalidParams(format!(
            "derivative order must be 1 or 2, got {order}"
        ))),
    }
}

/// Infinite-chain pressure `log lambda+`.
pub fn pressure_1d(params: IsingParams) -> f64 {
    core_f64(params).lambda_plus.ln()
}

pub fn magnetization_1d(params: IsingParams) -> f64 {
    core_jet(params).lambda_plus.ln().d1
}

pub fn susceptibility_1d(params: IsingParams) -> f64 {
    core_jet(params).lambda_plus.ln().d2
}

/// The susceptibility expression with `sinh(B)` (not squared) under the
/// 3/2 power. It coincides with the second derivative of `log lambda+` only
/// at `B = 0`; kept for the discrepancy report, never used as ground truth.
pub fn susceptibility_1d_printed(params: IsingParams) -> f64 {
    let e4 = (-4.0 * params.beta).exp();
    params.field.cosh() * e4 / (params.field.sinh() + e4).powf(1.5)
}

/// Exact `Z` by summing all `2^len` configurations. Test oracle only.
pub fn brute_force_partition(params: IsingParams, len: usize, kind: ComponentKind) -> Result<f64> {
    const MAX: usize = 20;
    if len > MAX {
        return Err(Error::TooLarge { max: MAX, got: len });
    }
    kind.check_len(len)?;
    let mut z = 0.0;
    let mut spins = vec![0i32; len];
    for mask in 0u32..(1 << len) {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { 1 } else { -1 };
        }
        z += brute_weight(params, &spins, kind).exp();
    }
    Ok(z)
}

/// Log Boltzmann weight of a chain configuration.
pub(crate) fn brute_weight(params: IsingParams, spins: &[i32], kind: ComponentKind) -> f64 {
    let len = spins.len();
    let mut bonds: i32 = spins.windows(2).map(|w| w[0] * w[1]).sum();
    if kind == ComponentKind::Cycle {
        bonds += spins[len - 1] * spins[0];
    }
    let total: i32 = spins.iter().sum();
    params.beta * bonds as f64 + params.field * total as f64
}

/// Exact sampler for single chains, reusing its message buffer across draws.
///
/// Forward messages are stored as the normalized probability `rho_i` that
/// site `i` is up given everything to its left; sampling walks back from
/// the last site with one uniform variate per site. For a cycle the first
/// spin is drawn from its exact marginal `(D^L)_{ss} / Tr D^L` and the rest
/// of the chain is sampled conditionally on it.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    params: IsingParams,
    e_beta: f64,
    e_mbeta: f64,
    e_m2beta: f64,
    e_m2field: f64,
    r: f64,
    e1_plus: f64,
    e1_minus: f64,
    rho: Vec<f64>,
}

impl ChainSampler {
    pub fn new(params: IsingParams) -> Self {
        let c = core_f64(params);
        ChainSampler {
            params,
            e_beta: params.beta.exp(),
            e_mbeta: (-params.beta).exp(),
            e_m2beta: (-2.0 * params.beta).exp(),
            e_m2field: (-2.0 * params.field).exp(),
            r: c.r(),
            e1_plus: c.e1_plus,
            e1_minus: c.e1_minus,
            rho: Vec::new(),
        }
    }

    pub fn params(&self) -> IsingParams {
        self.params
    }

    #[inline]
    fn step(&self, rho: f64) -> f64 {
        let up = rho * self.e_beta + (1.0 - rho) * self.e_mbeta;
        let down = (rho * self.e_mbeta + (1.0 - rho) * self.e_beta) * self.e_m2field;
        up / (up + down)
    }

    /// P(up) for a site with forward message `rho` whose right neighbour is `next`.
    #[inline]
    fn back(&self, rho: f64, next: i8) -> f64 {
        let tilt = if next > 0 {
            self.e_m2beta
        } else {
            1.0 / self.e_m2beta
        };
        rho / (rho + (1.0 - rho) * tilt)
    }

    /// Writes an exact draw into `out` (whose length is the component size)
    /// and returns the spin sum.
    pub fn sample_into<R: Rng + ?Sized>(
        &mut self,
        kind: ComponentKind,
        out: &mut [i8],
        rng: &mut R,
    ) -> i64 {
        let len = out.len();
        debug_assert!(len >= kind.min_len());
        self.rho.clear();
        match kind {
            ComponentKind::Line => {
                let mut rho = 1.0 / (1.0 + self.e_m2field);
                self.rho.push(rho);
                for _ in 1..len {
                    rho = self.step(rho);
                    self.rho.push(rho);
                }
                let last = self.rho[len - 1];
                out[len - 1] = if rng.random::<f64>() < last { 1 } else { -1 };
                self.backward(out, 0, rng)
            }
            ComponentKind::Cycle => {
                let rl = self.r.powi(len.min(i32::MAX as usize) as i32);
                let p_first = (self.e1_plus + rl * self.e1_minus) / (1.0 + rl);
                let first: i8 = if rng.random::<f64>() < p_first { 1 } else { -1 };
                out[0] = first;
                if len == 1 {
                    return first as i64;
                }
                // site 1 (0-based) conditioned on the fixed first spin
                let mut rho = self.back(1.0 / (1.0 + self.e_m2field), first);
                self.rho.push(rho);
                for _ in 2..len {
                    rho = self.step(rho);
                    self.rho.push(rho);
                }
                // close the ring: last site also couples to the first
                let last = self.back(self.rho[len - 2], first);
                out[len - 1] = if rng.random::<f64>() < last { 1 } else { -1 };
                first as i64 + self.backward(&mut out[1..], 0, rng)
            }
        }
    }

    /// Backward pass over `out` given its last spin; `self.rho[offset + i]`
    /// is the forward message of `out[i]`.
    fn backward<R: Rng + ?Sized>(&self, out: &mut [i8], offset: usize, rng: &mut R) -> i64 {
        let len = out.len();
        let mut sum = out[len - 1] as i64;
        for i in (0..len - 1).rev() {
            let p = self.back(self.rho[offset + i], out[i + 1]);
            out[i] = if rng.random::<f64>() < p { 1 } else { -1 };
            sum += out[i] as i64;
        }
        sum
    }
}

/// One exact draw from the Gibbs measure of a single component.
pub fn sample_component<R: Rng + ?Sized>(
    params: IsingParams,
    len: usize,
    kind: ComponentKind,
    rng: &mut R,
) -> Result<Vec<i8>> {
    kind.check_len(len)?;
    let mut out = vec![0i8; len];
    ChainSampler::new(params).sample_into(kind, &mut out, rng);
    Ok(out)
}
