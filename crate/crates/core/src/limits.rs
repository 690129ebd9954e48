//! Thermodynamic limits and CLT variances.
//!
//! For the degree-{1,2} model with degree-2 fraction `p` the limiting line
//! density is `p*_l = q^{l-2} (1-q) (1-p)/2` with `q = 2p/(1+p)`, and each
//! line of length `l` adds `f_l = log(A+ + A- r^l) = log A+ + log(1 + a r^l)`
//! to the free energy. The `log A+` part sums in closed form
//! (`sum_l p*_l = (1-p)/2`); the `log(1 + a r^l)` part is truncated at `T`
//! and the dropped tail is bounded by a majorant series.

use serde::Serialize;

use crate::ising1d::{core_jet, IsingParams, TransferCore};
use crate::jet::{Jet, Real};

/// Truncated series value with a bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub truncation: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cm12Limits {
    pub p: f64,
    /// `2p / (1 - p)`
    pub alpha: f64,
    pub pressure: f64,
    pub magnetization: f64,
    pub chi: f64,
    pub sigma_g2: f64,
    pub sigma_aq2: f64,
    pub truncation: usize,
    /// Largest of the tail bounds of the reported series.
    pub tail_bound: f64,
}

pub fn pressure_cm2(params: IsingParams) -> f64 {
    crate::ising1d::pressure_1d(params)
}

/// Ratio of the geometric line-length law, `2p / (1 + p)`.
fn line_ratio(p: f64) -> f64 {
    2.0 * p / (1.0 + p)
}

/// Limit of the normalized number of lines of length `l`.
pub fn p_star(p: f64, l: usize) -> f64 {
    assert!(l >= 2, "lines have at least two vertices");
    let q = line_ratio(p);
    q.powi(l as i32 - 2) * (1.0 - p) / (1.0 + p) * (1.0 - p) / 2.0
}

/// `alpha = 2 p / (1 - p)`, the limiting `2 n2 / n1`.
pub fn alpha_of(p: f64) -> f64 {
    2.0 * p / (1.0 - p)
}

/// Jet of the whole-graph free energy per vertex for the degree-{1,2} model,
/// truncated at `t`.
fn free_energy_jet(core: &TransferCore<Jet>, p: f64, t: usize) -> Jet {
    let mut acc = core.lambda_plus.ln() + Jet::constant((1.0 - p) / 2.0) * core.a_plus().ln();
    for l in 2..=t {
        let w = p_star(p, l);
        if w == 0.0 {
            break;
        }
        acc = acc + Jet::constant(w) * core.line_excess(l as u64).ln_1p();
    }
    acc
}

/// Upper bounds on `|x_l|, |x_l'|, |x_l''|` for `x_l = (w-/w+) r^{l-1}`,
/// obtained by bounding every term of the product rule in absolute value.
struct ExcessMajorant {
    c: [f64; 3],
    r: [f64; 3],
}

impl ExcessMajorant {
    fn new(core: &TransferCore<Jet>) -> Self {
        let c = core.w_minus / core.w_plus;
        let r = core.r();
        ExcessMajorant {
            c: [c.v.abs(), c.d1.abs(), c.d2.abs()],
            r: [r.v.abs(), r.d1.abs(), r.d2.abs()],
        }
    }

    fn bounds(&self, l: usize) -> [f64; 3] {
        let m = (l - 1) as f64;
        let [c0, c1, c2] = self.c;
        let [r0, r1, r2] = self.r;
        if r0 == 0.0 {
            return [0.0; 3];
        }
        let pm = r0.powf(m);
        let pm1 = r0.powf(m - 1.0);
        let pm2 = if l >= 3 { r0.powf(m - 2.0) } else { 0.0 };
        let x0 = c0 * pm;
        let x1 = c1 * pm + c0 * m * pm1 * r1;
        let x2 =
            c2 * pm + 2.0 * c1 * m * pm1 * r1 + c0 * (m * (m - 1.0) * pm2 * r1 * r1 + m * pm1 * r2);
        [x0, x1, x2]
    }

    /// Bounds on `|log(1+x)|`, `|d log(1+x)|`, `|d^2 log(1+x)|`.
    fn log_bounds(&self, l: usize) -> [f64; 3] {
        let [x0, x1, x2] = self.bounds(l);
        [x0, x1, x2 + x1 * x1]
    }
}

/// Sums a non-negative majorant series from `start` on. Terms are summed until
/// they are past their peak and the geometric remainder estimated from the
/// current ratio is negligible; that remainder is added.
fn tail_sum(start: usize, term: impl Fn(usize) -> f64) -> f64 {
    const MAX_TERMS: usize = 1_000_000;
    let mut acc = 0.0;
    let mut prev = f64::NAN;
    for l in start..start + MAX_TERMS {
        let t = term(l);
        if t == 0.0 || !t.is_finite() {
            if t.is_finite() {
                break;
            }
            return f64::INFINITY;
        }
        acc += t;
        if prev.is_finite() {
            let ratio = t / prev;
            if ratio < 1.0 {
                let rest = t * ratio / (1.0 - ratio);
                if rest <= 1e-6 * acc {
                    return acc + rest;
                }
            }
        }
        prev = t;
    }
    acc
}

fn series_bound(p: f64, t: usize, order: usize, maj: &ExcessMajorant) -> f64 {
    tail_sum(t + 1, |l| p_star(p, l) * maj.log_bounds(l)[order])
}

/// Limiting pressure of the degree-{1,2} model.
pub fn pressure_cm12(params: IsingParams, p: f64, t: usize) -> SeriesValue {
    let core = core_jet(params);
    SeriesValue {
        value: free_energy_jet(&core, p, t).v,
        truncation: t,
        tail_bound: series_bound(p, t, 0, &ExcessMajorant::new(&core)),
    }
}

/// Limiting magnetization, the field derivative of [`pressure_cm12`].
pub fn magnetization_cm12(params: IsingParams, p: f64, t: usize) -> SeriesValue {
    let core = core_jet(params);
    SeriesValue {
        value: free_energy_jet(&core, p, t).d1,
        truncation: t,
        tail_bound: series_bound(p, t, 1, &ExcessMajorant::new(&core)),
    }
}

/// Limiting susceptibility, the second field derivative of [`pressure_cm12`].
pub fn chi_cm12(params: IsingParams, p: f64, t: usize) -> SeriesValue {
    let core = core_jet(params);
    SeriesValue {
        value: free_energy_jet(&core, p, t).d2,
        truncation: t,
        tail_bound: series_bound(p, t, 2, &ExcessMajorant::new(&core)),
    }
}

/// `gamma_l(B) = d/dB log(1 + a_B r_B^l)`, the field sensitivity of the
/// boundary correction of a line of length `l`.
pub fn gamma_l(params: IsingParams, l: usize) -> f64 {
    assert!(l >= 2, "lines have at least two vertices");
    core_jet(params).line_excess(l as u64).ln_1p().d1
}

/// `gamma_2 ..= gamma_t`, index 0 holding `gamma_2`.
pub fn gammas(params: IsingParams, t: usize) -> Vec<f64> {
    let core = core_jet(params);
    (2..=t)
        .map(|l| core.line_excess(l as u64).ln_1p().d1)
        .collect()
}

/// `z^n` by repeated squaring. Unlike `powi`, the result does not depend on
/// whether the compiler folds the call at build time.
fn pown(z: f64, n: usize) -> f64 {
    let (mut acc, mut base, mut n) = (1.0, z, n);
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Limiting covariance of the standardized counts of lines of lengths `r`
/// and `t` in a degree-{1,2} graph with `2 n2 / n1 = alpha`.
pub fn covariance_h(alpha: f64, r: usize, t: usize) -> f64 {
    // evaluate in a fixed order so that the matrix is exactly symmetric
    let (r, t) = (r.min(t), r.max(t));
    let z = alpha / (1.0 + alpha);
    let (rr, tt) = (r as f64, t as f64);
    let off = -pown(z, r - 2) * pown(z, t - 2) / ((1.0 + alpha) * (1.0 + alpha))
        * (1.0 + (rr - 2.0 - alpha) * (tt - 2.0 - alpha) / (alpha * (1.0 + alpha)));
    if r == t {
        off + pown(z, r - 2) / (1.0 + alpha)
    } else {
        off
    }
}

/// The `(T-1) x (T-1)` truncation of `H(alpha)`, rows and columns `2..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceH {
    pub alpha: f64,
    pub truncation: usize,
    entries: Vec<f64>,
}

impl CovarianceH {
    pub fn new(alpha: f64, truncation: usize) -> Self {
        assert!(truncation >= 2);
        let dim = truncation - 1;
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = covariance_h(alpha, i + 2, j + 2);
            }
        }
        CovarianceH {
            alpha,
            truncation,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.truncation - 1
    }

    /// Entry for line lengths `(r, t)`, both in `2..=T`.
    pub fn get(&self, r: usize, t: usize) -> f64 {
        self.entries[(r - 2) * self.dim() + (t - 2)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `x^T H x` with `x[0]` the coefficient of length 2.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let dim = self.dim();
        assert_eq!(x.len(), dim);
        let mut acc = 0.0;
        for i in 0..dim {
            let row = &self.entries[i * dim..(i + 1) * dim];
            acc += x[i] * row.iter().zip(x).map(|(h, y)| h * y).sum::<f64>();
        }
        acc
    }
}

/// Graph-fluctuation variance `((1-p)/2) sum_{l,j} gamma_l gamma_j H_{l,j}(alpha)`.
pub fn sigma_g2(params: IsingParams, p: f64, t: usize) -> SeriesValue {
    if p <= 0.0 || p >= 1.0 {
        // all lines have length 2 (p = 0) or there are no lines (p = 1)
        return SeriesValue {
            value: 0.0,
            truncation: t,
            tail_bound: 0.0,
        };
    }
    let alpha = alpha_of(p);
    let g = gammas(params, t);
    let h = CovarianceH::new(alpha, t);
    let value = (1.0 - p) / 2.0 * h.quadratic_form(&g);

    // H = -(u u^T + v v^T / (alpha (1+alpha))) / (1+alpha)^2 + diag(z^{l-2}) / (1+alpha)
    // with u_l = z^{l-2}, v_l = (l-2-alpha) z^{l-2}; bound each piece's tail.
    let core = core_jet(params);
    let maj = ExcessMajorant::new(&core);
    let z = alpha / (1.0 + alpha);
    let gl = |l: usize| maj.bounds(l)[1];
    let u = |l: usize| gl(l) * z.powi(l as i32 - 2);
    let v = |l: usize| u(l) * (l as f64 - 2.0 - alpha).abs();
    let head = |f: &dyn Fn(usize) -> f64| (2..=t).map(f).sum::<f64>();
    let (hu, hv) = (head(&u), head(&v));
    let (tu, tv) = (tail_sum(t + 1, u), tail_sum(t + 1, v));
    let diag = tail_sum(t + 1, |l| gl(l) * gl(l) * z.powi(l as i32 - 2));
    let bound = (1.0 - p) / 2.0
        * (tu * (2.0 * hu + tu) / ((1.0 + alpha) * (1.0 + alpha))
            + tv * (2.0 * hv + tv) / (alpha * (1.0 + alpha).powi(3))
            + diag / (1.0 + alpha));
    SeriesValue {
        value,
        truncation: t,
        tail_bound: bound,
    }
}

/// Variant of [`sigma_g2`] in which the rank-two part of `H` is added once
/// more on the diagonal, `sum_l gamma_l^2 (H_{l,l} - z^{l-2}/(1+alpha))`
/// on top of the full quadratic form. Not a variance of anything; kept so
/// that experiments can show which of the two the data supports.
pub fn sigma_g2_double_diagonal(params: IsingParams, p: f64, t: usize) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let alpha = alpha_of(p);
    let z = alpha / (1.0 + alpha);
    let extra: f64 = gammas(params, t)
        .iter()
        .enumerate()
        .map(|(i, g)| g * g * (covariance_h(alpha, i + 2, i + 2) - pown(z, i) / (1.0 + alpha)))
        .sum();
    sigma_g2(params, p, t).value + (1.0 - p) / 2.0 * extra
}

/// Averaged-quenched CLT variance `chi + sigma_G^2`.
pub fn sigma_aq2(params: IsingParams, p: f64, t: usize) -> SeriesValue {
    let chi = chi_cm12(params, p, t);
    let sg = sigma_g2(params, p, t);
    SeriesValue {
        value: chi.value + sg.value,
        truncation: t,
        tail_bound: chi.tail_bound + sg.tail_bound,
    }
}

/// Smallest truncation at which every tail bound of [`cm12_limits`] is
/// below `tol` (capped at 100 000).
pub fn default_truncation(params: IsingParams, p: f64, tol: f64) -> usize {
    const CAP: usize = 100_000;
    let ok = |t: usize| {
        pressure_cm12(params, p, t).tail_bound < tol
            && magnetization_cm12(params, p, t).tail_bound < tol
            && chi_cm12(params, p, t).tail_bound < tol
            && sigma_g2(params, p, t).tail_bound < tol
    };
    let mut hi = 2;
    while !ok(hi) {
        if hi >= CAP {
            return CAP;
        }
        hi = (hi * 2).min(CAP);
    }
    if hi == 2 {
        return 2;
    }
    // the doubling step already rejected hi / 2 (or, at the cap, something below it)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Tail tolerance used when no truncation is given.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

pub fn cm12_limits(params: IsingParams, p: f64, t: Option<usize>) -> Cm12Limits {
    let t = t.unwrap_or_else(|| default_truncation(params, p, DEFAULT_TAIL_TOLERANCE));
    let pressure = pressure_cm12(params, p, t);
    let magnetization = magnetization_cm12(params, p, t);
    let chi = chi_cm12(params, p, t);
    let sg = sigma_g2(params, p, t);
    Cm12Limits {
        p,
        alpha: alpha_of(p),
        pressure: pressure.value,
        magnetization: magnetization.value,
        chi: chi.value,
        sigma_g2: sg.value,
        sigma_aq2: chi.value + sg.value,
        truncation: t,
        tail_bound: pressure
            .tail_bound
            .max(magnetization.tail_bound)
            .max(chi.tail_bound)
            .max(sg.tail_bound),
    }
}
