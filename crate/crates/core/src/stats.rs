//! Small statistics toolkit for the experiment harness.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

use crate::error::{Error, Result};

/// Sample mean and unbiased variance with standard errors. The variance SE
/// uses the fourth central moment, `sqrt((m4 - s^4) / n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let variance = if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
    Summary {
        n,
        mean,
        mean_se: (variance / nf).sqrt(),
        variance,
        variance_se: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub const KS_MIN_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// `D_n = sup |F_n - F|` for a continuous `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

/// Survival function of the Kolmogorov distribution,
/// `1 - K(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
///
/// The alternating series converges slowly for small `x`, where the
/// equivalent theta-function form of `K(x)` is summed instead. Both are
/// truncated once terms drop below `1e-12`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    const TERM_TOL: f64 = 1e-12;
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        let c = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut sum = 0.0;
        for k in 1.. {
            let j = (2 * k - 1) as f64;
            let t = (c * j * j).exp();
            sum += t;
            if t < TERM_TOL {
                break;
            }
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * sum;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1.. {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { t } else { -t };
        if t < TERM_TOL {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided one-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let d = ks_statistic(samples, cdf);
    Ok(KsResult {
        n: samples.len(),
        statistic: d,
        p_value: kolmogorov_sf((samples.len() as f64).sqrt() * d),
    })
}

/// CDF of a centred normal with standard deviation `sd`.
pub fn normal_cdf(sd: f64) -> impl Fn(f64) -> f64 {
    let dist = Normal::new(0.0, sd).expect("positive finite standard deviation");
    move |x| dist.cdf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit test of `observed` counts against cell
/// probabilities `probs`. Cells with zero probability must be empty.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::InvalidParams(
            "need matching count and probability vectors of length >= 2".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &q) in observed.iter().zip(probs) {
        if q == 0.0 {
            if o != 0 {
                return Ok(ChiSquareResult {
                    statistic: f64::INFINITY,
                    dof: observed.len() - 1,
                    p_value: 0.0,
                });
            }
            continue;
        }
        let e = total as f64 * q;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells - 1;
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParams(e.to_string()))?
        .sf(stat);
    Ok(ChiSquareResult {
        statistic: stat,
        dof,
        p_value,
    })
}

/// Plot-ready histogram: `edges.len() == counts.len() + 1`; values outside
/// the edges are counted in `below` / `above`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut h = Histogram {
        edges,
        counts: vec![0; bins],
        below: 0,
        above: 0,
    };
    for &x in xs {
        if x < lo {
            h.below += 1;
        } else if x >= hi {
            h.above += 1;
        } else {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            h.counts[i] += 1;
        }
    }
    h
}

/// Exact `P(|S_N / N - m| > eps)` when `S_N = 2K - N` with `K ~ Bin(N, q)`,
/// which is the law of the spin sum at zero coupling with `q = (1 + tanh B) / 2`.
pub fn binomial_deviation_probability(n: u64, q: f64, m: f64, eps: f64) -> f64 {
    let dist = Binomial::new(q, n).expect("valid binomial parameters");
    let nf = n as f64;
    let lo = nf * (1.0 + m - eps) / 2.0;
    let hi = nf * (1.0 + m + eps) / 2.0;
    let below = if lo > 0.0 {
        let k = lo.ceil() as u64;
        if k == 0 {
            0.0
        } else {
            dist.cdf(k - 1)
        }
    } else {
        0.0
    };
    let above = if hi < nf {
        dist.sf(hi.floor() as u64)
    } else {
        0.0
    };
    below + above
}

/// Ordinary least-squares `(slope, intercept)` of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
