//! Cross-module properties: limit formulas against simulation, determinism of
//! experiment reports, estimator scaling and the covariance kernel spectrum.

use cmising::experiments::{
    aq_clt_experiment, graph_fluctuation_experiment, lln_experiment, rq_clt_experiment,
    with_threads, ExperimentConfig, ExperimentReport, ModelSpec,
};
use cmising::graphgen::{cm12, cm2, decompose, DegreeModel};
use cmising::ising1d::{pressure_1d, IsingParams};
use cmising::limits::{chi_cm12, pressure_cm12, CovarianceH};
use cmising::mcmc::estimate_moments;
use cmising::observables::{quenched_observables, spin_moments, ConfigurationSampler};
use cmising::rng::{stream, Domain};
use cmising::stats::summarize;
use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

fn pr(beta: f64, field: f64) -> IsingParams {
    IsingParams::new(beta, field).unwrap()
}

fn json(r: &ExperimentReport) -> String {
    serde_json::to_string(&r.without_runtime()).unwrap()
}

#[test]
fn truncated_h_is_positive_semidefinite() {
    for alpha in [0.5, 1.0, 2.0, 5.0] {
        let h = CovarianceH::new(alpha, 15);
        let d = h.dim();
        let m = DMatrix::from_row_slice(d, d, h.entries());
        assert_eq!(m, m.transpose());
        let min = SymmetricEigen::new(m).eigenvalues.min();
        assert!(min >= -1e-12, "alpha {alpha}: min eigenvalue {min}");
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut c = ExperimentConfig::new(ModelSpec::Cm12 { p: 0.4 }, 2000, pr(0.5, 0.2));
    c.replicas = 12;
    c.samples = 30;
    c.seed = 11;
    let run = |k: usize| {
        with_threads(Some(k), || {
            let aq = aq_clt_experiment(&c).unwrap();
            let mut rq_c = c.clone();
            rq_c.samples = 300;
            let rq = rq_clt_experiment(&rq_c).unwrap();
            let mut xn_c = c.clone();
            xn_c.replicas = 60;
            let xn = graph_fluctuation_experiment(&xn_c).unwrap();
            let mut lln_c = c.clone();
            lln_c.replicas = 4;
            lln_c.samples = 50;
            let lln = lln_experiment(&lln_c, 0.1, &[100, 400]).unwrap();
            [json(&aq), json(&rq), json(&xn), json(&lln)]
        })
        .unwrap()
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn quadrupling_samples_halves_standard_errors() {
    let mut c = ExperimentConfig::new(ModelSpec::Cm2, 1000, pr(0.5, 0.2));
    c.seed = 5;
    c.samples = 2000;
    let small = rq_clt_experiment(&c).unwrap();
    c.samples = 8000;
    let large = rq_clt_experiment(&c).unwrap();
    let ratio = small.quantity("sample_mean").unwrap().se.unwrap()
        / large.quantity("sample_mean").unwrap().se.unwrap();
    assert!(
        (ratio / 2.0 - 1.0).abs() <= 0.2,
        "within-graph SE ratio {ratio}"
    );

    let mut c = ExperimentConfig::new(ModelSpec::Cm12 { p: 0.5 }, 1000, pr(0.5, 0.2));
    c.seed = 5;
    c.samples = 5;
    c.replicas = 200;
    let small = aq_clt_experiment(&c).unwrap();
    c.replicas = 800;
    let large = aq_clt_experiment(&c).unwrap();
    let ratio = small.quantity("mean_chi_N").unwrap().se.unwrap()
        / large.quantity("mean_chi_N").unwrap().se.unwrap();
    assert!(
        (ratio / 2.0 - 1.0).abs() <= 0.2,
        "across-graph SE ratio {ratio}"
    );
}

#[test]
fn chi_cm12_matches_mean_finite_size_susceptibility() {
    let (params, p, n) = (pr(0.5, 0.2), 0.5, 100_000);
    let chis: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|i| {
            let g = cm12(n, p, &mut stream(21, Domain::Graph, i)).unwrap();
            quenched_observables(params, &decompose(&g).unwrap()).chi_n
        })
        .collect();
    let s = summarize(&chis);
    let chi = chi_cm12(params, p, 60).value;
    assert!(
        (s.mean - chi).abs() <= 3.0 * s.mean_se,
        "{} vs {chi} (SE {})",
        s.mean,
        s.mean_se
    );
}

#[test]
fn pressure_limits_match_large_graphs() {
    let params = pr(0.5, 0.2);
    let n = 1_000_000;

    // cm2: log lambda+ <= psi_N <= log lambda+ + log 2 K/N
    let g = cm2(n, &mut stream(22, Domain::Graph, 0)).unwrap();
    let d = decompose(&g).unwrap();
    let psi = quenched_observables(params, &d).pressure;
    let lp = pressure_1d(params);
    let slack = 2.0 * d.torus_count() as f64 / n as f64 * 2f64.ln();
    assert!(psi >= lp - 1e-15 && psi - lp <= slack, "{psi} vs {lp}");

    // cm12 against the truncated series
    let p = 0.5;
    let psis: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let g = cm12(n, p, &mut stream(22, Domain::Graph, 100 + i)).unwrap();
            quenched_observables(params, &decompose(&g).unwrap()).pressure
        })
        .collect();
    let s = summarize(&psis);
    let lim = pressure_cm12(params, p, 60);
    assert!(
        (s.mean - lim.value).abs() <= 3.0 * s.mean_se + lim.tail_bound,
        "{} vs {}",
        s.mean,
        lim.value
    );

    // no coupling, no field: log 2 on any graph
    let g = cm12(n, p, &mut stream(22, Domain::Graph, 200)).unwrap();
    let psi0 = quenched_observables(pr(0.0, 0.0), &decompose(&g).unwrap()).pressure;
    assert!((psi0 - pressure_cm12(pr(0.0, 0.0), p, 60).value).abs() <= 1e-3);
}

#[test]
fn sampled_sums_match_exact_moments() {
    let params = pr(0.5, 0.2);
    let g = cm2(100, &mut stream(23, Domain::Graph, 0)).unwrap();
    let d = decompose(&g).unwrap();
    let (mean, var) = spin_moments(params, &d);
    let mut sampler = ConfigurationSampler::new(params, &d);
    let mut rng = stream(23, Domain::Spins, 0);
    let xs: Vec<f64> = (0..1_000_000)
        .map(|_| sampler.sample_sum(&mut rng) as f64)
        .collect();
    let s = summarize(&xs);
    assert!(
        (s.mean - mean).abs() <= 4.0 * s.mean_se,
        "{} vs {mean}",
        s.mean
    );
    assert!(
        (s.variance - var).abs() <= 4.0 * s.variance_se,
        "{} vs {var}",
        s.variance
    );
}

#[test]
fn random_quenched_cm12_variance_tracks_chi_cm12() {
    let mut c = ExperimentConfig::new(ModelSpec::Cm12 { p: 0.5 }, 10_000, pr(0.5, 0.2));
    c.samples = 5000;
    c.seed = 24;
    let rep = rq_clt_experiment(&c).unwrap();
    let crit = rep.criterion("variance_vs_chi_limit").unwrap();
    assert!(crit.passed, "{crit:?}");
}

#[test]
fn three_regular_heat_bath_in_uniqueness_regime() {
    let model = ModelSpec::Custom {
        pmf: DegreeModel::new([(3, 1.0)].into()).unwrap(),
    };
    let g = model.replica_graph(500, 25, 0).unwrap();

    // beta < atanh(1/2): no symmetry breaking at zero field
    let est = estimate_moments(
        &g,
        pr(0.4, 0.0),
        25_000,
        5000,
        &mut stream(25, Domain::Chain, 0),
    )
    .unwrap();
    assert!(
        est.mean_s.abs() <= 3.0 * est.mean_s_se,
        "meanS {} (SE {})",
        est.mean_s,
        est.mean_s_se
    );

    let est = estimate_moments(
        &g,
        pr(0.0, 0.0),
        25_000,
        5000,
        &mut stream(25, Domain::Chain, 1),
    )
    .unwrap();
    let n = g.n() as f64;
    assert!(
        (est.var_s / n - 1.0).abs() <= 4.0 * est.var_s_se / n,
        "varS/N {}",
        est.var_s / n
    );
}

#[test]
fn lln_deviation_probability_decreases_on_cm2() {
    let mut c = ExperimentConfig::new(ModelSpec::Cm2, 100, pr(0.5, 0.2));
    c.replicas = 10;
    c.samples = 1000;
    c.seed = 26;
    let rep = lln_experiment(&c, 0.1, &[100, 1000, 10_000]).unwrap();
    assert!(rep.criterion("rq_log_slope_negative").unwrap().passed);
    assert!(rep.criterion("rq_non_increasing").unwrap().passed);

    // |S_N / N| <= 1, so deviations beyond 2 never happen
    let rep = lln_experiment(&c, 2.5, &[100, 1000]).unwrap();
    assert!(rep
        .cells
        .iter()
        .all(|cell| cell.rq_hits == 0 && cell.aq_hits == 0));
}
