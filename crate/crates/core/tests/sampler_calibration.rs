//! Calibration of the exact component sampler: a single chi-square test at a
//! fixed seed fails about once in a hundred runs even for a correct sampler,
//! so here the p-values of many independent runs are checked for uniformity.

mod common;

use cmising::ising1d::{sample_component, ComponentKind, IsingParams};
use cmising::rng::{stream, Domain};
use cmising::stats::{chi_square_test, ks_test};
use rayon::prelude::*;

const RUNS: u64 = 200;
const DRAWS: usize = 20_000;

fn p_values(params: IsingParams, kind: ComponentKind, len: usize) -> Vec<f64> {
    let edges = match kind {
        ComponentKind::Line => common::line_edges(len),
        ComponentKind::Cycle => common::cycle_edges(len),
    };
    let probs = common::gibbs_probabilities(&edges, len, params.beta, params.field);
    (0..RUNS)
        .into_par_iter()
        .map(|run| {
            let mut rng = stream(run, Domain::Spins, 1000 + len as u64);
            let mut counts = vec![0u64; 1 << len];
            for _ in 0..DRAWS {
                let s = sample_component(params, len, kind, &mut rng).unwrap();
                let code: usize = s
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x == 1)
                    .map(|(i, _)| 1 << i)
                    .sum();
                counts[code] += 1;
            }
            chi_square_test(&counts, &probs).unwrap().p_value
        })
        .collect()
}

#[test]
fn chi_square_p_values_are_uniform() {
    let params = IsingParams::new(0.6, 0.2).unwrap();
    let cases = [
        (ComponentKind::Line, 2),
        (ComponentKind::Line, 3),
        (ComponentKind::Line, 4),
        (ComponentKind::Cycle, 1),
        (ComponentKind::Cycle, 2),
        (ComponentKind::Cycle, 3),
        (ComponentKind::Cycle, 4),
    ];
    for (kind, len) in cases {
        let ps = p_values(params, kind, len);
        let ks = ks_test(&ps, |x| x.clamp(0.0, 1.0)).unwrap();
        let small = ps.iter().filter(|&&p| p < 0.01).count();
        assert!(
            ks.p_value > 0.001,
            "{kind:?} {len}: KS p {} for p-value uniformity",
            ks.p_value
        );
        // Binomial(200, 0.01) exceeds 8 with probability below 1e-3
        assert!(
            small <= 8,
            "{kind:?} {len}: {small} of {RUNS} runs below 0.01"
        );
    }
}
