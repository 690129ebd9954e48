//! Heat-bath dynamics as a cross-check of the exact solver, and as the only
//! route on graphs with vertices of degree 3 or more.

use cmising::experiments::ModelSpec;
use cmising::graphgen::{cm2, decompose, DegreeModel};
use cmising::ising1d::IsingParams;
use cmising::mcmc::estimate_moments;
use cmising::observables::spin_moments;
use cmising::rng::{stream, Domain};

pub fn run_example() -> cmising::Result<()> {
    let params = IsingParams::new(0.5, 0.2)?;
    let n = 256;
    let g = cm2(n, &mut stream(1, Domain::Graph, 0))?;
    let (mean, var) = spin_moments(params, &decompose(&g)?);
    let est = estimate_moments(&g, params, 12 * n, 2 * n, &mut stream(1, Domain::Chain, 0))?;
    println!(
        "cm2 N={n}: meanS {:.2} +- {:.2} (exact {mean:.2}), varS {:.1} +- {:.1} (exact {var:.1})",
        est.mean_s, est.mean_s_se, est.var_s, est.var_s_se
    );

    let cubic = ModelSpec::Custom {
        pmf: DegreeModel::new([(3, 1.0)].into())?,
    };
    let g = cubic.replica_graph(300, 1, 0)?;
    let est = estimate_moments(
        &g,
        IsingParams::new(0.3, 0.0)?,
        3000,
        600,
        &mut stream(1, Domain::Chain, 1),
    )?;
    println!(
        "3-regular N=300, beta 0.3, B 0: meanS {:.2} +- {:.2}",
        est.mean_s, est.mean_s_se
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
