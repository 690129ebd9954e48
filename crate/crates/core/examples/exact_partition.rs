//! Exact log-partition function, pressure and spin moments of one random
//! graph, computed from its line/torus decomposition.

use cmising::graphgen::{cm12, cm2, decompose};
use cmising::ising1d::{pressure_1d, susceptibility_1d, IsingParams};
use cmising::observables::quenched_observables;
use cmising::rng::{stream, Domain};

pub fn run_example() -> cmising::Result<()> {
    let params = IsingParams::new(0.5, 0.2)?;
    let n = 10_000;
    let g = cm2(n, &mut stream(7, Domain::Graph, 0))?;
    let d = decompose(&g)?;
    let obs = quenched_observables(params, &d);
    println!(
        "cm2  N={n}: {} tori, logZ {:.6}, chi_N {:.6}",
        d.torus_count(),
        obs.log_z,
        obs.chi_n
    );
    println!(
        "     1d limits: pressure {:.6}, chi {:.6}",
        pressure_1d(params),
        susceptibility_1d(params)
    );

    let g = cm12(n, 0.5, &mut stream(7, Domain::Graph, 1))?;
    let d = decompose(&g)?;
    let obs = quenched_observables(params, &d);
    println!(
        "cm12 N={n}: {} lines, {} tori, pressure {:.6}, chi_N {:.6}",
        d.line_count(),
        d.torus_count(),
        obs.pressure,
        obs.chi_n
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
