//! Fluctuations of the quenched magnetization across graphs,
//! `X_N = sqrt(N) (M_N - M)`, and of the standardized count of length-2 lines.

use cmising::experiments::{graph_fluctuation_experiment, ExperimentConfig, ModelSpec};
use cmising::ising1d::IsingParams;

pub fn run_example() -> cmising::Result<()> {
    let mut c = ExperimentConfig::new(
        ModelSpec::Cm12 { p: 0.5 },
        20_000,
        IsingParams::new(0.5, 0.2)?,
    );
    c.replicas = 300;
    c.seed = 1;
    let rep = graph_fluctuation_experiment(&c)?;
    for name in [
        "var_X",
        "sigma_G2",
        "sigma_G2_double_diagonal",
        "var_Lambda2_star",
        "H22",
    ] {
        println!(
            "{name:>26} {:.6e}",
            rep.quantity(name).expect("reported").value
        );
    }
    if let Some(h) = &rep.histogram {
        println!("histogram of X_N / sd: {:?}", h.counts);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
