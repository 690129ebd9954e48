//! Probability that `|S_N/N - M|` exceeds `eps` along a grid of sizes.

use cmising::experiments::{lln_experiment, ExperimentConfig, ModelSpec};
use cmising::ising1d::IsingParams;

pub fn run_example() -> cmising::Result<()> {
    let mut c = ExperimentConfig::new(ModelSpec::Cm2, 100, IsingParams::new(0.5, 0.2)?);
    c.replicas = 5;
    c.samples = 400;
    c.seed = 1;
    let rep = lln_experiment(&c, 0.1, &[100, 300, 1000, 3000])?;
    println!("{:>6} {:>10} {:>10}", "N", "P_rq", "P_aq");
    for cell in &rep.cells {
        println!(
            "{:>6} {:>10.5} {:>10.5}",
            cell.n, cell.rq_probability, cell.aq_probability
        );
    }
    if let Some(s) = rep.quantity("rq_log_slope") {
        println!("slope of log P against N: {:.3e}", s.value);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
