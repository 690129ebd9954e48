//! Central limit theorem on a single fixed graph: `(S_N - E S_N)/sqrt(N)`
//! over exact samples, compared with the normal law of variance `chi_N`.

use cmising::experiments::{rq_clt_experiment, ExperimentConfig, ModelSpec};
use cmising::ising1d::IsingParams;

pub fn run_example() -> cmising::Result<()> {
    let mut c = ExperimentConfig::new(ModelSpec::Cm2, 2000, IsingParams::new(0.5, 0.2)?);
    c.samples = 2000;
    c.seed = 1;
    let rep = rq_clt_experiment(&c)?;
    for (name, q) in &rep.quantities {
        println!("{name:>16} {:.6}", q.value);
    }
    for crit in &rep.criteria {
        println!(
            "{} {}",
            if crit.passed { "PASS" } else { "FAIL" },
            crit.name
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
