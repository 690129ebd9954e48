//! Limiting pressure, susceptibility and the two variance contributions on
//! degree-{1,2} graphs as the fraction `p` of degree-2 vertices varies.

use cmising::ising1d::IsingParams;
use cmising::limits::{cm12_limits, sigma_g2_double_diagonal};

pub fn run_example() -> cmising::Result<()> {
    let params = IsingParams::new(0.5, 0.2)?;
    println!(
        "{:>5} {:>4} {:>12} {:>12} {:>12} {:>13}",
        "p", "T", "chi", "sigma_G2", "sigma_aq2", "double-diag"
    );
    for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let l = cm12_limits(params, p, None);
        // the variant that counts the diagonal of H twice, for comparison
        let dd = sigma_g2_double_diagonal(params, p, l.truncation);
        println!(
            "{p:>5} {:>4} {:>12.8} {:>12.4e} {:>12.8} {dd:>13.4e}",
            l.truncation, l.chi, l.sigma_g2, l.sigma_aq2
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
