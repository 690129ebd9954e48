//! Draws configuration-model graphs, writes one to the edge-list format and
//! reads it back.

use cmising::graphgen::{cm12, decompose, expected_tori, read_graph, write_graph, DegreeModel};
use cmising::rng::{stream, Domain};

pub fn run_example() -> cmising::Result<()> {
    let seed = 3;
    let g = cm12(20, 0.6, &mut stream(seed, Domain::Graph, 0))?;
    let d = decompose(&g)?;
    println!(
        "line lengths {:?}, torus lengths {:?}",
        d.line_lengths(),
        d.torus_lengths()
    );

    let mut buf = Vec::new();
    write_graph(&g, seed, &mut buf)?;
    let (back, back_seed) = read_graph(buf.as_slice())?;
    assert_eq!(back.edges(), g.edges());
    assert_eq!(back_seed, seed);
    print!(
        "{}",
        String::from_utf8_lossy(&buf)
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("\n...");

    println!("E[tori] on cm2(1000) = {:.4}", expected_tori(1000));
    let cubic = DegreeModel::new([(3, 1.0)].into())?;
    println!("3-regular critical beta = {:.4}", cubic.stats().beta_c);
    Ok(())
}

#[allow(dead_code)]
fn main() -> cmising::Result<()> {
    run_example()
}
