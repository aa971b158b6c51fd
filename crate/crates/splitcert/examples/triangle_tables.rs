//! Build the two triangle-network strategies and print their exact outcome
//! tables.
//!
//! ```bash
//! cargo run --release --example triangle_tables
//! ```

use splitcert::network::quantum_behavior;
use splitcert::scenarios::{fritz_strategy, rgb4_strategy, FritzParams, Rgb4Params};

fn main() -> splitcert::Result<()> {
    // Four-outcome excitation-counting family at u = 0.85.
    let rgb4 = rgb4_strategy(&Rgb4Params::new(0.85))?;
    let table = quantum_behavior(&rgb4)?;
    println!("four-outcome triangle at u = 0.85 (entries above 2%):");
    for (outs, _, p) in table.iter() {
        if p > 0.02 {
            println!("  P({},{},{}) = {p:.6}", outs[0], outs[1], outs[2]);
        }
    }
    let support = table.iter().filter(|&(_, _, p)| p > 0.0).count();
    println!("  support: {support} of 64 outcome triples\n");

    // Binary CHSH-style strategy at ε = 0.3.
    let fritz = fritz_strategy(&FritzParams::new(0.3))?;
    let table = quantum_behavior(&fritz)?;
    println!("binary triangle at ε = 0.3:");
    print!("{}", table.to_csv());
    println!(
        "\nP(c=1) = {:.4} (= ε²)",
        table.event_prob(&[("C", 1)], &[])?
    );
    Ok(())
}
