//! Scan the measurement parameter of the four-outcome family and print
//! which region the observational+interventional pair certifies as
//! nonclassical (the observational table alone never is, at this inflation).
//!
//! ```bash
//! cargo run --release --example certification_scan
//! ```

use rayon::prelude::*;
use splitcert::inflation::certify::{rgb4_feasibility, Rgb4Options};
use splitcert::scenarios::Rgb4Params;

fn main() {
    let grid: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let rows: Vec<(f64, String, String)> = grid
        .par_iter()
        .map(|&u| {
            let status = |obs_only: bool| {
                let options = Rgb4Options {
                    obs_only,
                    ..Rgb4Options::default()
                };
                match rgb4_feasibility(&Rgb4Params::new(u), &options) {
                    Ok((_, v)) if v.is_feasible() => "classical-compatible".to_string(),
                    Ok(_) => "NONCLASSICAL".to_string(),
                    Err(e) => format!("({e})"),
                }
            };
            (u, status(true), status(false))
        })
        .collect();

    println!("{:>5}  {:<22} {:<22}", "u", "obs only", "obs + int");
    for (u, obs, int) in rows {
        println!("{u:>5.2}  {obs:<22} {int:<22}");
    }
}
