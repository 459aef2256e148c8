//! Current through a 20-site chain as the dephasing rate grows: ballistic
//! at zero, suppressed as the rate rises.
//!
//! cargo run --release --example dephasing_crossover

use harmonic_lattice::experiments::{sweep_dephasing, SweepOptions};
use harmonic_lattice::model::{BathSpec, LatticeSpec};

fn main() -> harmonic_lattice::Result<()> {
    let spec = LatticeSpec::chain(
        20,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let gammas = [0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0];
    let r = sweep_dephasing(&spec, &gammas, &SweepOptions::default())?;
    println!("{:>8}  {:>14}  {:>14}", "gamma", "J closed", "J numeric");
    for ((g, c), n) in r.values.iter().zip(&r.j_closed).zip(&r.j_numeric) {
        let n = n.map_or("-".to_string(), |v| format!("{v:.10}"));
        println!("{g:>8}  {c:>14.10}  {n:>14}");
    }
    println!("max relative gap {:.2e}", r.max_relative_gap());
    Ok(())
}
