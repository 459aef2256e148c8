//! Chain current against length with and without dephasing, with
//! power-law fits of the two regimes.
//!
//! cargo run --release --example fourier_scaling

use harmonic_lattice::analytic::{heat_current_asymptote, ChainParams};
use harmonic_lattice::experiments::{sweep_length, SweepOptions};
use harmonic_lattice::model::{BathSpec, LatticeSpec};

fn main() -> harmonic_lattice::Result<()> {
    let spec = LatticeSpec::chain(
        20,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let lengths = [5, 10, 20, 50, 100, 200, 400, 800, 1600, 3200];
    let opts = SweepOptions::default().with_cap(50);

    for (gamma, window) in [(0.0, (5.0, 3200.0)), (0.1, (800.0, 3200.0))] {
        let r = sweep_length(&spec, &lengths, gamma, &opts.with_fit(window.0, window.1))?;
        let fit = r.fit.expect("window requested");
        println!("gamma = {gamma}: exponent {:.6} over N in [{}, {}]", fit.exponent, window.0, window.1);
        for (n, j) in r.values.iter().zip(&r.j_closed) {
            println!("  N = {n:>5}  J = {j:.6e}");
        }
    }

    let p = ChainParams::from_spec(&spec)?.with_dephasing(0.1);
    let asym = heat_current_asymptote(&p)?;
    println!("local slope 100 -> 200: {:.4}", asym.local_slope(100, 200)?);
    println!("large-N prefactor A in J ~ A/N: {:.6}", asym.prefactor.unwrap_or(f64::NAN));
    Ok(())
}
