//! Time evolution of the occupations from the vacuum towards the steady
//! state, written as CSV (time, then one column per site).
//!
//! cargo run --release --example transient > transient.csv

use harmonic_lattice::dynamics::{evolve, operator_norm, solve_steady_state, EvolveOptions, MomentMatrix};
use harmonic_lattice::model::{build_lattice_generator, BathSpec, LatticeSpec};

fn main() -> harmonic_lattice::Result<()> {
    let n = 6;
    let spec = LatticeSpec::chain(
        n,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    )
    .with_dephasing(0.02);
    let g = build_lattice_generator(&spec)?;
    let opts = EvolveOptions::new(2000.0, EvolveOptions::default_dt(&g)).sampled(40);
    let traj = evolve(&MomentMatrix::zeros(n), &g, &opts)?;

    let header: Vec<String> = (1..=n).map(|j| format!("n{j}")).collect();
    println!("t,{}", header.join(","));
    for (t, c) in traj.times.iter().zip(&traj.states) {
        let occ: Vec<String> = c.occupations().iter().map(|x| format!("{x:.10}")).collect();
        println!("{t},{}", occ.join(","));
    }
    let ss = solve_steady_state(&g)?;
    eprintln!(
        "distance to steady state at t = {}: {:.2e}",
        opts.t_final,
        operator_norm(&(traj.last().matrix() - ss.c.matrix()))
    );
    Ok(())
}
