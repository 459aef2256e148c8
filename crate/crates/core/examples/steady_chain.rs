//! Solve a five-site chain between a hot and a cold bath and compare the
//! numerical steady state with the closed form.
//!
//! cargo run --example steady_chain

use harmonic_lattice::analytic::{chain_closed_form, ChainParams};
use harmonic_lattice::dynamics::solve_steady_state;
use harmonic_lattice::model::{build_lattice_generator, BathSpec, LatticeSpec};
use harmonic_lattice::observables::ObservableReport;

fn main() -> harmonic_lattice::Result<()> {
    let spec = LatticeSpec::chain(
        5,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let g = build_lattice_generator(&spec)?;
    let ss = solve_steady_state(&g)?;
    let report = ObservableReport::measure(&ss.c, &spec, &g)?;
    let closed = chain_closed_form(&ChainParams::from_spec(&spec)?)?;

    println!("solver {} ({} unknowns), residual {:.2e}", ss.solver.method, ss.solver.dimension, ss.residual);
    println!("J_hot  = {:.12}", report.j_hot);
    println!("J_cold = {:.12}", report.j_cold);
    println!("closed = {:.12}", closed.current);
    println!("coherence <a1^dag a2> = {:.6}", ss.c.get(0, 1));
    println!("site  occupation  closed-form  temperature");
    for (j, ((n, e), t)) in report
        .occupations
        .iter()
        .zip(closed.occupations())
        .zip(&report.temperatures)
        .enumerate()
    {
        println!("{:>4}  {n:>10.6}  {e:>11.6}  {t:>11.4}", j + 1);
    }
    Ok(())
}
