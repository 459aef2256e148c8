//! Random first and anomalous moments on a boundary-damped chain decay to
//! zero, leaving a state whose steady covariance certifies separability.
//!
//! cargo run --release --example thermalization

use harmonic_lattice::dynamics::{
    evolve_anomalous, evolve_first_moments, solve_steady_state, AnomalousMoments, FirstMoments, C64,
};
use harmonic_lattice::model::{build_lattice_generator, BathSpec, LatticeSpec};
use harmonic_lattice::observables::separability_certificate;
use nalgebra::{DMatrix, DVector};

/// Deterministic pseudo-random numbers in [-1, 1).
fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn main() -> harmonic_lattice::Result<()> {
    let n = 4;
    let spec = LatticeSpec::chain(
        n,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let g = build_lattice_generator(&spec)?;
    let mut seed = 7;
    let a0 = FirstMoments(DVector::from_fn(n, |_, _| C64::new(lcg(&mut seed), lcg(&mut seed))));
    let raw = DMatrix::from_fn(n, n, |_, _| C64::new(lcg(&mut seed), lcg(&mut seed)));
    let b0 = AnomalousMoments(&raw + raw.transpose());

    println!("{:>6}  {:>12}  {:>12}", "t", "|a|/|a0|", "|B|/|B0|");
    let mut t_prev = 0.0;
    let (mut a, mut b) = (a0.clone(), b0.clone());
    for t in [100.0, 250.0, 500.0, 1000.0, 2000.0] {
        a = evolve_first_moments(&a, &g, t - t_prev, 0.1)?;
        b = evolve_anomalous(&b, &g, t - t_prev, 0.1)?;
        t_prev = t;
        println!("{t:>6}  {:>12.3e}  {:>12.3e}", a.norm() / a0.norm(), b.norm() / b0.norm());
    }

    let ss = solve_steady_state(&g)?;
    let cert = separability_certificate(&ss.c, &AnomalousMoments::zeros(n), &FirstMoments::zeros(n), 1e-10);
    println!("steady covariance min eigenvalue {:.6}", cert.min_eigenvalue);
    println!("certificate: {:?}", cert.status);
    Ok(())
}
