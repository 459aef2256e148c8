//! Occupation profiles of a 20-site chain for several dephasing rates,
//! written as CSV to stdout.
//!
//! cargo run --example profile_study > profiles.csv

use harmonic_lattice::experiments::{profile_study, SweepOptions};
use harmonic_lattice::export::profiles_csv;
use harmonic_lattice::model::{BathSpec, LatticeSpec};

fn main() -> harmonic_lattice::Result<()> {
    let spec = LatticeSpec::chain(
        20,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let study = profile_study(&spec, &[0.0, 0.01, 0.1, 1.0, 10.0], &SweepOptions::default())?;
    for p in &study.profiles {
        let fit = p.bulk_fit()?;
        eprintln!(
            "gamma {:>5}: ends {:.4} .. {:.4}, bulk slope {:+.5}, fit residual {:.1e}",
            p.dephasing,
            p.occupations[0],
            p.occupations[study.n_sites - 1],
            fit.slope,
            fit.residual
        );
    }
    let mut out = String::new();
    profiles_csv(&mut out, &study.profiles);
    print!("{out}");
    Ok(())
}
