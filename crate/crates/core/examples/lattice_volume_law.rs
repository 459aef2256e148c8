//! Whole-lattice solves in two and three dimensions against the volume law
//! (transverse volume times the chain current).
//!
//! cargo run --release --example lattice_volume_law

use harmonic_lattice::experiments::{dimension_study, SweepOptions};
use harmonic_lattice::export::dims_label;
use harmonic_lattice::model::{BathSpec, LatticeSpec};

fn main() -> harmonic_lattice::Result<()> {
    let base = LatticeSpec::chain(
        4,
        10.0,
        0.1,
        BathSpec::with_occupation(0.1, 2.0),
        BathSpec::with_occupation(0.1, 1.0),
    );
    let shapes = vec![vec![4], vec![4, 4], vec![3, 3, 3], vec![2, 5], vec![5, 2], vec![2, 2, 2, 4]];
    for dephasing in [0.0, 0.05] {
        println!("dephasing {dephasing}");
        let rows = dimension_study(&base.clone().with_dephasing(dephasing), &shapes, &SweepOptions::default())?;
        for r in rows {
            println!(
                "  {:>8}  J_num {:.12}  J_formula {:.12}  transverse |C| {}",
                dims_label(&r.dims),
                r.j_numeric.unwrap_or(f64::NAN),
                r.j_formula,
                r.transverse_coherence.map_or("-".into(), |q| format!("{q:.1e}"))
            );
        }
    }
    Ok(())
}
