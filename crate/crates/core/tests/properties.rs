use harmonic_lattice::analytic::{chain_closed_form, chain_closed_form_dephased, ChainParams};
use harmonic_lattice::dynamics::{apply_generator, solve_steady_state, MomentMatrix, C64};
use harmonic_lattice::experiments::fit_line;
use harmonic_lattice::model::{
    build_lattice_generator, occupation_from_temperature, temperature_from_occupation, BathSide, BathSpec, Lattice,
    LatticeSpec,
};
use harmonic_lattice::observables::{bond_current, boundary_current, dephasing_current, energy_rate};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..6, 1..=4)
}

fn hermitian(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j].0, v[i * n + j].1));
        (&m + m.adjoint()) * C64::from(0.5)
    })
}

/// Random small lattice with positive couplings and rates.
fn spec_strategy() -> impl Strategy<Value = LatticeSpec> {
    (
        prop_oneof![
            (2usize..9).prop_map(|n| vec![n]),
            (2usize..4, 2usize..5).prop_map(|(a, b)| vec![a, b]),
        ],
        1.0f64..20.0,
        0.01f64..0.1,
        0.0f64..0.3,
        (0.01f64..0.5, 0.0f64..5.0),
        (0.01f64..0.5, 0.0f64..5.0),
    )
        .prop_map(|(dims, omega, ratio, gamma, (rh, nh), (rc, nc))| {
            LatticeSpec::chain(
                2,
                omega,
                ratio * omega,
                BathSpec::with_occupation(rh, nh),
                BathSpec::with_occupation(rc, nc),
            )
            .with_dims(&dims)
            .with_dephasing(gamma)
        })
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flat_index_round_trip(dims in dims_strategy(), pick in 0usize..10_000) {
        let lat = Lattice::new(&dims).unwrap();
        let flat = pick % lat.len();
        let coords = lat.unflatten(flat).unwrap();
        prop_assert_eq!(lat.flatten(&coords).unwrap(), flat);
        prop_assert!(coords.iter().zip(&dims).all(|(c, d)| c < d));
    }

    #[test]
    fn edge_count(dims in dims_strategy()) {
        let lat = Lattice::new(&dims).unwrap();
        let total: usize = dims.iter().product();
        let expected: usize = dims.iter().map(|&n| total / n * (n - 1)).sum();
        prop_assert_eq!(lat.edges().len(), expected);
        for (i, j) in lat.edges() {
            prop_assert!(i < j && lat.is_edge(j, i));
        }
    }

    #[test]
    fn temperature_occupation_inverse(omega in 0.1f64..50.0, t in 0.05f64..500.0) {
        let n = occupation_from_temperature(omega, t).unwrap();
        let back = temperature_from_occupation(omega, n).unwrap();
        prop_assert!((back - t).abs() <= 1e-12 * t.max(1.0), "{} vs {}", back, t);
    }

    #[test]
    fn generator_is_affine(spec in spec_strategy(), seed in 0u64..1000, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let g = build_lattice_generator(&spec).unwrap();
        let n = g.n_sites();
        let x = DMatrix::from_fn(n, n, |i, j| C64::new(((i * 7 + j * 3 + seed as usize) % 11) as f64, (i as f64) - (j as f64)));
        let y = DMatrix::from_fn(n, n, |i, j| C64::new((i * j) as f64 * 0.1, ((i + 2 * j + seed as usize) % 5) as f64));
        let m = g.m_matrix().map(C64::from);
        let gen = |c: &DMatrix<C64>| apply_generator(&MomentMatrix::new(c.clone()).unwrap(), &g).unwrap() - &m;
        let combo = &x * C64::from(alpha) + &y * C64::from(beta);
        let lhs = gen(&combo);
        let rhs = gen(&x) * C64::from(alpha) + gen(&y) * C64::from(beta);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-11 * (1.0 + max_abs(&x) + max_abs(&y)) * spec.omega);
    }

    #[test]
    fn generator_preserves_hermiticity(spec in spec_strategy(), c in hermitian(4)) {
        let spec = spec.with_dims(&[4]);
        let g = build_lattice_generator(&spec).unwrap();
        let d = apply_generator(&MomentMatrix::new(c).unwrap(), &g).unwrap();
        prop_assert!(max_abs(&(&d - d.adjoint())) <= 1e-13 * (1.0 + max_abs(&d)));
    }

    #[test]
    fn energy_balance_identity(spec in spec_strategy(), c in hermitian(6)) {
        let spec = spec.with_dims(&[2, 3]);
        let g = build_lattice_generator(&spec).unwrap();
        let c = MomentMatrix::new(c).unwrap();
        let lhs = energy_rate(&c, &g).unwrap();
        let rhs = boundary_current(&c, &g, BathSide::Hot).unwrap()
            + boundary_current(&c, &g, BathSide::Cold).unwrap()
            + dephasing_current(&c, &g);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()) * spec.omega);
    }

    #[test]
    fn steady_state_invariants(spec in spec_strategy()) {
        let g = build_lattice_generator(&spec).unwrap();
        let ss = solve_steady_state(&g).unwrap();
        let c = &ss.c;
        prop_assert!(c.hermitian_defect() == 0.0);
        prop_assert!(c.min_eigenvalue() >= -1e-10);

        let hot = boundary_current(c, &g, BathSide::Hot).unwrap();
        let cold = boundary_current(c, &g, BathSide::Cold).unwrap();
        let scale = hot.abs().max(1e-300);
        prop_assert!((hot + cold).abs() <= 1e-9 * scale + 1e-15, "{} {}", hot, cold);
        prop_assert!(dephasing_current(c, &g).abs() <= 1e-9 * scale + 1e-15);

        // The current flows from the higher occupation to the lower one.
        let dn = spec.hot_occupation().unwrap() - spec.cold_occupation().unwrap();
        prop_assert!(hot * dn >= 0.0);

        let lat = spec.lattice().unwrap();
        let per_chain = hot / lat.transverse_volume() as f64;
        for chain in lat.chains() {
            for b in chain.windows(2) {
                let j = bond_current(c, &lat, spec.omega, spec.coupling, (b[0], b[1])).unwrap();
                prop_assert!((j - per_chain).abs() <= 1e-9 * scale + 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_matches_solver(spec in spec_strategy(), n in 3usize..12) {
        let spec = spec.with_dims(&[n]);
        let p = ChainParams::from_spec(&spec).unwrap();
        let closed = chain_closed_form_dephased(&p).unwrap();
        let g = build_lattice_generator(&spec).unwrap();
        let ss = solve_steady_state(&g).unwrap();
        let diff = max_abs(&(ss.c.matrix() - closed.moment_matrix().matrix()));
        prop_assert!(diff <= 1e-9 * (1.0 + ss.c.max_abs()), "{}", diff);
    }

    #[test]
    fn dephased_form_reduces_at_zero(spec in spec_strategy(), n in 3usize..40) {
        let p = ChainParams::from_spec(&spec.with_dims(&[n]).with_dephasing(0.0)).unwrap();
        let a = chain_closed_form(&p).unwrap();
        let b = chain_closed_form_dephased(&p).unwrap();
        prop_assert!((a.current - b.current).abs() <= 1e-15 * a.current.abs().max(1e-300));
        prop_assert!((a.x - b.x).norm() <= 1e-15);
        for (x, y) in a.e.iter().zip(&b.e) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
    }

    #[test]
    fn current_decreases_with_dephasing(spec in spec_strategy(), n in 3usize..60, g1 in 0.0f64..1.0, dg in 0.001f64..1.0) {
        let p = ChainParams::from_spec(&spec.with_dims(&[n])).unwrap();
        let lo = chain_closed_form_dephased(&p.with_dephasing(g1)).unwrap().current;
        let hi = chain_closed_form_dephased(&p.with_dephasing(g1 + dg)).unwrap().current;
        prop_assert!(hi.abs() <= lo.abs());
    }

    #[test]
    fn line_fit_is_deterministic(ys in prop::collection::vec(-10.0f64..10.0, 2..30)) {
        let xs: Vec<f64> = (0..ys.len()).map(|k| k as f64).collect();
        let a = fit_line(&xs, &ys).unwrap();
        let b = fit_line(&xs, &ys).unwrap();
        prop_assert_eq!(a.slope.to_bits(), b.slope.to_bits());
        prop_assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
        prop_assert_eq!(a.residual.to_bits(), b.residual.to_bits());
    }
}
