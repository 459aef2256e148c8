//! Classical fixed-step fourth-order Runge-Kutta for the moment equations.

use nalgebra::DMatrix;

use super::{
    anomalous_rhs, check_dim, first_moment_rhs, generator_rhs, hermitian_part, operator_norm,
    AnomalousMoments, FirstMoments, MomentMatrix, C64,
};
use crate::error::{Error, Result};
use crate::model::GeneratorParts;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_final: f64,
    /// Requested step; the actual step is `t_final / ceil(t_final / dt)`.
    pub dt: f64,
    /// Record a sample every this many steps; 0 records only the endpoints.
    pub sample_every: usize,
}

impl EvolveOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        Self {
            t_final,
            dt,
            sample_every: 0,
        }
    }

    /// `0.05 / max(V, Gamma_max, gamma)`. The uniform frequency drops out of
    /// `i[W, C]`, so it does not limit the step.
    pub fn default_dt(g: &GeneratorParts) -> f64 {
        let rate = g.max_rate();
        if rate > 0.0 {
            0.05 / rate
        } else {
            0.05
        }
    }

    pub fn sampled(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }

    fn steps(&self) -> Result<(usize, f64)> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidStep(format!(
                "t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        let h = if n == 0 { 0.0 } else { self.t_final / n as f64 };
        Ok((n, h))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub states: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn last(&self) -> &T {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn into_last(mut self) -> T {
        self.states.pop().expect("trajectory holds at least the initial state")
    }
}

pub fn rk4_step<F>(y: &DMatrix<C64>, h: f64, f: F) -> DMatrix<C64>
where
    F: Fn(&DMatrix<C64>) -> DMatrix<C64>,
{
    let half = C64::from(0.5 * h);
    let full = C64::from(h);
    let k1 = f(y);
    let k2 = f(&(y + &k1 * half));
    let k3 = f(&(y + &k2 * half));
    let k4 = f(&(y + &k3 * full));
    y + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0)
}

fn is_finite(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn integrate<F, P>(y0: DMatrix<C64>, opts: &EvolveOptions, f: F, post: P) -> Result<Trajectory<DMatrix<C64>>>
where
    F: Fn(&DMatrix<C64>) -> DMatrix<C64>,
    P: Fn(DMatrix<C64>) -> DMatrix<C64>,
{
    let (n_steps, h) = opts.steps()?;
    let mut times = vec![0.0];
    let mut states = vec![y0.clone()];
    let mut y = y0;
    for step in 1..=n_steps {
        y = post(rk4_step(&y, h, &f));
        let t = step as f64 * h;
        if !is_finite(&y) {
            return Err(Error::NonFinite { time: t });
        }
        if step == n_steps || (opts.sample_every > 0 && step % opts.sample_every == 0) {
            times.push(if step == n_steps { opts.t_final } else { t });
            states.push(y.clone());
        }
    }
    Ok(Trajectory { times, states })
}

/// Integrate the second-moment equations from `c0`, re-symmetrizing
/// `C <- (C + C^dag)/2` after every step.
pub fn evolve(c0: &MomentMatrix, g: &GeneratorParts, opts: &EvolveOptions) -> Result<Trajectory<MomentMatrix>> {
    check_dim(c0.dim(), g)?;
    let traj = integrate(
        c0.matrix().clone(),
        opts,
        |c| generator_rhs(c, g),
        |c| hermitian_part(&c),
    )?;
    Ok(Trajectory {
        times: traj.times,
        states: traj.states.into_iter().map(MomentMatrix).collect(),
    })
}

/// Mean on-site frequency. Both first and anomalous moments are integrated
/// in the frame rotating at this frequency and rotated back at the end; the
/// transformation is exact, and it keeps RK4 from damping the fast phase.
fn frame_frequency(g: &GeneratorParts) -> f64 {
    g.w().diagonal().mean()
}

pub fn evolve_first_moments(
    a0: &FirstMoments,
    g: &GeneratorParts,
    t_final: f64,
    dt: f64,
) -> Result<FirstMoments> {
    check_dim(a0.0.len(), g)?;
    let shift = frame_frequency(g);
    let y0 = DMatrix::from_column_slice(a0.0.len(), 1, a0.0.as_slice());
    let end = integrate(
        y0,
        &EvolveOptions::new(t_final, dt),
        |a| first_moment_rhs(a, g, shift),
        |a| a,
    )?
    .into_last();
    let phase = C64::new(0.0, -shift * t_final).exp();
    Ok(FirstMoments(end.column(0) * phase))
}

pub fn evolve_anomalous(
    b0: &AnomalousMoments,
    g: &GeneratorParts,
    t_final: f64,
    dt: f64,
) -> Result<AnomalousMoments> {
    check_dim(b0.0.nrows(), g)?;
    let shift = frame_frequency(g);
    let end = integrate(
        b0.0.clone(),
        &EvolveOptions::new(t_final, dt),
        |b| anomalous_rhs(b, g, shift),
        |b| (&b + b.transpose()) * C64::from(0.5),
    )?
    .into_last();
    let phase = C64::new(0.0, -2.0 * shift * t_final).exp();
    Ok(AnomalousMoments(end * phase))
}

/// Outcome of relaxing the second moments by time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxed {
    pub c: MomentMatrix,
    pub time: f64,
    /// Operator norm of `dC/dt` at the final state.
    pub residual: f64,
    pub converged: bool,
}

/// Integrate from `c0` until the Frobenius norm of `dC/dt` drops to
/// `tol * ||M||` (checked every `check_every` steps) or `t_max` is reached.
pub fn evolve_to_steady_state(
    c0: &MomentMatrix,
    g: &GeneratorParts,
    dt: f64,
    t_max: f64,
    tol: f64,
) -> Result<Relaxed> {
    check_dim(c0.dim(), g)?;
    const CHECK_EVERY: usize = 50;
    let (n_steps, h) = EvolveOptions::new(t_max, dt).steps()?;
    let bound = tol * g.pumping_norm();
    let mut c = c0.matrix().clone();
    let mut time = 0.0;
    let mut converged = generator_rhs(&c, g).norm() <= bound;
    let mut step = 0;
    while !converged && step < n_steps {
        c = hermitian_part(&rk4_step(&c, h, |c| generator_rhs(c, g)));
        step += 1;
        time = step as f64 * h;
        if !is_finite(&c) {
            return Err(Error::NonFinite { time });
        }
        if step % CHECK_EVERY == 0 || step == n_steps {
            converged = generator_rhs(&c, g).norm() <= bound;
        }
    }
    let residual = operator_norm(&generator_rhs(&c, g));
    Ok(Relaxed {
        c: MomentMatrix(c),
        time,
        residual,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{max_abs, solve_steady_state};
    use crate::model::{build_chain_generator, BathSpec, LatticeSpec};
    use nalgebra::DVector;

    fn p0(n: usize, n_hot: f64, n_cold: f64) -> GeneratorParts {
        build_chain_generator(&LatticeSpec::chain(
            n,
            10.0,
            0.1,
            BathSpec::with_occupation(0.1, n_hot),
            BathSpec::with_occupation(0.1, n_cold),
        ))
        .unwrap()
    }

    #[test]
    fn step_count_hits_t_final() {
        let (n, h) = EvolveOptions::new(10.0, 0.3).steps().unwrap();
        assert_eq!(n, 34);
        assert!((n as f64 * h - 10.0).abs() < 1e-12);
        let (n, _) = EvolveOptions::new(10.0, 0.5).steps().unwrap();
        assert_eq!(n, 20);
        assert!(EvolveOptions::new(10.0, 0.0).steps().is_err());
        assert!(EvolveOptions::new(10.0, -1.0).steps().is_err());
    }

    #[test]
    fn equilibrium_trajectory_constant() {
        let g = p0(4, 1.5, 1.5);
        let c0 = MomentMatrix::thermal(4, 1.5);
        let traj = evolve(&c0, &g, &EvolveOptions::new(100.0, 0.5).sampled(20)).unwrap();
        assert_eq!(traj.times.len(), 11);
        for c in &traj.states {
            assert!(max_abs(&(c.matrix() - c0.matrix())) < 1e-12);
        }
    }

    #[test]
    fn relaxes_to_steady_state() {
        let g = p0(5, 2.0, 1.0);
        let ss = solve_steady_state(&g).unwrap();
        let end = evolve(&MomentMatrix::zeros(5), &g, &EvolveOptions::new(2000.0, 0.5))
            .unwrap()
            .into_last();
        assert!(operator_norm(&(end.matrix() - ss.c.matrix())) < 1e-6);
    }

    #[test]
    fn single_damped_site_decay() {
        let w = DMatrix::from_element(1, 1, 10.0);
        let g = GeneratorParts::new(
            w,
            DVector::from_element(1, 0.2),
            DVector::zeros(1),
            DVector::zeros(1),
            vec![0],
            vec![0],
        )
        .unwrap();
        let a0 = FirstMoments(DVector::from_element(1, C64::new(0.6, -0.8)));
        let a = evolve_first_moments(&a0, &g, 10.0, 0.001).unwrap();
        let exact = a0.0[0] * C64::new(-1.0, -100.0).exp();
        assert!((a.0[0] - exact).norm() < 1e-12);
        assert!((a.norm() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn fast_phase_not_damped_by_large_steps() {
        // omega * dt = 5: far too coarse for the lab frame.
        let w = DMatrix::from_element(1, 1, 10.0);
        let g = GeneratorParts::new(
            w,
            DVector::from_element(1, 0.2),
            DVector::zeros(1),
            DVector::zeros(1),
            vec![0],
            vec![0],
        )
        .unwrap();
        let b0 = AnomalousMoments(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        let b = evolve_anomalous(&b0, &g, 10.0, 0.5).unwrap();
        let exact = C64::new(-2.0, -200.0).exp();
        assert!((b.0[(0, 0)] - exact).norm() < 1e-6);
    }

    #[test]
    fn zero_stays_zero() {
        let g = p0(4, 2.0, 1.0);
        let a = evolve_first_moments(&FirstMoments::zeros(4), &g, 50.0, 0.5).unwrap();
        assert_eq!(a.norm(), 0.0);
        let b = evolve_anomalous(&AnomalousMoments::zeros(4), &g, 50.0, 0.5).unwrap();
        assert_eq!(b.norm(), 0.0);
    }

    #[test]
    fn blow_up_reports_time() {
        let g = p0(4, 2.0, 1.0);
        // Far outside the stability region of RK4.
        let err = evolve(&MomentMatrix::thermal(4, 1.0), &g, &EvolveOptions::new(1e5, 1e3)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { time } if time > 0.0), "{err:?}");
    }

    #[test]
    fn relax_stops_early_with_loose_tolerance() {
        let g = p0(5, 2.0, 1.0);
        let r = evolve_to_steady_state(&MomentMatrix::zeros(5), &g, 0.5, 1000.0, 10.0).unwrap();
        assert!(r.converged);
        assert_eq!(r.time, 0.0);
        let r = evolve_to_steady_state(&MomentMatrix::zeros(5), &g, 0.5, 5000.0, 1e-10).unwrap();
        assert!(r.converged && r.time > 0.0);
        assert!(r.residual <= 1e-10 * g.pumping_norm());
    }
}
