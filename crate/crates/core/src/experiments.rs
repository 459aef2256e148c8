//! Length, dephasing and dimension studies built on the closed forms and the
//! numerical solver, with least-squares fits of the resulting curves.
//!
//! Sweep points are solved in parallel and collected in input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{chain_closed_form_dephased, lattice_current, ChainParams};
use crate::dynamics::{solve_steady_state, MomentMatrix};
use crate::error::{Error, Result};
use crate::model::{build_lattice_generator, temperature_from_occupation, BathSide, LatticeSpec};
use crate::observables::{boundary_current, transverse_coherence_norm};

/// Largest lattice (in sites) that sweeps hand to the numerical solver.
pub const DEFAULT_NUMERIC_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub numeric_cap: usize,
    /// Inclusive parameter window for the power-law fit.
    pub fit_window: Option<(f64, f64)>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            numeric_cap: DEFAULT_NUMERIC_CAP,
            fit_window: None,
        }
    }
}

impl SweepOptions {
    pub fn with_cap(mut self, cap: usize) -> Self {
        self.numeric_cap = cap;
        self
    }

    pub fn with_fit(mut self, lo: f64, hi: f64) -> Self {
        self.fit_window = Some((lo, hi));
        self
    }
}

/// Least-squares line `y = slope * x + intercept`. `residual` is the
/// Euclidean norm of the residual vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Ordinary least squares, summed in input order.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Domain("a line fit needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("line fit needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LineFit {
        slope,
        intercept,
        residual,
    })
}

/// `y ~ exp(intercept) * x^exponent`, fitted on logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub residual: f64,
}

/// Fit `ln y` against `ln x` using the points with `x` inside `window`.
pub fn fit_power_law(x: &[f64], y: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(xi, _)| **xi >= lo && **xi <= hi)
        .map(|(&xi, &yi)| {
            if xi > 0.0 && yi > 0.0 {
                Ok((xi.ln(), yi.ln()))
            } else {
                Err(Error::Domain(format!(
                    "power-law fit needs positive data, got ({xi}, {yi})"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let line = fit_line(&lx, &ly).map_err(|e| match e {
        Error::Domain(m) => Error::Domain(format!("fit window [{lo}, {hi}]: {m}")),
        other => other,
    })?;
    Ok(PowerLawFit {
        exponent: line.slope,
        intercept: line.intercept,
        window,
        points: lx.len(),
        residual: line.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Length,
    Dephasing,
    Dimension,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Length => "length",
            SweepAxis::Dephasing => "dephasing",
            SweepAxis::Dimension => "dimension",
        }
    }
}

/// Current as a function of one chain parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub j_closed: Vec<f64>,
    /// `None` where the lattice exceeds the numeric cap.
    pub j_numeric: Vec<Option<f64>>,
    /// Solver residual `||G(C)||_2` of each numeric point.
    pub residual: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<PowerLawFit>,
}

impl SweepResult {
    /// Largest relative gap between closed-form and numeric currents.
    pub fn max_relative_gap(&self) -> f64 {
        self.j_closed
            .iter()
            .zip(&self.j_numeric)
            .filter_map(|(c, n)| n.map(|n| relative_gap(*c, n)))
            .fold(0.0, f64::max)
    }
}

fn relative_gap(reference: f64, value: f64) -> f64 {
    let scale = reference.abs();
    if scale == 0.0 {
        value.abs()
    } else {
        (value - reference).abs() / scale
    }
}

struct NumericPoint {
    current: f64,
    residual: f64,
}

fn solve_numeric(spec: &LatticeSpec) -> Result<NumericPoint> {
    let g = build_lattice_generator(spec)?;
    let ss = solve_steady_state(&g)?;
    Ok(NumericPoint {
        current: boundary_current(&ss.c, &g, BathSide::Hot)?,
        residual: ss.residual,
    })
}

fn chain_spec(base: &LatticeSpec, n: usize, gamma: f64) -> LatticeSpec {
    base.clone().with_dims(&[n]).with_dephasing(gamma)
}

fn run_sweep<F>(axis: SweepAxis, values: &[f64], opts: &SweepOptions, point: F) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<(f64, Option<NumericPoint>)> + Sync,
{
    let points = values
        .par_iter()
        .map(|&v| point(v))
        .collect::<Result<Vec<_>>>()?;
    let mut j_closed = Vec::with_capacity(points.len());
    let mut j_numeric = Vec::with_capacity(points.len());
    let mut residual = Vec::with_capacity(points.len());
    for (closed, numeric) in points {
        j_closed.push(closed);
        j_numeric.push(numeric.as_ref().map(|p| p.current));
        residual.push(numeric.map(|p| p.residual));
    }
    let fit = opts
        .fit_window
        .map(|w| fit_power_law(values, &j_closed, w))
        .transpose()?;
    Ok(SweepResult {
        axis,
        values: values.to_vec(),
        j_closed,
        j_numeric,
        residual,
        fit,
    })
}

/// Chain current against chain length at dephasing `gamma`, for the chain
/// with the frequency, coupling and baths of `base`.
pub fn sweep_length(base: &LatticeSpec, lengths: &[usize], gamma: f64, opts: &SweepOptions) -> Result<SweepResult> {
    if let Some(&n) = lengths.iter().find(|&&n| n < 3) {
        return Err(Error::Domain(format!("length sweep needs chains of at least 3 sites, got {n}")));
    }
    let params = ChainParams::from_spec(base)?.with_dephasing(gamma);
    let values: Vec<f64> = lengths.iter().map(|&n| n as f64).collect();
    run_sweep(SweepAxis::Length, &values, opts, |v| {
        let n = v as usize;
        let closed = chain_closed_form_dephased(&params.with_sites(n))?.current;
        let numeric = (n <= opts.numeric_cap)
            .then(|| solve_numeric(&chain_spec(base, n, gamma)))
            .transpose()?;
        Ok((closed, numeric))
    })
}

/// Chain current against dephasing rate, at the transport length of `base`.
pub fn sweep_dephasing(base: &LatticeSpec, gammas: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    if let Some(&g) = gammas.iter().find(|&&g| !(g >= 0.0 && g.is_finite())) {
        return Err(Error::Domain(format!("dephasing rates must be nonnegative, got {g}")));
    }
    let params = ChainParams::from_spec(base)?;
    let n = params.n_sites;
    run_sweep(SweepAxis::Dephasing, gammas, opts, |gamma| {
        let closed = chain_closed_form_dephased(&params.with_dephasing(gamma))?.current;
        let numeric = (n <= opts.numeric_cap)
            .then(|| solve_numeric(&chain_spec(base, n, gamma)))
            .transpose()?;
        Ok((closed, numeric))
    })
}

/// Occupations along one chain at one dephasing rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub dephasing: f64,
    pub occupations: Vec<f64>,
    pub temperatures: Vec<f64>,
    /// Occupations from the numerical solver, when under the cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<Vec<f64>>,
}

impl Profile {
    /// Straight-line fit of the bulk sites `2..N-1` (1-based).
    pub fn bulk_fit(&self) -> Result<LineFit> {
        let n = self.occupations.len();
        if n < 4 {
            return Err(Error::Domain("bulk fit needs at least two bulk sites".into()));
        }
        let x: Vec<f64> = (2..n).map(|j| j as f64).collect();
        fit_line(&x, &self.occupations[1..n - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileStudy {
    pub n_sites: usize,
    pub profiles: Vec<Profile>,
}

/// Closed-form occupation profiles of the transport chain of `spec`, one
/// per dephasing rate.
pub fn profile_study(spec: &LatticeSpec, gammas: &[f64], opts: &SweepOptions) -> Result<ProfileStudy> {
    let params = ChainParams::from_spec(spec)?;
    let n = params.n_sites;
    let profiles = gammas
        .par_iter()
        .map(|&gamma| {
            let closed = chain_closed_form_dephased(&params.with_dephasing(gamma))?;
            let occupations = closed.occupations();
            let temperatures = occupations
                .iter()
                .map(|&o| temperature_from_occupation(params.omega, o))
                .collect::<Result<Vec<_>>>()?;
            let numeric = if n <= opts.numeric_cap {
                let g = build_lattice_generator(&chain_spec(spec, n, gamma))?;
                Some(solve_steady_state(&g)?.c.occupations())
            } else {
                None
            };
            Ok(Profile {
                dephasing: gamma,
                occupations,
                temperatures,
                numeric,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileStudy { n_sites: n, profiles })
}

/// One lattice shape in a dimension study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub dims: Vec<usize>,
    pub j_numeric: Option<f64>,
    /// Transverse volume times the current of one transport chain.
    pub j_formula: f64,
    pub transverse_coherence: Option<f64>,
    pub residual: Option<f64>,
}

/// Numerical currents of whole lattices against the volume law. The chain
/// current comes from the closed form, or from a chain solve when the
/// transport axis has only two sites.
pub fn dimension_study(base: &LatticeSpec, shapes: &[Vec<usize>], opts: &SweepOptions) -> Result<Vec<DimensionRow>> {
    shapes
        .par_iter()
        .map(|dims| {
            let spec = base.clone().with_dims(dims);
            spec.ensure_valid()?;
            let lattice = spec.lattice()?;
            let n = lattice.transport_len();
            let chain = if n >= 3 {
                chain_closed_form_dephased(&ChainParams::from_spec(&spec)?)?.current
            } else {
                solve_numeric(&chain_spec(&spec, n, spec.dephasing_rate))?.current
            };
            let (j_numeric, transverse_coherence, residual) = if lattice.len() <= opts.numeric_cap {
                let g = build_lattice_generator(&spec)?;
                let ss = solve_steady_state(&g)?;
                let q = (lattice.ndim() > 1)
                    .then(|| transverse_coherence_norm(&ss.c, &lattice))
                    .transpose()?;
                (
                    Some(boundary_current(&ss.c, &g, BathSide::Hot)?),
                    q,
                    Some(ss.residual),
                )
            } else {
                (None, None, None)
            };
            Ok(DimensionRow {
                dims: dims.clone(),
                j_numeric,
                j_formula: lattice_current(dims, chain),
                transverse_coherence,
                residual,
            })
        })
        .collect()
}

/// Closed-form profile of the transport chain as a moment matrix, for
/// comparison with a numerical solve.
pub fn closed_form_state(spec: &LatticeSpec) -> Result<MomentMatrix> {
    Ok(chain_closed_form_dephased(&ChainParams::from_spec(spec)?)?.moment_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BathSpec;

    fn p0() -> LatticeSpec {
        LatticeSpec::chain(
            20,
            10.0,
            0.1,
            BathSpec::with_occupation(0.1, 2.0),
            BathSpec::with_occupation(0.1, 1.0),
        )
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 3.0).abs() < 1e-14);
        assert!(f.residual < 1e-14);
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn power_law_window() {
        let x: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v.powf(-1.5)).collect();
        let f = fit_power_law(&x, &y, (3.0, 8.0)).unwrap();
        assert_eq!(f.points, 6);
        assert!((f.exponent + 1.5).abs() < 1e-13);
        assert!((f.intercept - 2f64.ln()).abs() < 1e-12);
        assert!(fit_power_law(&x, &y, (20.0, 30.0)).is_err());
    }

    #[test]
    fn ballistic_length_sweep() {
        let r = sweep_length(&p0(), &[5, 10, 20, 50], 0.0, &SweepOptions::default().with_fit(5.0, 50.0)).unwrap();
        for (c, n) in r.j_closed.iter().zip(&r.j_numeric) {
            assert!((c - 0.4).abs() < 1e-12);
            assert!((n.unwrap() - 0.4).abs() < 1e-9);
        }
        assert!(r.fit.unwrap().exponent.abs() < 1e-6);
        assert!(r.max_relative_gap() < 1e-8);
    }

    #[test]
    fn diffusive_slopes() {
        let opts = SweepOptions::default().with_fit(100.0, 200.0);
        let r = sweep_length(&p0(), &[100, 200], 0.1, &opts).unwrap();
        assert!(r.j_numeric.iter().all(Option::is_none));
        assert!((r.fit.unwrap().exponent + 0.972).abs() < 0.01);
        let opts = SweepOptions::default().with_fit(800.0, 1600.0);
        let r = sweep_length(&p0(), &[800, 1000, 1200, 1400, 1600], 0.1, &opts).unwrap();
        let a = r.fit.unwrap().exponent;
        assert!((-1.0..=-0.99).contains(&a), "{a}");
        assert!(sweep_length(&p0(), &[2, 5], 0.0, &opts).is_err());
    }

    #[test]
    fn dephasing_sweep_decreases() {
        let r = sweep_dephasing(&p0(), &[0.0, 0.05, 0.1, 0.2], &SweepOptions::default()).unwrap();
        assert!((r.j_closed[0] - 0.4).abs() < 1e-12);
        assert!((r.j_closed[2] - 0.004 / 0.048).abs() < 1e-12);
        assert!(r.j_closed.windows(2).all(|w| w[1] < w[0]));
        assert!(r.max_relative_gap() < 1e-8);
        let big = sweep_dephasing(&p0().with_dims(&[400]), &[0.1, 0.2], &SweepOptions::default()).unwrap();
        let ratio = big.j_closed[1] / big.j_closed[0];
        assert!((0.5..=0.55).contains(&ratio), "{ratio}");
        assert!(sweep_dephasing(&p0(), &[-0.1], &SweepOptions::default()).is_err());
    }

    #[test]
    fn profiles() {
        let s = profile_study(&p0(), &[0.0, 0.1], &SweepOptions::default()).unwrap();
        let flat = &s.profiles[0];
        assert!(flat.occupations[1..19].iter().all(|o| (o - 1.5).abs() < 1e-12));
        let ramp = s.profiles[1].bulk_fit().unwrap();
        assert!(ramp.slope < 0.0 && ramp.residual < 1e-10);
        for p in &s.profiles {
            let num = p.numeric.as_ref().unwrap();
            for (a, b) in num.iter().zip(&p.occupations) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        let n10 = profile_study(&p0().with_dims(&[10]), &[0.05], &SweepOptions::default()).unwrap();
        assert!((n10.profiles[0].occupations[1] - 1.68421).abs() < 1e-5);
        // -2 (0.001 / 0.019) per site, times the half-difference 0.5.
        let slope = n10.profiles[0].bulk_fit().unwrap().slope;
        assert!((slope + 2.0 * 0.001 / 0.019 * 0.5).abs() < 1e-12, "{slope}");

        let strong = profile_study(&p0(), &[1e4], &SweepOptions::default().with_cap(0)).unwrap();
        let occ = &strong.profiles[0].occupations;
        assert!((occ[0] - 2.0).abs() < 1e-4 && (occ[19] - 1.0).abs() < 1e-4);
        assert!(strong.profiles[0].numeric.is_none());
    }

    #[test]
    fn volume_law() {
        let rows = dimension_study(&p0(), &[vec![4, 4], vec![3, 3, 3], vec![2, 5], vec![5, 2]], &SweepOptions::default()).unwrap();
        assert!((rows[0].j_numeric.unwrap() - 1.6).abs() < 1e-8);
        for r in &rows {
            assert!((r.j_numeric.unwrap() - r.j_formula).abs() < 1e-9 * r.j_formula.abs());
            assert!(r.transverse_coherence.unwrap() <= 1e-10);
        }
        assert!((rows[2].j_numeric.unwrap() - rows[3].j_numeric.unwrap()).abs() > 1e-3);
        let capped = dimension_study(&p0(), &[vec![9, 9]], &SweepOptions::default()).unwrap();
        assert!(capped[0].j_numeric.is_none());
        assert!((capped[0].j_formula - 3.6).abs() < 1e-12);
    }
}
