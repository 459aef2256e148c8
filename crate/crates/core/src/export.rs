//! CSV writers for reports, sweeps and tables.
//!
//! Floats are written in scientific notation with 17 significant digits;
//! complex entries take two columns, `re` and `im`. Multi-part documents use
//! `# name` lines to separate sections, each with its own header row.

use std::fmt::Write;

use crate::dynamics::MomentMatrix;
use crate::experiments::{DimensionRow, PowerLawFit, Profile, SweepAxis, SweepResult};
use crate::observables::ObservableReport;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn dims_label(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

/// Appends `# title` and a header row.
fn section(out: &mut String, title: &str, header: &str) {
    if !out.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "# {title}\n{header}");
}

pub fn scalars_csv(out: &mut String, rows: &[(&str, String)]) {
    section(out, "scalars", "key,value");
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
}

/// One row per matrix entry, column-major.
pub fn moments_csv(out: &mut String, c: &MomentMatrix) {
    section(out, "moments", "i,j,re,im");
    let n = c.dim();
    for j in 0..n {
        for i in 0..n {
            let z = c.get(i, j);
            let _ = writeln!(out, "{i},{j},{},{}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
}

pub fn profile_csv(out: &mut String, occupations: &[f64], temperatures: &[f64]) {
    section(out, "profile", "site,occupation,temperature");
    for (j, (n, t)) in occupations.iter().zip(temperatures).enumerate() {
        let _ = writeln!(out, "{j},{},{}", fmt_f64(*n), fmt_f64(*t));
    }
}

pub fn bonds_csv(out: &mut String, report: &ObservableReport) {
    section(out, "bonds", "chain,bond,current");
    for (c, chain) in report.j_bond.iter().enumerate() {
        for (b, j) in chain.iter().enumerate() {
            let _ = writeln!(out, "{c},{b},{}", fmt_f64(*j));
        }
    }
}

pub fn sweep_csv(out: &mut String, sweep: &SweepResult) {
    section(out, sweep.axis.name(), "parameter,J_closed,J_numeric,residual");
    for (k, v) in sweep.values.iter().enumerate() {
        let param = match sweep.axis {
            SweepAxis::Length => format!("{}", *v as usize),
            _ => fmt_f64(*v),
        };
        let _ = writeln!(
            out,
            "{param},{},{},{}",
            fmt_f64(sweep.j_closed[k]),
            fmt_opt(sweep.j_numeric[k]),
            fmt_opt(sweep.residual[k])
        );
    }
    if let Some(fit) = &sweep.fit {
        fit_csv(out, fit);
    }
}

pub fn fit_csv(out: &mut String, fit: &PowerLawFit) {
    section(out, "fit", "exponent,intercept,window_lo,window_hi,points,residual");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        fmt_f64(fit.exponent),
        fmt_f64(fit.intercept),
        fmt_f64(fit.window.0),
        fmt_f64(fit.window.1),
        fit.points,
        fmt_f64(fit.residual)
    );
}

pub fn dimension_csv(out: &mut String, rows: &[DimensionRow]) {
    section(out, "dimension", "dims,J_num,J_formula,q_norm,residual");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            dims_label(&r.dims),
            fmt_opt(r.j_numeric),
            fmt_f64(r.j_formula),
            fmt_opt(r.transverse_coherence),
            fmt_opt(r.residual)
        );
    }
}

/// Profiles side by side: one row per site, one occupation and temperature
/// column pair per dephasing rate.
pub fn profiles_csv(out: &mut String, profiles: &[Profile]) {
    let header: Vec<String> = std::iter::once("site".to_string())
        .chain(profiles.iter().flat_map(|p| {
            let g = fmt_f64(p.dephasing);
            [format!("occupation[{g}]"), format!("temperature[{g}]")]
        }))
        .collect();
    section(out, "profiles", &header.join(","));
    let n = profiles.first().map_or(0, |p| p.occupations.len());
    for j in 0..n {
        let mut row = j.to_string();
        for p in profiles {
            let _ = write!(row, ",{},{}", fmt_f64(p.occupations[j]), fmt_f64(p.temperatures[j]));
        }
        let _ = writeln!(out, "{row}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.4), "4.0000000000000002e-1");
        assert_eq!(fmt_f64(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        let back: f64 = fmt_f64(1.0 / 3.0).parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn sweep_table() {
        let s = SweepResult {
            axis: SweepAxis::Length,
            values: vec![5.0, 100.0],
            j_closed: vec![0.4, 0.4],
            j_numeric: vec![Some(0.4), None],
            residual: vec![Some(1e-17), None],
            fit: None,
        };
        let mut out = String::new();
        sweep_csv(&mut out, &s);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "# length");
        assert_eq!(lines[1], "parameter,J_closed,J_numeric,residual");
        assert!(lines[2].starts_with("5,4.0000000000000002e-1,4.0000000000000002e-1,"));
        assert_eq!(lines[3], "100,4.0000000000000002e-1,,");
    }

    #[test]
    fn moments_are_column_major() {
        let c = MomentMatrix::from_real_diagonal(&[1.0, 2.0]);
        let mut out = String::new();
        moments_csv(&mut out, &c);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[2].starts_with("0,0,1.0"));
        assert!(lines[3].starts_with("1,0,0.0"));
        assert!(lines[5].starts_with("1,1,2.0"));
    }
}
