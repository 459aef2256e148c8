//! Problem definition: lattice geometry, baths, dephasing, and the matrices
//! that generate the second-moment dynamics.
//!
//! Units use hbar = k_B = 1, so temperatures are energies.

mod generator;
mod lattice;

pub use generator::{build_chain_generator, build_lattice_generator, BathSide, GeneratorParts};
pub use lattice::{Lattice, SiteIndex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean excitation number of a bosonic mode of frequency `omega` at temperature `temperature`.
pub fn occupation_from_temperature(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    // exp_m1 keeps precision in the classical limit omega << T.
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Inverse of [`occupation_from_temperature`]. Zero occupation maps to zero temperature.
pub fn temperature_from_occupation(omega: f64, occupation: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
    }
    if !(occupation >= 0.0) {
        return Err(Error::Domain(format!("occupation must be nonnegative, got {occupation}")));
    }
    if occupation == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / occupation).ln_1p())
}

/// How the excitation level of a bath is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathLevel {
    Occupation(f64),
    Temperature(f64),
}

/// A thermal bath coupled locally to every site of one boundary hyper-surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBath", into = "RawBath")]
pub struct BathSpec {
    pub rate: f64,
    pub level: BathLevel,
}

impl BathSpec {
    pub fn with_occupation(rate: f64, occupation: f64) -> Self {
        Self {
            rate,
            level: BathLevel::Occupation(occupation),
        }
    }

    pub fn with_temperature(rate: f64, temperature: f64) -> Self {
        Self {
            rate,
            level: BathLevel::Temperature(temperature),
        }
    }

    /// Mean excitation number at the oscillator frequency `omega`.
    pub fn occupation(&self, omega: f64) -> Result<f64> {
        match self.level {
            BathLevel::Occupation(n) if n >= 0.0 && n.is_finite() => Ok(n),
            BathLevel::Occupation(n) => {
                Err(Error::Domain(format!("occupation must be nonnegative, got {n}")))
            }
            BathLevel::Temperature(t) => occupation_from_temperature(omega, t),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    occupation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

impl TryFrom<RawBath> for BathSpec {
    type Error = String;

    fn try_from(raw: RawBath) -> std::result::Result<Self, String> {
        let level = match (raw.occupation, raw.temperature) {
            (Some(n), None) => BathLevel::Occupation(n),
            (None, Some(t)) => BathLevel::Temperature(t),
            (Some(_), Some(_)) => {
                return Err("bath must give exactly one of `occupation` or `temperature`, not both".into())
            }
            (None, None) => {
                return Err("bath must give exactly one of `occupation` or `temperature`".into())
            }
        };
        Ok(BathSpec {
            rate: raw.rate,
            level,
        })
    }
}

impl From<BathSpec> for RawBath {
    fn from(b: BathSpec) -> Self {
        let (occupation, temperature) = match b.level {
            BathLevel::Occupation(n) => (Some(n), None),
            BathLevel::Temperature(t) => (None, Some(t)),
        };
        RawBath {
            rate: b.rate,
            occupation,
            temperature,
        }
    }
}

/// Full problem definition for a boundary-driven oscillator lattice.
///
/// The transport axis is the last entry of `dims`. The hot bath couples to
/// every site with transport index 0 and the cold bath to every site with
/// transport index `dims[last] - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub dims: Vec<usize>,
    pub omega: f64,
    pub coupling: f64,
    #[serde(default, rename = "dephasing")]
    pub dephasing_rate: f64,
    pub bath_hot: BathSpec,
    pub bath_cold: BathSpec,
}

impl LatticeSpec {
    pub fn chain(n: usize, omega: f64, coupling: f64, bath_hot: BathSpec, bath_cold: BathSpec) -> Self {
        Self {
            dims: vec![n],
            omega,
            coupling,
            dephasing_rate: 0.0,
            bath_hot,
            bath_cold,
        }
    }

    pub fn with_dims(mut self, dims: &[usize]) -> Self {
        self.dims = dims.to_vec();
        self
    }

    pub fn with_dephasing(mut self, rate: f64) -> Self {
        self.dephasing_rate = rate;
        self
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(&self.dims)
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn hot_occupation(&self) -> Result<f64> {
        self.bath_hot.occupation(self.omega)
    }

    pub fn cold_occupation(&self) -> Result<f64> {
        self.bath_cold.occupation(self.omega)
    }

    /// Parse from JSON; unknown keys are rejected.
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Fails with the first error-level diagnostic, if any.
    pub fn ensure_valid(&self) -> Result<()> {
        match validate_spec(self).into_iter().find(|d| d.severity == Severity::Error) {
            Some(d) => Err(Error::InvalidSpec(d.message)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Couplings at or above this fraction of the frequency trigger the
/// rotating-wave warning.
pub const RWA_COUPLING_RATIO: f64 = 0.1;

/// Check a spec and report every problem found. Errors make the spec
/// unusable; warnings flag regimes where the model or its steady state is
/// questionable.
pub fn validate_spec(spec: &LatticeSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if spec.dims.is_empty() {
        out.push(Diagnostic::error("dims must not be empty"));
    }
    for (axis, &n) in spec.dims.iter().enumerate() {
        if n < 2 {
            out.push(Diagnostic::error(format!(
                "dims must all be at least 2: axis {axis} has {n} sites"
            )));
        }
    }
    if !(spec.omega > 0.0 && spec.omega.is_finite()) {
        out.push(Diagnostic::error(format!("omega must be positive, got {}", spec.omega)));
    }
    if !(spec.coupling >= 0.0 && spec.coupling.is_finite()) {
        out.push(Diagnostic::error(format!(
            "coupling must be nonnegative, got {}",
            spec.coupling
        )));
    }
    if !(spec.dephasing_rate >= 0.0 && spec.dephasing_rate.is_finite()) {
        out.push(Diagnostic::error(format!(
            "dephasing rate must be nonnegative, got {}",
            spec.dephasing_rate
        )));
    }

    for (name, bath) in [("bath_hot", &spec.bath_hot), ("bath_cold", &spec.bath_cold)] {
        if !(bath.rate > 0.0 && bath.rate.is_finite()) {
            out.push(Diagnostic::error(format!(
                "bath rate must be positive: {name} has rate {}",
                bath.rate
            )));
        }
        match bath.level {
            BathLevel::Occupation(n) if !(n >= 0.0 && n.is_finite()) => out.push(Diagnostic::error(
                format!("occupation must be nonnegative: {name} has occupation {n}"),
            )),
            BathLevel::Temperature(t) if !(t > 0.0 && t.is_finite()) => out.push(Diagnostic::error(
                format!("temperature must be positive: {name} has temperature {t}"),
            )),
            _ => {}
        }
    }

    if spec.coupling.is_finite() && spec.omega.is_finite() && spec.omega > 0.0 {
        if spec.coupling >= RWA_COUPLING_RATIO * spec.omega {
            out.push(Diagnostic::warning(format!(
                "coupling {} is not small against omega {}: rotating-wave approximation requires coupling << omega",
                spec.coupling, spec.omega
            )));
        }
        if spec.coupling == 0.0 && spec.n_sites() > 2 {
            out.push(Diagnostic::warning(
                "coupling is zero: bulk sites are decoupled and the steady state is not unique",
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0(n: usize) -> LatticeSpec {
        LatticeSpec::chain(
            n,
            10.0,
            0.1,
            BathSpec::with_occupation(0.1, 2.0),
            BathSpec::with_occupation(0.1, 1.0),
        )
    }

    #[test]
    fn bose_occupation_values() {
        let n = occupation_from_temperature(10.0, 10.0 / 2f64.ln()).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
        let n = occupation_from_temperature(10.0, 24.6630).unwrap();
        assert!((n - 2.0).abs() < 1e-3);
        let n = occupation_from_temperature(10.0, 1e-3).unwrap();
        assert!(n < 1e-300);
        assert!(occupation_from_temperature(10.0, 0.0).is_err());
        assert!(occupation_from_temperature(0.0, 1.0).is_err());
        assert!(occupation_from_temperature(-1.0, 1.0).is_err());
    }

    #[test]
    fn bose_occupation_monotone() {
        let mut last = 0.0;
        for k in 1..200 {
            let n = occupation_from_temperature(10.0, k as f64 * 0.5).unwrap();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn valid_spec_has_no_diagnostics() {
        assert!(validate_spec(&p0(5)).is_empty());
    }

    #[test]
    fn zero_rate_is_an_error() {
        let mut spec = p0(5);
        spec.bath_hot.rate = 0.0;
        let diags = validate_spec(&spec);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Error);
        assert!(diags[0].message.contains("bath rate must be positive"));
        assert!(spec.ensure_valid().is_err());
    }

    #[test]
    fn strong_coupling_warns() {
        let mut spec = p0(5);
        spec.coupling = 0.5;
        spec.omega = 0.6;
        let diags = validate_spec(&spec);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert!(diags[0].message.contains("rotating-wave"));
        assert!(spec.ensure_valid().is_ok());
    }

    #[test]
    fn zero_coupling_warns() {
        let mut spec = p0(5);
        spec.coupling = 0.0;
        let diags = validate_spec(&spec);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("not unique")));
    }

    #[test]
    fn short_axis_and_negative_coupling_are_errors() {
        let mut spec = p0(5).with_dims(&[1, 5]);
        spec.coupling = -0.1;
        let errors = validate_spec(&spec)
            .into_iter()
            .filter(|d| d.severity == Severity::Error)
            .count();
        assert_eq!(errors, 2);
    }

    #[test]
    fn json_roundtrip_and_unknown_keys() {
        let text = r#"{"dims":[3,4],"omega":10,"coupling":0.1,"dephasing":0.05,
            "bath_hot":{"rate":0.1,"occupation":2},
            "bath_cold":{"rate":0.1,"temperature":24.663}}"#;
        let spec = LatticeSpec::from_json(text).unwrap();
        assert_eq!(spec.dims, vec![3, 4]);
        assert_eq!(spec.dephasing_rate, 0.05);
        assert_eq!(spec.bath_cold.level, BathLevel::Temperature(24.663));
        let again = LatticeSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);

        let bad = text.replace("\"coupling\"", "\"hopping\"");
        let err = LatticeSpec::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("hopping"), "{err}");

        let bad = text.replace("\"occupation\":2", "\"occupation\":2,\"gain\":1");
        let err = LatticeSpec::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("gain"), "{err}");
    }

    #[test]
    fn bath_needs_exactly_one_level() {
        let both = r#"{"dims":[3],"omega":10,"coupling":0.1,
            "bath_hot":{"rate":0.1,"occupation":2,"temperature":3},
            "bath_cold":{"rate":0.1,"occupation":1}}"#;
        assert!(LatticeSpec::from_json(both).is_err());
        let neither = r#"{"dims":[3],"omega":10,"coupling":0.1,
            "bath_hot":{"rate":0.1},
            "bath_cold":{"rate":0.1,"occupation":1}}"#;
        assert!(LatticeSpec::from_json(neither).is_err());
    }

    #[test]
    fn dephasing_defaults_to_zero() {
        let text = r#"{"dims":[3],"omega":10,"coupling":0.1,
            "bath_hot":{"rate":0.1,"occupation":2},
            "bath_cold":{"rate":0.1,"occupation":1}}"#;
        assert_eq!(LatticeSpec::from_json(text).unwrap().dephasing_rate, 0.0);
    }
}
