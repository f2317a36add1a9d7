//! JSON experiment configuration.
//!
//! One document describes one scenario run. Parsing reports the JSON path
//! of the offending field; [`ExperimentConfig::validate`] then checks every
//! scenario-specific constraint before any computation starts.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lpspace::Profile;
use crate::measure::{build_space, MeasureSpace, TailDescriptor, MAX_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    AtomicLimsup,
    DiffuseWitness,
    PinchingSuite,
    RankoneCentreDecay,
    QnDecay,
    LatticeOracle,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::AtomicLimsup,
        Scenario::DiffuseWitness,
        Scenario::PinchingSuite,
        Scenario::RankoneCentreDecay,
        Scenario::QnDecay,
        Scenario::LatticeOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::AtomicLimsup => "atomic_limsup",
            Scenario::DiffuseWitness => "diffuse_witness",
            Scenario::PinchingSuite => "pinching_suite",
            Scenario::RankoneCentreDecay => "rankone_centre_decay",
            Scenario::QnDecay => "qn_decay",
            Scenario::LatticeOracle => "lattice_oracle",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::AtomicLimsup => {
                "best diagonal rank-k cancellation vs limsup |u_n| on an atomic space"
            }
            Scenario::DiffuseWitness => {
                "witness lower bounds for ||M_u + K|| under dyadic refinement"
            }
            Scenario::PinchingSuite => {
                "pinching contractivity and ||M_u + K|| >= ||M_u + D_K|| on random operators (p = 1)"
            }
            Scenario::RankoneCentreDecay => {
                "centre component of a rank-one kernel across refinement levels"
            }
            Scenario::QnDecay => "||Q_n K|| for a rank-one operator on an atomic space (p = 1)",
            Scenario::LatticeOracle => {
                "entrywise lattice operations vs their defining suprema on random operators"
            }
        }
    }

    /// Name of the sweep column in the CSV output.
    pub fn param_name(self) -> &'static str {
        match self {
            Scenario::AtomicLimsup => "k",
            Scenario::DiffuseWitness | Scenario::RankoneCentreDecay => "level",
            Scenario::QnDecay => "n",
            Scenario::PinchingSuite | Scenario::LatticeOracle => "trial",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomsSpec {
    Uniform { count: usize, mass: f64 },
    Explicit { masses: Vec<f64> },
}

impl Default for AtomsSpec {
    fn default() -> Self {
        AtomsSpec::Explicit { masses: Vec::new() }
    }
}

impl AtomsSpec {
    pub fn masses(&self) -> Vec<f64> {
        match self {
            AtomsSpec::Uniform { count, mass } => vec![*mass; *count],
            AtomsSpec::Explicit { masses } => masses.clone(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            AtomsSpec::Uniform { count, .. } => *count,
            AtomsSpec::Explicit { masses } => masses.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseSpec {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default)]
    pub atoms: AtomsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffuse: Option<DiffuseSpec>,
}

impl SpaceSpec {
    pub fn build(&self) -> crate::Result<Arc<MeasureSpace>> {
        build_space(
            &self.atoms.masses(),
            TailDescriptor::FinitelySupported,
            self.diffuse.map(|d| (d.a, d.b)),
            self.diffuse.map_or(0, |d| d.level),
        )
        .map(Arc::new)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomValues {
    /// Explicit leading values; atoms past these follow `tail`.
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub tail: TailDescriptor,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct USpec {
    #[serde(default)]
    pub atoms: AtomValues,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffuse: Option<Profile>,
}

/// A factor `eta` or `g` of a rank-one perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    Constant { value: f64 },
    /// Diffuse only.
    Polynomial { coefficients: Vec<f64> },
    /// Diffuse only: piecewise constant on equal pieces.
    Step { values: Vec<f64> },
    /// Atoms only: `first * ratio^(n-1)`, continued past the stored atoms.
    Geometric { first: f64, ratio: f64 },
    /// Atoms only: one value per stored atom, zero beyond.
    Values { values: Vec<f64> },
}

impl Factor {
    pub fn as_profile(&self) -> Option<Profile> {
        match self {
            Factor::Constant { value } => Some(Profile::Constant { value: *value }),
            Factor::Polynomial { coefficients } => Some(Profile::Polynomial {
                coefficients: coefficients.clone(),
            }),
            Factor::Step { values } => Some(Profile::Step {
                values: values.clone(),
            }),
            _ => None,
        }
    }

    fn is_atomic_kind(&self) -> bool {
        matches!(
            self,
            Factor::Constant { .. } | Factor::Geometric { .. } | Factor::Values { .. }
        )
    }
}

fn default_rank() -> usize {
    1
}

fn default_pieces() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    #[default]
    None,
    /// Dense i.i.d. uniform `[-1, 1]` entries; the generator is seeded from
    /// the run seed.
    RandomDense,
    /// Explicit `eta`, `g` (rank 1), or else `rank` terms of random step
    /// factors with `pieces` values each, drawn from `seed`.
    RankOne {
        #[serde(default = "default_rank")]
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default = "default_pieces")]
        pieces: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<Factor>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<Factor>,
    },
    /// `K = -M_u (I - Q_n)` with `n` taken from the sweep.
    Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub from: u32,
    pub to: u32,
}

impl Sweep {
    pub fn values(&self) -> impl Iterator<Item = u32> {
        self.from..=self.to
    }
}

fn default_p() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub space: SpaceSpec,
    #[serde(default)]
    pub u: USpec,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Matrix size for the random-operator scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A configuration problem, located by its JSON path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn fail<T>(path: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::new(path, message))
}

/// Parses a JSON document; the error path names the offending field.
pub fn parse_config(json: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(json);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        ConfigError::new(path, e.into_inner().to_string())
    })
}

/// Parses and validates.
pub fn load_config(json: &str) -> Result<ExperimentConfig, ConfigError> {
    let config = parse_config(json)?;
    config.validate()?;
    Ok(config)
}

pub fn emit_config(config: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.p.is_finite() && self.p >= 1.0) {
            return fail("p", format!("must be a finite real >= 1, got {}", self.p));
        }
        self.validate_space()?;
        if let Some(profile) = &self.u.diffuse {
            if self.space.diffuse.is_none() {
                return fail("u.diffuse", "space has no diffuse part");
            }
            check_profile("u.diffuse", profile)?;
        }
        if self.u.atoms.values.len() > self.space.atoms.count() {
            return fail(
                "u.atoms.values",
                format!(
                    "{} values given for {} atoms",
                    self.u.atoms.values.len(),
                    self.space.atoms.count()
                ),
            );
        }
        if let Some(s) = self.sweep {
            if s.from > s.to {
                return fail("sweep", format!("from = {} exceeds to = {}", s.from, s.to));
            }
        }
        match self.scenario {
            Scenario::AtomicLimsup => self.validate_atomic_limsup(),
            Scenario::DiffuseWitness => self.validate_diffuse_witness(),
            Scenario::PinchingSuite => self.validate_random_suite(true),
            Scenario::RankoneCentreDecay => self.validate_centre_decay(),
            Scenario::QnDecay => self.validate_qn_decay(),
            Scenario::LatticeOracle => self.validate_random_suite(false),
        }
    }

    fn validate_space(&self) -> Result<(), ConfigError> {
        match &self.space.atoms {
            AtomsSpec::Uniform { mass, .. } => {
                if !(*mass > 0.0 && mass.is_finite()) {
                    return fail("space.atoms.mass", format!("must be positive, got {mass}"));
                }
            }
            AtomsSpec::Explicit { masses } => {
                if let Some(i) = masses.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
                    return fail(
                        &format!("space.atoms.masses[{i}]"),
                        format!("must be positive, got {}", masses[i]),
                    );
                }
            }
        }
        if let Some(d) = self.space.diffuse {
            if !(d.a.is_finite() && d.b.is_finite() && d.a < d.b) {
                return fail("space.diffuse", format!("interval ({}, {}) is empty", d.a, d.b));
            }
            if d.level > MAX_LEVEL {
                return fail("space.diffuse.level", format!("must be at most {MAX_LEVEL}"));
            }
        }
        Ok(())
    }

    fn require_sweep(&self) -> Result<Sweep, ConfigError> {
        self.sweep.ok_or_else(|| ConfigError::new("sweep", "required for this scenario"))
    }

    fn validate_atomic_limsup(&self) -> Result<(), ConfigError> {
        if self.space.diffuse.is_some() {
            return fail("space.diffuse", "atomic_limsup needs a purely atomic space");
        }
        if self.space.atoms.count() == 0 {
            return fail("space.atoms", "at least one atom is required");
        }
        let sweep = self.require_sweep()?;
        if sweep.to as usize > self.space.atoms.count() {
            return fail(
                "sweep.to",
                format!("k may not exceed the {} stored atoms", self.space.atoms.count()),
            );
        }
        match self.perturbation {
            PerturbationSpec::None | PerturbationSpec::Truncation => Ok(()),
            _ => fail(
                "perturbation.kind",
                "atomic_limsup uses truncation perturbations only",
            ),
        }
    }

    fn validate_diffuse_witness(&self) -> Result<(), ConfigError> {
        let d = self
            .space
            .diffuse
            .ok_or_else(|| ConfigError::new("space.diffuse", "diffuse_witness needs a diffuse part"))?;
        let profile = self
            .u
            .diffuse
            .as_ref()
            .ok_or_else(|| ConfigError::new("u.diffuse", "required for diffuse_witness"))?;
        let sweep = self.require_sweep()?;
        if sweep.to > MAX_LEVEL.min(20) {
            return fail("sweep.to", "levels above 20 are not supported by this scenario");
        }
        let eps = self
            .epsilon
            .ok_or_else(|| ConfigError::new("epsilon", "required for diffuse_witness"))?;
        let sup = profile.sup_abs(d.a, d.b);
        if !(eps > 0.0 && eps < sup) {
            return fail(
                "epsilon",
                format!("must lie strictly between 0 and sup|u| = {sup}, got {eps}"),
            );
        }
        self.validate_diffuse_kernel()
    }

    fn validate_diffuse_kernel(&self) -> Result<(), ConfigError> {
        match &self.perturbation {
            PerturbationSpec::None => Ok(()),
            PerturbationSpec::RankOne {
                rank,
                pieces,
                eta,
                g,
                seed,
            } => match (eta, g) {
                (Some(eta), Some(g)) => {
                    if *rank != 1 {
                        return fail("perturbation.rank", "explicit factors define rank 1");
                    }
                    for (path, f) in [("perturbation.eta", eta), ("perturbation.g", g)] {
                        match f.as_profile() {
                            Some(p) => check_profile(path, &p)?,
                            None => return fail(path, "factor must be a diffuse profile"),
                        }
                    }
                    Ok(())
                }
                (None, None) => {
                    if *rank == 0 {
                        return fail("perturbation.rank", "must be at least 1");
                    }
                    if *pieces == 0 {
                        return fail("perturbation.pieces", "must be at least 1");
                    }
                    if seed.is_none() {
                        return fail("perturbation.seed", "random kernels need a seed");
                    }
                    Ok(())
                }
                _ => fail("perturbation", "give both eta and g, or neither"),
            },
            _ => fail(
                "perturbation.kind",
                "diffuse scenarios accept none or rank_one",
            ),
        }
    }

    fn validate_random_suite(&self, needs_p1: bool) -> Result<(), ConfigError> {
        if needs_p1 && self.p != 1.0 {
            return fail(
                "p",
                format!("pinching_suite needs exact norms, which requires p = 1 (got {})", self.p),
            );
        }
        match self.dimension {
            None => fail("dimension", "required for this scenario"),
            Some(0) => fail("dimension", "must be at least 1"),
            Some(n) if n > 64 => fail("dimension", "must be at most 64"),
            Some(n) if !needs_p1 && n < 3 => fail("dimension", "must be at least 3"),
            Some(_) if self.trials == 0 => fail("trials", "must be at least 1"),
            Some(_) => Ok(()),
        }
    }

    fn validate_centre_decay(&self) -> Result<(), ConfigError> {
        if self.space.diffuse.is_none() {
            return fail("space.diffuse", "rankone_centre_decay needs a diffuse interval");
        }
        let sweep = self.require_sweep()?;
        if sweep.to > 24 {
            return fail("sweep.to", "levels above 24 are not supported by this scenario");
        }
        match &self.perturbation {
            PerturbationSpec::RankOne {
                eta: Some(_),
                g: Some(_),
                ..
            } => self.validate_diffuse_kernel(),
            PerturbationSpec::None => Ok(()),
            _ => fail(
                "perturbation",
                "rankone_centre_decay needs rank_one with explicit eta and g (or none for eta = g = 1)",
            ),
        }
    }

    fn validate_qn_decay(&self) -> Result<(), ConfigError> {
        if self.p != 1.0 {
            return fail("p", format!("qn_decay uses exact norms, which requires p = 1 (got {})", self.p));
        }
        if self.space.diffuse.is_some() {
            return fail("space.diffuse", "qn_decay needs a purely atomic space");
        }
        let n = self.space.atoms.count();
        let sweep = self.require_sweep()?;
        if sweep.to as usize > n {
            return fail("sweep.to", format!("n may not exceed the {n} stored atoms"));
        }
        let PerturbationSpec::RankOne {
            eta: Some(eta),
            g: Some(g),
            rank,
            ..
        } = &self.perturbation
        else {
            return fail("perturbation", "qn_decay needs rank_one with explicit eta and g");
        };
        if *rank != 1 {
            return fail("perturbation.rank", "explicit factors define rank 1");
        }
        let unit_masses = self.space.atoms.masses().iter().all(|&m| m == 1.0);
        for (path, f) in [("perturbation.eta", eta), ("perturbation.g", g)] {
            if !f.is_atomic_kind() {
                return fail(path, "factor must be constant, geometric, or values");
            }
            match f {
                Factor::Values { values } if values.len() != n => {
                    return fail(
                        &format!("{path}.values"),
                        format!("expected {n} values, got {}", values.len()),
                    )
                }
                Factor::Geometric { ratio, .. } if !(ratio.abs() < 1.0) => {
                    return fail(&format!("{path}.ratio"), "must satisfy |ratio| < 1")
                }
                Factor::Geometric { .. } if !unit_masses => {
                    return fail(path, "geometric tails assume unit atom masses")
                }
                _ => {}
            }
        }
        if matches!(g, Factor::Constant { value } if *value != 0.0) {
            return fail(
                "perturbation.g",
                "a constant g is not summable over infinitely many atoms; use values or geometric",
            );
        }
        Ok(())
    }
}

fn check_profile(path: &str, profile: &Profile) -> Result<(), ConfigError> {
    match profile {
        Profile::Step { values } if values.is_empty() => {
            fail(&format!("{path}.values"), "needs at least one value")
        }
        Profile::Polynomial { coefficients } if coefficients.is_empty() => {
            fail(&format!("{path}.coefficients"), "needs at least one coefficient")
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ATOMIC: &str = r#"{
        "scenario": "atomic_limsup",
        "space": {"atoms": {"count": 200, "mass": 1.0}},
        "u": {"atoms": {"tail": {"kind": "harmonic_limit", "c": 1.0, "alpha": 1.0}}},
        "sweep": {"from": 0, "to": 100}
    }"#;

    #[test]
    fn parses_and_validates() {
        let c = load_config(ATOMIC).unwrap();
        assert_eq!(c.scenario, Scenario::AtomicLimsup);
        assert_eq!(c.p, 1.0);
        assert_eq!(c.space.atoms.count(), 200);
    }

    #[test]
    fn round_trip() {
        let c = parse_config(ATOMIC).unwrap();
        assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
    }

    #[test]
    fn unknown_scenario_rejected_with_path() {
        let err = parse_config(r#"{"scenario": "nope"}"#).unwrap_err();
        assert_eq!(err.path, "scenario");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse_config(r#"{"scenario": "qn_decay", "bogus": 1}"#).unwrap_err();
        assert!(err.message.contains("bogus"), "{err}");
    }

    #[test]
    fn nested_type_error_has_path() {
        let err = parse_config(
            r#"{"scenario": "diffuse_witness", "space": {"diffuse": {"a": 0, "b": "x"}}}"#,
        )
        .unwrap_err();
        assert_eq!(err.path, "space.diffuse.b");
    }

    #[test]
    fn semantic_errors_have_paths() {
        let bad_p = ATOMIC.replace("\"sweep\"", "\"p\": 0.5, \"sweep\"");
        assert_eq!(load_config(&bad_p).unwrap_err().path, "p");

        let pinch = r#"{"scenario": "pinching_suite", "dimension": 8, "trials": 10, "p": 2}"#;
        let err = load_config(pinch).unwrap_err();
        assert_eq!(err.path, "p");
        assert!(err.message.contains("p = 1"));

        let no_eps = r#"{"scenario": "diffuse_witness",
            "space": {"diffuse": {"a": 0, "b": 1}},
            "u": {"diffuse": {"kind": "polynomial", "coefficients": [0, 1]}},
            "sweep": {"from": 1, "to": 4}}"#;
        assert_eq!(load_config(no_eps).unwrap_err().path, "epsilon");

        let masses = r#"{"scenario": "atomic_limsup", "space": {"atoms": {"masses": [1, 0]}},
            "sweep": {"from": 0, "to": 1}}"#;
        assert_eq!(load_config(masses).unwrap_err().path, "space.atoms.masses[1]");
    }
}
