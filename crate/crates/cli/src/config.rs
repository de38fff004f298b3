//! Experiment configurations: one tagged variant per subcommand, every knob defaulted.

use std::path::{Path, PathBuf};

use okounkov_core::classical::{AdmissibleWeight, Set2Descriptor, SetDescriptor};
use okounkov_core::gram::Measure;
use okounkov_core::semigroup::{GradedSemigroup, SemigroupSpec};
use okounkov_core::toric::{EnergyOptions, Expr, ToricWeight, WeightSpec, ZeroFiberOptions};
use okounkov_core::verify::Profile;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Settings shared by every command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub out: PathBuf,
    pub profile: Profile,
    pub seed: u64,
    /// Write SVG plots next to the CSV tables.
    pub svg: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { out: PathBuf::from("out"), profile: Profile::Full, seed: 7, svg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemigroupInput {
    Generators { d: usize, generators: Vec<Vec<i64>> },
    /// Monomials of `𝒪(degree)` on `ℙⁿ`.
    Projective { n: usize, degree: u32 },
    /// Lattice polytope (interval or polygon) generated in level one.
    Toric { vertices: Vec<Vec<i64>> },
}

impl Default for SemigroupInput {
    fn default() -> Self {
        Self::Projective { n: 1, degree: 1 }
    }
}

impl SemigroupInput {
    pub fn build(&self) -> okounkov_core::Result<GradedSemigroup> {
        match self {
            Self::Generators { d, generators } => {
                GradedSemigroup::from_spec(&SemigroupSpec { d: *d, generators: generators.clone() })
            }
            Self::Projective { n, degree } => GradedSemigroup::projective(*n, *degree),
            Self::Toric { vertices } => GradedSemigroup::toric(vertices),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OkounkovConfig {
    pub run: RunSettings,
    pub semigroup: SemigroupInput,
    pub k_max: u32,
    /// Level range of the interior-inclusion probe; skipped when absent.
    pub probe: Option<(u32, u32)>,
    pub probe_cap: f64,
}

impl Default for OkounkovConfig {
    fn default() -> Self {
        Self { run: RunSettings::default(), semigroup: SemigroupInput::default(), k_max: 24, probe: None, probe_cap: 10.0 }
    }
}

/// Subadditive tables available from the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableInput {
    /// `F(α, k) = −ln(k! / (α₁! ⋯ α_d! (k − |α|)!))` on the projective semigroup.
    #[default]
    NegLnMultinomial,
    /// `F(α, k) = ⟨a, α⟩ + b k`.
    Affine { a: Vec<f64>, b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub run: RunSettings,
    pub semigroup: SemigroupInput,
    pub table: TableInput,
    pub k_max: u32,
    /// Grid spacing; `1/k_max` when absent.
    pub spacing: Option<f64>,
    /// Rays `(α, k₀)` for the monotonicity report.
    pub rays: Vec<(Vec<i64>, u32)>,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            semigroup: SemigroupInput::default(),
            table: TableInput::default(),
            k_max: 200,
            spacing: None,
            rays: vec![(vec![1], 2), (vec![1], 3), (vec![1], 4)],
        }
    }
}

/// Spec of a weight without the sampled growth bound, which is re-estimated on load.
fn spec_of(w: ToricWeight) -> WeightSpec {
    WeightSpec { growth_bound: None, ..w.to_spec() }
}

pub fn fubini_study_spec() -> WeightSpec {
    spec_of(ToricWeight::fubini_study(1, 1.0).expect("Fubini-Study weight"))
}

pub fn bumped_spec() -> WeightSpec {
    spec_of(ToricWeight::fubini_study_with_bump(0.05, 0.0, 1.5).expect("bumped weight"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToricEnergyConfig {
    pub run: RunSettings,
    pub psi: WeightSpec,
    pub phi: WeightSpec,
    pub options: EnergyOptions,
}

impl Default for ToricEnergyConfig {
    fn default() -> Self {
        Self { run: RunSettings::default(), psi: fubini_study_spec(), phi: bumped_spec(), options: EnergyOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    pub run: RunSettings,
    pub psi: WeightSpec,
    pub phi: WeightSpec,
    pub k: Vec<u32>,
    pub measure: Measure,
    /// Compare with the Legendre-route energy.
    pub route_a: bool,
    pub options: EnergyOptions,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            psi: fubini_study_spec(),
            phi: bumped_spec(),
            k: vec![16, 32, 64, 128],
            measure: Measure::default(),
            route_a: true,
            options: EnergyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cheb1dConfig {
    pub run: RunSettings,
    pub set: SetDescriptor,
    pub weight: AdmissibleWeight,
    pub k_max: usize,
    /// Ladder length for the transfinite diameter; skipped when 0.
    pub transfinite_k_max: usize,
    /// Also tabulate the transform `2(1−α) ln C` route on `(0,1)`.
    pub field: bool,
}

impl Default for Cheb1dConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            set: SetDescriptor::Interval { a: -1.0, b: 1.0 },
            weight: AdmissibleWeight::Unit,
            k_max: 24,
            transfinite_k_max: 40,
            field: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectionalConfig {
    pub run: RunSettings,
    pub set: Set2Descriptor,
    pub weight: AdmissibleWeight,
    pub theta: [f64; 2],
    pub degrees: Vec<usize>,
}

impl Default for DirectionalConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            set: Set2Descriptor::Product {
                first: SetDescriptor::Interval { a: -1.0, b: 1.0 },
                second: SetDescriptor::Circle { r: 1.0, center: [0.0, 0.0] },
            },
            weight: AdmissibleWeight::Unit,
            theta: [0.5, 0.5],
            degrees: vec![2, 4, 6, 8],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroFiberConfig {
    pub run: RunSettings,
    pub weight: WeightSpec,
    pub alphas: Vec<f64>,
    pub options: ZeroFiberOptions,
}

impl Default for ZeroFiberConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            weight: spec_of(ToricWeight::fubini_study(2, 1.0).expect("Fubini-Study weight")),
            alphas: vec![0.25, 0.5, 0.75],
            options: ZeroFiberOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeConfig {
    pub run: RunSettings,
    pub psi: WeightSpec,
    pub phi: WeightSpec,
    pub direction: Expr,
    pub t_step: f64,
    pub options: EnergyOptions,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self {
            run: RunSettings::default(),
            psi: fubini_study_spec(),
            phi: bumped_spec(),
            direction: Expr::QuadraticBump { amplitude: 1.0, center: vec![-0.2], radius: 1.0 },
            t_step: 1e-4,
            options: EnergyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub run: RunSettings,
    /// Criteria to run; empty means all.
    pub criteria: Vec<u32>,
    /// Multiplies every numeric tolerance (a hook for negative controls).
    pub tolerance_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { run: RunSettings::default(), criteria: Vec::new(), tolerance_scale: 1.0 }
    }
}

/// A complete experiment, tagged by its subcommand name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Okounkov(OkounkovConfig),
    Envelope(EnvelopeConfig),
    ToricEnergy(ToricEnergyConfig),
    LkLadder(LadderConfig),
    Cheb1d(Cheb1dConfig),
    Directional(DirectionalConfig),
    ZeroFiber(ZeroFiberConfig),
    DerivativeCheck(DerivativeConfig),
    Verify(VerifyConfig),
}

impl ExperimentConfig {
    pub fn default_for(command: &str) -> Result<Self, CliError> {
        Self::parse_value(serde_json::json!({}), command)
    }

    pub fn command(&self) -> &'static str {
        match self {
            Self::Okounkov(_) => "okounkov",
            Self::Envelope(_) => "envelope",
            Self::ToricEnergy(_) => "toric-energy",
            Self::LkLadder(_) => "lk-ladder",
            Self::Cheb1d(_) => "cheb1d",
            Self::Directional(_) => "directional",
            Self::ZeroFiber(_) => "zero-fiber",
            Self::DerivativeCheck(_) => "derivative-check",
            Self::Verify(_) => "verify",
        }
    }

    /// Parses a config object for `command`; a `command` key, if present, must agree.
    /// Errors carry the path of the offending field.
    pub fn parse_value(mut value: serde_json::Value, command: &str) -> Result<Self, CliError> {
        let obj = value.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        match obj.remove("command") {
            None => {}
            Some(serde_json::Value::String(c)) if c == command => {}
            Some(other) => return Err(CliError::Config(format!("config is for command {other}, not {command}"))),
        }
        fn de<T: serde::de::DeserializeOwned>(v: serde_json::Value, command: &str) -> Result<T, CliError> {
            serde_path_to_error::deserialize(v).map_err(|e| {
                let path = e.path().to_string();
                CliError::Config(format!("invalid {command} config at `{path}`: {}", e.into_inner()))
            })
        }
        Ok(match command {
            "okounkov" => Self::Okounkov(de(value, command)?),
            "envelope" => Self::Envelope(de(value, command)?),
            "toric-energy" => Self::ToricEnergy(de(value, command)?),
            "lk-ladder" => Self::LkLadder(de(value, command)?),
            "cheb1d" => Self::Cheb1d(de(value, command)?),
            "directional" => Self::Directional(de(value, command)?),
            "zero-fiber" => Self::ZeroFiber(de(value, command)?),
            "derivative-check" => Self::DerivativeCheck(de(value, command)?),
            "verify" => Self::Verify(de(value, command)?),
            other => return Err(CliError::Config(format!("unknown command {other}"))),
        })
    }

    pub fn load(path: &Path, command: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse_value(value, command)
    }

    pub fn run_settings_mut(&mut self) -> &mut RunSettings {
        match self {
            Self::Okounkov(c) => &mut c.run,
            Self::Envelope(c) => &mut c.run,
            Self::ToricEnergy(c) => &mut c.run,
            Self::LkLadder(c) => &mut c.run,
            Self::Cheb1d(c) => &mut c.run,
            Self::Directional(c) => &mut c.run,
            Self::ZeroFiber(c) => &mut c.run,
            Self::DerivativeCheck(c) => &mut c.run,
            Self::Verify(c) => &mut c.run,
        }
    }

    pub fn run_settings(&self) -> &RunSettings {
        match self {
            Self::Okounkov(c) => &c.run,
            Self::Envelope(c) => &c.run,
            Self::ToricEnergy(c) => &c.run,
            Self::LkLadder(c) => &c.run,
            Self::Cheb1d(c) => &c.run,
            Self::Directional(c) => &c.run,
            Self::ZeroFiber(c) => &c.run,
            Self::DerivativeCheck(c) => &c.run,
            Self::Verify(c) => &c.run,
        }
    }

    /// SHA-256 of the canonical JSON serialization, output location and plot switch excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        let run = c.run_settings_mut();
        run.out = PathBuf::new();
        run.svg = true;
        let json = serde_json::to_string(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

pub fn load_weight(path: &Path) -> Result<WeightSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: invalid weight: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COMMANDS: [&str; 9] =
        ["okounkov", "envelope", "toric-energy", "lk-ladder", "cheb1d", "directional", "zero-fiber", "derivative-check", "verify"];

    #[test]
    fn defaults_round_trip_losslessly() {
        for c in COMMANDS {
            let cfg = ExperimentConfig::default_for(c).unwrap();
            assert_eq!(cfg.command(), c);
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn hash_ignores_the_output_location_only() {
        let a = ExperimentConfig::default_for("cheb1d").unwrap();
        let mut b = a.clone();
        b.run_settings_mut().out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.run_settings_mut().seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn schema_violations_name_the_field() {
        let e = ExperimentConfig::parse_value(serde_json::json!({"k_maxx": 3}), "okounkov").unwrap_err();
        assert!(e.to_string().contains("k_maxx"), "{e}");
        let e = ExperimentConfig::parse_value(serde_json::json!({"k": "many"}), "lk-ladder").unwrap_err();
        assert!(e.to_string().contains("`k`") && e.to_string().contains("invalid type"), "{e}");
        let e = ExperimentConfig::parse_value(serde_json::json!({"run": {"seed": -1}}), "verify").unwrap_err();
        assert!(e.to_string().contains("run.seed"), "{e}");
        let e = ExperimentConfig::parse_value(serde_json::json!({"command": "verify"}), "cheb1d").unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
    }

    #[test]
    fn partial_configs_fill_defaults() {
        let c = ExperimentConfig::parse_value(serde_json::json!({"set": {"kind": "circle", "r": 2}}), "cheb1d").unwrap();
        let ExperimentConfig::Cheb1d(c) = c else { panic!() };
        assert_eq!(c.k_max, 24);
        assert_eq!(c.set, SetDescriptor::Circle { r: 2.0, center: [0.0, 0.0] });
    }
}
