//! Experiment configuration files.
//!
//! A configuration is a TOML document with the sections `[battery]`,
//! `[charger]`, `[initial]`, `[run]`, `[output]` and `[tolerances]`. All
//! energies and rates are in absolute units; the horizon and quench times
//! are in units of `1/γ_eg`. See the README for the full grammar.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qtbattery::dynamics::uniform_grid;
use qtbattery::observables::thermal_state;
use qtbattery::protocol::{optimal_coupling, ChargePlan, Engine};
use qtbattery::{BatteryModel, ChargerParams, DecayRates, DensityMatrix, Error, Tolerances};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub battery: BatteryConfig,
    pub charger: ChargerConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatteryKindName {
    Uniform,
    Spin,
    Oscillator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub kind: BatteryKindName,
    /// Highest level `N` of a uniform ladder or oscillator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Spin quantum number `J` (integer or half-integer).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default = "one")]
    pub energy_quantum: f64,
}

/// Battery-charger coupling: a number, `"optimal:<n>"` for the optimum of
/// level index `n`, or `"optimal:m=<m>"` for a spin level by magnetic number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValue", into = "RawValue")]
pub enum Coupling {
    Fixed(f64),
    OptimalLevel(usize),
    OptimalM(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawValue", into = "RawValue")]
pub enum InitialState {
    #[default]
    Ground,
    /// Thermal state at inverse temperature β (in units of `1/E_B`); `inf`
    /// is the ground state.
    Thermal(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Number(f64),
    Text(String),
}

impl TryFrom<RawValue> for Coupling {
    type Error = String;

    fn try_from(raw: RawValue) -> Result<Self, String> {
        match raw {
            RawValue::Number(g) => Ok(Coupling::Fixed(g)),
            RawValue::Text(s) => {
                let rest = s.strip_prefix("optimal:").ok_or_else(|| format!("expected a number or \"optimal:<n>\", got {s:?}"))?;
                if let Some(m) = rest.strip_prefix("m=") {
                    m.trim().parse().map(Coupling::OptimalM).map_err(|_| format!("bad magnetic number in {s:?}"))
                } else {
                    rest.trim().parse().map(Coupling::OptimalLevel).map_err(|_| format!("bad level index in {s:?}"))
                }
            }
        }
    }
}

impl From<Coupling> for RawValue {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Fixed(g) => RawValue::Number(g),
            Coupling::OptimalLevel(n) => RawValue::Text(format!("optimal:{n}")),
            Coupling::OptimalM(m) => RawValue::Text(format!("optimal:m={m}")),
        }
    }
}

impl TryFrom<RawValue> for InitialState {
    type Error = String;

    fn try_from(raw: RawValue) -> Result<Self, String> {
        let RawValue::Text(s) = raw else {
            return Err("expected \"ground\" or \"thermal:<beta>\"".into());
        };
        if s == "ground" {
            return Ok(InitialState::Ground);
        }
        let beta = s.strip_prefix("thermal:").ok_or_else(|| format!("expected \"ground\" or \"thermal:<beta>\", got {s:?}"))?;
        parse_beta(beta).map(InitialState::Thermal)
    }
}

impl From<InitialState> for RawValue {
    fn from(s: InitialState) -> Self {
        RawValue::Text(s.to_string())
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Ground => write!(f, "ground"),
            InitialState::Thermal(b) if b.is_infinite() => write!(f, "thermal:inf"),
            InitialState::Thermal(b) => write!(f, "thermal:{b}"),
        }
    }
}

/// Parses an inverse temperature; accepts `inf`.
pub fn parse_beta(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let beta = if s.eq_ignore_ascii_case("inf") { f64::INFINITY } else { s.parse::<f64>().map_err(|_| format!("bad inverse temperature {s:?}"))? };
    if beta.is_nan() || beta < 0.0 {
        return Err(format!("inverse temperature must be nonnegative, got {s}"));
    }
    Ok(beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargerConfig {
    pub detuning_h: f64,
    pub detuning_e: f64,
    pub drive: f64,
    pub gamma_hg: f64,
    pub gamma_eg: f64,
    #[serde(default)]
    pub gamma_he: f64,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub state: InitialState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Full,
    Effective,
    Both,
}

impl EngineChoice {
    pub fn engines(self) -> Vec<Engine> {
        match self {
            EngineChoice::Full => vec![Engine::Full],
            EngineChoice::Effective => vec![Engine::Effective],
            EngineChoice::Both => vec![Engine::Full, Engine::Effective],
        }
    }
}

pub fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Full => "full",
        Engine::Effective => "effective",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub engine: EngineChoice,
    /// Final time in units of `1/γ_eg`.
    pub horizon: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Coupling quench times in units of `1/γ_eg` (oscillator only).
    #[serde(default)]
    pub quench_times: Vec<f64>,
    /// Fraction of the maximal ergotropy that counts as saturated.
    #[serde(default = "default_threshold")]
    pub saturation_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_stem")]
    pub stem: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_directory(), stem: default_stem() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub rel: f64,
    pub abs: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { rel: t.rel, abs: t.abs }
    }
}

fn one() -> f64 {
    1.0
}

fn default_points() -> usize {
    400
}

fn default_threshold() -> f64 {
    0.99
}

fn default_directory() -> PathBuf {
    PathBuf::from(".")
}

fn default_stem() -> String {
    "run".into()
}

/// A configuration with every physical object constructed and checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub battery: BatteryModel,
    /// Charger with the coupling resolved to a number.
    pub charger: ChargerParams,
    pub initial: DensityMatrix,
    pub tolerances: Tolerances,
}

/// Maps a core parameter name to the configuration key it came from.
fn config_key(name: &str) -> &'static str {
    match name {
        "Delta" => "charger.detuning_h",
        "delta" => "charger.detuning_e",
        "Omega" => "charger.drive",
        "gamma_hg" => "charger.gamma_hg",
        "gamma_eg" => "charger.gamma_eg",
        "gamma_he" => "charger.gamma_he",
        "g" => "charger.coupling",
        "N" => "battery.n",
        "J" => "battery.j",
        "energy_quantum" => "battery.energy_quantum",
        "beta" => "initial.state",
        "quench_times" => "run.quench_times",
        "threshold_fraction" => "run.saturation_threshold",
        _ => "configuration",
    }
}

fn field_error(e: Error) -> CliError {
    match e {
        Error::InvalidParameter { name, reason } => CliError::config(format!("{}: {reason}", config_key(name))),
        other => CliError::config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string().trim_end().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Canonical serialization; every default is written out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }

    /// Structural checks that need no physics.
    fn check(&self) -> CliResult<()> {
        let b = &self.battery;
        match b.kind {
            BatteryKindName::Uniform | BatteryKindName::Oscillator => {
                if b.n.is_none() {
                    return Err(CliError::config("battery.n: required for this battery kind"));
                }
                if b.j.is_some() {
                    return Err(CliError::config("battery.j: only valid for kind = \"spin\""));
                }
            }
            BatteryKindName::Spin => {
                if b.j.is_none() {
                    return Err(CliError::config("battery.j: required for kind = \"spin\""));
                }
                if b.n.is_some() {
                    return Err(CliError::config("battery.n: not valid for kind = \"spin\"; use battery.j"));
                }
            }
        }
        if matches!(self.charger.coupling, Coupling::OptimalM(_)) && b.kind != BatteryKindName::Spin {
            return Err(CliError::config("charger.coupling: \"optimal:m=…\" needs a spin battery"));
        }
        let r = &self.run;
        if !(r.horizon.is_finite() && r.horizon >= 0.0) {
            return Err(CliError::config(format!("run.horizon: must be finite and nonnegative, got {}", r.horizon)));
        }
        if r.horizon > 0.0 && r.points < 2 {
            return Err(CliError::config("run.points: need at least 2 points for a positive horizon"));
        }
        if !(r.saturation_threshold > 0.0 && r.saturation_threshold < 1.0) {
            return Err(CliError::config(format!("run.saturation_threshold: must lie in (0, 1), got {}", r.saturation_threshold)));
        }
        if let Some(t) = r.quench_times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CliError::config(format!("run.quench_times: times must be positive, got {t}")));
        }
        if r.quench_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config("run.quench_times: times must increase"));
        }
        let t = &self.tolerances;
        if !(t.rel > 0.0 && t.rel.is_finite() && t.abs > 0.0 && t.abs.is_finite()) {
            return Err(CliError::config("tolerances: rel and abs must be positive and finite"));
        }
        if self.output.stem.is_empty() || self.output.stem.contains(['/', '\\']) {
            return Err(CliError::config("output.stem: must be a nonempty file name"));
        }
        Ok(())
    }

    pub fn battery_model(&self) -> CliResult<BatteryModel> {
        let b = &self.battery;
        let model = match b.kind {
            BatteryKindName::Uniform => BatteryModel::uniform_ladder(b.n.unwrap_or(0), b.energy_quantum),
            BatteryKindName::Oscillator => BatteryModel::truncated_ho(b.n.unwrap_or(0), b.energy_quantum),
            BatteryKindName::Spin => BatteryModel::large_spin_from_j(b.j.unwrap_or(0.0), b.energy_quantum),
        };
        model.map_err(field_error)
    }

    /// Builds and checks the battery, charger and initial state.
    pub fn resolve(&self) -> CliResult<Experiment> {
        self.check()?;
        let battery = self.battery_model()?;
        let c = &self.charger;
        let rates = DecayRates { hg: c.gamma_hg, eg: c.gamma_eg, he: c.gamma_he };
        if c.gamma_eg.is_nan() || c.gamma_eg <= 0.0 {
            return Err(CliError::config("charger.gamma_eg: must be positive (it sets the time unit)"));
        }
        let base = ChargerParams::new(c.detuning_h, c.detuning_e, c.drive, rates, 0.0).map_err(field_error)?;
        let g = match c.coupling {
            Coupling::Fixed(g) => g,
            Coupling::OptimalLevel(n) => {
                if n >= battery.top_level() {
                    return Err(CliError::config(format!("charger.coupling: level {n} has no upward transition (top level is {})", battery.top_level())));
                }
                optimal_coupling(&battery, &base, n).map_err(field_error)?
            }
            Coupling::OptimalM(m) => {
                let n = battery.level_of_m(m).ok_or_else(|| CliError::config(format!("charger.coupling: m = {m} is not a level of this spin")))?;
                if n >= battery.top_level() {
                    return Err(CliError::config(format!("charger.coupling: m = {m} is the top level")));
                }
                optimal_coupling(&battery, &base, n).map_err(field_error)?
            }
        };
        let charger = base.with_coupling(g).map_err(field_error)?;
        let initial = match self.initial.state {
            InitialState::Ground => DensityMatrix::pure_level(battery.dim(), 0).map_err(field_error)?,
            InitialState::Thermal(beta) => thermal_state(&battery, beta).map_err(field_error)?,
        };
        if !self.run.quench_times.is_empty() && self.battery.kind != BatteryKindName::Oscillator {
            return Err(CliError::config("run.quench_times: coupling quenches need an oscillator battery"));
        }
        let tolerances = Tolerances { rel: self.tolerances.rel, abs: self.tolerances.abs };
        Ok(Experiment { config: self.clone(), battery, charger, initial, tolerances })
    }
}

impl Experiment {
    /// Output times in absolute units.
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let horizon = self.config.run.horizon / self.charger.rates().eg;
        uniform_grid(horizon, self.config.run.points).map_err(field_error)
    }

    pub fn plan(&self, engine: Engine) -> CliResult<ChargePlan> {
        let eg = self.charger.rates().eg;
        Ok(ChargePlan {
            engine,
            t_grid: self.grid()?,
            quench_times: self.config.run.quench_times.iter().map(|t| t / eg).collect(),
            tolerances: self.tolerances,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
[battery]
kind = "uniform"
n = 10

[charger]
detuning_h = 0.1
detuning_e = 0.01
drive = 0.005
gamma_hg = 0.1
gamma_eg = 0.01
coupling = "optimal:0"

[initial]
state = "thermal:2"

[run]
engine = "both"
horizon = 100.0
points = 11
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let c = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.battery.energy_quantum, 1.0);
        assert_eq!(c.charger.gamma_he, 0.0);
        assert_eq!(c.charger.coupling, Coupling::OptimalLevel(0));
        assert_eq!(c.initial.state, InitialState::Thermal(2.0));
        assert_eq!(c.run.saturation_threshold, 0.99);
        assert_eq!(c.output.stem, "run");
    }

    #[test]
    fn round_trip_is_identity() {
        let c = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn coupling_and_initial_forms() {
        for (text, want) in [("0.25", Coupling::Fixed(0.25)), ("\"optimal:3\"", Coupling::OptimalLevel(3)), ("\"optimal:m=-2.5\"", Coupling::OptimalM(-2.5))] {
            let doc = format!("c = {text}");
            #[derive(Deserialize)]
            struct W {
                c: Coupling,
            }
            assert_eq!(toml::from_str::<W>(&doc).unwrap().c, want);
        }
        assert_eq!(InitialState::try_from(RawValue::Text("thermal:inf".into())).unwrap(), InitialState::Thermal(f64::INFINITY));
        assert!(InitialState::try_from(RawValue::Text("thermal:-1".into())).is_err());
        assert!(InitialState::try_from(RawValue::Text("hot".into())).is_err());
    }

    #[test]
    fn optimal_coupling_resolves_at_load() {
        let e = ExperimentConfig::from_toml_str(SAMPLE).unwrap().resolve().unwrap();
        let want = optimal_coupling(&e.battery, &e.charger, 0).unwrap();
        assert_eq!(e.charger.coupling(), want);
        assert_eq!(e.grid().unwrap().len(), 11);
        assert!((e.grid().unwrap()[10] - 10000.0).abs() < 1e-9);
    }

    #[test]
    fn field_level_errors() {
        let bad = SAMPLE.replace("drive = 0.005", "drive = -1.0");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap().resolve().unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.starts_with("charger.drive")), "{err}");

        let bad = SAMPLE.replace("n = 10\n", "j = 3\n");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("battery.n")), "{err}");

        let bad = SAMPLE.replace("points = 11", "points = 11\nquench_times = [5.0]");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap().resolve().unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.starts_with("run.quench_times")), "{err}");

        let bad = SAMPLE.replace("[run]", "[run]\nspeed = 3");
        assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(CliError::Config(_))));

        let bad = SAMPLE.replace("\"optimal:0\"", "\"optimal:10\"");
        let err = ExperimentConfig::from_toml_str(&bad).unwrap().resolve().unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.starts_with("charger.coupling")), "{err}");
    }

    #[test]
    fn spin_by_magnetic_number() {
        let text = SAMPLE.replace("kind = \"uniform\"\nn = 10", "kind = \"spin\"\nj = 2.5").replace("\"optimal:0\"", "\"optimal:m=-0.5\"");
        let e = ExperimentConfig::from_toml_str(&text).unwrap().resolve().unwrap();
        assert_eq!(e.battery.dim(), 6);
        assert_eq!(e.charger.coupling(), optimal_coupling(&e.battery, &e.charger, 2).unwrap());
    }
}
