//! Scenario configuration: a TOML document with a versioned schema.
//!
//! Validation walks the whole document and collects every problem it finds,
//! each tagged with the dotted key path it refers to.

use chiral_decoherence::master_eq::{ChannelSpectrum, EvolutionFrame, Pipeline};
use chiral_decoherence::polarizability::{IntermediateState, SumOverStatesModel, VibrationalMode, ChannelSet};
use chiral_decoherence::presets::{toy_molecule, Molecule};
use chiral_decoherence::scattering::{Handedness, SinSquaredConvention};
use chiral_decoherence::tensor::Tensor3;
use serde::Serialize;
use std::fmt;
use toml::{Table, Value};

pub const SCHEMA_VERSION: i64 = 1;
pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_OUTPUT_DIR: &str = "output";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rate,
    Sweep,
    Evolve,
    Verify,
}

impl Mode {
    pub const NAMES: [&'static str; 4] = ["rate", "sweep", "evolve", "verify"];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "rate" => Some(Mode::Rate),
            "sweep" => Some(Mode::Sweep),
            "evolve" => Some(Mode::Evolve),
            "verify" => Some(Mode::Verify),
            _ => None,
        }
    }
}

/// Which B pipelines a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineChoice {
    Paper,
    Quadrature,
    Both,
}

impl PipelineChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(Self::Paper),
            "quadrature" => Some(Self::Quadrature),
            "both" => Some(Self::Both),
            _ => None,
        }
    }

    pub fn pipelines(self) -> Vec<Pipeline> {
        match self {
            Self::Paper => vec![Pipeline::Paper],
            Self::Quadrature => vec![Pipeline::Quadrature],
            Self::Both => vec![Pipeline::Paper, Pipeline::Quadrature],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SosState {
    pub gap: f64,
    pub electric_dipole: [f64; 3],
    pub magnetic_dipole_imag: [f64; 3],
}

/// Inputs shared by the custom molecule forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CustomMolecule {
    pub name: String,
    pub wavenumber: f64,
    pub reduced_mass: f64,
    pub angular_frequency: f64,
    pub energies: [f64; 2],
    pub shifts: [f64; 2],
    pub well_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoleculeSpec {
    Preset {
        name: String,
    },
    SumOverStates {
        common: CustomMolecule,
        channels: [Vec<SosState>; 2],
        detuning_floor: Option<f64>,
        derivative_scale: f64,
    },
    Tensors {
        common: CustomMolecule,
        /// (α, Im β) for channels 1 and 2.
        rayleigh: [([[f64; 3]; 3], [[f64; 3]; 3]); 2],
        alpha_derivative: [[f64; 3]; 3],
        beta_derivative_imag: [[f64; 3]; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySpec {
    /// Overrides the molecule's default probe handedness.
    pub handedness: Option<Handedness>,
    pub convention: SinSquaredConvention,
    /// Points of the optional A(θ) table written by rate mode.
    pub theta_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub mode: Option<Mode>,
    pub pipeline: PipelineChoice,
    pub seed: u64,
    pub output_dir: Option<String>,
    pub quadrature_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub temperatures: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Duration {
    Seconds(f64),
    DecayTimes(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSpec {
    Dt(f64),
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    One,
    Two,
    Plus,
    Minus,
    Left,
    Right,
}

impl InitialState {
    const NAMES: [&'static str; 6] = ["one", "two", "plus", "minus", "left", "right"];

    fn parse(s: &str) -> Option<Self> {
        let all = [Self::One, Self::Two, Self::Plus, Self::Minus, Self::Left, Self::Right];
        Self::NAMES.iter().position(|n| *n == s).map(|i| all[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSpec {
    pub duration: Duration,
    pub step: StepSpec,
    pub initial_state: InitialState,
    pub population_transfer: bool,
    pub frame: EvolutionFrame,
    pub record_every: usize,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        Self {
            duration: Duration::DecayTimes(5.0),
            step: StepSpec::Steps(1000),
            initial_state: InitialState::Plus,
            population_transfer: true,
            frame: EvolutionFrame::Rotating,
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySpec {
    pub mc_pairs: usize,
    pub mc_samples: usize,
    pub mc_workers: usize,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            mc_pairs: 2,
            mc_samples: 100_000,
            mc_workers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub schema_version: i64,
    pub molecule: MoleculeSpec,
    pub temperature: Option<f64>,
    pub geometry: GeometrySpec,
    pub run: RunSpec,
    pub sweep: Option<SweepSpec>,
    pub evolve: Option<EvolveSpec>,
    pub verify: VerifySpec,
}

impl ScenarioConfig {
    /// The built-in toy scenario, used when verify runs without a file.
    pub fn toy(mode: Mode) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            molecule: MoleculeSpec::Preset { name: "toy".into() },
            temperature: Some(1.0),
            geometry: GeometrySpec {
                handedness: None,
                convention: SinSquaredConvention::Paper,
                theta_points: 0,
            },
            run: RunSpec {
                mode: Some(mode),
                pipeline: PipelineChoice::Both,
                seed: DEFAULT_SEED,
                output_dir: None,
                quadrature_tolerance: 1e-10,
            },
            sweep: None,
            evolve: None,
            verify: VerifySpec::default(),
        }
    }

    /// Problems that only matter once the mode is known.
    pub fn check_mode(&self, mode: Mode) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut need = |ok: bool, path: &str, what: &str| {
            if !ok {
                issues.push(ConfigIssue {
                    path: path.into(),
                    message: format!("required in {} mode: {what}", mode.name()),
                });
            }
        };
        match mode {
            Mode::Rate | Mode::Evolve => need(self.temperature.is_some(), "bath.temperature", "temperature in kelvin"),
            Mode::Sweep => need(self.sweep.is_some(), "sweep", "a [sweep] table with temperatures"),
            Mode::Verify => {}
        }
        issues
    }

    /// Builds the molecule, applying the geometry handedness override.
    pub fn build_molecule(&self) -> chiral_decoherence::Result<Molecule> {
        let mut mol = match &self.molecule {
            MoleculeSpec::Preset { .. } => toy_molecule(),
            MoleculeSpec::SumOverStates {
                common,
                channels,
                detuning_floor,
                derivative_scale,
            } => {
                let model = |states: &[SosState]| -> chiral_decoherence::Result<SumOverStatesModel> {
                    let s = states
                        .iter()
                        .map(|s| IntermediateState::with_imaginary_magnetic(s.gap, s.electric_dipole, s.magnetic_dipole_imag))
                        .collect::<chiral_decoherence::Result<Vec<_>>>()?;
                    SumOverStatesModel::new(s, *detuning_floor)
                };
                let (one, two) = (model(&channels[0])?, model(&channels[1])?);
                Molecule::from_sos(
                    common.name.clone(),
                    [&one, &two],
                    common.wavenumber,
                    common.reduced_mass,
                    common.angular_frequency,
                    *derivative_scale,
                    spectrum(common)?,
                    Handedness::Right,
                )?
            }
            MoleculeSpec::Tensors {
                common,
                rayleigh,
                alpha_derivative,
                beta_derivative_imag,
            } => {
                let mode = VibrationalMode::new(
                    common.reduced_mass,
                    common.angular_frequency,
                    Tensor3::real(*alpha_derivative),
                    Tensor3::imaginary(*beta_derivative_imag),
                )?;
                let pair = |i: usize| (Tensor3::real(rayleigh[i].0), Tensor3::imaginary(rayleigh[i].1));
                Molecule {
                    name: common.name.clone(),
                    channels: ChannelSet::from_rayleigh([pair(0), pair(1)], &mode, common.wavenumber)?,
                    spectrum: spectrum(common)?,
                    mode,
                    handedness: Handedness::Right,
                }
            }
        };
        if let Some(h) = self.geometry.handedness {
            mol.handedness = h;
        }
        Ok(mol)
    }
}

fn spectrum(c: &CustomMolecule) -> chiral_decoherence::Result<ChannelSpectrum> {
    ChannelSpectrum::new(c.energies, c.shifts, c.well_depth, c.angular_frequency)
}

/// Reasons a configuration was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, column: usize, message: String },
    Schema(Vec<ConfigIssue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            ConfigError::Schema(issues) => {
                write!(f, "{} configuration error(s)", issues.len())?;
                for i in issues {
                    write!(f, "\n  {i}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: Table = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let mut issues = Vec::new();
    let cfg = read_root(&table, &mut issues);
    if issues.is_empty() {
        Ok(cfg.expect("no issues means every field was read"))
    } else {
        Err(ConfigError::Schema(issues))
    }
}

/// Closest known key, if any is reasonably close.
fn suggest(key: &str, known: &[&str]) -> Option<String> {
    known
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string())
}

struct Section<'a> {
    table: &'a Table,
    path: String,
}

impl<'a> Section<'a> {
    fn new(table: &'a Table, path: &str, known: &[&str], issues: &mut Vec<ConfigIssue>) -> Self {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let message = match suggest(key, known) {
                    Some(s) => format!("unknown key; did you mean \"{s}\"?"),
                    None => format!("unknown key; expected one of: {}", known.join(", ")),
                };
                issues.push(ConfigIssue {
                    path: join(path, key),
                    message,
                });
            }
        }
        Self {
            table,
            path: path.to_string(),
        }
    }

    fn key(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn value(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn require<T>(&self, key: &str, v: Option<T>, issues: &mut Vec<ConfigIssue>) -> Option<T> {
        if v.is_none() && !self.has(key) {
            issues.push(issue(self.key(key), "missing required key"));
        }
        v
    }

    fn float(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
        let v = self.value(key)?;
        match as_float(v) {
            Some(x) if x.is_finite() => Some(x),
            Some(_) => {
                issues.push(issue(self.key(key), "must be finite"));
                None
            }
            None => {
                issues.push(issue(self.key(key), format!("expected a number, found {}", v.type_str())));
                None
            }
        }
    }

    fn positive(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
        let x = self.float(key, issues)?;
        if x > 0.0 {
            Some(x)
        } else {
            issues.push(issue(self.key(key), format!("must be positive, got {x}")));
            None
        }
    }

    fn non_negative(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<f64> {
        let x = self.float(key, issues)?;
        if x >= 0.0 {
            Some(x)
        } else {
            issues.push(issue(self.key(key), format!("must be non-negative, got {x}")));
            None
        }
    }

    fn integer(&self, key: &str, min: i64, issues: &mut Vec<ConfigIssue>) -> Option<i64> {
        let v = self.value(key)?;
        match v.as_integer() {
            Some(n) if n >= min => Some(n),
            Some(n) => {
                issues.push(issue(self.key(key), format!("must be at least {min}, got {n}")));
                None
            }
            None => {
                issues.push(issue(self.key(key), format!("expected an integer, found {}", v.type_str())));
                None
            }
        }
    }

    fn boolean(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<bool> {
        let v = self.value(key)?;
        let b = v.as_bool();
        if b.is_none() {
            issues.push(issue(self.key(key), format!("expected true or false, found {}", v.type_str())));
        }
        b
    }

    fn string(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<&'a str> {
        let v = self.value(key)?;
        let s = v.as_str();
        if s.is_none() {
            issues.push(issue(self.key(key), format!("expected a string, found {}", v.type_str())));
        }
        s
    }

    fn choice<T>(
        &self,
        key: &str,
        names: &[&str],
        parse: impl Fn(&str) -> Option<T>,
        issues: &mut Vec<ConfigIssue>,
    ) -> Option<T> {
        let s = self.string(key, issues)?;
        let t = parse(s);
        if t.is_none() {
            let hint = suggest(s, names).map_or(String::new(), |n| format!("; did you mean \"{n}\"?"));
            issues.push(issue(
                self.key(key),
                format!("unknown value \"{s}\", expected one of: {}{hint}", names.join(", ")),
            ));
        }
        t
    }

    fn floats<const N: usize>(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<[f64; N]> {
        let v = self.value(key)?;
        float_array::<N>(v, &self.key(key), issues)
    }

    fn matrix(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<[[f64; 3]; 3]> {
        let v = self.value(key)?;
        let path = self.key(key);
        let Some(rows) = v.as_array().filter(|a| a.len() == 3) else {
            issues.push(issue(path, "expected a 3x3 array of numbers"));
            return None;
        };
        let mut out = [[0.0; 3]; 3];
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            match float_array::<3>(row, &format!("{path}[{i}]"), issues) {
                Some(r) => out[i] = r,
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn table(&self, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<&'a Table> {
        let v = self.value(key)?;
        let t = v.as_table();
        if t.is_none() {
            issues.push(issue(self.key(key), format!("expected a table, found {}", v.type_str())));
        }
        t
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn issue(path: impl Into<String>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        path: path.into(),
        message: message.into(),
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(n) => Some(*n as f64),
        _ => None,
    }
}

fn float_array<const N: usize>(v: &Value, path: &str, issues: &mut Vec<ConfigIssue>) -> Option<[f64; N]> {
    let arr = v.as_array().filter(|a| a.len() == N);
    let parsed = arr.and_then(|a| {
        let mut out = [0.0; N];
        for (slot, x) in out.iter_mut().zip(a) {
            *slot = as_float(x).filter(|f| f.is_finite())?;
        }
        Some(out)
    });
    if parsed.is_none() {
        issues.push(issue(path, format!("expected an array of {N} finite numbers")));
    }
    parsed
}

const ROOT_KEYS: &[&str] = &["schema_version", "molecule", "bath", "geometry", "run", "sweep", "evolve", "verify"];
const MOLECULE_KEYS: &[&str] = &[
    "preset",
    "name",
    "wavenumber",
    "reduced_mass",
    "angular_frequency",
    "energies",
    "shifts",
    "well_depth",
    "sos",
    "tensors",
];
const SOS_KEYS: &[&str] = &["channel1", "channel2", "detuning_floor", "derivative_scale"];
const STATE_KEYS: &[&str] = &["gap", "electric_dipole", "magnetic_dipole_imag"];
const TENSOR_KEYS: &[&str] = &["alpha1", "beta1_imag", "alpha2", "beta2_imag", "alpha_derivative", "beta_derivative_imag"];
const BATH_KEYS: &[&str] = &["temperature"];
const GEOMETRY_KEYS: &[&str] = &["handedness", "convention", "theta_points"];
const RUN_KEYS: &[&str] = &["mode", "pipeline", "seed", "output_dir", "quadrature_tolerance"];
const SWEEP_KEYS: &[&str] = &["temperatures", "t_min", "t_max", "points", "spacing"];
const EVOLVE_KEYS: &[&str] = &[
    "t_final",
    "decay_times",
    "dt",
    "steps",
    "initial_state",
    "population_transfer",
    "frame",
    "record_every",
];
const VERIFY_KEYS: &[&str] = &["mc_pairs", "mc_samples", "mc_workers"];

fn read_root(table: &Table, issues: &mut Vec<ConfigIssue>) -> Option<ScenarioConfig> {
    let root = Section::new(table, "", ROOT_KEYS, issues);
    let version = root.require("schema_version", root.integer("schema_version", 0, issues), issues);
    if let Some(v) = version {
        if v != SCHEMA_VERSION {
            issues.push(issue("schema_version", format!("unsupported version {v}; this build reads {SCHEMA_VERSION}")));
        }
    }

    let molecule = match root.require("molecule", root.table("molecule", issues), issues) {
        Some(t) => read_molecule(t, issues),
        None => None,
    };

    let temperature = root.table("bath", issues).and_then(|t| {
        let s = Section::new(t, "bath", BATH_KEYS, issues);
        s.positive("temperature", issues)
    });

    let geometry = match root.table("geometry", issues) {
        Some(t) => read_geometry(t, issues),
        None => Some(GeometrySpec {
            handedness: None,
            convention: SinSquaredConvention::Paper,
            theta_points: 0,
        }),
    };

    let empty = Table::new();
    let run = read_run(root.table("run", issues).unwrap_or(&empty), issues);
    let sweep = root.table("sweep", issues).and_then(|t| read_sweep(t, issues));
    let evolve = root.table("evolve", issues).and_then(|t| read_evolve(t, issues));
    let verify = read_verify(root.table("verify", issues).unwrap_or(&empty), issues);

    Some(ScenarioConfig {
        schema_version: version?,
        molecule: molecule?,
        temperature,
        geometry: geometry?,
        run: run?,
        sweep,
        evolve,
        verify: verify?,
    })
}

fn read_molecule(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<MoleculeSpec> {
    let s = Section::new(t, "molecule", MOLECULE_KEYS, issues);
    let forms = ["preset", "sos", "tensors"].iter().filter(|k| s.has(k)).count();
    if forms != 1 {
        issues.push(issue(
            "molecule",
            "exactly one of \"preset\", [molecule.sos] or [molecule.tensors] must be given",
        ));
        return None;
    }
    if s.has("preset") {
        let name = s.choice("preset", &["toy"], |p| (p == "toy").then(|| p.to_string()), issues)?;
        for key in ["name", "wavenumber", "reduced_mass", "angular_frequency", "energies", "shifts", "well_depth"] {
            if s.has(key) {
                issues.push(issue(s.key(key), "not allowed together with a preset"));
            }
        }
        return Some(MoleculeSpec::Preset { name });
    }

    let name = s.string("name", issues).unwrap_or("custom").to_string();
    let wavenumber = s.require("wavenumber", s.positive("wavenumber", issues), issues);
    let reduced_mass = s.require("reduced_mass", s.positive("reduced_mass", issues), issues);
    let angular_frequency = s.require("angular_frequency", s.positive("angular_frequency", issues), issues);
    let energies = s.require("energies", s.floats::<2>("energies", issues), issues);
    if let Some(e) = energies {
        if e[1] < e[0] {
            issues.push(issue("molecule.energies", "channel 2 must not lie below channel 1"));
        }
    }
    let shifts = if s.has("shifts") {
        s.floats::<2>("shifts", issues)
    } else {
        Some([0.0, 0.0])
    };
    let well_depth = s.require("well_depth", s.positive("well_depth", issues), issues);
    let common = CustomMolecule {
        name,
        wavenumber: wavenumber?,
        reduced_mass: reduced_mass?,
        angular_frequency: angular_frequency?,
        energies: energies?,
        shifts: shifts?,
        well_depth: well_depth?,
    };

    if let Some(sos) = s.table("sos", issues) {
        let ss = Section::new(sos, "molecule.sos", SOS_KEYS, issues);
        let ch1 = ss.require("channel1", read_states(&ss, "channel1", issues), issues);
        let ch2 = ss.require("channel2", read_states(&ss, "channel2", issues), issues);
        let floor = ss.positive("detuning_floor", issues);
        if ss.has("detuning_floor") && floor.is_none() {
            return None;
        }
        let scale = ss.require("derivative_scale", ss.non_negative("derivative_scale", issues), issues);
        return Some(MoleculeSpec::SumOverStates {
            common,
            channels: [ch1?, ch2?],
            detuning_floor: floor,
            derivative_scale: scale?,
        });
    }

    let tt = s.table("tensors", issues)?;
    let ts = Section::new(tt, "molecule.tensors", TENSOR_KEYS, issues);
    let mut m = |key: &str| ts.require(key, ts.matrix(key, issues), issues);
    let (a1, b1, a2, b2, ad, bd) = (
        m("alpha1"),
        m("beta1_imag"),
        m("alpha2"),
        m("beta2_imag"),
        m("alpha_derivative"),
        m("beta_derivative_imag"),
    );
    Some(MoleculeSpec::Tensors {
        common,
        rayleigh: [(a1?, b1?), (a2?, b2?)],
        alpha_derivative: ad?,
        beta_derivative_imag: bd?,
    })
}

fn read_states(s: &Section<'_>, key: &str, issues: &mut Vec<ConfigIssue>) -> Option<Vec<SosState>> {
    let v = s.value(key)?;
    let path = s.key(key);
    let Some(list) = v.as_array().filter(|a| !a.is_empty()) else {
        issues.push(issue(path, "expected a non-empty array of state tables"));
        return None;
    };
    let mut out = Vec::with_capacity(list.len());
    let mut ok = true;
    for (i, item) in list.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let Some(t) = item.as_table() else {
            issues.push(issue(p, "expected a table with gap, electric_dipole, magnetic_dipole_imag"));
            ok = false;
            continue;
        };
        let st = Section::new(t, &p, STATE_KEYS, issues);
        let gap = st.require("gap", st.positive("gap", issues), issues);
        let mu = st.require("electric_dipole", st.floats::<3>("electric_dipole", issues), issues);
        let m = st.require("magnetic_dipole_imag", st.floats::<3>("magnetic_dipole_imag", issues), issues);
        match (gap, mu, m) {
            (Some(gap), Some(electric_dipole), Some(magnetic_dipole_imag)) => out.push(SosState {
                gap,
                electric_dipole,
                magnetic_dipole_imag,
            }),
            _ => ok = false,
        }
    }
    ok.then_some(out)
}

fn read_geometry(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<GeometrySpec> {
    let s = Section::new(t, "geometry", GEOMETRY_KEYS, issues);
    let handedness = s.choice("handedness", &["left", "right"], parse_handedness, issues);
    let convention = if s.has("convention") {
        s.choice("convention", &["paper", "explicit"], parse_convention, issues)?
    } else {
        SinSquaredConvention::Paper
    };
    let theta_points = if s.has("theta_points") {
        s.integer("theta_points", 0, issues)? as usize
    } else {
        0
    };
    if theta_points == 1 {
        issues.push(issue("geometry.theta_points", "must be 0 (no table) or at least 2"));
        return None;
    }
    if s.has("handedness") && handedness.is_none() {
        return None;
    }
    Some(GeometrySpec {
        handedness,
        convention,
        theta_points,
    })
}

pub fn parse_handedness(s: &str) -> Option<Handedness> {
    match s {
        "left" => Some(Handedness::Left),
        "right" => Some(Handedness::Right),
        _ => None,
    }
}

fn parse_convention(s: &str) -> Option<SinSquaredConvention> {
    match s {
        "paper" => Some(SinSquaredConvention::Paper),
        "explicit" => Some(SinSquaredConvention::Explicit),
        _ => None,
    }
}

fn read_run(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<RunSpec> {
    let s = Section::new(t, "run", RUN_KEYS, issues);
    let mode = s.choice("mode", &Mode::NAMES, Mode::parse, issues);
    let pipeline = if s.has("pipeline") {
        s.choice("pipeline", &["paper", "quadrature", "both"], PipelineChoice::parse, issues)
    } else {
        Some(PipelineChoice::Both)
    };
    let seed = if s.has("seed") {
        s.integer("seed", 0, issues).map(|n| n as u64)
    } else {
        Some(DEFAULT_SEED)
    };
    let output_dir = s.string("output_dir", issues).map(str::to_string);
    let tol = if s.has("quadrature_tolerance") {
        s.positive("quadrature_tolerance", issues).and_then(|x| {
            if !(1e-15..=1e-3).contains(&x) {
                issues.push(issue("run.quadrature_tolerance", format!("must lie in [1e-15, 1e-3], got {x}")));
                None
            } else {
                Some(x)
            }
        })
    } else {
        Some(1e-10)
    };
    if s.has("mode") && mode.is_none() {
        return None;
    }
    Some(RunSpec {
        mode,
        pipeline: pipeline?,
        seed: seed?,
        output_dir,
        quadrature_tolerance: tol?,
    })
}

fn read_sweep(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<SweepSpec> {
    let s = Section::new(t, "sweep", SWEEP_KEYS, issues);
    if s.has("temperatures") {
        for key in ["t_min", "t_max", "points", "spacing"] {
            if s.has(key) {
                issues.push(issue(s.key(key), "not allowed together with sweep.temperatures"));
            }
        }
        let v = s.value("temperatures")?;
        let Some(list) = v.as_array().filter(|a| a.len() >= 2) else {
            issues.push(issue("sweep.temperatures", "expected an array of at least two temperatures"));
            return None;
        };
        let mut temps = Vec::with_capacity(list.len());
        for (i, x) in list.iter().enumerate() {
            match as_float(x) {
                Some(t) if t.is_finite() && t > 0.0 => temps.push(t),
                _ => issues.push(issue(format!("sweep.temperatures[{i}]"), "must be a positive number")),
            }
        }
        return (temps.len() == list.len()).then_some(SweepSpec { temperatures: temps });
    }
    let lo = s.require("t_min", s.positive("t_min", issues), issues);
    let hi = s.require("t_max", s.positive("t_max", issues), issues);
    let n = s.require("points", s.integer("points", 2, issues), issues);
    let log = match s.choice("spacing", &["linear", "log"], |x| match x {
        "linear" => Some(false),
        "log" => Some(true),
        _ => None,
    }, issues) {
        Some(b) => b,
        None if s.has("spacing") => return None,
        None => false,
    };
    let (lo, hi, n) = (lo?, hi?, n? as usize);
    if hi <= lo {
        issues.push(issue("sweep.t_max", "must exceed sweep.t_min"));
        return None;
    }
    let temperatures = (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if log {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect();
    Some(SweepSpec { temperatures })
}

fn read_evolve(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<EvolveSpec> {
    let s = Section::new(t, "evolve", EVOLVE_KEYS, issues);
    let d = EvolveSpec::default();
    let duration = match (s.has("t_final"), s.has("decay_times")) {
        (true, true) => {
            issues.push(issue("evolve", "give either t_final or decay_times, not both"));
            None
        }
        (true, false) => s.positive("t_final", issues).map(Duration::Seconds),
        (false, true) => s.positive("decay_times", issues).map(Duration::DecayTimes),
        (false, false) => Some(d.duration),
    };
    let step = match (s.has("dt"), s.has("steps")) {
        (true, true) => {
            issues.push(issue("evolve", "give either dt or steps, not both"));
            None
        }
        (true, false) => s.positive("dt", issues).map(StepSpec::Dt),
        (false, true) => s.integer("steps", 1, issues).map(|n| StepSpec::Steps(n as usize)),
        (false, false) => Some(d.step),
    };
    let initial_state = if s.has("initial_state") {
        s.choice("initial_state", &InitialState::NAMES, InitialState::parse, issues)
    } else {
        Some(d.initial_state)
    };
    let population_transfer = if s.has("population_transfer") {
        s.boolean("population_transfer", issues)
    } else {
        Some(d.population_transfer)
    };
    let frame = if s.has("frame") {
        s.choice("frame", &["rotating", "lab"], |x| match x {
            "rotating" => Some(EvolutionFrame::Rotating),
            "lab" => Some(EvolutionFrame::Lab),
            _ => None,
        }, issues)
    } else {
        Some(d.frame)
    };
    let record_every = if s.has("record_every") {
        s.integer("record_every", 1, issues).map(|n| n as usize)
    } else {
        Some(d.record_every)
    };
    Some(EvolveSpec {
        duration: duration?,
        step: step?,
        initial_state: initial_state?,
        population_transfer: population_transfer?,
        frame: frame?,
        record_every: record_every?,
    })
}

fn read_verify(t: &Table, issues: &mut Vec<ConfigIssue>) -> Option<VerifySpec> {
    let s = Section::new(t, "verify", VERIFY_KEYS, issues);
    let d = VerifySpec::default();
    let get = |key: &str, min: i64, default: usize, issues: &mut Vec<ConfigIssue>| {
        if s.has(key) {
            s.integer(key, min, issues).map(|n| n as usize)
        } else {
            Some(default)
        }
    };
    let pairs = get("mc_pairs", 1, d.mc_pairs, issues);
    let samples = get("mc_samples", chiral_decoherence::tensor::MIN_MC_SAMPLES as i64, d.mc_samples, issues);
    let workers = get("mc_workers", 1, d.mc_workers, issues);
    Some(VerifySpec {
        mc_pairs: pairs?,
        mc_samples: samples?,
        mc_workers: workers?,
    })
}
