//! Scenario files: a flat TOML description of one calculation.
//!
//! A scenario names the model (`kind`), the level system, the fields, the
//! frequency grid, and optionally a parameter sweep.  Parsing is strict:
//! unknown keys are rejected, labels must resolve, and every block required
//! by the chosen kind must be present.  The parsed form round-trips through
//! `canonical_toml` unchanged, which keeps scenario files diffable and lets
//! the output footer carry a stable content hash.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use noneq_core::{
    ChirpedGaussianPulse, CwField, DensityMatrix, DrivenSystem, FwmScenario, GaussianProbe,
    LevelSystem, ModeSign, Preparation,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Linear,
    Fwm,
    Driven,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Linear => "linear",
            Kind::Fwm => "fwm",
            Kind::Driven => "driven",
        }
    }
}

/// Sweep axes.  `phi2` varies the probe chirp (linear and driven scenarios),
/// `Omega` the drive amplitude and `omega0` the drive frequency (driven
/// scenarios only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "phi2")]
    Phi2,
    #[serde(rename = "Omega")]
    Omega,
    #[serde(rename = "omega0")]
    Omega0,
}

impl Axis {
    pub fn token(self) -> &'static str {
        match self {
            Axis::Phi2 => "phi2",
            Axis::Omega => "Omega",
            Axis::Omega0 => "omega0",
        }
    }

    pub fn parse(token: &str) -> Option<Axis> {
        match token {
            "phi2" => Some(Axis::Phi2),
            "Omega" => Some(Axis::Omega),
            "omega0" => Some(Axis::Omega0),
            _ => None,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: Kind,
    pub system: SystemBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeBlock>,
    pub grid: GridBlock,
    pub numerics: NumericsBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub labels: Vec<String>,
    /// Level energies in eV, ascending.
    pub energies: Vec<f64>,
    /// Thermal energy kB*T in eV; required when relaxation rates are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Probe dipole couplings between level pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dipole: Vec<DipoleEntry>,
    /// Downward population relaxation rates in eV (driven scenarios only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<RateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleEntry {
    /// Labels of the coupled pair, in either order.
    pub from: String,
    pub to: String,
    pub value: DipoleValue,
}

/// A dipole matrix element: a bare number, or `[re, im]` for a complex one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DipoleValue {
    Real(f64),
    Complex([f64; 2]),
}

impl DipoleValue {
    fn as_complex(self) -> C64 {
        match self {
            DipoleValue::Real(x) => C64::new(x, 0.0),
            DipoleValue::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEntry {
    /// Source level (the higher one; upward rates follow from temperature).
    pub from: String,
    pub to: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBlock {
    pub state: StateKind,
    /// Level holding the population for `state = "population"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    /// Level pair for `state = "maximally_coherent"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<[String; 2]>,
    /// Full density matrix for `state = "matrix"`, entries as `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    /// Turn-on convention for four-wave-mixing scenarios: `sudden` applies
    /// the state at the probe center, `stationary` lets it dephase from the
    /// distant past (diagonal states only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preparation: Option<PreparationKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Thermal,
    Population,
    MaximallyCoherent,
    Matrix,
    DrivenSteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreparationKind {
    Sudden,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    pub amplitude: f64,
    /// Gaussian envelope width T0 in femtoseconds (converted once at parse).
    pub width_fs: f64,
    /// Carrier frequency in eV.
    pub carrier: f64,
    /// Quadratic spectral phase phi'' in eV^-2.
    #[serde(default)]
    pub chirp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    /// Rabi amplitude in eV.
    pub rabi: f64,
    /// Drive carrier frequency in eV.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    pub amplitude: f64,
    pub frequency: f64,
    pub sign: SignKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignKind {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    pub center: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    /// Detection linewidth in eV; driven scenarios accept 0.
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Parse a scenario file, reporting TOML syntax errors with their location.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, CliError> {
    toml::from_str(text).map_err(|e| CliError::Scenario(format!("scenario parse error: {e}")))
}

/// Serialize the parsed form back to its canonical TOML text.
pub fn canonical_toml(file: &ScenarioFile) -> Result<String, CliError> {
    toml::to_string_pretty(file)
        .map_err(|e| CliError::Scenario(format!("cannot serialize scenario: {e}")))
}

/// First 16 hex digits of the SHA-256 of the scenario source text.
pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in &digest[..8] {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// A scenario compiled against the numerical library: validated blocks
/// turned into model objects, the grid expanded, and the source hashed.
#[derive(Debug, Clone)]
pub struct CompiledScenario {
    pub name: String,
    pub file: ScenarioFile,
    pub hash: String,
    pub grid: Vec<f64>,
    pub eta: f64,
    pub payload: Payload,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Linear {
        system: LevelSystem,
        rho0: DensityMatrix,
        pulse: ChirpedGaussianPulse,
    },
    Fwm {
        scenario: FwmScenario,
        preparation: Preparation,
    },
    Driven {
        driven: DrivenSystem,
        pulse: ChirpedGaussianPulse,
    },
}

impl CompiledScenario {
    pub fn kind(&self) -> Kind {
        self.file.kind
    }

    /// Default sweep range from the scenario's own `[sweep]` block.
    pub fn sweep_block(&self) -> Option<&SweepBlock> {
        self.file.sweep.as_ref()
    }
}

fn bad(message: impl Into<String>) -> CliError {
    CliError::Scenario(message.into())
}

fn level_index(system: &SystemBlock, label: &str, role: &str) -> Result<usize, CliError> {
    system
        .labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| bad(format!("{role} references unknown level {label:?}")))
}

fn build_system(block: &SystemBlock) -> Result<LevelSystem, CliError> {
    let n = block.labels.len();
    let mut dipole = DMatrix::zeros(n, n);
    for entry in &block.dipole {
        let i = level_index(block, &entry.from, "dipole entry")?;
        let j = level_index(block, &entry.to, "dipole entry")?;
        if i == j {
            return Err(bad(format!(
                "dipole entry couples level {:?} to itself",
                entry.from
            )));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if dipole[(lo, hi)] != C64::new(0.0, 0.0) {
            return Err(bad(format!(
                "duplicate dipole entry for pair {:?}-{:?}",
                block.labels[lo], block.labels[hi]
            )));
        }
        dipole[(lo, hi)] = entry.value.as_complex();
    }
    let mut system = LevelSystem::new(block.labels.clone(), block.energies.clone(), dipole)
        .map_err(|e| bad(format!("invalid system: {e}")))?;
    if let Some(kbt) = block.temperature {
        system = system
            .with_temperature(kbt)
            .map_err(|e| bad(format!("invalid temperature: {e}")))?;
    }
    Ok(system)
}

fn build_state(
    system: &LevelSystem,
    block: &SystemBlock,
    initial: &InitialBlock,
) -> Result<DensityMatrix, CliError> {
    let state = match initial.state {
        StateKind::Thermal => system
            .thermal_state()
            .map_err(|e| bad(format!("thermal state: {e}"))),
        StateKind::Population => {
            let label = initial
                .level
                .as_ref()
                .ok_or_else(|| bad("population state needs a `level` entry"))?;
            let i = level_index(block, label, "initial state")?;
            system
                .population_state(i)
                .map_err(|e| bad(format!("population state: {e}")))
        }
        StateKind::MaximallyCoherent => {
            let pair = initial
                .levels
                .as_ref()
                .ok_or_else(|| bad("maximally coherent state needs a `levels` pair"))?;
            let i = level_index(block, &pair[0], "initial state")?;
            let j = level_index(block, &pair[1], "initial state")?;
            system
                .maximally_coherent_state(i, j)
                .map_err(|e| bad(format!("coherent state: {e}")))
        }
        StateKind::Matrix => {
            let rows = initial
                .matrix
                .as_ref()
                .ok_or_else(|| bad("explicit state needs a `matrix` entry"))?;
            let n = system.len();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(bad(format!("state matrix must be {n}x{n}")));
            }
            let mut m = DMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, &[re, im]) in row.iter().enumerate() {
                    m[(i, j)] = C64::new(re, im);
                }
            }
            DensityMatrix::new(m).map_err(|e| bad(format!("invalid state matrix: {e}")))
        }
        StateKind::DrivenSteadyState => Err(bad(
            "the driven steady state is implicit in driven scenarios; \
             it cannot seed a linear or four-wave-mixing calculation",
        )),
    }?;
    Ok(state)
}

fn build_pulse(block: &PulseBlock) -> Result<ChirpedGaussianPulse, CliError> {
    ChirpedGaussianPulse::from_fs_width(block.amplitude, block.width_fs, block.carrier, block.chirp)
        .map_err(|e| bad(format!("invalid pulse: {e}")))
}

fn expand_grid(block: &GridBlock) -> Result<Vec<f64>, CliError> {
    if block.points == 0 {
        return Err(bad("grid needs at least one point"));
    }
    if !(block.min.is_finite() && block.max.is_finite()) {
        return Err(bad("grid bounds must be finite"));
    }
    if block.points == 1 {
        if block.min != block.max {
            return Err(bad("a one-point grid needs min == max"));
        }
        return Ok(vec![block.min]);
    }
    if block.min >= block.max {
        return Err(bad("grid needs min < max"));
    }
    let n = block.points;
    let step = (block.max - block.min) / (n - 1) as f64;
    Ok((0..n).map(|k| block.min + step * k as f64).collect())
}

pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let step = (max - min) / (points - 1) as f64;
    (0..points).map(|k| min + step * k as f64).collect()
}

fn reject_block<T>(block: &Option<T>, name: &str, kind: Kind) -> Result<(), CliError> {
    if block.is_some() {
        return Err(bad(format!(
            "a {} scenario does not take a [{name}] block",
            kind.as_str()
        )));
    }
    Ok(())
}

fn driven_rates(block: &SystemBlock) -> Result<(f64, f64, f64), CliError> {
    let mut gamma = [[None::<f64>; 3]; 3];
    for entry in &block.rates {
        let from = level_index(block, &entry.from, "rate entry")?;
        let to = level_index(block, &entry.to, "rate entry")?;
        if from <= to {
            return Err(bad(format!(
                "rate {:?} -> {:?} is not downward; upward rates follow from the temperature",
                entry.from, entry.to
            )));
        }
        if gamma[from][to].replace(entry.value).is_some() {
            return Err(bad(format!(
                "duplicate rate entry {:?} -> {:?}",
                entry.from, entry.to
            )));
        }
    }
    Ok((
        gamma[1][0].unwrap_or(0.0),
        gamma[2][0].unwrap_or(0.0),
        gamma[2][1].unwrap_or(0.0),
    ))
}

fn check_sweep(file: &ScenarioFile) -> Result<(), CliError> {
    let Some(sweep) = &file.sweep else {
        return Ok(());
    };
    check_axis(file.kind, sweep.axis)?;
    if sweep.points == 0 {
        return Err(bad("sweep needs at least one point"));
    }
    if !(sweep.min.is_finite() && sweep.max.is_finite()) {
        return Err(bad("sweep bounds must be finite"));
    }
    if sweep.points > 1 && sweep.min >= sweep.max {
        return Err(bad("sweep needs min < max"));
    }
    Ok(())
}

/// Which axes make sense for which scenario kind.
pub fn check_axis(kind: Kind, axis: Axis) -> Result<(), CliError> {
    let ok = match axis {
        Axis::Phi2 => matches!(kind, Kind::Linear | Kind::Driven),
        Axis::Omega | Axis::Omega0 => matches!(kind, Kind::Driven),
    };
    if ok {
        Ok(())
    } else {
        Err(bad(format!(
            "axis {} does not apply to a {} scenario",
            axis.token(),
            kind.as_str()
        )))
    }
}

/// Validate a parsed scenario and build the model objects it describes.
pub fn compile(name: &str, text: &str) -> Result<CompiledScenario, CliError> {
    let file = parse_scenario(text)?;
    let grid = expand_grid(&file.grid)?;
    check_sweep(&file)?;
    let payload = build_payload(&file)?;
    Ok(CompiledScenario {
        name: name.to_string(),
        hash: content_hash(text),
        grid,
        eta: file.numerics.eta,
        file,
        payload,
    })
}

/// Turn the validated blocks into model objects.  Sweeps call this once per
/// axis value on a mutated copy of the file, so a driven scenario rebuilds
/// its generator and stationary state at every point.
pub fn build_payload(file: &ScenarioFile) -> Result<Payload, CliError> {
    let eta = file.numerics.eta;
    let payload = match file.kind {
        Kind::Linear => {
            reject_block(&file.drive, "drive", file.kind)?;
            reject_block(&file.modes, "modes", file.kind)?;
            reject_block(&file.probe, "probe", file.kind)?;
            if !file.system.rates.is_empty() {
                return Err(bad("relaxation rates apply to driven scenarios only"));
            }
            let system = build_system(&file.system)?;
            let initial = file
                .initial
                .as_ref()
                .ok_or_else(|| bad("a linear scenario needs an [initial] block"))?;
            if initial.preparation.is_some() {
                return Err(bad(
                    "preparation applies to four-wave-mixing scenarios only",
                ));
            }
            let rho0 = build_state(&system, &file.system, initial)?;
            let pulse_block = file
                .pulse
                .as_ref()
                .ok_or_else(|| bad("a linear scenario needs a [pulse] block"))?;
            let pulse = build_pulse(pulse_block)?;
            Payload::Linear {
                system,
                rho0,
                pulse,
            }
        }
        Kind::Fwm => {
            reject_block(&file.drive, "drive", file.kind)?;
            reject_block(&file.pulse, "pulse", file.kind)?;
            if !file.system.rates.is_empty() {
                return Err(bad("relaxation rates apply to driven scenarios only"));
            }
            let system = build_system(&file.system)?;
            let initial = file
                .initial
                .as_ref()
                .ok_or_else(|| bad("a four-wave-mixing scenario needs an [initial] block"))?;
            let rho0 = build_state(&system, &file.system, initial)?;
            let preparation = match initial.preparation.unwrap_or(PreparationKind::Sudden) {
                PreparationKind::Sudden => Preparation::AtPulseCenter,
                PreparationKind::Stationary => Preparation::DistantPast,
            };
            let mode_blocks = file
                .modes
                .as_ref()
                .ok_or_else(|| bad("a four-wave-mixing scenario needs a `modes` list"))?;
            if mode_blocks.len() != 3 {
                return Err(bad(format!(
                    "four-wave mixing takes exactly three modes, got {}",
                    mode_blocks.len()
                )));
            }
            let mut modes = Vec::with_capacity(3);
            for m in mode_blocks {
                let sign = match m.sign {
                    SignKind::Plus => ModeSign::Plus,
                    SignKind::Minus => ModeSign::Minus,
                };
                modes.push(
                    CwField::new(C64::new(m.amplitude, 0.0), m.frequency, sign)
                        .map_err(|e| bad(format!("invalid mode: {e}")))?,
                );
            }
            let modes: [CwField; 3] = [modes[0], modes[1], modes[2]];
            let probe_block = file
                .probe
                .as_ref()
                .ok_or_else(|| bad("a four-wave-mixing scenario needs a [probe] block"))?;
            let probe = GaussianProbe::new(probe_block.center, probe_block.sigma)
                .map_err(|e| bad(format!("invalid probe: {e}")))?;
            let scenario = FwmScenario::new(system, rho0, modes, probe, eta)
                .map_err(|e| bad(format!("invalid four-wave-mixing setup: {e}")))?;
            Payload::Fwm {
                scenario,
                preparation,
            }
        }
        Kind::Driven => {
            reject_block(&file.modes, "modes", file.kind)?;
            reject_block(&file.probe, "probe", file.kind)?;
            if let Some(initial) = &file.initial {
                if initial.state != StateKind::DrivenSteadyState {
                    return Err(bad(
                        "driven scenarios probe the driven steady state; \
                         set `state = \"driven_steady_state\"` or drop the [initial] block",
                    ));
                }
            }
            let system = build_system(&file.system)?;
            let drive = file
                .drive
                .as_ref()
                .ok_or_else(|| bad("a driven scenario needs a [drive] block"))?;
            let (gamma_ba, gamma_ca, gamma_cb) = driven_rates(&file.system)?;
            let driven = DrivenSystem::new(
                system,
                drive.rabi,
                drive.frequency,
                gamma_ba,
                gamma_ca,
                gamma_cb,
            )
            .map_err(|e| bad(format!("invalid driven system: {e}")))?;
            let pulse_block = file
                .pulse
                .as_ref()
                .ok_or_else(|| bad("a driven scenario needs a [pulse] block"))?;
            let pulse = build_pulse(pulse_block)?;
            Payload::Driven { driven, pulse }
        }
    };
    Ok(payload)
}
