//! Command-line front end for the optical response library.
//!
//! The binary reads a scenario file (TOML), evaluates the signal it
//! describes through `noneq-core`, and writes CSV tables plus optional SVG
//! plots.  Errors map to fixed exit codes: 2 for anything wrong with the
//! scenario or the invocation, 3 for numerical failures inside the library,
//! 4 for filesystem problems.

use std::fs;
use std::path::{Path, PathBuf};

pub mod output;
pub mod runner;
pub mod scenario;

use scenario::{check_axis, compile, linspace, Axis, CompiledScenario, SweepBlock};

#[derive(Debug)]
pub enum CliError {
    /// Scenario text or invocation is invalid (exit 2).
    Scenario(String),
    /// The numerical library reported a failure (exit 3).
    Compute(String),
    /// Reading input or writing output failed (exit 4).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Scenario(m) | CliError::Compute(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Scenarios shipped with the binary, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("vee-linear", include_str!("../scenarios/vee-linear.toml")),
    ("fwm-phase-matched", include_str!("../scenarios/fwm-phase-matched.toml")),
    ("thermal-doublet", include_str!("../scenarios/thermal-doublet.toml")),
    ("static-splitting", include_str!("../scenarios/static-splitting.toml")),
    ("dressed-quartet", include_str!("../scenarios/dressed-quartet.toml")),
    ("rabi-sweep", include_str!("../scenarios/rabi-sweep.toml")),
    ("carrier-sweep", include_str!("../scenarios/carrier-sweep.toml")),
    ("chirp-sweep", include_str!("../scenarios/chirp-sweep.toml")),
    ("coherence-control", include_str!("../scenarios/coherence-control.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Resolve the scenario argument: an existing file path wins, then a
/// bundled scenario name.
pub fn load_scenario_text(arg: &str) -> Result<(String, String), CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| arg.to_string());
        return Ok((name, text));
    }
    if let Some(text) = bundled(arg) {
        return Ok((arg.to_string(), text.to_string()));
    }
    Err(CliError::Io(format!(
        "{arg} is neither a scenario file nor a bundled scenario \
         (bundled: {})",
        BUNDLED
            .iter()
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(", ")
    )))
}

/// Worker count: explicit flag first, then `NONEQ_SPECTRA_THREADS`.
pub fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("NONEQ_SPECTRA_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&n| n > 0)
    })
}

fn with_pool<T>(
    threads: Option<usize>,
    work: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Compute(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// `run` subcommand: evaluate one scenario and write its tables.
pub fn execute_run(
    scenario_arg: &str,
    out_dir: &Path,
    svg: bool,
    threads: Option<usize>,
    dry_run: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let (name, text) = load_scenario_text(scenario_arg)?;
    let compiled = compile(&name, &text)?;
    if dry_run {
        return Ok(Vec::new());
    }
    let product = with_pool(resolve_threads(threads), || runner::run(&compiled))?;
    output::write_product(&product, out_dir, svg)
}

/// Merge command-line sweep flags with the scenario's own `[sweep]` block.
fn resolve_sweep(
    compiled: &CompiledScenario,
    axis: Option<Axis>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
) -> Result<(Axis, f64, f64, usize), CliError> {
    let block: Option<&SweepBlock> = compiled.sweep_block();
    let axis = axis
        .or(block.map(|b| b.axis))
        .ok_or_else(|| CliError::Scenario("no sweep axis: pass --axis or add a [sweep] block".into()))?;
    let missing = |what: &str| {
        CliError::Scenario(format!(
            "no sweep {what}: pass --{what} or add it to the [sweep] block"
        ))
    };
    let min = min.or(block.map(|b| b.min)).ok_or_else(|| missing("min"))?;
    let max = max.or(block.map(|b| b.max)).ok_or_else(|| missing("max"))?;
    let points = points
        .or(block.map(|b| b.points))
        .ok_or_else(|| missing("points"))?;
    if points == 0 {
        return Err(CliError::Scenario("sweep needs at least one point".into()));
    }
    if !(min.is_finite() && max.is_finite()) {
        return Err(CliError::Scenario("sweep bounds must be finite".into()));
    }
    if points > 1 && min >= max {
        return Err(CliError::Scenario("sweep needs min < max".into()));
    }
    Ok((axis, min, max, points))
}

/// `sweep` subcommand: rerun one scenario across an axis range.
#[allow(clippy::too_many_arguments)]
pub fn execute_sweep(
    scenario_arg: &str,
    axis: Option<&str>,
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    out_dir: &Path,
    svg: bool,
    threads: Option<usize>,
    dry_run: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let axis = match axis {
        Some(token) => Some(Axis::parse(token).ok_or_else(|| {
            CliError::Scenario(format!(
                "unknown sweep axis {token:?}; expected phi2, Omega or omega0"
            ))
        })?),
        None => None,
    };
    let (name, text) = load_scenario_text(scenario_arg)?;
    let compiled = compile(&name, &text)?;
    let (axis, min, max, points) = resolve_sweep(&compiled, axis, min, max, points)?;
    check_axis(compiled.kind(), axis)?;
    if dry_run {
        return Ok(Vec::new());
    }
    let values = linspace(min, max, points);
    let product = with_pool(resolve_threads(threads), || {
        runner::sweep(&compiled, axis, &values)
    })?;
    output::write_product(&product, out_dir, svg)
}
