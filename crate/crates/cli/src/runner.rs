//! Evaluate a compiled scenario: single runs and parameter sweeps.
//!
//! A run produces one table per signal component (total, population,
//! coherence) over the frequency grid.  A sweep reruns the scenario for each
//! value of one axis and stacks the traces into axis-major tables, one file
//! per component.  Sweep points are evaluated in parallel; results are
//! collected in axis order before anything is written, so the output does
//! not depend on the worker count.

use rayon::prelude::*;

use noneq_core::{chi3_pathway_fwm_prepared, driven_signal, linear_signal};

use crate::scenario::{build_payload, Axis, CompiledScenario, Kind, Payload, ScenarioFile};
use crate::CliError;

pub const COMPONENTS: [&str; 3] = ["total", "population", "coherence"];

/// One output table, ready for the CSV writer.
#[derive(Debug, Clone)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Constant trailing `component` column, when present.
    pub component: Option<&'static str>,
}

/// Plot data for the optional SVG rendering.
#[derive(Debug, Clone)]
pub enum Plot {
    Lines {
        x: Vec<f64>,
        series: Vec<(&'static str, Vec<f64>)>,
    },
    Heatmap {
        axis_label: String,
        x: Vec<f64>,
        y: Vec<f64>,
        /// Total-component values, `values[yi][xi]`.
        values: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone)]
pub struct RunProduct {
    pub name: String,
    pub hash: String,
    pub tables: Vec<Table>,
    pub plot: Plot,
}

/// The three signal components of one evaluation.
#[derive(Debug, Clone)]
pub struct Components {
    pub total: Vec<f64>,
    pub population: Vec<f64>,
    pub coherence: Vec<f64>,
}

impl Components {
    fn get(&self, tag: &str) -> &[f64] {
        match tag {
            "total" => &self.total,
            "population" => &self.population,
            _ => &self.coherence,
        }
    }

    fn check_finite(&self) -> Result<(), CliError> {
        for tag in COMPONENTS {
            if self.get(tag).iter().any(|v| !v.is_finite()) {
                return Err(CliError::Compute(format!(
                    "{tag} signal contains non-finite values"
                )));
            }
        }
        Ok(())
    }
}

/// Evaluate the scenario's signal on its grid.
pub fn evaluate(payload: &Payload, grid: &[f64], eta: f64) -> Result<Components, CliError> {
    let compute = |e: noneq_core::Error| CliError::Compute(e.to_string());
    let components = match payload {
        Payload::Linear {
            system,
            rho0,
            pulse,
        } => {
            let signal = linear_signal(system, rho0, pulse, grid, eta).map_err(compute)?;
            Components {
                total: signal.total.values().to_vec(),
                population: signal.population.values().to_vec(),
                coherence: signal.coherence.values().to_vec(),
            }
        }
        Payload::Fwm {
            scenario,
            preparation,
        } => {
            let signal = chi3_pathway_fwm_prepared(scenario, grid, *preparation).map_err(compute)?;
            Components {
                total: signal.total.values().to_vec(),
                population: signal.population.values().to_vec(),
                coherence: signal.coherence.values().to_vec(),
            }
        }
        Payload::Driven { driven, pulse } => {
            let signal = driven_signal(driven, pulse, grid, eta).map_err(compute)?;
            Components {
                total: signal.total.values().to_vec(),
                population: signal.population.values().to_vec(),
                coherence: signal.coherence.values().to_vec(),
            }
        }
    };
    components.check_finite()?;
    Ok(components)
}

/// Single run: one CSV table per component plus a line plot.
pub fn run(compiled: &CompiledScenario) -> Result<RunProduct, CliError> {
    let components = evaluate(&compiled.payload, &compiled.grid, compiled.eta)?;
    let mut tables = Vec::with_capacity(3);
    let mut series = Vec::with_capacity(3);
    for tag in COMPONENTS {
        let values = components.get(tag);
        tables.push(Table {
            file_name: format!("{}.{tag}.csv", compiled.name),
            header: vec![
                "omega_eV".to_string(),
                "signal".to_string(),
                "component".to_string(),
            ],
            rows: compiled
                .grid
                .iter()
                .zip(values)
                .map(|(&w, &v)| vec![w, v])
                .collect(),
            component: Some(tag),
        });
        series.push((tag, values.to_vec()));
    }
    Ok(RunProduct {
        name: compiled.name.clone(),
        hash: compiled.hash.clone(),
        tables,
        plot: Plot::Lines {
            x: compiled.grid.clone(),
            series,
        },
    })
}

/// Produce the scenario file for one sweep point.
fn apply_axis(file: &ScenarioFile, axis: Axis, value: f64) -> Result<ScenarioFile, CliError> {
    let mut point = file.clone();
    match axis {
        Axis::Phi2 => {
            let pulse = point.pulse.as_mut().ok_or_else(|| {
                CliError::Scenario("chirp sweep needs a [pulse] block".to_string())
            })?;
            pulse.chirp = value;
        }
        Axis::Omega => {
            let drive = point.drive.as_mut().ok_or_else(|| {
                CliError::Scenario("drive sweep needs a [drive] block".to_string())
            })?;
            drive.rabi = value;
        }
        Axis::Omega0 => {
            let drive = point.drive.as_mut().ok_or_else(|| {
                CliError::Scenario("drive sweep needs a [drive] block".to_string())
            })?;
            drive.frequency = value;
        }
    }
    Ok(point)
}

/// Sweep one axis: rerun the scenario per value, stack axis-major tables.
pub fn sweep(
    compiled: &CompiledScenario,
    axis: Axis,
    values: &[f64],
) -> Result<RunProduct, CliError> {
    crate::scenario::check_axis(compiled.kind(), axis)?;
    if values.is_empty() {
        return Err(CliError::Scenario("sweep needs at least one point".into()));
    }
    if matches!(compiled.kind(), Kind::Fwm) {
        // check_axis already rejects every axis for this kind; keep the
        // match explicit so a future axis cannot slip through silently.
        unreachable!("no sweep axis applies to four-wave mixing");
    }

    let traces: Vec<Components> = values
        .par_iter()
        .map(|&v| {
            let point = apply_axis(&compiled.file, axis, v)?;
            let payload = build_payload(&point)?;
            evaluate(&payload, &compiled.grid, compiled.eta)
        })
        .collect::<Result<_, _>>()?;

    let grid = &compiled.grid;
    let mut tables = Vec::with_capacity(3);
    for tag in COMPONENTS {
        let mut rows = Vec::with_capacity(values.len() * grid.len());
        for (vi, &v) in values.iter().enumerate() {
            for (wi, &w) in grid.iter().enumerate() {
                rows.push(vec![w, v, traces[vi].get(tag)[wi]]);
            }
        }
        tables.push(Table {
            file_name: format!("{}.{tag}.csv", compiled.name),
            header: vec![
                "omega_eV".to_string(),
                axis.token().to_string(),
                "signal".to_string(),
            ],
            rows,
            component: None,
        });
    }
    let heat = traces.iter().map(|c| c.total.clone()).collect();
    Ok(RunProduct {
        name: compiled.name.clone(),
        hash: compiled.hash.clone(),
        tables,
        plot: Plot::Heatmap {
            axis_label: axis.token().to_string(),
            x: grid.clone(),
            y: values.to_vec(),
            values: heat,
        },
    })
}
