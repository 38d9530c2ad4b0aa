//! Shared fixtures for the criterion benchmarks.

use nalgebra::DMatrix;
use noneq_core::{
    C64, ChirpedGaussianPulse, CwField, DensityMatrix, DrivenSystem, FwmScenario, GaussianProbe,
    LevelSystem, ModeSign,
};

pub fn probe_dipole() -> DMatrix<C64> {
    let mut mu = DMatrix::zeros(3, 3);
    mu[(0, 2)] = C64::new(1.0, 0.0);
    mu[(1, 2)] = C64::new(1.0, 0.0);
    mu
}

/// Vee system with a coherent lower pair, probed by a broadband pulse.
pub fn vee() -> (LevelSystem, DensityMatrix, ChirpedGaussianPulse) {
    let system = LevelSystem::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![0.0, 0.1, 0.8],
        probe_dipole(),
    )
    .unwrap();
    let rho0 = system.maximally_coherent_state(0, 1).unwrap();
    let pulse = ChirpedGaussianPulse::from_fs_width(1.0, 6.6, 0.5, 10.0).unwrap();
    (system, rho0, pulse)
}

/// Driven pair under a resonant coupling field, with thermal rates.
pub fn driven_pair() -> DrivenSystem {
    let system = LevelSystem::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![0.0, 0.01, 1.0],
        probe_dipole(),
    )
    .unwrap()
    .with_temperature(0.0259)
    .unwrap();
    DrivenSystem::new(system, 0.05, 0.01, 0.004, 1e-4, 2e-4).unwrap()
}

/// Three-mode mixing fixture with a phase-matched combination at 1.35 eV.
pub fn mixing() -> FwmScenario {
    let system = LevelSystem::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![0.0, 0.4, 1.2],
        probe_dipole(),
    )
    .unwrap();
    let rho0 = system.maximally_coherent_state(0, 1).unwrap();
    let modes = [
        CwField::new(C64::new(1.0, 0.0), 1.1, ModeSign::Plus).unwrap(),
        CwField::new(C64::new(1.0, 0.0), 0.75, ModeSign::Minus).unwrap(),
        CwField::new(C64::new(1.0, 0.0), 1.0, ModeSign::Plus).unwrap(),
    ];
    FwmScenario::new(system, rho0, modes, GaussianProbe::new(0.5, 10.0).unwrap(), 0.002).unwrap()
}

pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + step * k as f64).collect()
}
