//! Unit conversions at the library boundary.
//!
//! Internally `hbar` = 1: energies and frequencies are in eV and times in
//! 1/eV. Callers working in femtoseconds convert on the way in and out.

/// Reduced Planck constant in eV fs (CODATA).
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Convert a time in femtoseconds to internal units (1/eV).
pub fn fs_to_inv_ev(t_fs: f64) -> f64 {
    t_fs / HBAR_EV_FS
}

/// Convert a time in internal units (1/eV) to femtoseconds.
pub fn inv_ev_to_fs(t: f64) -> f64 {
    t * HBAR_EV_FS
}
