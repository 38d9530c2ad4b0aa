//! Electric-field models: linearly chirped Gaussian pulse and CW modes.
//!
//! The pulse is defined by its spectral amplitude and quadratic spectral
//! phase `phi(omega) = phi0 + phi''(omega - carrier)^2 / 2`. Three views of
//! the same field are provided: the spectral envelope, the temporal profile
//! (a complex Gaussian), and the one-sided spectrum transformed over
//! `t >= 0` only. The one-sided form is what couples the spectral phase
//! into signals from nonequilibrium preparations; it collapses to a single
//! Faddeeva evaluation, which keeps it cancellation-free at any chirp.
//!
//! A constant spectral phase phi0 would multiply every signal by unity
//! (it cancels between the conjugated detection field and the excitation
//! field), so it is not carried.

use std::f64::consts::PI;

use crate::{specfun, Error, Result, C64};

/// Linearly chirped Gaussian pulse.
///
/// `width` is the transform-limited width parameter T0 in 1/eV (the field
/// temporal width is T0/sqrt(2) at zero chirp, the spectral width
/// sqrt(2)/T0). `chirp` is the quadratic spectral phase phi'' in 1/eV^2.
#[derive(Debug, Clone, Copy)]
pub struct ChirpedGaussianPulse {
    amplitude: f64,
    width: f64,
    carrier: f64,
    chirp: f64,
}

impl ChirpedGaussianPulse {
    /// Build a pulse from amplitude, width T0 (1/eV), carrier (eV), and
    /// chirp (1/eV^2). Fails unless T0 > 0 and all parameters are finite.
    pub fn new(amplitude: f64, width: f64, carrier: f64, chirp: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::validation("pulse width T0 must be positive"));
        }
        if !(amplitude.is_finite() && carrier.is_finite() && chirp.is_finite()) {
            return Err(Error::validation("pulse parameters must be finite"));
        }
        Ok(Self {
            amplitude,
            width,
            carrier,
            chirp,
        })
    }

    /// Same as [`Self::new`] with the width given in femtoseconds.
    pub fn from_fs_width(amplitude: f64, width_fs: f64, carrier: f64, chirp: f64) -> Result<Self> {
        Self::new(amplitude, crate::units::fs_to_inv_ev(width_fs), carrier, chirp)
    }

    /// Field amplitude E0 (arbitrary units).
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Width parameter T0 in 1/eV.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Carrier frequency in eV.
    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    /// Quadratic spectral phase phi'' in 1/eV^2.
    pub fn chirp(&self) -> f64 {
        self.chirp
    }

    /// Complex Gaussian parameter: 1/Gamma = T0^2 - 2i phi''. Its real
    /// part is positive for any finite chirp, so the principal square
    /// root below never crosses a branch cut.
    pub fn gamma(&self) -> C64 {
        1.0 / C64::new(self.width * self.width, -2.0 * self.chirp)
    }

    /// Stretched duration T_p = T0 sqrt(1 + (2 phi''/T0^2)^2); the field
    /// magnitude is exp(-t^2/T_p^2).
    pub fn duration(&self) -> f64 {
        let q = 2.0 * self.chirp / (self.width * self.width);
        self.width * (1.0 + q * q).sqrt()
    }

    /// Linear sweep rate of the instantaneous frequency,
    /// `omega(t) = carrier + 2 a t` with `a = 2 phi''/(T0^4 + (2 phi'')^2)`.
    pub fn frequency_sweep_rate(&self) -> f64 {
        let t2 = self.width * self.width;
        let p2 = 2.0 * self.chirp;
        p2 / (t2 * t2 + p2 * p2)
    }

    /// Full spectral envelope
    /// `(sqrt(pi) E0 T0 / 2) e^{-d^2 T0^2/4} e^{i phi'' d^2/2}`
    /// with `d = omega - carrier`.
    ///
    /// The prefactor is fixed by the temporal profile below (its exact
    /// Fourier transform); the magnitude is independent of the chirp.
    pub fn spectral_envelope(&self, omega: f64) -> C64 {
        let d = omega - self.carrier;
        let d2 = d * d;
        let amp = 0.5 * PI.sqrt() * self.amplitude * self.width;
        let arg = C64::new(
            -d2 * self.width * self.width / 4.0,
            0.5 * self.chirp * d2,
        );
        amp * arg.exp()
    }

    /// Temporal profile
    /// `(E0/2) sqrt(Gamma/Gamma0) e^{-Gamma t^2} e^{-i carrier t}`,
    /// centered at t = 0.
    pub fn temporal_envelope(&self, t: f64) -> C64 {
        let g = self.gamma();
        let root = (g * self.width * self.width).sqrt();
        let arg = -g * t * t + C64::new(0.0, -self.carrier * t);
        0.5 * self.amplitude * root * arg.exp()
    }

    /// One-sided spectrum `int_0^inf dt E(t) e^{i omega t}`, in closed form
    /// `(sqrt(pi) E0 T0/4) e^{-d^2 T0^2/4} e^{i phi'' d^2/2}
    ///  (1 + i Erfi[d/(2 sqrt(Gamma))])`.
    ///
    /// Evaluated as `(sqrt(pi) E0 T0/4) w(z)` with `z = d/(2 sqrt(Gamma))`:
    /// the Gaussian-phase prefactor equals `e^{-z^2}` exactly, so the
    /// product with `(1 + i Erfi[z])` is one Faddeeva value and stays
    /// bounded even where either factor alone would overflow.
    pub fn one_sided_spectrum(&self, omega: f64) -> Result<C64> {
        let d = omega - self.carrier;
        let z = C64::new(d, 0.0) / (2.0 * self.gamma().sqrt());
        let w = specfun::faddeeva(z)?;
        Ok(0.25 * PI.sqrt() * self.amplitude * self.width * w)
    }
}

/// Monochromatic field mode with a phase-matching sign.
///
/// A `Plus` mode enters signals as its amplitude (positive-frequency
/// component `E e^{-i omega t}`); a `Minus` mode enters conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSign {
    Plus,
    Minus,
}

/// Continuous-wave mode: complex amplitude, frequency, sign label.
#[derive(Debug, Clone, Copy)]
pub struct CwField {
    amplitude: C64,
    frequency: f64,
    sign: ModeSign,
}

impl CwField {
    /// Build a CW mode. Fails unless the frequency is positive and finite.
    pub fn new(amplitude: C64, frequency: f64, sign: ModeSign) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::validation("CW frequency must be positive"));
        }
        if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
            return Err(Error::validation("CW amplitude must be finite"));
        }
        Ok(Self {
            amplitude,
            frequency,
            sign,
        })
    }

    /// Complex amplitude.
    pub fn amplitude(&self) -> C64 {
        self.amplitude
    }

    /// Mode frequency in eV.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Phase-matching sign.
    pub fn sign(&self) -> ModeSign {
        self.sign
    }

    /// The (amplitude, signed frequency) pair the mode contributes to a
    /// field product: `(E, +omega)` for a `Plus` mode, `(E*, -omega)` for
    /// a `Minus` mode. The full spectrum is `2 pi` times a delta at the
    /// signed frequency; downstream integrals collapse it analytically.
    pub fn signed_component(&self) -> (C64, f64) {
        match self.sign {
            ModeSign::Plus => (self.amplitude, self.frequency),
            ModeSign::Minus => (self.amplitude.conj(), -self.frequency),
        }
    }

    /// One-sided spectrum of the mode, `int_0^inf dt E e^{-i nu_m t}
    /// e^{i nu t} = i E / (nu - nu_m + i eta)` with the signed frequency
    /// and amplitude of [`Self::signed_component`].
    pub fn one_sided_spectrum(&self, nu: f64, eta: f64) -> C64 {
        let (amp, nu_m) = self.signed_component();
        C64::new(0.0, 1.0) * amp / C64::new(nu - nu_m, eta)
    }
}
