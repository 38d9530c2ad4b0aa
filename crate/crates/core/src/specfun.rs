//! Faddeeva function `w(z)` and the imaginary error function `Erfi(z)`.
//!
//! The one-sided spectrum of a chirped pulse reduces to a single Faddeeva
//! evaluation, so everything here funnels through `w(z) = e^{-z^2}
//! erfc(-iz)`. Near the origin `w` is computed from the Maclaurin series of
//! `erf`; farther out a rational approximation on the upper half-plane is
//! used, with the reflection `w(-z) = 2 e^{-z^2} - w(z)` covering the lower
//! half-plane. Accuracy is better than 1e-10 relative for `|z| <= 10`, the
//! domain the pulse arguments occupy for all bundled scenarios.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use once_cell::sync::Lazy;

use crate::{Error, Result, C64};

/// Radius of the Maclaurin-series region for `w`.
const SERIES_RADIUS: f64 = 2.0;

/// Degree of the rational approximation outside the series region.
const RATIONAL_N: usize = 64;

// Expansion coefficients for the rational approximation of w(z) on the
// upper half-plane. Based on Weideman, SIAM J. Numer. Anal. 31 (1994),
// 1497-1518: the coefficients are the discrete Fourier transform of
// exp(-t^2)(L^2+t^2) sampled at t = L tan(theta/2).
static WEIDEMAN: Lazy<(f64, [f64; RATIONAL_N])> = Lazy::new(|| {
    let n = RATIONAL_N;
    let m = 2 * n;
    let m2 = 4 * n;
    let l = (n as f64 / f64::sqrt(2.0)).sqrt();
    // Samples g[j] = f(k_j) in DFT order: k = j for j < m, else j - m2,
    // with f(-m) = 0 closing the circle at theta = -pi.
    let mut g = vec![0.0f64; m2];
    for (j, slot) in g.iter_mut().enumerate() {
        let k = if j < m { j as i64 } else { j as i64 - m2 as i64 };
        if k == -(m as i64) {
            continue;
        }
        let theta = k as f64 * PI / m as f64;
        let t = l * (0.5 * theta).tan();
        *slot = (-t * t).exp() * (l * l + t * t);
    }
    let mut coef = [0.0f64; RATIONAL_N];
    for (mm, c) in coef.iter_mut().enumerate() {
        let freq = (mm + 1) as f64;
        let mut acc = 0.0;
        for (j, &gj) in g.iter().enumerate() {
            acc += gj * (2.0 * PI * j as f64 * freq / m2 as f64).cos();
        }
        *c = acc / m2 as f64;
    }
    (l, coef)
});

fn check_argument(z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::validation("non-finite complex argument"));
    }
    if z.norm() >= 1e8 {
        return Err(Error::validation(format!(
            "|z| = {:.3e} outside supported domain |z| < 1e8",
            z.norm()
        )));
    }
    Ok(())
}

/// Maclaurin series for erf(z); converges for any finite argument, used
/// only inside |z| <= SERIES_RADIUS where ~30 terms reach machine epsilon.
fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..200 {
        term *= -z2 / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.norm() <= 1e-18 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

fn w_series(z: C64) -> C64 {
    // w(z) = e^{-z^2} (1 - erf(-iz)); for real z the erf term is purely
    // imaginary, so Re w(x) = e^{-x^2} exactly.
    let miz = C64::new(z.im, -z.re);
    (-z * z).exp() * (C64::new(1.0, 0.0) - erf_series(miz))
}

fn w_rational(z: C64) -> C64 {
    let (l, coef) = &*WEIDEMAN;
    let lm = C64::new(*l, 0.0);
    let iz = C64::new(-z.im, z.re);
    let denom = lm - iz;
    let big_z = (lm + iz) / denom;
    let mut p = C64::new(coef[RATIONAL_N - 1], 0.0);
    for &c in coef[..RATIONAL_N - 1].iter().rev() {
        p = p * big_z + c;
    }
    2.0 * p / (denom * denom) + (1.0 / PI.sqrt()) / denom
}

fn w_upper(z: C64) -> C64 {
    if z.norm_sqr() <= SERIES_RADIUS * SERIES_RADIUS {
        w_series(z)
    } else {
        w_rational(z)
    }
}

/// Faddeeva function `w(z) = e^{-z^2} erfc(-iz)`.
///
/// Fails on non-finite input or `|z| >= 1e8`. Relative accuracy is 1e-10
/// or better for `|z| <= 10` (away from the isolated zeros of `w` in the
/// lower half-plane, where no finite-precision evaluation can hold a
/// relative target).
pub fn faddeeva(z: C64) -> Result<C64> {
    check_argument(z)?;
    if z.im < 0.0 {
        // Reflection w(z) = 2 e^{-z^2} - w(-z); e^{-z^2} can overflow once
        // |Im z| is large, which the |z| precondition keeps in range for
        // every caller in this crate.
        Ok(2.0 * (-z * z).exp() - w_upper(-z))
    } else {
        Ok(w_upper(z))
    }
}

/// Imaginary error function `Erfi(z) = -i erf(iz)`.
///
/// Exactly odd, exactly real on the real axis, and conjugate-symmetric.
/// Fails on non-finite input or `|z| >= 1e8`.
pub fn erfi(z: C64) -> Result<C64> {
    check_argument(z)?;
    if z.im == 0.0 {
        let x = z.re;
        let ax = x.abs();
        let v = if ax <= 3.0 {
            // All series terms share one sign for real arguments, so the
            // sum carries no cancellation.
            erfi_series_real(x)
        } else if ax >= 26.7 {
            // e^{x^2} overflows f64; Erfi genuinely exceeds the f64 range.
            f64::INFINITY * x.signum()
        } else {
            (x * x).exp() * w_upper(C64::new(ax, 0.0)).im * x.signum()
        };
        return Ok(C64::new(v, 0.0));
    }
    if z.norm_sqr() <= 1.0 {
        // Direct series: the Faddeeva route cancels near the origin.
        let s = erf_series(C64::new(-z.im, z.re));
        return Ok(C64::new(s.im, -s.re));
    }
    if z.im > 0.0 {
        // Erfi(z) = i (1 - e^{z^2} w(z)) on the upper half-plane.
        let g = C64::new(1.0, 0.0) - (z * z).exp() * w_upper(z);
        Ok(C64::new(-g.im, g.re))
    } else {
        // Odd symmetry, applied exactly.
        let v = erfi(-z)?;
        Ok(-v)
    }
}

fn erfi_series_real(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= x2 / k as f64;
        let contrib = term / (2 * k + 1) as f64;
        sum += contrib;
        if contrib.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Defining integral w(z) = (i/pi) int e^{-t^2}/(z-t) dt, valid for
    /// Im z > 0. The Gaussian cuts the line off at |t| = 12.
    fn w_quadrature(z: C64) -> C64 {
        let q = quad::integrate(
            |t| C64::new(0.0, 1.0 / PI) * (-t * t).exp() / (z - t),
            -12.0,
            12.0,
            1e-12,
            1e-15,
            2_000_000,
        )
        .unwrap();
        q.value
    }

    /// Real-axis limit of the defining integral: the pole contributes half
    /// a residue, leaving w(x) = e^{-x^2} + (i/pi) PV int e^{-t^2}/(x-t) dt
    /// with the principal value folded into a regular integrand.
    fn w_quadrature_real(x: f64) -> C64 {
        let pv = quad::integrate(
            |s| {
                let num = (-(x - s) * (x - s)).exp() - (-(x + s) * (x + s)).exp();
                C64::new(num / s, 0.0)
            },
            0.0,
            x.abs() + 13.0,
            1e-12,
            1e-15,
            2_000_000,
        )
        .unwrap();
        C64::new((-x * x).exp(), 0.0) + C64::new(0.0, 1.0 / PI) * pv.value
    }

    /// Straight-line path integral Erfi(z) = (2/sqrt(pi)) z int_0^1
    /// e^{z^2 u^2} du, usable at any |z| representable in f64.
    fn erfi_quadrature(z: C64) -> C64 {
        let z2 = z * z;
        let q = quad::integrate(
            |u| (z2 * u * u).exp(),
            0.0,
            1.0,
            1e-11,
            1e-16,
            4_000_000,
        )
        .unwrap();
        FRAC_2_SQRT_PI * z * q.value
    }

    // High-precision reference values (30-digit arithmetic, rounded).
    const W_REFERENCE: [((f64, f64), (f64, f64)); 11] = [
        ((0.5, 0.0), (0.778_800_783_071_404_87, 0.478_925_172_901_043_47)),
        ((2.0, 1.0), (0.140_239_581_366_277_94, 0.222_213_440_179_899_1)),
        ((-1.5, 0.5), (0.196_636_032_243_581_96, -0.337_720_318_346_887_95)),
        ((3.5, 0.1), (0.005_339_924_882_782_206_9, 0.168_645_300_819_136_9)),
        ((6.0, -2.0), (-0.029_170_144_290_310_898, 0.085_259_670_601_539_297)),
        ((-8.0, 4.0), (0.028_602_747_853_954_957, -0.056_484_222_549_282_162)),
        ((0.0, 5.0), (0.110_704_637_733_068_63, 0.0)),
        ((9.9, 0.01), (5.846_874_283_682_604_2e-5, 0.057_284_083_819_405_832)),
        ((-4.0, -3.0), (-0.069_017_359_275_733_461, -0.087_688_439_086_944_437)),
        ((1e-8, 1e-8), (0.999_999_988_716_208_33, 1.128_379_147_095_512_7e-8)),
        ((0.3, -0.2), (1.135_882_784_508_345_1, 0.457_400_700_439_367_84)),
    ];

    const ERFI_REFERENCE: [((f64, f64), (f64, f64)); 8] = [
        ((1.0, 0.0), (1.650_425_758_797_542_9, 0.0)),
        ((2.0, 0.0), (18.564_802_414_575_553, 0.0)),
        ((0.5, 0.5), (0.457_881_394_435_192_22, 0.642_612_914_854_820_53)),
        ((-2.5, 1.0), (6.412_103_948_446_193_7, -40.306_200_856_366_216)),
        ((3.0, 0.0), (1_629.994_622_601_565_7, 0.0)),
        ((0.0, 2.0), (0.0, 0.995_322_265_018_952_73)),
        ((-1.0, -1.0), (-0.190_453_469_237_834_69, -1.316_151_281_697_947_6)),
        ((2.9, 0.1), (798.265_929_179_358_6, 477.380_289_483_309_21)),
    ];

    #[test]
    fn reference_values_faddeeva() {
        for &((re, im), (wre, wim)) in &W_REFERENCE {
            let got = faddeeva(c(re, im)).unwrap();
            let want = c(wre, wim);
            assert!(
                (got - want).norm() <= 1e-12 * want.norm(),
                "w({re}+{im}i): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn reference_values_erfi() {
        for &((re, im), (vre, vim)) in &ERFI_REFERENCE {
            let got = erfi(c(re, im)).unwrap();
            let want = c(vre, vim);
            assert!(
                (got - want).norm() <= 1e-12 * want.norm(),
                "erfi({re}+{im}i): got {got}, want {want}"
            );
        }
    }

    #[test]
    fn faddeeva_at_zero_is_one() {
        assert_eq!(faddeeva(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn faddeeva_decays_along_positive_imaginary_axis() {
        let mut prev = f64::INFINITY;
        for &y in &[1.0, 10.0, 100.0, 1e4, 1e6] {
            let v = faddeeva(c(0.0, y)).unwrap();
            assert!(v.im.abs() < 1e-15);
            assert!(v.re > 0.0 && v.re < prev);
            prev = v.re;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn faddeeva_matches_quadrature_oracle() {
        let pts = [
            c(0.7, 0.4),
            c(-1.2, 2.0),
            c(3.1, 0.6),
            c(-5.0, 1.5),
            c(8.0, 3.0),
            c(0.0, 9.5),
            c(-9.0, 0.8),
        ];
        for &z in &pts {
            let got = faddeeva(z).unwrap();
            let want = w_quadrature(z);
            assert!(
                (got - want).norm() <= 1e-9 * want.norm(),
                "w({z}): got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn faddeeva_matches_quadrature_oracle_on_real_axis() {
        for &x in &[1.0, 0.25, -2.0, 4.5, -7.0] {
            let got = faddeeva(c(x, 0.0)).unwrap();
            let want = w_quadrature_real(x);
            assert!(
                (got - want).norm() <= 1e-9 * want.norm(),
                "w({x}): got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn erfi_series_oracle_inside_disc() {
        // |z| <= 3: the truncated Maclaurin sum is the oracle.
        let pts = [
            c(0.3, 0.0),
            c(1.0, 0.0),
            c(0.0, 2.5),
            c(1.4, 1.1),
            c(-2.0, 0.7),
            c(2.1, -2.1),
            c(-0.4, -0.9),
            c(2.9, 0.4),
        ];
        for &z in &pts {
            let s = erf_series(C64::new(-z.im, z.re));
            let want = C64::new(s.im, -s.re);
            let got = erfi(z).unwrap();
            assert!(
                (got - want).norm() <= 1e-10 * (1.0 + want.norm()),
                "erfi({z}): got {got}, series {want}"
            );
        }
    }

    #[test]
    fn erfi_quadrature_oracle_outside_disc() {
        // 3 < |z| <= 10: path-integral oracle.
        let pts = [
            c(3.5, 0.0),
            c(0.0, 4.0),
            c(3.0, 3.0),
            c(-4.5, 2.0),
            c(5.0, -5.0),
            c(-6.0, -7.0),
            c(9.0, 1.0),
            c(0.5, 9.5),
        ];
        for &z in &pts {
            let got = erfi(z).unwrap();
            let want = erfi_quadrature(z);
            assert!(
                (got - want).norm() <= 1e-8 * want.norm(),
                "erfi({z}): got {got}, oracle {want}"
            );
        }
    }

    #[test]
    fn erfi_derivative_matches_exponential() {
        // d/dz Erfi(z) = (2/sqrt(pi)) e^{z^2}, central differences.
        let h = 1e-5;
        let pts = [c(0.5, 0.0), c(1.5, 1.0), c(-2.0, 0.5), c(0.0, 2.0), c(2.5, -1.0)];
        for &z in &pts {
            let want = FRAC_2_SQRT_PI * (z * z).exp();
            let dre = (erfi(z + c(h, 0.0)).unwrap() - erfi(z - c(h, 0.0)).unwrap()) / (2.0 * h);
            let dim = (erfi(z + c(0.0, h)).unwrap() - erfi(z - c(0.0, h)).unwrap())
                / C64::new(0.0, 2.0 * h);
            assert!((dre - want).norm() <= 1e-6 * want.norm(), "d/dx at {z}");
            assert!((dim - want).norm() <= 1e-6 * want.norm(), "d/dy at {z}");
        }
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(faddeeva(c(f64::NAN, 0.0)).is_err());
        assert!(faddeeva(c(0.0, f64::INFINITY)).is_err());
        assert!(faddeeva(c(2e8, 0.0)).is_err());
        assert!(erfi(c(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn branch_seam_is_continuous() {
        // Series and rational regions must agree across |z| = 2.
        for k in 0..24 {
            let phi = PI * (k as f64) / 12.0;
            let inner = C64::from_polar(1.999_999, phi);
            let outer = C64::from_polar(2.000_001, phi);
            let a = faddeeva(inner).unwrap();
            let b = faddeeva(outer).unwrap();
            assert!(
                (a - b).norm() <= 1e-5 * a.norm().max(1e-30),
                "seam jump at phi={phi}: {a} vs {b}"
            );
        }
    }

    proptest! {
        #[test]
        fn erfi_is_odd(re in -8.0f64..8.0, im in -6.0f64..6.0) {
            let z = c(re, im);
            let a = erfi(z).unwrap();
            let b = erfi(-z).unwrap();
            prop_assert!((a + b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn erfi_conjugate_symmetry(re in -8.0f64..8.0, im in -6.0f64..6.0) {
            let z = c(re, im);
            let a = erfi(z.conj()).unwrap();
            let b = erfi(z).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn erfi_real_axis_is_real(x in -20.0f64..20.0) {
            let v = erfi(c(x, 0.0)).unwrap();
            prop_assert_eq!(v.im, 0.0);
        }

        #[test]
        fn erfi_tracks_series_inside_disc(r in 0.0f64..3.0, phi in 0.0f64..(2.0 * PI)) {
            let z = C64::from_polar(r, phi);
            let s = erf_series(C64::new(-z.im, z.re));
            let want = C64::new(s.im, -s.re);
            let got = erfi(z).unwrap();
            prop_assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }

        #[test]
        fn faddeeva_reflection_identity(re in -9.0f64..9.0, im in 0.0f64..9.0) {
            let z = c(re, im);
            let lhs = faddeeva(-z).unwrap();
            let rhs = 2.0 * (-z * z).exp() - faddeeva(z).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }
}
