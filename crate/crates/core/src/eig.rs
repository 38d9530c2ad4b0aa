//! Dense complex eigendecomposition for small matrices.
//!
//! The driven-system propagators diagonalize a 9x9 complex Liouvillian once
//! and then evaluate resolvents and exponentials at many frequencies or
//! times from the same factorization. nalgebra's Schur decomposition only
//! covers real scalars, so this module carries its own solver for general
//! complex matrices: unitary Householder reduction to Hessenberg form, a
//! single-shift QR iteration with Givens chases (the complex analogue of
//! the EISPACK/Jama `hqr2` path), and back-substitution on the resulting
//! triangular factor for the eigenvectors.
//!
//! The eigenvector matrix of a non-normal operator can be arbitrarily ill
//! conditioned, so [`Eigendecomposition`] reports a one-norm condition
//! estimate of `V`; callers that need guaranteed accuracy (the dual-route
//! propagators) fall back to per-frequency LU solves when the estimate is
//! large. Matrices up to a few tens of rows are the intended regime; all
//! loops are written for clarity, not blocking.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Iterations allowed per eigenvalue before the QR loop gives up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 40;

/// Spectral factorization `A = V diag(values) V^-1` of a complex matrix.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    values: DVector<C64>,
    vectors: DMatrix<C64>,
    inverse: Option<DMatrix<C64>>,
    condition: f64,
}

impl Eigendecomposition {
    /// Factor a square complex matrix.
    ///
    /// Fails on empty or non-square input, on non-finite entries, and when
    /// the QR iteration stalls (which for finite input indicates a bug, not
    /// a property of the matrix; the iteration carries exceptional shifts).
    /// A defective or nearly defective matrix still factors, but its
    /// [`condition`](Self::condition) estimate is large and
    /// [`matrix_function`](Self::matrix_function) amplifies roundoff
    /// accordingly; callers gate on the estimate.
    pub fn compute(a: &DMatrix<C64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::validation(format!(
                "eigendecomposition needs a nonempty square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(
                "eigendecomposition input has non-finite entries",
            ));
        }

        let (mut t, mut q) = hessenberg(a);
        schur_in_place(&mut t, &mut q)?;
        let values = DVector::from_iterator(n, (0..n).map(|i| t[(i, i)]));
        let mut vectors = &q * triangular_eigenvectors(&t);
        normalize_columns(&mut vectors);
        if vectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(
                "eigenvector computation produced non-finite entries".into(),
            ));
        }

        let inverse = vectors.clone().full_piv_lu().try_inverse();
        let condition = match &inverse {
            Some(inv) => one_norm(&vectors) * one_norm(inv),
            None => f64::INFINITY,
        };

        Ok(Eigendecomposition {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    /// Eigenvalues, in the order the QR iteration deflated them.
    pub fn values(&self) -> &DVector<C64> {
        &self.values
    }

    /// Right eigenvectors as columns, unit norm, largest entry real positive.
    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    /// One-norm condition estimate of the eigenvector matrix.
    ///
    /// Near one for normal matrices; grows without bound as the matrix
    /// approaches a defective (Jordan-block) structure. Infinite when the
    /// eigenvector matrix was numerically singular.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Evaluate `V f(diag(values)) V^-1`.
    ///
    /// With `f = |z| 1/(w - z)` this is the resolvent `(wI - A)^-1`, with
    /// `f = |z| (z*t).exp()` the propagator `exp(At)`; the factorization is
    /// reused across calls. Errors when the eigenvector matrix could not be
    /// inverted (a maximally defective input).
    pub fn matrix_function(&self, f: impl Fn(C64) -> C64) -> Result<DMatrix<C64>> {
        let inverse = self.inverse.as_ref().ok_or_else(|| {
            Error::Degenerate("eigenvector matrix is singular; no spectral function".into())
        })?;
        let mut scaled = self.vectors.clone();
        for (j, mut column) in scaled.column_iter_mut().enumerate() {
            column *= f(self.values[j]);
        }
        Ok(scaled * inverse)
    }
}

/// Largest column sum of entry magnitudes.
fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Unitary reduction `A = Q H Q^H` with `H` upper Hessenberg.
fn hessenberg(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = DMatrix::identity(n, n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        // Householder vector for the column below the subdiagonal entry.
        let norm_x: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = h[(k + 1, k)];
        // Reflect onto -e^{i arg(x0)} * ||x|| e1 so the pivot never cancels.
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        let mut u = DVector::from_iterator(n - k - 1, (k + 1..n).map(|i| h[(i, k)]));
        u[0] -= alpha;
        let unorm = u.norm();
        if unorm <= f64::MIN_POSITIVE {
            continue;
        }
        u /= C64::new(unorm, 0.0);

        // H <- P H with P = I - 2 u u^H acting on rows k+1..n.
        for j in k..n {
            let dot: C64 = (0..n - k - 1).map(|i| u[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..n - k - 1 {
                let delta = 2.0 * u[i] * dot;
                h[(k + 1 + i, j)] -= delta;
            }
        }
        // H <- H P on columns k+1..n, and accumulate Q <- Q P.
        for i in 0..n {
            let dot: C64 = (0..n - k - 1).map(|j| h[(i, k + 1 + j)] * u[j]).sum();
            for j in 0..n - k - 1 {
                h[(i, k + 1 + j)] -= 2.0 * dot * u[j].conj();
            }
            let dot: C64 = (0..n - k - 1).map(|j| q[(i, k + 1 + j)] * u[j]).sum();
            for j in 0..n - k - 1 {
                q[(i, k + 1 + j)] -= 2.0 * dot * u[j].conj();
            }
        }
        // The reflected column is exactly alpha e1.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Complex Givens rotation: returns `(c, s, r)` with `c` real so that
/// `[[c, s], [-conj(s), c]] [a; b] = [r; 0]` and `c^2 + |s|^2 = 1`.
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    let an = a.norm();
    if an == 0.0 {
        // Swap with a phase that keeps r = |b| on the real axis of b's phase.
        return (0.0, C64::new(1.0, 0.0), b);
    }
    let t = (an * an + bn * bn).sqrt();
    let c = an / t;
    let phase = a / an;
    let s = phase * b.conj() / t;
    let r = phase * t;
    (c, s, r)
}

/// Single-shift QR iteration: reduce Hessenberg `h` to upper triangular in
/// place while accumulating the unitary similarity into `q`.
fn schur_in_place(h: &mut DMatrix<C64>, q: &mut DMatrix<C64>) -> Result<()> {
    let n = h.nrows();
    let scale = one_norm(h).max(f64::MIN_POSITIVE);
    let mut m = n;
    let mut sweeps = 0usize;
    while m > 1 {
        // Split where a subdiagonal entry is negligible against its
        // diagonal neighbors (absolute floor keyed to the matrix norm).
        let mut l = m - 1;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let local = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if sub <= f64::EPSILON * local.max(scale * 1e-3) {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == m - 1 {
            m -= 1;
            sweeps = 0;
            continue;
        }

        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::Numerical(format!(
                "qr iteration exceeded {MAX_SWEEPS_PER_EIGENVALUE} sweeps on a block of size {}",
                m - l
            )));
        }
        let shift = if sweeps % 12 == 0 {
            // Exceptional shift to break symmetric stalls.
            h[(m - 1, m - 1)] + C64::new(0.75 * h[(m - 1, m - 2)].norm(), 0.0)
        } else {
            wilkinson_shift(h, m)
        };

        // Implicit shifted step: rotate (h[l,l]-shift, h[l+1,l]) to the
        // axis, then chase the bulge down the active block.
        let mut x = h[(l, l)] - shift;
        let mut z = h[(l + 1, l)];
        for k in l..m - 1 {
            let (c, s, r) = givens(x, z);
            if k > l {
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
            // Rows k, k+1 from column k (earlier columns are zero).
            for j in k..n {
                let hk = h[(k, j)];
                let hk1 = h[(k + 1, j)];
                h[(k, j)] = c * hk + s * hk1;
                h[(k + 1, j)] = -s.conj() * hk + c * hk1;
            }
            // Columns k, k+1 down to the bulge row.
            let last = (k + 2).min(m - 1);
            for i in 0..=last {
                let hk = h[(i, k)];
                let hk1 = h[(i, k + 1)];
                h[(i, k)] = c * hk + s.conj() * hk1;
                h[(i, k + 1)] = -s * hk + c * hk1;
            }
            for i in 0..n {
                let qk = q[(i, k)];
                let qk1 = q[(i, k + 1)];
                q[(i, k)] = c * qk + s.conj() * qk1;
                q[(i, k + 1)] = -s * qk + c * qk1;
            }
            if k + 2 < m {
                x = h[(k + 1, k)];
                z = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 of the active block closest to the
/// bottom-corner entry.
fn wilkinson_shift(h: &DMatrix<C64>, m: usize) -> C64 {
    let a = h[(m - 2, m - 2)];
    let b = h[(m - 2, m - 1)];
    let c = h[(m - 1, m - 2)];
    let d = h[(m - 1, m - 1)];
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let r1 = mid + disc;
    let r2 = mid - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Right eigenvectors of an upper triangular matrix, one column per
/// diagonal entry, by back-substitution.
fn triangular_eigenvectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let scale = one_norm(t).max(f64::MIN_POSITIVE);
    let mut x = DMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        x[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let rhs: C64 = (i + 1..=k).map(|j| t[(i, j)] * x[(j, k)]).sum();
            if rhs.norm() == 0.0 {
                continue;
            }
            let mut div = lambda - t[(i, i)];
            // A repeated diagonal entry makes the divisor vanish; nudge it
            // by an eps-scale amount (EISPACK's guard, floored far above the
            // subnormal range so the complex division cannot underflow) to
            // keep the column finite. For a diagonalizable degeneracy the
            // numerator also vanishes and the entry is harmlessly near zero;
            // for a true Jordan coupling the column blows up toward the
            // partner and normalization plus the condition estimate report
            // it.
            if div.norm() < f64::EPSILON * scale {
                div = C64::new((f64::EPSILON * scale).max(1e-150), 0.0);
            }
            x[(i, k)] = rhs / div;
        }
    }
    x
}

/// Scale each column to unit two-norm with its largest entry real positive.
fn normalize_columns(v: &mut DMatrix<C64>) {
    for mut column in v.column_iter_mut() {
        let (mut best, mut best_norm) = (C64::new(1.0, 0.0), 0.0f64);
        for z in column.iter() {
            if z.norm() > best_norm {
                best_norm = z.norm();
                best = *z;
            }
        }
        let norm = column.norm();
        if norm <= f64::MIN_POSITIVE || best_norm <= f64::MIN_POSITIVE {
            continue;
        }
        let phase = best.conj() / best_norm;
        let factor = phase / C64::new(norm, 0.0);
        column *= factor;
    }
}
