//! Level systems, density matrices, and Liouville-space indexing.
//!
//! A [`LevelSystem`] holds the eigenenergies of a multilevel Hamiltonian
//! together with the lowering part of its dipole operator. States are kept
//! in Hilbert space as `N x N` matrices; the response evaluators work in
//! Liouville space, where an operator becomes a length `N^2` vector under
//! the ordering fixed by [`LiouvilleIndex`] (populations first, then
//! coherence pairs).

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Tolerance for hermiticity, trace, and positivity checks on inputs.
/// Density matrices assembled from closed-form expressions are exact to
/// rounding, so anything beyond a few ulps of slack indicates a real
/// inconsistency rather than noise.
const STATE_TOL: f64 = 1e-12;

/// Multilevel system: energies in eV and the lowering dipole operator.
///
/// Levels are ordered by increasing energy. The dipole matrix stores only
/// the lowering part, with `dipole[(i, j)]` the element connecting the
/// higher level `j` to the lower level `i`; the full dipole operator is
/// `dipole + dipole^dagger`.
#[derive(Debug, Clone)]
pub struct LevelSystem {
    labels: Vec<String>,
    energies: Vec<f64>,
    dipole: DMatrix<C64>,
    temperature: Option<f64>,
}

impl LevelSystem {
    /// Build a system from level labels, energies (eV, ascending), and the
    /// lowering dipole matrix.
    ///
    /// Fails if the labels are not unique, the energies are not finite and
    /// ascending, the dipole matrix has the wrong shape, or a dipole entry
    /// sits outside the strictly lowering pattern (`i < j`).
    pub fn new(
        labels: Vec<String>,
        energies: Vec<f64>,
        dipole: DMatrix<C64>,
    ) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::validation("need at least two levels"));
        }
        if labels.len() != n {
            return Err(Error::validation(format!(
                "{} labels for {} levels",
                labels.len(),
                n
            )));
        }
        for (k, pair) in labels.windows(2).enumerate() {
            if labels[k + 1..].contains(&pair[0]) {
                return Err(Error::validation(format!("duplicate label {:?}", pair[0])));
            }
        }
        for (k, &e) in energies.iter().enumerate() {
            if !e.is_finite() {
                return Err(Error::validation(format!("energy of level {k} not finite")));
            }
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation("energies must be ascending"));
        }
        if dipole.nrows() != n || dipole.ncols() != n {
            return Err(Error::validation(format!(
                "dipole matrix is {}x{}, expected {n}x{n}",
                dipole.nrows(),
                dipole.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = dipole[(i, j)];
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::validation(format!("dipole[({i},{j})] not finite")));
                }
                if v.norm_sqr() > 0.0 && i >= j {
                    return Err(Error::validation(format!(
                        "dipole[({i},{j})] must be zero: only lowering elements (i < j) are stored"
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            energies,
            dipole,
            temperature: None,
        })
    }

    /// Attach a temperature `k_B T` in eV, enabling [`Self::thermal_state`].
    pub fn with_temperature(mut self, kbt_ev: f64) -> Result<Self> {
        if !(kbt_ev.is_finite() && kbt_ev > 0.0) {
            return Err(Error::validation("temperature k_B T must be positive"));
        }
        self.temperature = Some(kbt_ev);
        Ok(self)
    }

    /// Number of levels.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    /// True when the system has no levels (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Level labels, in energy order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Level energies in eV, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Temperature `k_B T` in eV, if one was attached.
    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    /// Lowering dipole matrix.
    pub fn dipole_lowering(&self) -> &DMatrix<C64> {
        &self.dipole
    }

    /// Raising dipole matrix (adjoint of the lowering part).
    pub fn dipole_raising(&self) -> DMatrix<C64> {
        self.dipole.adjoint()
    }

    /// Full dipole operator, lowering plus raising part.
    pub fn dipole_full(&self) -> DMatrix<C64> {
        &self.dipole + self.dipole.adjoint()
    }

    /// Transition frequency `omega_ij = (E_i - E_j)` in eV.
    pub fn bohr_frequency(&self, i: usize, j: usize) -> f64 {
        self.energies[i] - self.energies[j]
    }

    /// Thermal (Boltzmann) state at the attached temperature.
    ///
    /// Fails if no temperature was attached.
    pub fn thermal_state(&self) -> Result<DensityMatrix> {
        let kbt = self
            .temperature
            .ok_or_else(|| Error::validation("thermal state requested without a temperature"))?;
        let n = self.len();
        let e0 = self.energies[0];
        let weights: Vec<f64> = self
            .energies
            .iter()
            .map(|&e| (-(e - e0) / kbt).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mut rho = DMatrix::zeros(n, n);
        for (k, w) in weights.iter().enumerate() {
            rho[(k, k)] = C64::new(w / z, 0.0);
        }
        DensityMatrix::new(rho)
    }

    /// Pure population state `|i><i|`.
    pub fn population_state(&self, i: usize) -> Result<DensityMatrix> {
        let n = self.len();
        if i >= n {
            return Err(Error::validation(format!("level index {i} out of range")));
        }
        let mut rho = DMatrix::zeros(n, n);
        rho[(i, i)] = C64::new(1.0, 0.0);
        DensityMatrix::new(rho)
    }

    /// Pure state `(|i> + |j>)/sqrt(2)`, carrying the largest coherence a
    /// density matrix admits between two levels.
    pub fn maximally_coherent_state(&self, i: usize, j: usize) -> Result<DensityMatrix> {
        let n = self.len();
        if i >= n || j >= n || i == j {
            return Err(Error::validation(format!(
                "coherent state needs two distinct levels, got ({i},{j})"
            )));
        }
        let mut rho = DMatrix::zeros(n, n);
        let half = C64::new(0.5, 0.0);
        rho[(i, i)] = half;
        rho[(j, j)] = half;
        rho[(i, j)] = half;
        rho[(j, i)] = half;
        DensityMatrix::new(rho)
    }
}

/// Validated density matrix: hermitian, unit trace, nonnegative populations.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wrap and validate a density matrix.
    ///
    /// Fails unless the matrix is square, hermitian to `1e-12`, has unit
    /// trace to `1e-12`, and has no negative diagonal entry beyond `-1e-12`.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::validation(format!(
                "density matrix is {}x{}, expected square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = 1.0 + matrix.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..n {
            for j in i..n {
                let d = matrix[(i, j)] - matrix[(j, i)].conj();
                if d.norm() > STATE_TOL * scale {
                    return Err(Error::validation(format!(
                        "density matrix not hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let trace: C64 = (0..n).map(|k| matrix[(k, k)]).sum();
        if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOL * (n as f64) {
            return Err(Error::validation(format!(
                "density matrix trace {} is not 1",
                trace.re
            )));
        }
        for k in 0..n {
            if matrix[(k, k)].re < -STATE_TOL {
                return Err(Error::validation(format!("population of level {k} negative")));
            }
        }
        Ok(Self { matrix })
    }

    /// Dimension of the underlying Hilbert space.
    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when the matrix has zero dimension (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Matrix element `<i| rho |j>`.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Purity `Tr rho^2`, 1 for pure states and `1/N` for the maximally
    /// mixed state.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Flatten into a Liouville-space vector under `index`'s ordering.
    pub fn vectorize(&self, index: &LiouvilleIndex) -> DVector<C64> {
        let mut v = DVector::zeros(index.dim());
        for k in 0..index.dim() {
            let (i, j) = index.pair(k);
            v[k] = self.matrix[(i, j)];
        }
        v
    }
}

/// Bijection between operator elements `(i, j)` and Liouville-space slots.
///
/// The ordering lists the `N` populations first, then the coherence pairs
/// `(i, j), (j, i)` for `i < j` in lexicographic order. For three levels
/// `a, b, c` this reads `aa, bb, cc, ab, ba, ac, ca, bc, cb`.
#[derive(Debug, Clone)]
pub struct LiouvilleIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
    slots: Vec<usize>,
}

impl LiouvilleIndex {
    /// Indexing for an `n`-level system.
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n);
        for k in 0..n {
            pairs.push((k, k));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((i, j));
                pairs.push((j, i));
            }
        }
        let mut slots = vec![0usize; n * n];
        for (slot, &(i, j)) in pairs.iter().enumerate() {
            slots[i * n + j] = slot;
        }
        Self { n, pairs, slots }
    }

    /// Number of levels.
    pub fn n_levels(&self) -> usize {
        self.n
    }

    /// Liouville-space dimension `N^2`.
    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Operator element addressed by slot `k`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    /// Slot holding operator element `(i, j)`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.slots[i * self.n + j]
    }

    /// Rebuild an operator from its Liouville-space vector.
    pub fn unvectorize(&self, v: &DVector<C64>) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for k in 0..self.dim() {
            let (i, j) = self.pair(k);
            m[(i, j)] = v[k];
        }
        m
    }
}
