//! Superoperators and free resolvents in Liouville space.
//!
//! Hilbert-space operators become `n^2 x n^2` matrices acting on
//! vectorized density matrices in the ordering of
//! [`LiouvilleIndex`](crate::LiouvilleIndex). Left multiplication,
//! right multiplication, and the commutator (minus) superoperator are
//! provided, together with the diagonal resolvent of the free evolution,
//! `G_kl(nu) = 1 / (nu - omega_kl + i eta)` on the element `|kl>>`.
//!
//! These matrices power brute-force evaluations of multi-point dipole
//! correlation functions, used as independent cross-checks of the
//! explicit eigenstate sums in [`response`](crate::response) and
//! [`wavemixing`](crate::wavemixing).

use nalgebra::{DMatrix, DVector};

use crate::{DensityMatrix, LevelSystem, LiouvilleIndex, C64};

/// Left-multiplication superoperator: `(A_L rho) = A rho`, i.e.
/// `(A_L)_{(ij),(kj)} = A_ik`.
pub fn left_multiply(a: &DMatrix<C64>, index: &LiouvilleIndex) -> DMatrix<C64> {
    let d = index.dim();
    let mut m = DMatrix::zeros(d, d);
    for row in 0..d {
        let (i, j) = index.pair(row);
        for col in 0..d {
            let (k, l) = index.pair(col);
            if l == j {
                m[(row, col)] = a[(i, k)];
            }
        }
    }
    m
}

/// Right-multiplication superoperator: `(A_R rho) = rho A`, i.e.
/// `(A_R)_{(ij),(il)} = A_lj`.
pub fn right_multiply(a: &DMatrix<C64>, index: &LiouvilleIndex) -> DMatrix<C64> {
    let d = index.dim();
    let mut m = DMatrix::zeros(d, d);
    for row in 0..d {
        let (i, j) = index.pair(row);
        for col in 0..d {
            let (k, l) = index.pair(col);
            if k == i {
                m[(row, col)] = a[(l, j)];
            }
        }
    }
    m
}

/// Commutator superoperator `A_- = A_L - A_R`.
pub fn commutator(a: &DMatrix<C64>, index: &LiouvilleIndex) -> DMatrix<C64> {
    left_multiply(a, index) - right_multiply(a, index)
}

/// Diagonal free resolvent: `G_{(kl),(kl)}(nu) = 1/(nu - omega_kl + i eta)`
/// with `omega_kl = E_k - E_l`.
pub fn free_resolvent(system: &LevelSystem, index: &LiouvilleIndex, nu: f64, eta: f64) -> DMatrix<C64> {
    let d = index.dim();
    let mut m = DMatrix::zeros(d, d);
    for k in 0..d {
        let (i, j) = index.pair(k);
        m[(k, k)] = 1.0 / C64::new(nu - system.bohr_frequency(i, j), eta);
    }
    m
}

/// Trace functional `<<I|` as a row vector: 1 on diagonal elements.
pub fn trace_row(index: &LiouvilleIndex) -> DVector<C64> {
    let mut v = DVector::zeros(index.dim());
    for k in 0..index.dim() {
        let (i, j) = index.pair(k);
        if i == j {
            v[k] = C64::new(1.0, 0.0);
        }
    }
    v
}

/// Elementary Liouville basis vector `|ab>>` (the operator `|a><b|`).
pub fn basis_vector(index: &LiouvilleIndex, a: usize, b: usize) -> DVector<C64> {
    let mut v = DVector::zeros(index.dim());
    v[index.index(a, b)] = C64::new(1.0, 0.0);
    v
}

/// Expectation `<<I| M |rho>>` of a superoperator in a state.
pub fn expectation(m: &DMatrix<C64>, rho: &DensityMatrix, index: &LiouvilleIndex) -> C64 {
    let v = m * rho.vectorize(index);
    let tr = trace_row(index);
    tr.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}
