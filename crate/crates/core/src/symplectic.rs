//! Phase-space linear algebra for zero-mean Gaussian states.
//!
//! Covariance matrices are stored in `xxpp` ordering: the quadrature vector is
//! `(x_1, ..., x_N, p_1, ..., p_N)`. The vacuum has covariance matrix equal to
//! the identity, so the variance of a quadrature combination `u . R` is the
//! quadratic form `u^T Γ u`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symplectic eigenvalues at or below `1 + PURITY_TOL` are classed as pure.
pub const PURITY_TOL: f64 = 1e-7;

/// Slack allowed below 1 before a spectrum is declared unphysical.
pub const PHYSICAL_TOL: f64 = 1e-7;

/// Relative tolerance for matching the two copies of each symplectic eigenvalue.
pub const PAIRING_TOL: f64 = 1e-8;

/// Relative residual `|S J S^T - J| / max(1, |S|^2)` accepted for a symplectic matrix.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-9;

/// The symplectic form `J = [[0, I], [-I, 0]]` on `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> Result<DMatrix<f64>> {
    if n_modes == 0 {
        return Err(Error::ZeroModes);
    }
    let n = n_modes;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    Ok(j)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Second-moment matrix of an `N`-mode zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape, symmetry and positive definiteness.
    ///
    /// Entries that are symmetric up to rounding are symmetrized exactly.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        if rows == 0 {
            return Err(Error::ZeroModes);
        }
        let asym = max_abs(&(&matrix - matrix.transpose()));
        if asym > SYMMETRY_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let matrix = symmetrize(&matrix);
        if matrix.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            n_modes: rows / 2,
            matrix,
        })
    }

    /// Wraps a matrix produced by an operation that preserves symmetry and
    /// positivity in exact arithmetic; only rounding asymmetry is removed.
    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        debug_assert!(matrix.is_square() && matrix.nrows().is_multiple_of(2));
        Self {
            n_modes: matrix.nrows() / 2,
            matrix: symmetrize(&matrix),
        }
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self::from_trusted(DMatrix::identity(2 * n_modes, 2 * n_modes)))
    }

    /// Builds the matrix from its `x`-`x`, `x`-`p` and `p`-`p` blocks.
    pub fn from_blocks(xx: &DMatrix<f64>, xp: &DMatrix<f64>, pp: &DMatrix<f64>) -> Result<Self> {
        let n = xx.nrows();
        for b in [xx, xp, pp] {
            if b.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: b.nrows(),
                });
            }
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(xx);
        m.view_mut((0, n), (n, n)).copy_from(xp);
        m.view_mut((n, 0), (n, n)).copy_from(&xp.transpose());
        m.view_mut((n, n), (n, n)).copy_from(pp);
        Self::new(m)
    }

    /// Builds the matrix from interleaved `(x_1, p_1, x_2, p_2, ...)` ordering.
    pub fn from_interleaved(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows % 2 != 0 {
            return Err(Error::BadShape { rows, cols });
        }
        let perm = interleaved_to_xxpp(rows / 2);
        let m = DMatrix::from_fn(rows, rows, |i, j| matrix[(perm[i], perm[j])]);
        Self::new(m)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn to_interleaved(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        let perm = interleaved_to_xxpp(n);
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in 0..2 * n {
                out[(perm[i], perm[j])] = self.matrix[(i, j)];
            }
        }
        out
    }

    pub fn xx_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.matrix.view((0, 0), (n, n)).into_owned()
    }

    pub fn xp_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.matrix.view((0, n), (n, n)).into_owned()
    }

    pub fn pp_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.matrix.view((n, n), (n, n)).into_owned()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<SymplecticSpectrum> {
        symplectic_eigenvalues(self)
    }

    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        reduce(self, modes)
    }

    /// `true` when every symplectic eigenvalue is at most `1 + tol`.
    pub fn is_pure(&self, tol: f64) -> Result<bool> {
        Ok(self.symplectic_eigenvalues()?.is_pure(tol))
    }

    /// `true` when every symplectic eigenvalue is at least `1 - tol`.
    pub fn is_physical(&self, tol: f64) -> Result<bool> {
        Ok(self.symplectic_eigenvalues()?.is_physical(tol))
    }

    /// Tensor product of two states; the modes of `other` follow those of `self`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (na, nb) = (self.n_modes, other.n_modes);
        let n = na + nb;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        let place = |m: &mut DMatrix<f64>, src: &DMatrix<f64>, k: usize, offset: usize| {
            let idx: Vec<usize> = (0..k)
                .map(|i| offset + i)
                .chain((0..k).map(|i| n + offset + i))
                .collect();
            for (a, &ia) in idx.iter().enumerate() {
                for (b, &ib) in idx.iter().enumerate() {
                    m[(ia, ib)] = src[(a, b)];
                }
            }
        };
        place(&mut m, &self.matrix, na, 0);
        place(&mut m, &other.matrix, nb, na);
        Self::from_trusted(m)
    }

    /// Relabels modes: mode `i` of the result is mode `order[i]` of `self`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: order.len(),
            });
        }
        let mut seen = vec![false; self.n_modes];
        for &m in order {
            if m >= self.n_modes {
                return Err(Error::ModeOutOfRange {
                    index: m,
                    n_modes: self.n_modes,
                });
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::DuplicateMode(m));
            }
        }
        reduce(self, order)
    }
}

fn interleaved_to_xxpp(n: usize) -> Vec<usize> {
    // xxpp index i -> interleaved index
    (0..2 * n)
        .map(|i| if i < n { 2 * i } else { 2 * (i - n) + 1 })
        .collect()
}

/// Symplectic eigenvalues `ν_j`, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(1.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(1.0)
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.max() <= 1.0 + tol
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min() >= 1.0 - tol
    }

    /// `Π ν_j²`, equal to `det Γ`.
    pub fn determinant(&self) -> f64 {
        self.values.iter().map(|v| v * v).product()
    }
}

/// Diagonal symplectic scaling that equalizes `Γ_{x_i x_i}` and `Γ_{p_i p_i}`.
fn balance(gamma: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let (vx, vp) = (gamma[(i, i)], gamma[(n + i, n + i)]);
            if vx > 0.0 && vp > 0.0 {
                (vp / vx).powf(0.25)
            } else {
                1.0
            }
        })
        .collect();
    let d = |i: usize| if i < n { scale[i] } else { 1.0 / scale[i - n] };
    DMatrix::from_fn(2 * n, 2 * n, |i, j| gamma[(i, j)] * d(i) * d(j))
}

/// Symplectic spectrum of `Γ`.
///
/// With `Γ = L L^T`, the antisymmetric matrix `K = L^T J L` is similar to
/// `J Γ`, so its singular values are the `ν_j`, each appearing twice.
/// They are the square roots of the eigenvalues of `K^T K`, a symmetric matrix
/// similar to `-(J Γ)^2`. Γ is first balanced by a diagonal symplectic
/// scaling, which leaves the spectrum unchanged.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let n = gamma.n_modes;
    let balanced = balance(&gamma.matrix, n);
    let chol = balanced.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let j = symplectic_form(n)?;
    let k = l.transpose() * j * &l;
    let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let scale = sv[0].max(1.0);
    let values = sv
        .chunks_exact(2)
        .enumerate()
        .map(|(index, pair)| {
            let gap = (pair[0] - pair[1]).abs();
            if gap > PAIRING_TOL * scale {
                Err(Error::PairingFailure { index, gap })
            } else {
                Ok(0.5 * (pair[0] + pair[1]))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymplecticSpectrum { values })
}

fn check_modes(n_modes: usize, modes: &[usize]) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::EmptySubset);
    }
    for &m in modes {
        if m >= n_modes {
            return Err(Error::ModeOutOfRange { index: m, n_modes });
        }
    }
    Ok(())
}

/// Reduced state on `modes` (0-based), repacked in `xxpp` order following
/// the order of `modes`.
pub fn reduce(gamma: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    let n = gamma.n_modes;
    check_modes(n, modes)?;
    let mut seen = vec![false; n];
    for &m in modes {
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::DuplicateMode(m));
        }
    }
    let k = modes.len();
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| n + m)).collect();
    let m = DMatrix::from_fn(2 * k, 2 * k, |i, j| gamma.matrix[(idx[i], idx[j])]);
    Ok(CovarianceMatrix::from_trusted(m))
}

/// Max-entry residual `|S J S^T - J|`.
pub fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = s.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let j = symplectic_form(rows / 2)?;
    Ok(max_abs(&(s * &j * s.transpose() - j)))
}

/// Gaussian unitary action `S Γ S^T`. `S` must be symplectic.
pub fn apply_symplectic(s: &DMatrix<f64>, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let dim = 2 * gamma.n_modes;
    if s.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s.nrows(),
        });
    }
    let residual = symplectic_residual(s)?;
    if residual > SYMPLECTIC_TOL * max_abs(s).powi(2).max(1.0) {
        return Err(Error::NotSymplectic(residual));
    }
    Ok(CovarianceMatrix::from_trusted(s * &gamma.matrix * s.transpose()))
}

/// Overlap fidelity `2^N / sqrt(det(Γ_1 + Γ_2))` between a pure state `Γ_1`
/// and an arbitrary state `Γ_2`, both zero-mean.
pub fn gaussian_fidelity_pure(pure: &CovarianceMatrix, other: &CovarianceMatrix) -> Result<f64> {
    if pure.n_modes != other.n_modes {
        return Err(Error::DimensionMismatch {
            expected: pure.n_modes,
            got: other.n_modes,
        });
    }
    let nu_max = pure.symplectic_eigenvalues()?.max();
    if nu_max > 1.0 + PURITY_TOL {
        return Err(Error::NotPure(nu_max));
    }
    Ok(overlap_fidelity(pure, other))
}

/// Same formula as [`gaussian_fidelity_pure`] without the purity gate.
pub(crate) fn overlap_fidelity(a: &CovarianceMatrix, b: &CovarianceMatrix) -> f64 {
    let sum = &a.matrix + &b.matrix;
    let chol = sum
        .cholesky()
        .expect("sum of positive-definite matrices is positive definite");
    // log sqrt(det) = sum of log of the Cholesky diagonal
    let log_sqrt_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    (a.n_modes as f64 * std::f64::consts::LN_2 - log_sqrt_det).exp()
}

/// Variance `u^T Γ u` of the quadrature combination with coefficients `u`
/// over `(x_1..x_N, p_1..p_N)`.
pub fn variance_of_linear_combination(gamma: &CovarianceMatrix, u: &[f64]) -> Result<f64> {
    let dim = 2 * gamma.n_modes;
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    let u = DVector::from_column_slice(u);
    Ok(u.dot(&(&gamma.matrix * &u)))
}
