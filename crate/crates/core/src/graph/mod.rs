//! Gaussian weighted-graph states.
//!
//! A graph state with adjacency matrix `Ω` and local squeezing `r` is obtained
//! by preparing every mode in a momentum-squeezed vacuum and coupling each
//! edge `(a, b)` with a `C_Z(Ω_ab)` gate. Its nullifiers
//! `p_a - Σ_b Ω_ab x_b` have variance `e^{-2r}`.

mod format;

use nalgebra::DMatrix;
use num_rational::{Ratio, Rational64};
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

pub use format::{parse_adjacency, to_json, to_text};

const TWENTY_MODE_DATA: &str = include_str!("../../data/twenty_mode.adj");

/// Symmetric, zero-diagonal matrix of exact rational edge weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<Rational64>,
}

impl AdjacencyMatrix {
    /// Row-major entries; validated for symmetry and a zero diagonal.
    pub fn new(n: usize, entries: Vec<Rational64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        if entries.len() != n * n {
            return Err(Error::InvalidAdjacency(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for a in 0..n {
            if !entries[a * n + a].is_zero() {
                return Err(Error::InvalidAdjacency(format!(
                    "diagonal entry ({0}, {0}) is {1}, expected 0",
                    a + 1,
                    entries[a * n + a]
                )));
            }
            for b in a + 1..n {
                if entries[a * n + b] != entries[b * n + a] {
                    return Err(Error::InvalidAdjacency(format!(
                        "entries ({}, {}) = {} and ({}, {}) = {} differ",
                        a + 1,
                        b + 1,
                        entries[a * n + b],
                        b + 1,
                        a + 1,
                        entries[b * n + a]
                    )));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidAdjacency(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&v| Rational64::from_integer(v)));
        }
        Self::new(n, entries)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Weight of edge `(a, b)`, 0-based.
    pub fn get(&self, a: usize, b: usize) -> Rational64 {
        self.entries[a * self.n + b]
    }

    pub fn entries(&self) -> &[Rational64] {
        &self.entries
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| e.is_integer())
    }

    /// Submatrix with rows `rows` and columns `cols`.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Rational64>> {
        rows.iter()
            .map(|&a| cols.iter().map(|&b| self.get(a, b)).collect())
            .collect()
    }

    /// Edges `(a, b)` with `a < b` and nonzero weight, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, Rational64)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let w = self.get(a, b);
                if !w.is_zero() {
                    out.push((a, b, w));
                }
            }
        }
        out
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |a, b| ratio_to_f64(self.get(a, b)))
    }

    /// `Ω²`, computed exactly when the intermediate sums fit, otherwise in floating point.
    fn square_f64(&self) -> DMatrix<f64> {
        let n = self.n;
        let wide: Vec<Ratio<i128>> = self
            .entries
            .iter()
            .map(|e| Ratio::new_raw(*e.numer() as i128, *e.denom() as i128))
            .collect();
        let exact = (|| {
            let mut out = DMatrix::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let mut acc = Ratio::<i128>::zero();
                    for k in 0..n {
                        let term = wide[a * n + k].checked_mul(&wide[k * n + b])?;
                        acc = acc.checked_add(&term)?;
                    }
                    out[(a, b)] = acc.to_f64()?;
                }
            }
            Some(out)
        })();
        exact.unwrap_or_else(|| {
            let w = self.to_f64();
            &w * &w
        })
    }
}

fn ratio_to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("i64 ratio converts to f64")
}

/// Uniform local squeezing degree `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezingParameter(f64);

impl SqueezingParameter {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && r > 0.0 {
            Ok(Self(r))
        } else {
            Err(Error::InvalidSqueezing(r))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Covariance matrix of the weighted graph state with adjacency `Ω` and squeezing `r`:
/// `Γ_xx = e^{2r} I`, `Γ_xp = e^{2r} Ω`, `Γ_pp = e^{-2r} I + e^{2r} Ω²`.
pub fn graph_state_cm(adjacency: &AdjacencyMatrix, r: SqueezingParameter) -> CovarianceMatrix {
    let n = adjacency.n;
    let up = (2.0 * r.0).exp();
    let down = (-2.0 * r.0).exp();
    let omega = adjacency.to_f64();
    let omega_sq = adjacency.square_f64();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        m[(a, a)] = up;
        for b in 0..n {
            m[(a, n + b)] = up * omega[(a, b)];
            m[(n + a, b)] = up * omega[(b, a)];
            m[(n + a, n + b)] = up * omega_sq[(a, b)] + if a == b { down } else { 0.0 };
        }
    }
    CovarianceMatrix::from_trusted(m)
}

/// Coefficients of the nullifier `p_a - Σ_b Ω_ab x_b` over `(x_1..x_N, p_1..p_N)`.
pub fn nullifier(adjacency: &AdjacencyMatrix, a: usize) -> Result<Vec<f64>> {
    let n = adjacency.n;
    if a >= n {
        return Err(Error::ModeOutOfRange { index: a, n_modes: n });
    }
    let mut u = vec![0.0; 2 * n];
    for b in 0..n {
        u[b] = -ratio_to_f64(adjacency.get(a, b));
    }
    u[n + a] = 1.0;
    Ok(u)
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!(
            "graph needs at least 2 vertices, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Toeplitz family: offset `d` carries `a_{d+1}`, with `a_j = 0` for odd `j`
/// and `a_j = (-1)^{j/2+1} j²/4` for even `j`.
pub fn toeplitz_family(n: usize) -> Result<AdjacencyMatrix> {
    check_size(n)?;
    let coeff = |j: usize| -> i64 {
        if j % 2 == 1 {
            0
        } else {
            let half = (j / 2) as i64;
            let sign = if (half + 1) % 2 == 0 { 1 } else { -1 };
            sign * half * half
        }
    };
    let entries = (0..n * n)
        .map(|idx| {
            let (a, b) = (idx / n, idx % n);
            Rational64::from_integer(coeff(a.abs_diff(b) + 1))
        })
        .collect();
    AdjacencyMatrix::new(n, entries)
}

/// Fully connected graph with unit weights (the GHZ-type resource).
pub fn complete_unweighted(n: usize) -> Result<AdjacencyMatrix> {
    check_size(n)?;
    let entries = (0..n * n)
        .map(|idx| Rational64::from_integer(i64::from(idx / n != idx % n)))
        .collect();
    AdjacencyMatrix::new(n, entries)
}

/// Symmetric integer weights drawn uniformly from `[-weight_bound, weight_bound]`.
///
/// The upper triangle is filled row by row from a ChaCha8 stream seeded with `seed`.
pub fn random_graph(n: usize, weight_bound: i64, seed: u64) -> Result<AdjacencyMatrix> {
    check_size(n)?;
    if weight_bound < 1 {
        return Err(Error::InvalidArgument(format!(
            "weight bound must be at least 1, got {weight_bound}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![Rational64::zero(); n * n];
    for a in 0..n {
        for b in a + 1..n {
            let w = Rational64::from_integer(rng.gen_range(-weight_bound..=weight_bound));
            entries[a * n + b] = w;
            entries[b * n + a] = w;
        }
    }
    AdjacencyMatrix::new(n, entries)
}

/// The 20-mode random-ensemble instance reported as a perfect MMES.
pub fn twenty_mode_fixture() -> AdjacencyMatrix {
    parse_adjacency(TWENTY_MODE_DATA).expect("bundled 20-mode fixture is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::variance_of_linear_combination;

    fn int(v: i64) -> Rational64 {
        Rational64::from_integer(v)
    }

    #[test]
    fn rejects_asymmetric_and_nonzero_diagonal() {
        let bad = AdjacencyMatrix::from_integer_rows(&[vec![0, 1], vec![2, 0]]);
        assert!(matches!(bad, Err(Error::InvalidAdjacency(_))));
        let diag = AdjacencyMatrix::from_integer_rows(&[vec![1, 0], vec![0, 0]]);
        assert!(matches!(diag, Err(Error::InvalidAdjacency(_))));
    }

    #[test]
    fn empty_graph_state_is_squeezed_vacua() {
        let omega = AdjacencyMatrix::new(2, vec![int(0); 4]).unwrap();
        let g = graph_state_cm(&omega, SqueezingParameter::new(1.0).unwrap());
        let e2 = 2.0_f64.exp();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![e2, e2, 1.0 / e2, 1.0 / e2]));
        assert!((g.matrix() - expected).abs().max() < 1e-15);
    }

    #[test]
    fn squeezing_must_be_positive() {
        assert_eq!(SqueezingParameter::new(0.0), Err(Error::InvalidSqueezing(0.0)));
        assert!(SqueezingParameter::new(-1.0).is_err());
        assert!(SqueezingParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn inverse_matches_wigner_exponent() {
        // Γ^{-1} = [[e^{-2r} I + e^{2r} Ω², -e^{2r} Ω], [-e^{2r} Ω, e^{2r} I]]
        let omega = toeplitz_family(5).unwrap();
        let r = 0.7;
        let g = graph_state_cm(&omega, SqueezingParameter::new(r).unwrap());
        let n = 5;
        let w = omega.to_f64();
        let (up, down) = ((2.0 * r).exp(), (-2.0 * r).exp());
        let mut inv = DMatrix::zeros(2 * n, 2 * n);
        inv.view_mut((0, 0), (n, n))
            .copy_from(&(DMatrix::identity(n, n) * down + &w * &w * up));
        inv.view_mut((0, n), (n, n)).copy_from(&(&w * -up));
        inv.view_mut((n, 0), (n, n)).copy_from(&(&w * -up));
        inv.view_mut((n, n), (n, n)).copy_from(&(DMatrix::identity(n, n) * up));
        let prod = g.matrix() * inv;
        assert!((prod - DMatrix::<f64>::identity(2 * n, 2 * n)).abs().max() < 1e-9);
    }

    #[test]
    fn nullifier_and_position_variances() {
        let omega = toeplitz_family(6).unwrap();
        let r = 1.2;
        let g = graph_state_cm(&omega, SqueezingParameter::new(r).unwrap());
        for a in 0..6 {
            let v = variance_of_linear_combination(&g, &nullifier(&omega, a).unwrap()).unwrap();
            assert!((v / (-2.0 * r).exp() - 1.0).abs() < 1e-10, "nullifier {a}: {v}");
            let mut ex = vec![0.0; 12];
            ex[a] = 1.0;
            let vx = variance_of_linear_combination(&g, &ex).unwrap();
            assert!((vx / (2.0 * r).exp() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn toeplitz_offsets() {
        let t4 = toeplitz_family(4).unwrap();
        for a in 0..4usize {
            for b in 0..4 {
                let expected = match a.abs_diff(b) {
                    1 => 1,
                    3 => -4,
                    _ => 0,
                };
                assert_eq!(t4.get(a, b), int(expected));
            }
        }
        let t6 = toeplitz_family(6).unwrap();
        assert_eq!(t6.get(0, 5), int(9));
        assert_eq!(t6.get(5, 0), int(9));
        let t8 = toeplitz_family(8).unwrap();
        assert_eq!(t8.get(0, 7), int(-16));
        assert!(toeplitz_family(1).is_err());
    }

    #[test]
    fn complete_graph_shape() {
        let k2 = complete_unweighted(2).unwrap();
        assert_eq!(k2.entries(), &[int(0), int(1), int(1), int(0)]);
        let k4 = complete_unweighted(4).unwrap();
        assert_eq!(k4.block(&[0, 1], &[2, 3]), vec![vec![int(1); 2]; 2]);
        for a in 0..4 {
            let row: Rational64 = (0..4).map(|b| k4.get(a, b)).sum();
            assert_eq!(row, int(3));
        }
        assert!(complete_unweighted(0).is_err());
    }

    #[test]
    fn random_graph_is_seeded_and_bounded() {
        let a = random_graph(12, 5, 99).unwrap();
        let b = random_graph(12, 5, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_graph(12, 5, 100).unwrap());
        assert!(a.entries().iter().all(|e| e.is_integer() && e.numer().abs() <= 5));
        assert!(random_graph(4, 0, 1).is_err());
    }

    #[test]
    fn random_graph_weights_look_uniform() {
        // chi-square sanity over the 41 admissible values, not a strict test of the generator
        let n = 20;
        let mut counts = vec![0usize; 41];
        for seed in 0..40 {
            let g = random_graph(n, 20, seed).unwrap();
            for (a, b, _) in (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b, ()))) {
                counts[(g.get(a, b).to_integer() + 20) as usize] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let expected = total as f64 / 41.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 40 degrees of freedom; the 99.9% quantile is about 73.4
        assert!(chi2 < 73.4, "chi2 = {chi2}");
    }

    #[test]
    fn fixture_entries() {
        let f = twenty_mode_fixture();
        assert_eq!(f.n_vertices(), 20);
        assert_eq!(f.get(0, 1), int(1));
        assert_eq!(f.get(0, 4), int(16));
        assert_eq!(f.get(0, 19), int(-10));
        assert_eq!(f.get(19, 18), int(2));
        assert!(f.is_integral());
    }
}
