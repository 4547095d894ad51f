//! Exact matrix rank over the rationals.
//!
//! Rational rows are scaled to integers (row scaling preserves rank) and
//! reduced by fraction-free Bareiss elimination. Every intermediate entry is a
//! minor of the input, so the divisions are exact. The `i128` path bails out on
//! overflow and the computation is redone with big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use super::bipartition::Bipartition;
use crate::graph::AdjacencyMatrix;

trait FractionFree: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// `(a*b - c*d) / e`, exact by construction.
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self>;
}

impl FractionFree for i128 {
    fn zero() -> Self {
        0
    }

    fn one() -> Self {
        1
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        let num = a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)?;
        debug_assert_eq!(num % e, 0, "Bareiss division must be exact");
        Some(num / e)
    }
}

impl FractionFree for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        Some((a * b - c * d) / e)
    }
}

/// Bareiss elimination with row pivoting; columns without a pivot are skipped.
fn bareiss_rank<T: FractionFree>(mut m: Vec<Vec<T>>) -> Option<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = T::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            for j in col + 1..cols {
                row[j] = T::cross_div(&pivot_row[col], &row[j], &row[col], &pivot_row[j], &prev)?;
            }
            row[col] = T::zero();
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    Some(rank)
}

/// Rank of an integer matrix given as rows.
pub fn integer_rank(rows: &[Vec<i128>]) -> usize {
    bareiss_rank(rows.to_vec()).unwrap_or_else(|| {
        bareiss_rank(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
        .expect("big-integer elimination cannot overflow")
    })
}

/// Exact rank over `Q` of a rational matrix given as rows.
pub fn rational_rank(rows: &[Vec<Rational64>]) -> usize {
    let scaled: Option<Vec<Vec<i128>>> = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().try_fold(1i128, |acc, e| {
                let d = *e.denom() as i128;
                acc.checked_mul(d / acc.gcd(&d))
            })?;
            row.iter()
                .map(|e| (*e.numer() as i128).checked_mul(lcm / *e.denom() as i128))
                .collect()
        })
        .collect();
    match scaled {
        Some(int_rows) => integer_rank(&int_rows),
        None => {
            let big_rows = rows
                .iter()
                .map(|row| {
                    let lcm = row
                        .iter()
                        .fold(<BigInt as One>::one(), |acc, e| acc.lcm(&BigInt::from(*e.denom())));
                    row.iter()
                        .map(|e| BigInt::from(*e.numer()) * (&lcm / BigInt::from(*e.denom())))
                        .collect()
                })
                .collect();
            bareiss_rank(big_rows).expect("big-integer elimination cannot overflow")
        }
    }
}

/// 2^64 - 59, the largest prime below 2^64.
const PRIME: u64 = 18_446_744_073_709_551_557;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        PRIME - (b - a)
    }
}

fn inv_mod(a: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a, PRIME - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// Rank modulo [`PRIME`]; never exceeds the rank over `Q`.
fn rank_mod_p(mut m: Vec<Vec<u64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = inv_mod(m[rank][col]);
        let (top, rest) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            if row[col] == 0 {
                continue;
            }
            let factor = mul_mod(row[col], inv);
            for j in col..cols {
                row[j] = sub_mod(row[j], mul_mod(factor, pivot_row[j]));
            }
        }
        rank += 1;
    }
    rank
}

/// An adjacency matrix scaled by the common denominator of its entries, with
/// residues cached for the modular full-rank certificate.
#[derive(Debug, Clone)]
pub(crate) struct ScaledAdjacency {
    n: usize,
    small: Option<Vec<i128>>,
    big: Vec<BigInt>,
    residues: Vec<u64>,
}

impl ScaledAdjacency {
    pub(crate) fn new(adjacency: &AdjacencyMatrix) -> Self {
        let n = adjacency.n_vertices();
        let lcm = adjacency
            .entries()
            .iter()
            .fold(<BigInt as One>::one(), |acc, e| acc.lcm(&BigInt::from(*e.denom())));
        let big: Vec<BigInt> = adjacency
            .entries()
            .iter()
            .map(|e| BigInt::from(*e.numer()) * (&lcm / BigInt::from(*e.denom())))
            .collect();
        let small = big.iter().map(|v| i128::try_from(v).ok()).collect();
        let p = BigInt::from(PRIME);
        let residues = big
            .iter()
            .map(|v| {
                let r = v.mod_floor(&p);
                debug_assert!(!r.is_negative());
                u64::try_from(&r).expect("residue below the modulus")
            })
            .collect();
        Self {
            n,
            small,
            big,
            residues,
        }
    }

    /// Exact rank of `Ω_AB`.
    pub(crate) fn block_rank(&self, p: &Bipartition) -> usize {
        let (a, b) = (p.block_a(), p.block_b());
        if let Some(small) = &self.small {
            let rows: Vec<Vec<i128>> = a
                .iter()
                .map(|&i| b.iter().map(|&j| small[i * self.n + j]).collect())
                .collect();
            if let Some(rank) = bareiss_rank(rows) {
                return rank;
            }
        }
        let rows = a
            .iter()
            .map(|&i| b.iter().map(|&j| self.big[i * self.n + j].clone()).collect())
            .collect();
        bareiss_rank(rows).expect("big-integer elimination cannot overflow")
    }

    /// Exact rank of `Ω_AB`, same result as [`Self::block_rank`].
    ///
    /// Full rank modulo a prime certifies full rank over `Q`; only blocks that
    /// look deficient modulo the prime go through exact elimination.
    pub(crate) fn check_block(&self, p: &Bipartition) -> usize {
        let (a, b) = (p.block_a(), p.block_b());
        let rows: Vec<Vec<u64>> = a
            .iter()
            .map(|&i| b.iter().map(|&j| self.residues[i * self.n + j]).collect())
            .collect();
        let k = a.len();
        if rank_mod_p(rows) == k {
            k
        } else {
            self.block_rank(p)
        }
    }
}
