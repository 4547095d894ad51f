use std::fmt;

use rand::Rng;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

/// A split of `N` modes into a block `A` of `K ≤ N - K` modes and its complement `B`.
///
/// Modes are 0-based internally; `Display` and serialized forms label them from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n: usize,
    block_a: Vec<usize>,
    block_b: Vec<usize>,
}

impl Bipartition {
    /// Any non-empty `block_a` with `|A| ≤ N - |A|`; the order of `block_a` is not significant.
    pub fn new(n: usize, block_a: &[usize]) -> Result<Self> {
        if block_a.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut a = block_a.to_vec();
        a.sort_unstable();
        for w in a.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateMode(w[0]));
            }
        }
        if let Some(&m) = a.iter().find(|&&m| m >= n) {
            return Err(Error::ModeOutOfRange { index: m, n_modes: n });
        }
        if 2 * a.len() > n {
            return Err(Error::InvalidBipartition(format!(
                "block A has {} of {n} modes; it must be the smaller side",
                a.len()
            )));
        }
        Ok(Self::from_sorted(n, a))
    }

    fn from_sorted(n: usize, block_a: Vec<usize>) -> Self {
        let mut in_a = vec![false; n];
        for &m in &block_a {
            in_a[m] = true;
        }
        let block_b = (0..n).filter(|&m| !in_a[m]).collect();
        Self { n, block_a, block_b }
    }

    /// Canonical representative of the unordered split with one side `side`:
    /// the smaller side becomes `A`, and at `K = N/2` the side holding mode 0.
    pub fn canonical(n: usize, side: &[usize]) -> Result<Self> {
        let p = Self::new_any_side(n, side)?;
        let k = p.block_a.len();
        if 2 * k > n || (2 * k == n && p.block_a[0] != 0) {
            Ok(Self::from_sorted(n, p.block_b))
        } else {
            Ok(p)
        }
    }

    fn new_any_side(n: usize, side: &[usize]) -> Result<Self> {
        let mut a = side.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() || a.len() == n {
            return Err(Error::InvalidBipartition("both sides must be non-empty".into()));
        }
        if let Some(&m) = a.iter().find(|&&m| m >= n) {
            return Err(Error::ModeOutOfRange { index: m, n_modes: n });
        }
        Ok(Self::from_sorted(n, a))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.block_a.len()
    }

    pub fn block_a(&self) -> &[usize] {
        &self.block_a
    }

    pub fn block_b(&self) -> &[usize] {
        &self.block_b
    }

    /// 1-based labels of block `A`.
    pub fn labels_a(&self) -> Vec<usize> {
        self.block_a.iter().map(|m| m + 1).collect()
    }

    pub fn labels_b(&self) -> Vec<usize> {
        self.block_b.iter().map(|m| m + 1).collect()
    }

    /// Uniform draw over the `2^{N-1} - 1` unordered splits, canonicalized.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 2, "bipartitions need at least two modes");
        loop {
            let side: Vec<usize> = (0..n).filter(|_| rng.gen::<bool>()).collect();
            if !side.is_empty() && side.len() < n {
                return Self::canonical(n, &side).expect("valid side");
            }
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|m| (m + 1).to_string()).collect::<Vec<_>>().join(",");
        write!(f, "{{{}}}|{{{}}}", join(&self.block_a), join(&self.block_b))
    }
}

impl Serialize for Bipartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Bipartition", 2)?;
        s.serialize_field("block_a", &self.labels_a())?;
        s.serialize_field("block_b", &self.labels_b())?;
        s.end()
    }
}

/// `2^{N-1} - 1`, the number of unordered bipartitions of `N` modes.
pub fn bipartition_count(n: usize) -> u128 {
    assert!((2..=128).contains(&n), "count defined for 2 <= N <= 128");
    (1u128 << (n - 1)) - 1
}

/// Lazily yields every unordered bipartition of `N` modes exactly once, in
/// lexicographic order of the canonical block `A`.
#[derive(Debug, Clone)]
pub struct Bipartitions {
    n: usize,
    max_k: usize,
    current: Vec<usize>,
    started: bool,
    done: bool,
}

impl Bipartitions {
    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            self.current.push(0);
            return true;
        }
        let last = *self.current.last().expect("non-empty while iterating");
        if self.current.len() < self.max_k && last + 1 < self.n {
            self.current.push(last + 1);
            return true;
        }
        while let Some(v) = self.current.pop() {
            if v + 1 < self.n {
                self.current.push(v + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for Bipartitions {
    type Item = Bipartition;

    fn next(&mut self) -> Option<Bipartition> {
        while !self.done {
            if !self.advance() {
                self.done = true;
                break;
            }
            let k = self.current.len();
            if 2 * k == self.n && self.current[0] != 0 {
                continue;
            }
            return Some(Bipartition::from_sorted(self.n, self.current.clone()));
        }
        None
    }
}

/// All bipartitions of `N ≥ 2` modes.
pub fn enumerate_bipartitions(n: usize) -> Result<Bipartitions> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 modes, got {n}")));
    }
    Ok(Bipartitions {
        n,
        max_k: n / 2,
        current: Vec::with_capacity(n / 2),
        started: false,
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn three_modes() {
        let all: Vec<String> = enumerate_bipartitions(3).unwrap().map(|p| p.to_string()).collect();
        assert_eq!(all, ["{1}|{2,3}", "{2}|{1,3}", "{3}|{1,2}"]);
    }

    #[test]
    fn four_modes() {
        let all: Vec<Bipartition> = enumerate_bipartitions(4).unwrap().collect();
        assert_eq!(all.len(), 7);
        assert_eq!(all.iter().filter(|p| p.k() == 2).count(), 3);
        assert!(all.iter().filter(|p| p.k() == 2).all(|p| p.block_a()[0] == 0));
    }

    #[test]
    fn counts_and_uniqueness() {
        for n in 2..=16 {
            let mut seen = HashSet::new();
            for p in enumerate_bipartitions(n).unwrap() {
                assert!(2 * p.k() <= n);
                let mut side = p.block_a().to_vec();
                if !side.contains(&0) {
                    side = p.block_b().to_vec();
                }
                assert!(seen.insert(side), "duplicate split {p}");
            }
            assert_eq!(seen.len() as u128, bipartition_count(n));
        }
        assert_eq!(bipartition_count(20), 524_287);
        assert!(enumerate_bipartitions(1).is_err());
    }

    #[test]
    fn twenty_modes_count() {
        assert_eq!(enumerate_bipartitions(20).unwrap().count(), 524_287);
    }

    #[test]
    fn lexicographic_order() {
        let all: Vec<Vec<usize>> = enumerate_bipartitions(9)
            .unwrap()
            .map(|p| p.block_a().to_vec())
            .collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn canonicalization() {
        let p = Bipartition::canonical(4, &[2, 3]).unwrap();
        assert_eq!(p.block_a(), &[0, 1]);
        let q = Bipartition::canonical(5, &[0, 1, 2]).unwrap();
        assert_eq!(q.block_a(), &[3, 4]);
        assert!(Bipartition::new(4, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(4, &[]).is_err());
        assert!(Bipartition::new(4, &[1, 1]).is_err());
        assert!(Bipartition::new(4, &[4]).is_err());
        let r = Bipartition::new(4, &[3, 0]).unwrap();
        assert_eq!(r.block_a(), &[0, 3]);
        assert_eq!(r.block_b(), &[1, 2]);
    }

    #[test]
    fn random_draws_cover_all_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = HashSet::new();
        for _ in 0..2000 {
            let p = Bipartition::random(5, &mut rng);
            assert!(2 * p.k() <= 5);
            seen.insert(p);
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn serializes_with_one_based_labels() {
        let p = Bipartition::new(4, &[0, 1]).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"block_a":[1,2],"block_b":[3,4]}"#
        );
    }
}
