//! Certification of perfect continuous-variable MMES.
//!
//! A weighted graph state is a perfect MMES in the infinite-squeezing limit
//! iff for every bipartition `A|B` with `|A| = K ≤ N - K` the off-diagonal
//! block `Ω_AB` has rank `K`. Ranks are computed exactly; the symplectic
//! spectrum of the reduced state gives an independent numerical route to the
//! same number, since the reduced state of block `A` has
//! `ν_j² = 1 + e^{4r} σ_j²` with `σ_j` the singular values of `Ω_AB`.

mod bipartition;
mod rank;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

pub use bipartition::{bipartition_count, enumerate_bipartitions, Bipartition, Bipartitions};
pub use rank::{integer_rank, rational_rank};

use crate::error::{Error, Result};
use crate::graph::{graph_state_cm, random_graph, AdjacencyMatrix, SqueezingParameter};
use crate::symplectic::{CovarianceMatrix, PHYSICAL_TOL, PURITY_TOL};
use crate::teamwork::ChannelSpec;
use crate::util::derive_seed;
use rank::ScaledAdjacency;

/// Symplectic eigenvalues above `1 + RANK_TOL` count as entangled channels.
pub const RANK_TOL: f64 = 1e-7;

/// Largest `N` for which typicality scans run exhaustively.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 22;

const CHUNK: usize = 4096;

/// How the bipartitions of an MMES check are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// A bipartition whose block rank falls short of `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub bipartition: Bipartition,
    pub rank: usize,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Witness", 2)?;
        s.serialize_field("block_a", &self.bipartition.labels_a())?;
        s.serialize_field("rank", &self.rank)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmesReport {
    pub verdict: bool,
    pub n: usize,
    pub mode: ScanMode,
    pub checked: u64,
    pub witness: Option<Witness>,
    pub elapsed_ms: Option<f64>,
}

impl MmesReport {
    /// Drops the wall-clock field so reports compare and print reproducibly.
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = None;
        self
    }
}

fn check_partition(adjacency: &AdjacencyMatrix, p: &Bipartition) -> Result<()> {
    if p.n() != adjacency.n_vertices() {
        return Err(Error::DimensionMismatch {
            expected: adjacency.n_vertices(),
            got: p.n(),
        });
    }
    Ok(())
}

/// Exact rank over `Q` of the `K x (N-K)` block `Ω_AB`.
pub fn block_rank(adjacency: &AdjacencyMatrix, p: &Bipartition) -> Result<usize> {
    check_partition(adjacency, p)?;
    Ok(rational_rank(&adjacency.block(p.block_a(), p.block_b())))
}

/// Walks `parts` in order and returns how many were examined and the first
/// failing one. Chunks are checked in parallel; the earliest failure in
/// iteration order wins, so the result does not depend on scheduling.
fn scan_blocks(scaled: &ScaledAdjacency, parts: impl Iterator<Item = Bipartition>) -> (u64, Option<Witness>) {
    let mut parts = parts;
    let mut checked = 0u64;
    loop {
        let chunk: Vec<Bipartition> = parts.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return (checked, None);
        }
        let failure = chunk.par_iter().enumerate().find_map_first(|(i, p)| {
            let rank = scaled.check_block(p);
            (rank < p.k()).then_some((i, rank))
        });
        match failure {
            Some((i, rank)) => {
                checked += i as u64 + 1;
                let bipartition = chunk.into_iter().nth(i).expect("index within chunk");
                return (checked, Some(Witness { bipartition, rank }));
            }
            None => checked += chunk.len() as u64,
        }
    }
}

/// Checks the rank criterion over every bipartition or a seeded sample.
///
/// Stops at the first failing block. In exhaustive mode bipartitions are
/// visited in lexicographic order of `A`, so the witness is the
/// lexicographically smallest failing block.
pub fn is_perfect_mmes(adjacency: &AdjacencyMatrix, mode: ScanMode) -> Result<MmesReport> {
    let n = adjacency.n_vertices();
    if n < 2 {
        return Err(Error::InvalidArgument("MMES check needs at least 2 vertices".into()));
    }
    let start = Instant::now();
    let scaled = ScaledAdjacency::new(adjacency);
    let (checked, witness) = match mode {
        ScanMode::Exhaustive => scan_blocks(&scaled, enumerate_bipartitions(n)?),
        ScanMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            scan_blocks(&scaled, (0..count).map(move |_| Bipartition::random(n, &mut rng)))
        }
    };
    Ok(MmesReport {
        verdict: witness.is_none(),
        n,
        mode,
        checked,
        witness,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Number of symplectic eigenvalues of a reduced state above `1 + tol`.
pub fn symplectic_rank(reduced: &CovarianceMatrix, tol: f64) -> Result<usize> {
    let spectrum = reduced.symplectic_eigenvalues()?;
    if !spectrum.is_physical(PHYSICAL_TOL) {
        return Err(Error::Unphysical(spectrum.min()));
    }
    Ok(spectrum.values().iter().filter(|&&v| v > 1.0 + tol).count())
}

/// Two-mode-squeezing degrees `r_j = ½ arccosh ν_j` of the normal form of a
/// pure state across `p`, sorted in descending order. Channels with
/// `ν_j ≤ 1 + RANK_TOL` report 0.
pub fn effective_squeezings(gamma: &CovarianceMatrix, p: &Bipartition) -> Result<ChannelSpec> {
    if gamma.n_modes() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: gamma.n_modes(),
            got: p.n(),
        });
    }
    let nu_max = gamma.symplectic_eigenvalues()?.max();
    if nu_max > 1.0 + PURITY_TOL {
        return Err(Error::NotPure(nu_max));
    }
    effective_squeezings_unchecked(gamma, p)
}

/// [`effective_squeezings`] for states that are pure by construction.
pub(crate) fn effective_squeezings_unchecked(gamma: &CovarianceMatrix, p: &Bipartition) -> Result<ChannelSpec> {
    let reduced = gamma.reduce(p.block_a())?;
    let squeezings = reduced
        .symplectic_eigenvalues()?
        .values()
        .iter()
        .map(|&nu| if nu <= 1.0 + RANK_TOL { 0.0 } else { 0.5 * nu.acosh() })
        .collect();
    ChannelSpec::new(squeezings)
}

/// Fitted coefficients of `ν_j(r)² = 1 + α_j e^{4r}` for one bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    /// One per channel, matched across samples by descending `ν`.
    pub alphas: Vec<f64>,
    /// Largest relative least-squares residual over the channels.
    pub residual: f64,
}

impl ScalingFit {
    /// Predicted `ν_j` at squeezing `r`.
    pub fn predict(&self, r: f64) -> Vec<f64> {
        self.alphas.iter().map(|a| (1.0 + a * (4.0 * r).exp()).sqrt()).collect()
    }

    /// `½ arccosh √(1 + α_j e^{4r})`.
    pub fn squeezings(&self, r: f64) -> Vec<f64> {
        self.predict(r).into_iter().map(|nu| 0.5 * nu.acosh()).collect()
    }
}

/// Fits `α_j` from the reduced spectra of the graph state at two squeezing values.
pub fn scaling_fit(adjacency: &AdjacencyMatrix, p: &Bipartition, r_samples: [f64; 2]) -> Result<ScalingFit> {
    check_partition(adjacency, p)?;
    let rs = [
        SqueezingParameter::new(r_samples[0])?,
        SqueezingParameter::new(r_samples[1])?,
    ];
    if r_samples[0] == r_samples[1] {
        return Err(Error::DegenerateSamples);
    }
    let spectra = rs
        .iter()
        .map(|&r| {
            graph_state_cm(adjacency, r)
                .reduce(p.block_a())?
                .symplectic_eigenvalues()
                .map(|s| s.into_values())
        })
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = r_samples.iter().map(|r| (4.0 * r).exp()).collect();
    let mut alphas = Vec::with_capacity(p.k());
    let mut residual = 0.0_f64;
    for j in 0..p.k() {
        let nus = [spectra[0][j], spectra[1][j]];
        if nus.iter().all(|&nu| nu <= 1.0 + RANK_TOL) {
            alphas.push(0.0);
            continue;
        }
        let ys: Vec<f64> = nus.iter().map(|nu| (nu - 1.0) * (nu + 1.0)).collect();
        let alpha =
            ys.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / weights.iter().map(|w| w * w).sum::<f64>();
        let misfit = ys
            .iter()
            .zip(&weights)
            .map(|(y, w)| (y - alpha * w).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
        residual = residual.max(misfit / scale);
        alphas.push(alpha);
    }
    Ok(ScalingFit { alphas, residual })
}

/// Per-trial bipartition selection for [`typicality_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialMode {
    Exhaustive,
    Sampled { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: TrialMode,
    pub exhaustive_cap: usize,
}

impl TypicalityConfig {
    pub fn new(n: usize, trials: usize, seed: u64, mode: TrialMode) -> Self {
        Self {
            n,
            trials,
            seed,
            mode,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub graph_seed: u64,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityStats {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: TrialMode,
    pub passes: usize,
    pub pass_fraction: f64,
    pub failures: Vec<TrialFailure>,
    pub elapsed_ms: Option<f64>,
}

impl TypicalityStats {
    pub fn without_timing(mut self) -> Self {
        self.elapsed_ms = None;
        self
    }
}

/// Draws `trials` random graphs with integer weights in `[-N, N]` and
/// checks each for the perfect-MMES property.
///
/// Trial `i` uses graph seed `derive_seed(seed, 2i)` and, in sampled mode,
/// bipartition seed `derive_seed(seed, 2i + 1)`, so results do not depend on
/// how trials are scheduled.
pub fn typicality_scan(config: &TypicalityConfig) -> Result<TypicalityStats> {
    let TypicalityConfig {
        n,
        trials,
        seed,
        mode,
        exhaustive_cap,
    } = *config;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 modes, got {n}")));
    }
    if mode == TrialMode::Exhaustive && n > exhaustive_cap {
        return Err(Error::ExhaustiveCapExceeded { n, cap: exhaustive_cap });
    }
    if let TrialMode::Sampled { count: 0 } = mode {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let bound = i64::try_from(n).map_err(|_| Error::InvalidArgument("N too large".into()))?;
    let start = Instant::now();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let graph_seed = derive_seed(seed, 2 * trial as u64);
            let graph = random_graph(n, bound, graph_seed)?;
            let scan = match mode {
                TrialMode::Exhaustive => ScanMode::Exhaustive,
                TrialMode::Sampled { count } => ScanMode::Sampled {
                    count,
                    seed: derive_seed(seed, 2 * trial as u64 + 1),
                },
            };
            let report = is_perfect_mmes(&graph, scan)?;
            Ok(report.witness.map(|witness| TrialFailure {
                trial,
                graph_seed,
                witness,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let failures: Vec<TrialFailure> = outcomes.into_iter().flatten().collect();
    let passes = trials - failures.len();
    Ok(TypicalityStats {
        n,
        trials,
        seed,
        mode,
        passes,
        pass_fraction: passes as f64 / trials as f64,
        failures,
        elapsed_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::tmss_cm;
    use crate::graph::{complete_unweighted, toeplitz_family, twenty_mode_fixture};

    #[test]
    fn block_rank_examples() {
        let k4 = complete_unweighted(4).unwrap();
        assert_eq!(block_rank(&k4, &Bipartition::new(4, &[0, 1]).unwrap()).unwrap(), 1);
        let zero = AdjacencyMatrix::from_integer_rows(&vec![vec![0; 5]; 5]).unwrap();
        for p in enumerate_bipartitions(5).unwrap() {
            assert_eq!(block_rank(&zero, &p).unwrap(), 0);
        }
        let t6 = toeplitz_family(6).unwrap();
        let p = Bipartition::new(6, &[0, 1, 2]).unwrap();
        assert_eq!(
            t6.block(p.block_a(), p.block_b()),
            vec![
                vec![(-4).into(), 0.into(), 9.into()],
                vec![0.into(), (-4).into(), 0.into()],
                vec![1.into(), 0.into(), (-4).into()],
            ]
        );
        assert_eq!(block_rank(&t6, &p).unwrap(), 3);
        assert!(block_rank(&t6, &Bipartition::new(5, &[0]).unwrap()).is_err());
    }

    #[test]
    fn fast_path_agrees_with_exact_rank() {
        for seed in 0..20 {
            let g = random_graph(7, 2, seed).unwrap();
            let scaled = ScaledAdjacency::new(&g);
            for p in enumerate_bipartitions(7).unwrap() {
                assert_eq!(scaled.check_block(&p), block_rank(&g, &p).unwrap());
                assert_eq!(scaled.block_rank(&p), block_rank(&g, &p).unwrap());
            }
        }
    }

    #[test]
    fn rank_is_bounded_by_block_size() {
        for seed in 0..10 {
            let g = random_graph(8, 8, seed).unwrap();
            for p in enumerate_bipartitions(8).unwrap() {
                assert!(block_rank(&g, &p).unwrap() <= p.k());
            }
        }
    }

    #[test]
    fn toeplitz_eight_is_perfect() {
        let report = is_perfect_mmes(&toeplitz_family(8).unwrap(), ScanMode::Exhaustive).unwrap();
        assert!(report.verdict);
        assert_eq!(report.checked, 127);
        assert!(report.witness.is_none());
    }

    #[test]
    fn complete_graph_fails_with_smallest_witness() {
        let report = is_perfect_mmes(&complete_unweighted(4).unwrap(), ScanMode::Exhaustive).unwrap();
        assert!(!report.verdict);
        let w = report.witness.unwrap();
        assert_eq!(w.bipartition.block_a(), &[0, 1]);
        assert_eq!(w.rank, 1);
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let g = twenty_mode_fixture();
        let a = is_perfect_mmes(&g, ScanMode::Sampled { count: 500, seed: 11 }).unwrap();
        let b = is_perfect_mmes(&g, ScanMode::Sampled { count: 500, seed: 11 }).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert!(is_perfect_mmes(&g, ScanMode::Sampled { count: 0, seed: 1 }).is_err());
    }

    #[test]
    fn report_json_shape() {
        let report = is_perfect_mmes(&complete_unweighted(4).unwrap(), ScanMode::Exhaustive)
            .unwrap()
            .without_timing();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "verdict": false, "n": 4, "mode": "exhaustive", "checked": 2,
                "witness": {"block_a": [1, 2], "rank": 1}, "elapsed_ms": null
            })
        );
        let sampled = serde_json::to_value(ScanMode::Sampled { count: 3, seed: 9 }).unwrap();
        assert_eq!(sampled, serde_json::json!({"sampled": {"count": 3, "seed": 9}}));
    }

    #[test]
    fn symplectic_rank_examples() {
        assert_eq!(
            symplectic_rank(&CovarianceMatrix::vacuum(2).unwrap(), RANK_TOL).unwrap(),
            0
        );
        let red = tmss_cm(1.0).unwrap().reduce(&[0]).unwrap();
        assert_eq!(symplectic_rank(&red, RANK_TOL).unwrap(), 1);
        let squeezed_below_vacuum = CovarianceMatrix::new(nalgebra::DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert!(matches!(
            symplectic_rank(&squeezed_below_vacuum, RANK_TOL),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn fixture_blocks_match_symplectic_rank() {
        let g = twenty_mode_fixture();
        let gamma = graph_state_cm(&g, SqueezingParameter::new(1.5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let p = Bipartition::random(20, &mut rng);
            let reduced = gamma.reduce(p.block_a()).unwrap();
            assert_eq!(symplectic_rank(&reduced, RANK_TOL).unwrap(), p.k());
            assert_eq!(block_rank(&g, &p).unwrap(), p.k());
        }
    }

    #[test]
    fn deficient_channels_fit_to_zero() {
        let k5 = complete_unweighted(5).unwrap();
        let p = Bipartition::new(5, &[0, 1]).unwrap();
        let fit = scaling_fit(&k5, &p, [1.0, 1.5]).unwrap();
        assert_eq!(fit.alphas.len(), 2);
        assert!(fit.alphas[0] > 0.0);
        assert_eq!(fit.alphas[1], 0.0);
        assert!(matches!(
            scaling_fit(&k5, &p, [1.0, 1.0]),
            Err(Error::DegenerateSamples)
        ));
        assert!(scaling_fit(&k5, &p, [0.0, 1.0]).is_err());
    }

    #[test]
    fn fit_recovers_squared_singular_values() {
        // Ω_AB = [[1, 1, 1]] for K_4 with A = {1}: σ² = 3
        let k4 = complete_unweighted(4).unwrap();
        let fit = scaling_fit(&k4, &Bipartition::new(4, &[0]).unwrap(), [0.5, 1.0]).unwrap();
        assert!((fit.alphas[0] - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn typicality_errors_and_determinism() {
        let cfg = TypicalityConfig::new(5, 8, 42, TrialMode::Exhaustive);
        let a = typicality_scan(&cfg).unwrap().without_timing();
        let b = typicality_scan(&cfg).unwrap().without_timing();
        assert_eq!(a, b);
        assert_eq!(a.passes + a.failures.len(), 8);
        let zero = TypicalityConfig::new(5, 0, 42, TrialMode::Exhaustive);
        assert!(typicality_scan(&zero).is_err());
        let big = TypicalityConfig::new(30, 1, 42, TrialMode::Exhaustive);
        assert_eq!(
            typicality_scan(&big),
            Err(Error::ExhaustiveCapExceeded { n: 30, cap: 22 })
        );
    }
}
