//! Symplectic circuit primitives and explicit state constructions.
//!
//! All operators act on the xxpp quadrature vector `(x_1..x_N, p_1..p_N)`.

use std::fmt;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, SqueezingParameter};
use crate::mmes::Bipartition;
use crate::symplectic::{apply_symplectic, symplectic_form, symplectic_residual, CovarianceMatrix, SYMPLECTIC_TOL};

/// Largest normal-form residual accepted by [`psi4_local_reduction`].
pub const NORMAL_FORM_TOL: f64 = 1e-8;

/// A validated Gaussian unitary, `S J S^T = J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    description: String,
}

impl SymplecticOp {
    pub fn new(matrix: DMatrix<f64>, description: impl Into<String>) -> Result<Self> {
        let residual = symplectic_residual(&matrix)?;
        let scale = matrix.amax().powi(2).max(1.0);
        if residual > SYMPLECTIC_TOL * scale {
            return Err(Error::NotSymplectic(residual));
        }
        Ok(Self {
            matrix,
            description: description.into(),
        })
    }

    fn from_trusted(matrix: DMatrix<f64>, description: String) -> Self {
        Self { matrix, description }
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self::from_trusted(
            DMatrix::identity(2 * n_modes, 2 * n_modes),
            "I".into(),
        ))
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &SymplecticOp) -> Result<Self> {
        if next.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                got: next.n_modes(),
            });
        }
        Ok(Self::from_trusted(
            &next.matrix * &self.matrix,
            format!("{} . {}", next.description, self.description),
        ))
    }

    /// `S Γ S^T`.
    pub fn apply(&self, gamma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        apply_symplectic(&self.matrix, gamma)
    }

    /// `S^{-1} = -J S^T J`.
    pub fn inverse(&self) -> Self {
        let j = symplectic_form(self.n_modes()).expect("n_modes > 0");
        Self::from_trusted(
            -(&j * self.matrix.transpose() * &j),
            format!("({})^-1", self.description),
        )
    }

    /// Max-entry residual of `S J S^T = J`.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.matrix).expect("validated shape")
    }

    /// True when `S` is the identity outside `modes` and does not couple
    /// `modes` to the rest, i.e. the operation is local to `modes`.
    pub fn acts_only_on(&self, modes: &[usize], tol: f64) -> bool {
        let n = self.n_modes();
        let inside = |q: usize| modes.contains(&(q % n));
        let dim = 2 * n;
        (0..dim).all(|i| {
            (0..dim).all(|j| {
                let v = self.matrix[(i, j)];
                match (inside(i), inside(j)) {
                    (true, true) => true,
                    (false, false) if i == j => (v - 1.0).abs() <= tol,
                    _ => v.abs() <= tol,
                }
            })
        })
    }
}

impl fmt::Display for SymplecticOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

fn check_mode(i: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    if i >= n {
        return Err(Error::ModeOutOfRange { index: i, n_modes: n });
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    check_mode(i, n)?;
    check_mode(j, n)?;
    if i == j {
        return Err(Error::DuplicateMode(i));
    }
    Ok(())
}

/// Two-mode squeezed vacuum: `X = [[c, s], [s, c]]`, `P = [[c, -s], [-s, c]]`
/// with `c = cosh 2r`, `s = sinh 2r`.
pub fn tmss_cm(r: f64) -> Result<CovarianceMatrix> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidSqueezing(r));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, s, 0.0, 0.0, //
            s, c, 0.0, 0.0, //
            0.0, 0.0, c, -s, //
            0.0, 0.0, -s, c,
        ],
    );
    Ok(CovarianceMatrix::from_trusted(m))
}

/// Beam splitter of transmittivity `t` between modes `i` and `j`, acting
/// identically on both quadratures:
/// `x_i -> √t x_i + √(1-t) x_j`, `x_j -> -√(1-t) x_i + √t x_j`.
pub fn beam_splitter(i: usize, j: usize, t: f64, n: usize) -> Result<SymplecticOp> {
    check_pair(i, j, n)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidTransmittivity(t));
    }
    let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
    let mut m = DMatrix::identity(2 * n, 2 * n);
    for off in [0, n] {
        m[(off + i, off + i)] = a;
        m[(off + i, off + j)] = b;
        m[(off + j, off + i)] = -b;
        m[(off + j, off + j)] = a;
    }
    Ok(SymplecticOp::from_trusted(m, format!("BS({},{};t={t})", i + 1, j + 1)))
}

/// Controlled-phase gate `exp(i w x_i x_j)`: `p_i -> p_i + w x_j`, `p_j -> p_j + w x_i`.
pub fn cz_gate(i: usize, j: usize, w: f64, n: usize) -> Result<SymplecticOp> {
    check_pair(i, j, n)?;
    if !w.is_finite() {
        return Err(Error::InvalidArgument(format!("gate weight must be finite, got {w}")));
    }
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(n + i, j)] = w;
    m[(n + j, i)] = w;
    Ok(SymplecticOp::from_trusted(m, format!("CZ({},{};w={w})", i + 1, j + 1)))
}

/// `x_i -> s x_i`, `p_i -> p_i / s`.
pub fn single_mode_squeezer(i: usize, s: f64, n: usize) -> Result<SymplecticOp> {
    check_mode(i, n)?;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squeezer parameter must be positive, got {s}"
        )));
    }
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(i, i)] = s;
    m[(n + i, n + i)] = 1.0 / s;
    Ok(SymplecticOp::from_trusted(m, format!("Sq({};s={s})", i + 1)))
}

/// Phase rotation by π on mode `i`: `(x_i, p_i) -> (-x_i, -p_i)`.
pub fn phase_flip(i: usize, n: usize) -> Result<SymplecticOp> {
    check_mode(i, n)?;
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(i, i)] = -1.0;
    m[(n + i, n + i)] = -1.0;
    Ok(SymplecticOp::from_trusted(m, format!("R({};pi)", i + 1)))
}

/// Graph state built gate by gate: momentum-squeezed vacua followed by one
/// C_Z per edge, in row-major edge order.
pub fn graph_state_circuit(adjacency: &AdjacencyMatrix, r: SqueezingParameter) -> Result<CovarianceMatrix> {
    let edges: Vec<(usize, usize)> = adjacency.edges().into_iter().map(|(a, b, _)| (a, b)).collect();
    graph_state_circuit_ordered(adjacency, r, &edges)
}

/// [`graph_state_circuit`] with an explicit gate order. `edges` must list
/// each nonzero edge exactly once.
pub fn graph_state_circuit_ordered(
    adjacency: &AdjacencyMatrix,
    r: SqueezingParameter,
    edges: &[(usize, usize)],
) -> Result<CovarianceMatrix> {
    let n = adjacency.n_vertices();
    let mut expected: Vec<(usize, usize)> = adjacency.edges().into_iter().map(|(a, b, _)| (a, b)).collect();
    let mut given: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    expected.sort_unstable();
    given.sort_unstable();
    if expected != given {
        return Err(Error::InvalidArgument(
            "gate order must list every edge exactly once".into(),
        ));
    }
    let s = r.value().exp();
    let mut squeezed = CovarianceMatrix::vacuum(n)?;
    for i in 0..n {
        squeezed = single_mode_squeezer(i, s, n)?.apply(&squeezed)?;
    }
    // C_Z gates only shear p by x, so their product just sums the weights
    // and is independent of gate order.
    let mut network = SymplecticOp::identity(n)?;
    for &(a, b) in edges {
        let w = adjacency.get(a, b).to_f64().expect("i64 ratio converts to f64");
        network = network.then(&cz_gate(a, b, w, n)?)?;
    }
    network.apply(&squeezed)
}

/// Four-mode resource: a beam splitter of transmittivity `t` on modes 2, 3
/// of two two-mode squeezed vacua on (1, 2) and (3, 4). `r = 0` is allowed.
pub fn psi4(r: f64, t: f64) -> Result<CovarianceMatrix> {
    let pair = tmss_cm(r)?;
    beam_splitter(1, 2, t, 4)?.apply(&pair.direct_sum(&pair))
}

/// Local operations bringing a four-mode resource to two TMSS pairs across a 2|2 split.
#[derive(Debug, Clone)]
pub struct LocalReduction {
    /// Acts only on the modes of block `A`.
    pub s_a: SymplecticOp,
    /// Acts only on the modes of block `B`.
    pub s_b: SymplecticOp,
    /// Local squeezer parameter applied to each mode (1 where none is needed).
    pub squeezers: Vec<f64>,
    /// `(a, b)` mode pairs of the resulting TMSS, `a ∈ A`, `b ∈ B`.
    pub pairs: Vec<(usize, usize)>,
    /// Squeezing `r_j` of each pair, in the order of `pairs`.
    pub channel_squeezings: Vec<f64>,
    /// The transformed state.
    pub transformed: CovarianceMatrix,
    /// Max-entry distance between `transformed` and the TMSS normal form.
    pub residual: f64,
}

struct Candidate {
    s_a: SymplecticOp,
    s_b: SymplecticOp,
    squeezers: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    channel_squeezings: Vec<f64>,
    transformed: CovarianceMatrix,
    residual: f64,
}

/// Pairs modes by their strongest position correlation, balances each mode
/// with a local squeezer, flips the sign of anticorrelated `B` modes and
/// measures the distance to the TMSS normal form.
fn normal_form(gamma: &CovarianceMatrix, p: &Bipartition, s_a: SymplecticOp, s_b: SymplecticOp) -> Result<Candidate> {
    let n = gamma.n_modes();
    let mixed = s_b.apply(&s_a.apply(gamma)?)?;
    let m = mixed.matrix();
    let mut pairs = Vec::new();
    let mut free_b: Vec<usize> = p.block_b().to_vec();
    for &a in p.block_a() {
        let (pos, &b) = free_b
            .iter()
            .enumerate()
            .max_by(|(_, &u), (_, &v)| m[(a, u)].abs().total_cmp(&m[(a, v)].abs()))
            .ok_or_else(|| Error::InvalidBipartition("block B smaller than block A".into()))?;
        free_b.remove(pos);
        pairs.push((a, b));
    }

    let squeezers: Vec<f64> = (0..n).map(|i| (m[(n + i, n + i)] / m[(i, i)]).powf(0.25)).collect();
    let (mut local_a, mut local_b) = (s_a, s_b);
    for i in 0..n {
        if (squeezers[i] - 1.0).abs() > f64::EPSILON {
            let sq = single_mode_squeezer(i, squeezers[i], n)?;
            if p.block_a().contains(&i) {
                local_a = local_a.then(&sq)?;
            } else {
                local_b = local_b.then(&sq)?;
            }
        }
    }
    for &(a, b) in &pairs {
        if m[(a, b)] < 0.0 {
            local_b = local_b.then(&phase_flip(b, n)?)?;
        }
    }

    let transformed = local_b.apply(&local_a.apply(gamma)?)?;
    let t = transformed.matrix();
    let channel_squeezings: Vec<f64> = pairs.iter().map(|&(a, _)| 0.5 * t[(a, a)].max(1.0).acosh()).collect();
    let mut target = DMatrix::identity(2 * n, 2 * n);
    for (&(a, b), &r) in pairs.iter().zip(&channel_squeezings) {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        for q in [a, b] {
            target[(q, q)] = c;
            target[(n + q, n + q)] = c;
        }
        target[(a, b)] = s;
        target[(b, a)] = s;
        target[(n + a, n + b)] = -s;
        target[(n + b, n + a)] = -s;
    }
    let residual = (t - target).amax();
    Ok(Candidate {
        s_a: local_a,
        s_b: local_b,
        squeezers,
        pairs,
        channel_squeezings,
        transformed,
        residual,
    })
}

/// Local reduction of the four-mode resource `psi4(r, t)` across a 2|2 split.
///
/// For `A = (1,4)` block `B` undoes the resource beam splitter. For the other
/// two splits each side mixes its modes on a 50:50 beam splitter, and every
/// mode is then squeezed by `s_i = (Var p_i / Var x_i)^{1/4}`, which is solved
/// from the state rather than assumed. Both orientations of each 50:50
/// splitter are tried and the one closest to the normal form is kept.
pub fn psi4_local_reduction(gamma: &CovarianceMatrix, t: f64, p: &Bipartition) -> Result<LocalReduction> {
    if gamma.n_modes() != 4 || p.n() != 4 || p.k() != 2 {
        return Err(Error::InvalidArgument(
            "local reduction needs a four-mode resource and a 2|2 bipartition".into(),
        ));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidTransmittivity(t));
    }
    let (a, b) = (p.block_a(), p.block_b());
    let candidates: Vec<(SymplecticOp, SymplecticOp)> = if a == [0, 3] {
        vec![(SymplecticOp::identity(4)?, beam_splitter(1, 2, t, 4)?.inverse())]
    } else {
        let mut v = Vec::new();
        for (a0, a1) in [(a[0], a[1]), (a[1], a[0])] {
            for (b0, b1) in [(b[0], b[1]), (b[1], b[0])] {
                v.push((beam_splitter(a0, a1, 0.5, 4)?, beam_splitter(b0, b1, 0.5, 4)?));
            }
        }
        v
    };
    let mut best: Option<Candidate> = None;
    for (s_a, s_b) in candidates {
        let c = normal_form(gamma, p, s_a, s_b)?;
        if best.as_ref().is_none_or(|b| c.residual < b.residual) {
            best = Some(c);
        }
    }
    let best = best.expect("at least one candidate");
    if !(best.residual <= NORMAL_FORM_TOL * gamma.matrix().amax().max(1.0)) {
        return Err(Error::NormalFormMismatch(best.residual));
    }
    Ok(LocalReduction {
        s_a: best.s_a,
        s_b: best.s_b,
        squeezers: best.squeezers,
        pairs: best.pairs,
        channel_squeezings: best.channel_squeezings,
        transformed: best.transformed,
        residual: best.residual,
    })
}

/// Permutation-symmetric K-mode GHZ-type state with local squeezing `z`: one
/// momentum-squeezed and `K - 1` position-squeezed vacua through a balanced
/// splitter network.
pub fn ghz_input_cm(k: usize, z: f64) -> Result<CovarianceMatrix> {
    if k == 0 {
        return Err(Error::ZeroModes);
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidSqueezing(z));
    }
    let (up, down) = ((2.0 * z).exp(), (-2.0 * z).exp());
    let kf = k as f64;
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let (x, p) = if i == j {
                ((up + (kf - 1.0) * down) / kf, (down + (kf - 1.0) * up) / kf)
            } else {
                ((up - down) / kf, (down - up) / kf)
            };
            m[(i, j)] = x;
            m[(k + i, k + j)] = p;
        }
    }
    Ok(CovarianceMatrix::from_trusted(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_state_cm, random_graph};
    use crate::symplectic::symplectic_eigenvalues;

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn tmss_examples() {
        assert_eq!(tmss_cm(0.0).unwrap().matrix(), &DMatrix::identity(4, 4));
        let g = tmss_cm(1.0).unwrap();
        let nu = g.reduce(&[0]).unwrap().symplectic_eigenvalues().unwrap().max();
        assert!((nu - 2f64.cosh()).abs() < 1e-12);
        for v in g.symplectic_eigenvalues().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
        assert!(tmss_cm(-0.1).is_err());
    }

    #[test]
    fn beam_splitter_properties() {
        let bs = beam_splitter(1, 2, 1.0 / 3.0, 4).unwrap();
        assert!(bs.residual() <= 1e-14);
        let prod = bs.matrix() * bs.inverse().matrix();
        assert!(max_diff(&prod, &DMatrix::identity(8, 8)) < 1e-15);
        assert!(max_diff(bs.inverse().matrix(), &bs.matrix().transpose()) < 1e-15);
        let near_one = beam_splitter(0, 1, 1.0 - 1e-14, 2).unwrap();
        assert!(max_diff(near_one.matrix(), &DMatrix::identity(4, 4)) < 1e-6);
        assert!(beam_splitter(0, 1, 1.0, 2).is_err());
        assert!(beam_splitter(0, 1, 0.0, 2).is_err());
        assert!(beam_splitter(1, 1, 0.5, 2).is_err());
        assert!(bs.acts_only_on(&[1, 2], 0.0));
        assert!(!bs.acts_only_on(&[1, 3], 0.0));
    }

    #[test]
    fn cz_gates() {
        assert_eq!(cz_gate(0, 1, 0.0, 3).unwrap().matrix(), &DMatrix::identity(6, 6));
        let a = cz_gate(0, 1, 2.0, 3).unwrap();
        let b = cz_gate(1, 2, -0.5, 3).unwrap();
        assert_eq!(a.then(&b).unwrap().matrix(), b.then(&a).unwrap().matrix());
        assert!(a.residual() == 0.0);
        assert!(cz_gate(0, 0, 1.0, 3).is_err());
    }

    #[test]
    fn squeezer_examples() {
        assert_eq!(
            single_mode_squeezer(0, 1.0, 2).unwrap().matrix(),
            &DMatrix::identity(4, 4)
        );
        let sq = single_mode_squeezer(1, 3.0, 2).unwrap();
        let g = sq.apply(&CovarianceMatrix::vacuum(2).unwrap()).unwrap();
        assert!((g.matrix()[(1, 1)] - 9.0).abs() < 1e-15);
        assert!((g.matrix()[(3, 3)] - 1.0 / 9.0).abs() < 1e-15);
        assert!((sq.matrix().determinant() - 1.0).abs() < 1e-14);
        assert!(single_mode_squeezer(0, 0.0, 2).is_err());
        assert!(single_mode_squeezer(0, -1.0, 2).is_err());
    }

    #[test]
    fn invalid_matrix_is_not_symplectic() {
        let m = DMatrix::from_diagonal_element(4, 4, 2.0);
        assert!(matches!(SymplecticOp::new(m, "2I"), Err(Error::NotSymplectic(_))));
    }

    #[test]
    fn circuit_matches_closed_form() {
        for seed in 0..10 {
            let g = random_graph(6, 6, seed).unwrap();
            let r = SqueezingParameter::new(1.0).unwrap();
            let circuit = graph_state_circuit(&g, r).unwrap();
            let closed = graph_state_cm(&g, r);
            let scale = closed.matrix().amax().max(1.0);
            assert!(max_diff(circuit.matrix(), closed.matrix()) / scale < 1e-12);
            let mut reversed: Vec<(usize, usize)> = g.edges().into_iter().map(|(a, b, _)| (b, a)).collect();
            reversed.reverse();
            let other = graph_state_circuit_ordered(&g, r, &reversed).unwrap();
            assert_eq!(other.matrix(), circuit.matrix());
        }
    }

    #[test]
    fn psi4_is_pure() {
        let g = psi4(1.0, 1.0 / 3.0).unwrap();
        for v in symplectic_eigenvalues(&g).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
        assert!(psi4(1.0, 1.5).is_err());
        assert!(max_diff(psi4(0.0, 0.5).unwrap().matrix(), &DMatrix::identity(8, 8)) < 1e-15);
    }

    #[test]
    fn reduction_across_one_four() {
        let t = 1.0 / 3.0;
        let g = psi4(1.0, t).unwrap();
        let p = Bipartition::new(4, &[0, 3]).unwrap();
        let red = psi4_local_reduction(&g, t, &p).unwrap();
        assert!(red.residual <= 1e-10);
        let expected = tmss_cm(1.0).unwrap().direct_sum(&tmss_cm(1.0).unwrap());
        assert!(max_diff(red.transformed.matrix(), expected.matrix()) <= 1e-10);
        assert!(red.s_a.acts_only_on(&[0, 3], 0.0));
        assert!(red.s_b.acts_only_on(&[1, 2], 0.0));
    }

    #[test]
    fn reduction_across_one_two() {
        let (r, t) = (1.0, 1.0 / 3.0);
        let g = psi4(r, t).unwrap();
        let p = Bipartition::new(4, &[0, 1]).unwrap();
        let red = psi4_local_reduction(&g, t, &p).unwrap();
        assert!(red.residual <= 1e-8, "residual {}", red.residual);
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let expected = 0.5 * (c * c - t * s * s).sqrt().acosh();
        for r_j in &red.channel_squeezings {
            assert!((r_j - expected).abs() < 1e-9);
        }
        assert!(red.s_a.acts_only_on(&[0, 1], 0.0));
        assert!(red.s_b.acts_only_on(&[2, 3], 0.0));
        // the solved squeezer on the first mode
        let closed = ((c - t.sqrt() * s) / (c + t.sqrt() * s)).powf(0.25);
        assert!(red
            .squeezers
            .iter()
            .any(|&q| (q - closed).abs() < 1e-9 || (q - 1.0 / closed).abs() < 1e-9));
    }

    #[test]
    fn reduction_rejects_other_shapes() {
        let g = psi4(1.0, 0.5).unwrap();
        assert!(psi4_local_reduction(&g, 0.5, &Bipartition::new(4, &[0]).unwrap()).is_err());
        let six = CovarianceMatrix::vacuum(6).unwrap();
        assert!(psi4_local_reduction(&six, 0.5, &Bipartition::new(6, &[0, 1]).unwrap()).is_err());
    }

    #[test]
    fn ghz_examples() {
        assert_eq!(ghz_input_cm(3, 0.0).unwrap().matrix(), &DMatrix::identity(6, 6));
        let single = ghz_input_cm(1, 0.7).unwrap();
        assert!((single.matrix()[(0, 0)] - 1.4f64.exp()).abs() < 1e-12);
        assert!((single.matrix()[(1, 1)] - (-1.4f64).exp()).abs() < 1e-12);
        for k in 1..=6 {
            for z in [0.0, 0.5, 1.0, 2.0] {
                for v in ghz_input_cm(k, z).unwrap().symplectic_eigenvalues().unwrap().values() {
                    assert!((v - 1.0).abs() < 1e-9);
                }
            }
        }
        assert!(ghz_input_cm(0, 1.0).is_err());
    }
}
