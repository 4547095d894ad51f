//! Covariance-level simulation of mode-wise teleportation through channels
//! distilled from a shared resource, with closed-form fidelity references.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuits::{ghz_input_cm, psi4, tmss_cm};
use crate::error::{Error, Result};
use crate::graph::{graph_state_cm, AdjacencyMatrix, SqueezingParameter};
use crate::mmes::{effective_squeezings, effective_squeezings_unchecked, Bipartition};
use crate::symplectic::{gaussian_fidelity_pure, CovarianceMatrix};

/// Two-mode-squeezing degree of each teleportation channel. `+∞` denotes a
/// perfect EPR channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChannelSpec {
    squeezings: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(squeezings: Vec<f64>) -> Result<Self> {
        if squeezings.is_empty() {
            return Err(Error::ZeroModes);
        }
        if let Some(&r) = squeezings.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::InvalidSqueezing(r));
        }
        Ok(Self { squeezings })
    }

    pub fn uniform(k: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; k])
    }

    pub fn len(&self) -> usize {
        self.squeezings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squeezings.is_empty()
    }

    pub fn squeezings(&self) -> &[f64] {
        &self.squeezings
    }
}

/// Unit-gain teleportation of each input mode through its own TMSS channel:
/// adds `2 e^{-2 r_j}` to both quadrature variances of mode `j`.
pub fn bk_teleport_cm(input: &CovarianceMatrix, channels: &ChannelSpec) -> Result<CovarianceMatrix> {
    let k = input.n_modes();
    if channels.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: channels.len(),
        });
    }
    let mut m = input.matrix().clone();
    for (j, r) in channels.squeezings.iter().enumerate() {
        let noise = 2.0 * (-2.0 * r).exp();
        m[(j, j)] += noise;
        m[(k + j, k + j)] += noise;
    }
    Ok(CovarianceMatrix::from_trusted(m))
}

/// Fidelity of teleporting a TMSS of squeezing `z` through two channels of
/// squeezing `r_a`: `e^{2 r_a} / (2 (cosh 2 r_a + cosh 2z))`.
pub fn tmss_teleport_fidelity(r_a: f64, z: f64) -> f64 {
    let f = (2.0 * r_a).exp() / (2.0 * ((2.0 * r_a).cosh() + (2.0 * z).cosh()));
    if f.is_nan() {
        // both terms overflowed; same value written in decaying exponentials
        let e = (-2.0 * r_a).exp();
        1.0 / (1.0 + 2.0 * e * (2.0 * z).cosh() + e * e)
    } else {
        f
    }
}

/// Fidelity of teleporting a single-mode vacuum through a channel of squeezing `r`.
pub fn vacuum_teleport_fidelity(r: f64) -> f64 {
    0.5 * (1.0 + r.tanh())
}

/// `(((cosh z)^{-1} F_1)^K, F_1^K)` for a K-mode GHZ-type input of local squeezing `z`.
pub fn ghz_fidelity_bounds(k: usize, r: f64, z: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::ZeroModes);
    }
    let f1 = vacuum_teleport_fidelity(r);
    let k = k as i32;
    Ok(((f1 / z.cosh()).powi(k), f1.powi(k)))
}

/// Shared multimode resource from which the channels are distilled.
#[derive(Debug, Clone)]
pub enum Resource {
    Graph {
        adjacency: AdjacencyMatrix,
        r: SqueezingParameter,
    },
    Psi4 {
        r: f64,
        t: f64,
    },
    Tmss {
        r: f64,
    },
    /// Arbitrary state; purity is checked numerically.
    Covariance(CovarianceMatrix),
}

impl Resource {
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        match self {
            Resource::Graph { adjacency, r } => Ok(graph_state_cm(adjacency, *r)),
            Resource::Psi4 { r, t } => psi4(*r, *t),
            Resource::Tmss { r } => tmss_cm(*r),
            Resource::Covariance(g) => Ok(g.clone()),
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Resource::Graph { adjacency, .. } => adjacency.n_vertices(),
            Resource::Psi4 { .. } => 4,
            Resource::Tmss { .. } => 2,
            Resource::Covariance(g) => g.n_modes(),
        }
    }

    /// Channel squeezings across `p`, sorted descending.
    pub fn channels(&self, p: &Bipartition) -> Result<ChannelSpec> {
        if p.n() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                got: p.n(),
            });
        }
        let gamma = self.covariance()?;
        match self {
            // builtin constructions are pure exactly; at large squeezing a
            // numerical purity test would only measure rounding
            Resource::Covariance(_) => effective_squeezings(&gamma, p),
            _ => effective_squeezings_unchecked(&gamma, p),
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Graph { adjacency, r } => write!(f, "graph(N={}, r={})", adjacency.n_vertices(), r.value()),
            Resource::Psi4 { r, t } => write!(f, "psi4(r={r}, t={t})"),
            Resource::Tmss { r } => write!(f, "tmss(r={r})"),
            Resource::Covariance(g) => write!(f, "covariance(N={})", g.n_modes()),
        }
    }
}

/// Which channel teleports which input mode.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ChannelAssignment {
    /// Input mode `j` uses the `j`-th largest channel.
    #[default]
    Descending,
    /// Input mode `j` uses channel `order[j]` of the descending list.
    Explicit(Vec<usize>),
}

impl ChannelAssignment {
    fn resolve(&self, k: usize) -> Result<Vec<usize>> {
        match self {
            ChannelAssignment::Descending => Ok((0..k).collect()),
            ChannelAssignment::Explicit(order) => {
                let mut seen = vec![false; k];
                if order.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        got: order.len(),
                    });
                }
                for &c in order {
                    if c >= k || std::mem::replace(&mut seen[c], true) {
                        return Err(Error::InvalidArgument(format!(
                            "channel assignment {order:?} is not a permutation of 0..{k}"
                        )));
                    }
                }
                Ok(order.clone())
            }
        }
    }
}

/// State to be teleported.
#[derive(Debug, Clone)]
pub enum InputState {
    Tmss { z: f64 },
    Ghz { k: usize, z: f64 },
    Vacuum { k: usize },
    Covariance(CovarianceMatrix),
}

impl InputState {
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        match self {
            InputState::Tmss { z } => tmss_cm(*z),
            InputState::Ghz { k, z } => ghz_input_cm(*k, *z),
            InputState::Vacuum { k } => CovarianceMatrix::vacuum(*k),
            InputState::Covariance(g) => Ok(g.clone()),
        }
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputState::Tmss { z } => write!(f, "tmss(z={z})"),
            InputState::Ghz { k, z } => write!(f, "ghz(K={k}, z={z})"),
            InputState::Vacuum { k } => write!(f, "vacuum(K={k})"),
            InputState::Covariance(g) => write!(f, "covariance(K={})", g.n_modes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    /// Channel squeezings across the bipartition, descending.
    pub channels: ChannelSpec,
    /// `assignment[j]`: index into `channels` used for input mode `j`.
    pub assignment: Vec<usize>,
    pub input: String,
    pub resource: Option<String>,
    pub bipartition: Option<Bipartition>,
}

/// Teleports `input` mode-wise through `channels` in the given assignment
/// and returns the fidelity with the original input.
pub fn teleport_through(
    input: &InputState,
    channels: &ChannelSpec,
    assignment: &ChannelAssignment,
) -> Result<FidelityReport> {
    let gamma_in = input.covariance()?;
    let k = gamma_in.n_modes();
    if channels.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: channels.len(),
        });
    }
    let order = assignment.resolve(k)?;
    let used = ChannelSpec::new(order.iter().map(|&c| channels.squeezings[c]).collect())?;
    let gamma_out = bk_teleport_cm(&gamma_in, &used)?;
    Ok(FidelityReport {
        fidelity: gaussian_fidelity_pure(&gamma_in, &gamma_out)?,
        channels: channels.clone(),
        assignment: order,
        input: input.to_string(),
        resource: None,
        bipartition: None,
    })
}

/// Distils `K = |A|` channels from `resource` across `p` and teleports the
/// K-mode `input` through them.
pub fn teamwork_fidelity(
    resource: &Resource,
    p: &Bipartition,
    input: &InputState,
    assignment: &ChannelAssignment,
) -> Result<FidelityReport> {
    let channels = resource.channels(p)?;
    let mut report = teleport_through(input, &channels, assignment)?;
    report.resource = Some(resource.to_string());
    report.bipartition = Some(p.clone());
    Ok(report)
}

/// One grid point of the fidelity curve: a TMSS input teleported through
/// `psi4(r, t)` split as `(1,4)`, `(1,2)` and `(1,3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub r: f64,
    pub f_14: f64,
    pub f_12: f64,
    pub f_13: f64,
}

pub fn fidelity_curve(t: f64, z: f64, r_grid: &[f64]) -> Result<Vec<CurveRow>> {
    if r_grid.is_empty() {
        return Err(Error::InvalidArgument("squeezing grid is empty".into()));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidTransmittivity(t));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::InvalidSqueezing(z));
    }
    let splits = [
        Bipartition::new(4, &[0, 3])?,
        Bipartition::new(4, &[0, 1])?,
        Bipartition::new(4, &[0, 2])?,
    ];
    let input = InputState::Tmss { z };
    r_grid
        .par_iter()
        .map(|&r| {
            let resource = Resource::Psi4 { r, t };
            let f = |p: &Bipartition| {
                teamwork_fidelity(&resource, p, &input, &ChannelAssignment::Descending).map(|rep| rep.fidelity)
            };
            Ok(CurveRow {
                r,
                f_14: f(&splits[0])?,
                f_12: f(&splits[1])?,
                f_13: f(&splits[2])?,
            })
        })
        .collect()
}

/// CSV with header `r,F_14,F_12,F_13`; values use the shortest round-trip form.
pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("r,F_14,F_12,F_13\n");
    for row in rows {
        out.push_str(&format!("{},{},{},{}\n", row.r, row.f_14, row.f_12, row.f_13));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_form_examples() {
        let f = tmss_teleport_fidelity(1.0, 0.0);
        assert!((f - 0.7758).abs() < 1e-4, "{f}");
        let alt = 1.0 / (1.0 + 2.0 * (-2f64).exp() + (-4f64).exp());
        assert!((f - alt).abs() < 1e-15);
        assert!((tmss_teleport_fidelity(400.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(tmss_teleport_fidelity(1.0, 300.0) < 1e-100);
    }

    #[test]
    fn single_mode_examples() {
        assert_eq!(vacuum_teleport_fidelity(0.0), 0.5);
        assert!((vacuum_teleport_fidelity(1.0) - 0.880_797_077_977_882_4).abs() < 1e-14);
        let (lo, hi) = ghz_fidelity_bounds(3, 1.0, 0.0).unwrap();
        assert_eq!(lo, hi);
        assert!(ghz_fidelity_bounds(0, 1.0, 0.0).is_err());
    }

    #[test]
    fn teleport_noise_model() {
        let vac = CovarianceMatrix::vacuum(2).unwrap();
        let out = bk_teleport_cm(&vac, &ChannelSpec::uniform(2, 0.0).unwrap()).unwrap();
        assert_eq!(out.matrix(), &nalgebra::DMatrix::from_diagonal_element(4, 4, 3.0));
        let perfect = bk_teleport_cm(&vac, &ChannelSpec::uniform(2, f64::INFINITY).unwrap()).unwrap();
        assert_eq!(perfect.matrix(), vac.matrix());
        assert!(bk_teleport_cm(&vac, &ChannelSpec::uniform(3, 1.0).unwrap()).is_err());
        assert!(ChannelSpec::new(vec![-1.0]).is_err());
        assert!(ChannelSpec::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn assignment_validation() {
        let ch = ChannelSpec::new(vec![2.0, 1.0]).unwrap();
        let input = InputState::Vacuum { k: 2 };
        let swapped = teleport_through(&input, &ch, &ChannelAssignment::Explicit(vec![1, 0])).unwrap();
        assert_eq!(swapped.assignment, vec![1, 0]);
        assert!(teleport_through(&input, &ch, &ChannelAssignment::Explicit(vec![0, 0])).is_err());
        assert!(teleport_through(&input, &ch, &ChannelAssignment::Explicit(vec![0])).is_err());
    }

    #[test]
    fn tmss_resource_gives_single_mode_formula() {
        let p = Bipartition::new(2, &[0]).unwrap();
        let rep = teamwork_fidelity(
            &Resource::Tmss { r: 1.0 },
            &p,
            &InputState::Vacuum { k: 1 },
            &ChannelAssignment::Descending,
        )
        .unwrap();
        assert!((rep.fidelity - vacuum_teleport_fidelity(1.0)).abs() < 1e-12);
    }

    #[test]
    fn psi4_split_one_two() {
        let (r, t, z) = (1.0, 1.0 / 3.0, 2.0);
        let p = Bipartition::new(4, &[0, 1]).unwrap();
        let rep = teamwork_fidelity(
            &Resource::Psi4 { r, t },
            &p,
            &InputState::Tmss { z },
            &ChannelAssignment::Descending,
        )
        .unwrap();
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let r_a = 0.5 * (c * c - t * s * s).sqrt().acosh();
        assert!((rep.fidelity - tmss_teleport_fidelity(r_a, z)).abs() < 1e-9);
        assert!(teamwork_fidelity(
            &Resource::Psi4 { r, t },
            &p,
            &InputState::Vacuum { k: 3 },
            &ChannelAssignment::Descending
        )
        .is_err());
    }

    #[test]
    fn curve_csv_round_trips() {
        let rows = fidelity_curve(1.0 / 3.0, 2.0, &[0.0, 0.5, 1.0]).unwrap();
        let csv = curve_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("r,F_14,F_12,F_13"));
        for (line, row) in lines.zip(&rows) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(v, vec![row.r, row.f_14, row.f_12, row.f_13]);
        }
        let zero = rows[0];
        assert_eq!(zero.f_14, zero.f_12);
        assert_eq!(zero.f_14, zero.f_13);
        assert!(fidelity_curve(1.0 / 3.0, 2.0, &[]).is_err());
        assert!(fidelity_curve(1.2, 2.0, &[1.0]).is_err());
    }
}
