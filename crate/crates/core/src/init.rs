//! Density-based projected clustering of the initialization buffer.
//!
//! Each buffered point gets a preference vector from the variance of its
//! full-dimensional `eps`-neighborhood. A point is a projected core point when
//! that neighborhood has at most `pi` preferred dimensions and at least `mu`
//! points lie within `eps` under the symmetric projected distance. Clusters
//! grow from core points in ascending index order; each finished cluster is
//! folded into one micro-cluster.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::point::{check_dim, check_values, Point};
use crate::summary::{weighted_distance, EaTuple, PreferenceVector, Summary, TupleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborKind {
    /// Euclidean distance in the full space.
    FullDim,
    /// Symmetric projected distance.
    Projected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub anchor: usize,
    /// Buffer indices in ascending order, including the anchor.
    pub members: Vec<usize>,
    pub kind: NeighborKind,
}

/// `max(dist_p(p, q), dist_p(q, p))` where `dist_p(a, b)` weights dimension
/// `j` by `psi_j(a) / rho`.
pub fn point_projected_distance(
    p: &[f64],
    q: &[f64],
    psi_p: &PreferenceVector,
    psi_q: &PreferenceVector,
    params: &Params,
) -> Result<f64> {
    check_dim(q, p.len())?;
    for psi in [psi_p, psi_q] {
        if psi.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                got: psi.len(),
            });
        }
    }
    let pq = weighted_distance(p, q, psi_p, params.rho);
    let qp = weighted_distance(q, p, psi_q, params.rho);
    Ok(pq.max(qp))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Full-dimensional `eps`-neighborhood of `idx`.
pub fn eps_neighborhood(idx: usize, buffer: &[Point], params: &Params) -> NeighborSet {
    let anchor = &buffer[idx].values;
    NeighborSet {
        anchor: idx,
        members: buffer
            .iter()
            .enumerate()
            .filter(|(_, q)| euclidean(anchor, &q.values) <= params.eps)
            .map(|(i, _)| i)
            .collect(),
        kind: NeighborKind::FullDim,
    }
}

fn neighborhood_preference(
    members: &[usize],
    buffer: &[Point],
    params: &Params,
) -> PreferenceVector {
    let dim = buffer[members[0]].dim();
    let n = members.len() as f64;
    let mut mean = vec![0.0; dim];
    for &i in members {
        for (m, x) in mean.iter_mut().zip(&buffer[i].values) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for &i in members {
        for (j, x) in buffer[i].values.iter().enumerate() {
            let d = x - mean[j];
            var[j] += d * d;
        }
    }
    var.iter_mut().for_each(|v| *v /= n);
    PreferenceVector::from_variances(&var, params)
}

/// Preference vector of a buffered point: dimension `j` is preferred when the
/// population variance of `j` over the point's full-dimensional
/// `eps`-neighborhood is below `xi`.
pub fn point_preference_vector(idx: usize, buffer: &[Point], params: &Params) -> PreferenceVector {
    let hood = eps_neighborhood(idx, buffer, params);
    neighborhood_preference(&hood.members, buffer, params)
}

/// Whether `idx` is a projected core point of `buffer`.
pub fn is_core_point(idx: usize, buffer: &[Point], params: &Params) -> bool {
    Neighborhoods::new(buffer, params)
        .map(|n| n.is_core(idx))
        .unwrap_or(false)
}

/// Neighborhoods, preference vectors and core flags of a whole buffer.
#[derive(Debug, Clone)]
pub struct Neighborhoods {
    pub full: Vec<NeighborSet>,
    pub preference: Vec<PreferenceVector>,
    pub projected: Vec<NeighborSet>,
    core: Vec<bool>,
}

impl Neighborhoods {
    pub fn new(buffer: &[Point], params: &Params) -> Result<Self> {
        if let Some(first) = buffer.first() {
            for p in buffer {
                check_values(&p.values, first.dim())?;
            }
        }
        let full: Vec<NeighborSet> = (0..buffer.len())
            .map(|i| eps_neighborhood(i, buffer, params))
            .collect();
        let preference: Vec<PreferenceVector> = full
            .iter()
            .map(|h| neighborhood_preference(&h.members, buffer, params))
            .collect();
        let projected: Vec<NeighborSet> = (0..buffer.len())
            .map(|i| {
                let members = (0..buffer.len())
                    .filter(|&k| {
                        let d = weighted_distance(
                            &buffer[i].values,
                            &buffer[k].values,
                            &preference[i],
                            params.rho,
                        )
                        .max(weighted_distance(
                            &buffer[k].values,
                            &buffer[i].values,
                            &preference[k],
                            params.rho,
                        ));
                        d <= params.eps
                    })
                    .collect();
                NeighborSet {
                    anchor: i,
                    members,
                    kind: NeighborKind::Projected,
                }
            })
            .collect();
        let core = (0..buffer.len())
            .map(|i| {
                preference[i].pdim() <= params.pi_dim
                    && projected[i].members.len() as f64 >= params.mu
            })
            .collect();
        Ok(Neighborhoods {
            full,
            preference,
            projected,
            core,
        })
    }

    pub fn is_core(&self, idx: usize) -> bool {
        self.core[idx]
    }

    pub fn core_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.core
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i)
    }
}

/// Clusters of buffer indices, each sorted ascending, in discovery order.
///
/// Seeds are scanned in ascending index order. A cluster starts with the
/// unclassified members of the seed's full-dimensional neighborhood and
/// expands through core points to their unclassified projected neighbors.
/// Points never claimed by a cluster are dropped.
pub fn initial_memberships(buffer: &[Point], params: &Params) -> Result<Vec<Vec<usize>>> {
    if buffer.is_empty() {
        return Ok(Vec::new());
    }
    let hoods = Neighborhoods::new(buffer, params)?;
    let mut assigned = vec![false; buffer.len()];
    let mut clusters = Vec::new();
    for seed in 0..buffer.len() {
        if assigned[seed] || !hoods.is_core(seed) {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for &i in &hoods.full[seed].members {
            if !assigned[i] {
                assigned[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(q) = queue.pop_front() {
            members.push(q);
            if !hoods.is_core(q) {
                continue;
            }
            for &i in &hoods.projected[q].members {
                if !assigned[i] {
                    assigned[i] = true;
                    queue.push_back(i);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    Ok(clusters)
}

/// Folds each initial cluster into a summary by sequential insertion in
/// buffer order. Ids are assigned from `first_id` upwards.
pub fn build_initial<S: Summary>(
    buffer: &[Point],
    params: &Params,
    first_id: TupleId,
) -> Result<Vec<S>> {
    initial_memberships(buffer, params)?
        .iter()
        .zip(first_id..)
        .map(|(members, id)| {
            let mut tuple = S::seeded(id, &buffer[members[0]], params)?;
            for &i in &members[1..] {
                tuple.absorb(&buffer[i], params)?;
            }
            Ok(tuple)
        })
        .collect()
}

/// Initial core micro-clusters as moving-average tuples.
pub fn build_initial_clusters(buffer: &[Point], params: &Params) -> Result<Vec<EaTuple>> {
    build_initial(buffer, params, 0)
}
