//! On-demand final clustering of the core micro-clusters.
//!
//! Each core micro-cluster acts as a virtual point at its center with its own
//! preference vector. Two cores are linked when the symmetric projected
//! distance between their centers is at most `eps`; final clusters are the
//! connected components of that graph.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::init::point_projected_distance;
use crate::params::Params;
use crate::summary::{Summary, TupleId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalClustering {
    /// Each cluster lists core ids in ascending order; clusters are ordered
    /// by their smallest id.
    pub clusters: Vec<Vec<TupleId>>,
    pub query_seq: u64,
}

impl FinalClustering {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

pub fn final_clusters<S: Summary>(
    cores: &[S],
    params: &Params,
    query_seq: u64,
) -> Result<FinalClustering> {
    let centers: Vec<_> = cores.iter().map(|c| c.center().into_owned()).collect();
    let prefs = cores
        .iter()
        .map(|c| c.preference_vector(params))
        .collect::<Result<Vec<_>>>()?;

    let mut components = UnionFind::<usize>::new(cores.len());
    for i in 0..cores.len() {
        for j in (i + 1)..cores.len() {
            let d = point_projected_distance(&centers[i], &centers[j], &prefs[i], &prefs[j], params)?;
            if d <= params.eps {
                components.union(i, j);
            }
        }
    }

    let labels = components.into_labeling();
    let mut by_root: std::collections::BTreeMap<usize, Vec<TupleId>> = Default::default();
    for (i, root) in labels.into_iter().enumerate() {
        by_root.entry(root).or_default().push(cores[i].id());
    }
    let mut clusters: Vec<Vec<TupleId>> = by_root
        .into_values()
        .map(|mut ids| {
            ids.sort_unstable();
            ids
        })
        .collect();
    clusters.sort_unstable_by_key(|c| c[0]);
    Ok(FinalClustering {
        clusters,
        query_seq,
    })
}
