//! Online maintenance of core and outlier micro-clusters.
//!
//! Each arriving point first tries the core list, then the outlier list, and
//! otherwise opens a new outlier micro-cluster. Whichever list is tried
//! without success is degraded once; on success every other member of that
//! list is degraded once. Promotions, demotions and stale-outlier deletion
//! happen only in [`Engine::window_rebalance`], which the caller invokes after
//! every `N` points.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::init::build_initial;
use crate::params::Params;
use crate::point::{check_values, Point};
use crate::summary::{McClass, Moments, Summary, TupleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeTarget {
    Core,
    Outlier,
    NewOutlier,
}

/// Where a point went and how far it was from the chosen center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub target: MergeTarget,
    pub tuple_id: TupleId,
    pub distance: f64,
}

/// Micro-cluster moves performed by one [`Engine::window_rebalance`] call.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rebalance {
    pub demoted: Vec<TupleId>,
    pub promoted: Vec<TupleId>,
    pub deleted: Vec<TupleId>,
}

/// Live core and outlier micro-clusters plus stream counters.
///
/// Single-owner state machine; take a `clone()` for a snapshot.
#[derive(Debug, Clone)]
pub struct Engine<S> {
    cores: Vec<S>,
    outliers: Vec<S>,
    window_index: u64,
    points_seen: u64,
    last_seq: Option<u64>,
    next_id: TupleId,
    dim: usize,
    params: Params,
}

impl<S: Summary> Engine<S> {
    pub fn new(params: Params, dim: usize) -> Result<Self> {
        params.validate_for_dim(dim)?;
        Ok(Engine {
            cores: Vec::new(),
            outliers: Vec::new(),
            window_index: 0,
            points_seen: 0,
            last_seq: None,
            next_id: 0,
            dim,
            params,
        })
    }

    /// An engine whose core list starts as `cores`.
    pub fn with_cores(params: Params, dim: usize, cores: Vec<S>) -> Result<Self> {
        let mut engine = Self::new(params, dim)?;
        engine.next_id = cores.iter().map(|c| c.id() + 1).max().unwrap_or(0);
        engine.cores = cores;
        Ok(engine)
    }

    /// Like [`Engine::with_cores`] plus a preset outlier list.
    pub fn with_lists(params: Params, dim: usize, cores: Vec<S>, outliers: Vec<S>) -> Result<Self> {
        let mut engine = Self::with_cores(params, dim, cores)?;
        engine.next_id = engine
            .next_id
            .max(outliers.iter().map(|c| c.id() + 1).max().unwrap_or(0));
        engine.outliers = outliers;
        Ok(engine)
    }

    /// Seeds the core list by clustering an initialization buffer.
    pub fn initialize(params: Params, buffer: &[Point]) -> Result<Self> {
        let dim = buffer.first().map(Point::dim).unwrap_or(0);
        params.validate_for_dim(dim)?;
        let cores = build_initial(buffer, &params, 0)?;
        Self::with_cores(params, dim, cores)
    }

    pub fn cores(&self) -> &[S] {
        &self.cores
    }

    pub fn outliers(&self) -> &[S] {
        &self.outliers
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_index(&self) -> u64 {
        self.window_index
    }

    pub fn points_seen(&self) -> u64 {
        self.points_seen
    }

    /// Total number of live micro-clusters.
    pub fn len(&self) -> usize {
        self.cores.len() + self.outliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tries to merge `p` into the closest admissible core micro-cluster.
    ///
    /// A core is admissible when, with `p` tentatively added, its projected
    /// dimensionality is at most `pi` or it holds a burst. The closest
    /// admissible core (ties to the lowest id) accepts `p` if its projected
    /// radius with `p` stays below `eps`. Returns the chosen id and distance
    /// on acceptance.
    pub fn add_to_core(&mut self, p: &Point) -> Result<Option<(TupleId, f64)>> {
        check_values(&p.values, self.dim)?;
        if self.cores.is_empty() {
            return Ok(None);
        }
        let params = &self.params;
        let mut best: Option<(usize, f64, Moments<'static>)> = None;
        for (i, core) in self.cores.iter().enumerate() {
            let tentative = core.moments_with(p, params)?;
            if !tentative.passes_dim_gate(params)? {
                continue;
            }
            let dist = core.projected_distance(&p.values, params)?;
            if closer(dist, core.id(), best.as_ref().map(|(k, d, _)| (*d, self.cores[*k].id()))) {
                best = Some((i, dist, tentative));
            }
        }
        Ok(commit_closest(&mut self.cores, best, p, params)?)
    }

    /// Same as [`Engine::add_to_core`] over the outlier list, without the
    /// dimensionality gate.
    pub fn add_to_outlier(&mut self, p: &Point) -> Result<Option<(TupleId, f64)>> {
        check_values(&p.values, self.dim)?;
        if self.outliers.is_empty() {
            return Ok(None);
        }
        let params = &self.params;
        let mut best: Option<(usize, f64)> = None;
        for (i, o) in self.outliers.iter().enumerate() {
            let dist = o.projected_distance(&p.values, params)?;
            if closer(dist, o.id(), best.map(|(k, d)| (d, self.outliers[k].id()))) {
                best = Some((i, dist));
            }
        }
        let best = match best {
            Some((i, dist)) => Some((i, dist, self.outliers[i].moments_with(p, params)?)),
            None => None,
        };
        Ok(commit_closest(&mut self.outliers, best, p, params)?)
    }

    /// Opens a new outlier micro-cluster holding only `p`.
    pub fn create_outlier_mc(&mut self, p: &Point) -> Result<TupleId> {
        check_values(&p.values, self.dim)?;
        let id = self.next_id;
        self.outliers.push(S::seeded(id, p, &self.params)?);
        self.next_id += 1;
        Ok(id)
    }

    /// Routes one point through the core list, the outlier list, or a new
    /// outlier micro-cluster.
    pub fn process_point(&mut self, p: &Point) -> Result<MergeOutcome> {
        check_values(&p.values, self.dim)?;
        let outcome = if let Some((tuple_id, distance)) = self.add_to_core(p)? {
            for o in &mut self.outliers {
                o.degrade(p.seq, &self.params);
            }
            MergeOutcome {
                target: MergeTarget::Core,
                tuple_id,
                distance,
            }
        } else if let Some((tuple_id, distance)) = self.add_to_outlier(p)? {
            MergeOutcome {
                target: MergeTarget::Outlier,
                tuple_id,
                distance,
            }
        } else {
            MergeOutcome {
                target: MergeTarget::NewOutlier,
                tuple_id: self.create_outlier_mc(p)?,
                distance: 0.0,
            }
        };
        self.points_seen += 1;
        self.last_seq = Some(self.last_seq.map_or(p.seq, |s| s.max(p.seq)));
        Ok(outcome)
    }

    /// Window-boundary maintenance.
    ///
    /// Cores lighter than `beta * mu` become outliers; outliers heavier than
    /// `beta * mu` that satisfy the core predicate become cores; outliers that
    /// absorbed nothing during the last `N` arrivals are deleted.
    pub fn window_rebalance(&mut self) -> Result<Rebalance> {
        let threshold = self.params.outlier_weight();
        let mut report = Rebalance::default();

        let (keep, demoted): (Vec<S>, Vec<S>) = std::mem::take(&mut self.cores)
            .into_iter()
            .partition(|c| c.weight() >= threshold);
        self.cores = keep;

        let mut remaining = Vec::with_capacity(self.outliers.len());
        for o in std::mem::take(&mut self.outliers) {
            if o.weight() > threshold && o.classify(&self.params)? == McClass::Core {
                report.promoted.push(o.id());
                self.cores.push(o);
            } else {
                remaining.push(o);
            }
        }
        report.demoted = demoted.iter().map(Summary::id).collect();
        remaining.extend(demoted);

        let n = self.params.n_window as u64;
        match self.last_seq {
            Some(now) => {
                for o in remaining {
                    if now.saturating_sub(o.last_update_seq()) >= n {
                        report.deleted.push(o.id());
                    } else {
                        self.outliers.push(o);
                    }
                }
            }
            None => self.outliers = remaining,
        }
        self.window_index += 1;
        Ok(report)
    }
}

/// Whether `(dist, id)` beats the current best; ties go to the lower id.
fn closer(dist: f64, id: TupleId, best: Option<(f64, TupleId)>) -> bool {
    match best {
        None => true,
        Some((d, bid)) => dist < d || (dist == d && id < bid),
    }
}

/// Commits `p` into the chosen tuple when its tentative radius is below
/// `eps` and degrades every other tuple of the list; otherwise degrades all.
fn commit_closest<S: Summary>(
    list: &mut [S],
    best: Option<(usize, f64, Moments<'static>)>,
    p: &Point,
    params: &Params,
) -> Result<Option<(TupleId, f64)>> {
    let accepted = match best {
        Some((i, dist, tentative)) if tentative.projected_radius(params)? < params.eps => {
            Some((i, dist))
        }
        _ => None,
    };
    for (k, t) in list.iter_mut().enumerate() {
        match accepted {
            Some((i, _)) if i == k => t.absorb(p, params)?,
            _ => t.degrade(p.seq, params),
        }
    }
    Ok(accepted.map(|(i, dist)| (list[i].id(), dist)))
}
