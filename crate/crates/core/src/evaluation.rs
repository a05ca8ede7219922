//! Purity, memory and timing metrics.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, MergeOutcome, MergeTarget};
use crate::params::Params;
use crate::summary::{Summary, TupleId};

/// Label multiset of one cluster.
pub type LabelCounts = BTreeMap<String, u64>;

/// Average dominant-label fraction over the nonempty clusters, or `None`
/// when every cluster is empty.
pub fn purity<'a, I>(clusters: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a LabelCounts>,
{
    let mut sum = 0.0;
    let mut k = 0usize;
    for labels in clusters {
        let total: u64 = labels.values().sum();
        if total == 0 {
            continue;
        }
        let dominant = labels.values().copied().max().unwrap_or(0);
        sum += dominant as f64 / total as f64;
        k += 1;
    }
    (k > 0).then(|| sum / k as f64)
}

/// Per-position weights of the last `N` points in the mean of each summary,
/// oldest first: `alpha (1 - alpha)^(N - 1 - k)` for the moving average and
/// `2^(-lambda (N - 1 - k) / N) / W` for the fading sum.
pub fn weight_profiles(params: &Params) -> (Vec<f64>, Vec<f64>) {
    let n = params.n_window;
    let a = params.alpha;
    let ea = (0..n)
        .map(|k| a * (1.0 - a).powi((n - 1 - k) as i32))
        .collect();
    let raw: Vec<f64> = (0..n)
        .map(|k| (-params.lambda * (n - 1 - k) as f64 / n as f64).exp2())
        .collect();
    let total: f64 = raw.iter().sum();
    let cf = raw.into_iter().map(|f| f / total).collect();
    (ea, cf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryUsage {
    pub num_core: usize,
    pub num_outlier: usize,
    /// Reals held by all micro-clusters.
    pub resident_values: usize,
}

pub fn memory_metric<S: Summary>(engine: &Engine<S>) -> MemoryUsage {
    let params = engine.params();
    let resident = engine
        .cores()
        .iter()
        .chain(engine.outliers())
        .map(|t| t.resident_values(params))
        .sum();
    MemoryUsage {
        num_core: engine.cores().len(),
        num_outlier: engine.outliers().len(),
        resident_values: resident,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EngineKind {
    EA,
    CF,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::EA => "EA",
            EngineKind::CF => "CF",
        })
    }
}

/// One line of the metrics output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub window_index: u64,
    pub engine: EngineKind,
    pub purity_core_only: Option<f64>,
    pub purity_all: Option<f64>,
    pub num_core: usize,
    pub num_outlier: usize,
    pub num_final_clusters: usize,
    /// Engine-only processing time of the window; `None` when timing is off.
    pub window_wall_time_s: Option<f64>,
}

impl MetricsRow {
    pub const CSV_HEADER: &'static str = "window_index,engine,purity_core_only,purity_all,num_core,num_outlier,num_final_clusters,window_wall_time_s";

    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            self.window_index,
            self.engine,
            opt(self.purity_core_only),
            opt(self.purity_all),
            self.num_core,
            self.num_outlier,
            self.num_final_clusters,
            self.window_wall_time_s
                .map(|t| format!("{t:.9}"))
                .unwrap_or_default(),
        )
    }

    pub fn total_clusters(&self) -> usize {
        self.num_core + self.num_outlier
    }
}

type WindowCredits = BTreeMap<TupleId, LabelCounts>;

/// Credits each labeled point to the micro-cluster it merged into and
/// reports purity over the last `H` windows.
///
/// `purity_all` counts every micro-cluster that received points;
/// `purity_core_only` only counts points that merged into a core.
#[derive(Debug, Clone)]
pub struct PurityTracker {
    horizon: usize,
    all: VecDeque<WindowCredits>,
    core: VecDeque<WindowCredits>,
}

impl PurityTracker {
    pub fn new(horizon: usize) -> Self {
        let mut t = PurityTracker {
            horizon: horizon.max(1),
            all: VecDeque::new(),
            core: VecDeque::new(),
        };
        t.all.push_back(WindowCredits::new());
        t.core.push_back(WindowCredits::new());
        t
    }

    /// Unlabeled points are not credited.
    pub fn record(&mut self, outcome: &MergeOutcome, label: Option<&str>) {
        let Some(label) = label else { return };
        credit(self.all.back_mut().expect("open window"), outcome.tuple_id, label);
        if outcome.target == MergeTarget::Core {
            credit(self.core.back_mut().expect("open window"), outcome.tuple_id, label);
        }
    }

    /// `(purity_core_only, purity_all)` over the horizon ending at the
    /// current window.
    pub fn current(&self) -> (Option<f64>, Option<f64>) {
        (horizon_purity(&self.core), horizon_purity(&self.all))
    }

    /// Closes the current window and opens the next one.
    pub fn end_window(&mut self) {
        for q in [&mut self.all, &mut self.core] {
            q.push_back(WindowCredits::new());
            while q.len() > self.horizon {
                q.pop_front();
            }
        }
    }
}

fn credit(window: &mut WindowCredits, id: TupleId, label: &str) {
    *window
        .entry(id)
        .or_default()
        .entry(label.to_owned())
        .or_default() += 1;
}

fn horizon_purity(windows: &VecDeque<WindowCredits>) -> Option<f64> {
    let mut merged = WindowCredits::new();
    for w in windows {
        for (id, labels) in w {
            let slot = merged.entry(*id).or_default();
            for (label, n) in labels {
                *slot.entry(label.clone()).or_default() += n;
            }
        }
    }
    purity(merged.values())
}

/// Median of a sample; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    })
}
