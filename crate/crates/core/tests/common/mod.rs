//! Stream generators and property checks shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use projstream::engine::Engine;
use projstream::evaluation::{purity, LabelCounts, PurityTracker};
use projstream::offline::final_clusters;
use projstream::params::smoothing_factor;
use projstream::{DistanceNormalizer, EaTuple, Params, Point, Summary};

/// Small-window parameters that make cores, outliers, promotions and
/// deletions all reachable on short streams.
pub fn small_params(dim: usize) -> impl Strategy<Value = Params> {
    (
        4usize..=30,
        1.5f64..8.0,
        0.05f64..0.9,
        0.01f64..0.6,
        0.0005f64..0.05,
        1..=dim,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(move |(n, mu, beta, eps, xi, pi, decay, xi_norm)| {
            let mut p = Params::with_window(n);
            p.alpha = smoothing_factor(n);
            p.mu = mu;
            p.beta = beta;
            p.eps = eps;
            p.xi = xi;
            p.pi_dim = pi;
            p.decay_weight = decay;
            p.distance_normalizer = if xi_norm {
                DistanceNormalizer::Xi
            } else {
                DistanceNormalizer::Rho
            };
            p
        })
}

/// `len` points in `[0,1]^dim`: tight blobs around `k` random centers, with
/// a share of uniform noise. Labels name the blob or `noise`.
pub fn clustered_stream(seed: u64, dim: usize, len: usize, k: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.random_range(0.1..0.9)).collect())
        .collect();
    let spread: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.08)).collect();
    (0..len)
        .map(|i| {
            if k == 0 || rng.random_bool(0.15) {
                let v = (0..dim).map(|_| rng.random::<f64>()).collect();
                Point::labeled(v, "noise", i as u64)
            } else {
                let c = rng.random_range(0..k);
                let v = centers[c]
                    .iter()
                    .map(|x| (x + rng.random_range(-spread[c]..=spread[c])).clamp(0.0, 1.0))
                    .collect();
                Point::labeled(v, format!("c{c}"), i as u64)
            }
        })
        .collect()
}

fn ids<S: Summary>(list: &[S]) -> Vec<u64> {
    list.iter().map(Summary::id).collect()
}

pub fn check_disjoint<S: Summary>(engine: &Engine<S>) -> Result<(), TestCaseError> {
    let cores: BTreeSet<u64> = ids(engine.cores()).into_iter().collect();
    let outliers: BTreeSet<u64> = ids(engine.outliers()).into_iter().collect();
    prop_assert_eq!(cores.len(), engine.cores().len(), "duplicate core id");
    prop_assert_eq!(outliers.len(), engine.outliers().len(), "duplicate outlier id");
    prop_assert!(cores.is_disjoint(&outliers), "{:?} / {:?}", cores, outliers);
    Ok(())
}

/// An engine seeded from the first `init` points, or empty when `init` is 0.
pub fn start<S: Summary>(params: &Params, points: &[Point], init: usize) -> Result<Engine<S>, TestCaseError> {
    let built = if init == 0 {
        Engine::new(params.clone(), points[0].dim())
    } else {
        Engine::initialize(params.clone(), &points[..init])
    };
    built.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// Streams `points` through a fresh engine seeded from the first `init`
/// points, rebalancing every `N` points, and calls `check` after every step.
pub fn drive<S, F>(
    params: &Params,
    points: &[Point],
    init: usize,
    mut check: F,
) -> Result<Engine<S>, TestCaseError>
where
    S: Summary,
    F: FnMut(&Engine<S>) -> Result<(), TestCaseError>,
{
    let mut engine = start::<S>(params, points, init)?;
    check(&engine)?;
    for (i, p) in points[init..].iter().enumerate() {
        engine
            .process_point(p)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        check(&engine)?;
        if (i + 1) % params.n_window == 0 {
            engine
                .window_rebalance()
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            check(&engine)?;
        }
    }
    Ok(engine)
}

pub fn engine_case() -> impl Strategy<Value = (Params, Vec<Point>, usize)> {
    (1usize..=5, any::<u64>(), 40usize..240, 0usize..4).prop_flat_map(|(dim, seed, len, k)| {
        let pts = clustered_stream(seed, dim, len, k);
        (small_params(dim), Just(pts), 0usize..30)
    })
}

// Purity bounds: for any assignment, purity lies in [1/L, 1] where L is the
// number of distinct labels involved.
pub fn label_counts() -> impl Strategy<Value = Vec<LabelCounts>> {
    prop::collection::vec(
        prop::collection::btree_map("[a-e]", 0u64..50, 0..5),
        0..8,
    )
}

pub fn check_purity_counts(clusters: &[LabelCounts]) -> Result<(), TestCaseError> {
    let labels: BTreeSet<&String> = clusters
        .iter()
        .flat_map(|c| c.iter().filter(|(_, n)| **n > 0).map(|(l, _)| l))
        .collect();
    match purity(clusters) {
        None => prop_assert!(clusters.iter().all(|c| c.values().sum::<u64>() == 0)),
        Some(p) => {
            prop_assert!(p <= 1.0 + 1e-12, "purity {}", p);
            prop_assert!(p >= 1.0 / labels.len() as f64 - 1e-12, "purity {} with {} labels", p, labels.len());
        }
    }
    Ok(())
}

pub fn check_purity_run<S: Summary>(
    params: &Params,
    points: &[Point],
    init: usize,
) -> Result<(), TestCaseError> {
    let labels: BTreeSet<&str> = points.iter().filter_map(|p| p.label.as_deref()).collect();
    let floor = 1.0 / labels.len().max(1) as f64 - 1e-12;
    let mut engine = start::<S>(params, points, init)?;
    let mut tracker = PurityTracker::new(params.horizon);
    let in_range = |v: Option<f64>| v.is_none_or(|x| (floor..=1.0 + 1e-12).contains(&x));
    for (i, p) in points[init..].iter().enumerate() {
        let outcome = engine
            .process_point(p)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        tracker.record(&outcome, p.label.as_deref());
        if (i + 1) % params.n_window == 0 {
            let (core, all) = tracker.current();
            prop_assert!(in_range(core) && in_range(all), "{:?} {:?}", core, all);
            // every window that saw points has a purity over all clusters
            prop_assert!(all.is_some());
            engine
                .window_rebalance()
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            tracker.end_window();
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub enum Op {
    Update(Vec<f64>),
    Degrade,
}

pub fn ops(dim: usize, max_len: usize) -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(
        prop_oneof![
            3 => prop::collection::vec(0.0f64..=1.0, dim).prop_map(Op::Update),
            1 => Just(Op::Degrade),
            // repeated values stress cancellation in ea2 - ea1^2
            1 => (0.0f64..=1.0).prop_map(move |v| Op::Update(vec![v; dim])),
        ],
        1..max_len,
    )
}

/// Applies `ops` to a tuple seeded with `first`; `seq` advances by one per op.
pub fn apply_ops<S: Summary>(
    params: &Params,
    first: &[f64],
    ops: &[Op],
    mut check: impl FnMut(&S) -> Result<(), TestCaseError>,
) -> Result<S, TestCaseError> {
    let mut t = S::seeded(0, &Point::new(first.to_vec(), 0), params)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    check(&t)?;
    for (k, op) in ops.iter().enumerate() {
        let seq = k as u64 + 1;
        match op {
            Op::Update(v) => t
                .absorb(&Point::new(v.clone(), seq), params)
                .map_err(|e| TestCaseError::fail(e.to_string()))?,
            Op::Degrade => t.degrade(seq, params),
        }
        check(&t)?;
    }
    Ok(t)
}

pub fn check_variance_nonnegative<S: Summary>(t: &S) -> Result<(), TestCaseError> {
    let var = t
        .variance()
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(var.iter().all(|v| *v >= 0.0), "{:?}", var);
    Ok(())
}

pub fn check_rebalance_idempotent<S: Summary + PartialEq>(
    params: &Params,
    points: &[Point],
    init: usize,
) -> Result<(), TestCaseError> {
    let mut engine = drive::<S, _>(params, points, init, |_| Ok(()))?;
    engine
        .window_rebalance()
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let cores = engine.cores().to_vec();
    let outliers = engine.outliers().to_vec();
    let second = engine
        .window_rebalance()
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(second.promoted.is_empty(), "{:?}", second);
    prop_assert!(second.demoted.is_empty(), "{:?}", second);
    prop_assert!(second.deleted.is_empty(), "{:?}", second);
    prop_assert!(engine.cores() == cores.as_slice());
    prop_assert!(engine.outliers() == outliers.as_slice());
    Ok(())
}

/// Random core tuples whose per-dimension variances straddle `xi`, so
/// preference vectors differ between tuples.
pub fn core_set(dim: usize) -> impl Strategy<Value = Vec<EaTuple>> {
    prop::collection::vec(
        (
            prop::collection::vec(0.0f64..=1.0, dim),
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..0.004, 0.004f64..0.1], dim),
            1.0f64..300.0,
        ),
        0..25,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (mean, var, w))| {
                let sq = mean.iter().zip(&var).map(|(m, v)| m * m + v).collect();
                EaTuple::from_parts(i as u64, mean, sq, w, 0)
            })
            .collect()
    })
}

pub fn check_eps_monotone(
    cores: &[EaTuple],
    params: &Params,
    eps_lo: f64,
    eps_hi: f64,
) -> Result<(), TestCaseError> {
    let (lo, hi) = if eps_lo <= eps_hi {
        (eps_lo, eps_hi)
    } else {
        (eps_hi, eps_lo)
    };
    let count = |eps: f64| -> Result<usize, TestCaseError> {
        let mut p = params.clone();
        p.eps = eps;
        final_clusters(cores, &p, 0)
            .map(|c| c.len())
            .map_err(|e| TestCaseError::fail(e.to_string()))
    };
    let (n_lo, n_hi) = (count(lo)?, count(hi)?);
    prop_assert!(n_hi <= n_lo, "eps {} -> {} clusters, eps {} -> {}", lo, n_lo, hi, n_hi);
    Ok(())
}

/// Closed-form moving-average state after `ops`, evaluated as explicit
/// geometric sums: every contribution is scaled by `(1 - alpha)` once per
/// later event, and the weight once per later miss.
pub struct EaOracle {
    pub ea1: Vec<f64>,
    pub ea2: Vec<f64>,
    pub w: f64,
}

pub fn ea_closed_form(first: &[f64], ops: &[Op], params: &Params) -> EaOracle {
    let keep = 1.0 - params.alpha;
    let total = ops.len() as i32;
    // misses[k]: degrades among ops[k..]
    let mut misses = vec![0i32; ops.len() + 1];
    for k in (0..ops.len()).rev() {
        misses[k] = misses[k + 1] + i32::from(matches!(ops[k], Op::Degrade));
    }
    let misses_after = |k: usize| misses[k];
    let mut ea1: Vec<f64> = first.iter().map(|x| keep.powi(total) * x).collect();
    let mut ea2: Vec<f64> = first.iter().map(|x| keep.powi(total) * x * x).collect();
    let mut w = if params.decay_weight { keep.powi(misses_after(0)) } else { 1.0 };
    for (k, op) in ops.iter().enumerate() {
        if let Op::Update(p) = op {
            let scale = params.alpha * keep.powi(total - 1 - k as i32);
            for j in 0..p.len() {
                ea1[j] += scale * p[j];
                ea2[j] += scale * p[j] * p[j];
            }
            w += if params.decay_weight { keep.powi(misses_after(k + 1)) } else { 1.0 };
        }
    }
    EaOracle { ea1, ea2, w }
}

/// Two Gaussian blobs of 50 points in 5 dimensions, shuffled together.
/// Returns the buffer and the generator's blob index for every point.
pub fn two_blobs(seed: u64) -> (Vec<Point>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.005).unwrap();
    let centers = [[0.3; 5], [0.7; 5]];
    let mut rows: Vec<(usize, Vec<f64>)> = (0..100)
        .map(|i| {
            let blob = i / 50;
            let v = centers[blob].iter().map(|c| c + noise.sample(&mut rng)).collect();
            (blob, v)
        })
        .collect();
    rows.shuffle(&mut rng);
    let truth = rows.iter().map(|(b, _)| *b).collect();
    let points = rows
        .into_iter()
        .enumerate()
        .map(|(i, (_, v))| Point::new(v, i as u64))
        .collect();
    (points, truth)
}

pub fn blob_params() -> Params {
    let mut p = Params::default();
    p.eps = 0.1;
    p.pi_dim = 5;
    p
}

