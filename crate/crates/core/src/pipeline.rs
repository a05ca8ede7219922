//! End-to-end runs over KDD-format input.
//!
//! A reader thread parses lines and hands them to the engine thread through a
//! bounded channel, so ingestion can run ahead without reordering. The first
//! `initialPoints` accepted records fit the normalizer and seed the core
//! micro-clusters; the rest are processed in windows of `N` points. After
//! each window the engine rebalances, a metrics row is emitted, and every `H`
//! windows the final clustering is refreshed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{Normalization, RunConfig};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::evaluation::{memory_metric, EngineKind, MemoryUsage, MetricsRow, PurityTracker};
use crate::kdd::{fit_normalizer, parse_kdd_record, Normalizer, RawRecord};
use crate::offline::{final_clusters, FinalClustering};
use crate::params::Params;
use crate::point::Point;
use crate::summary::{CfTuple, EaTuple, Summary, TupleId};

const QUEUE_DEPTH: usize = 4096;

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSONL: &str = "metrics.jsonl";
pub const CLUSTERS_JSON: &str = "clusters.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

/// Micro-cluster summary written to the clusters file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSummary {
    pub id: TupleId,
    pub weight: f64,
    pub pdim: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineReport {
    pub engine: EngineKind,
    pub windows: u64,
    pub points_seen: u64,
    pub memory: MemoryUsage,
    pub final_clustering: FinalClustering,
    pub cores: Vec<CoreSummary>,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub lines_read: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejected>,
    pub dim: usize,
    pub reports: Vec<EngineReport>,
    pub ea: Option<Engine<EaTuple>>,
    pub cf: Option<Engine<CfTuple>>,
    /// Wall time of the whole run including ingestion.
    pub inclusive_time_s: f64,
}

impl RunOutput {
    pub fn rows_for(&self, engine: EngineKind) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(move |r| r.engine == engine)
    }
}

enum Item {
    Record(usize, RawRecord),
    Rejected(Rejected),
    Failed(std::io::Error),
}

fn spawn_reader<R>(reader: R, max_lines: Option<usize>) -> Receiver<Item>
where
    R: BufRead + Send + 'static,
{
    let (tx, rx) = sync_channel(QUEUE_DEPTH);
    thread::spawn(move || {
        for (i, line) in reader.lines().enumerate() {
            if max_lines.is_some_and(|m| i >= m) {
                break;
            }
            let item = match line {
                Ok(line) => match parse_kdd_record(&line, i + 1) {
                    Ok(rec) => Item::Record(i + 1, rec),
                    Err(e) => Item::Rejected(Rejected {
                        line: i + 1,
                        reason: e.to_string(),
                    }),
                },
                Err(e) => Item::Failed(e),
            };
            let stop = matches!(item, Item::Failed(_));
            if tx.send(item).is_err() || stop {
                break;
            }
        }
    });
    rx
}

/// One engine flavour with its own purity bookkeeping.
struct Lane<S> {
    kind: EngineKind,
    engine: Engine<S>,
    purity: PurityTracker,
    final_clustering: FinalClustering,
}

impl<S: Summary> Lane<S> {
    fn new(kind: EngineKind, params: &Params, init: &[Point]) -> Result<Self> {
        let engine = Engine::initialize(params.clone(), init)?;
        let final_clustering = final_clusters(engine.cores(), engine.params(), 0)?;
        Ok(Lane {
            kind,
            purity: PurityTracker::new(params.horizon),
            engine,
            final_clustering,
        })
    }

    fn run_window(&mut self, window: &[Point], timing: bool) -> Result<MetricsRow> {
        let start = Instant::now();
        let mut outcomes = Vec::with_capacity(window.len());
        for p in window {
            outcomes.push(self.engine.process_point(p)?);
        }
        self.engine.window_rebalance()?;
        let elapsed = start.elapsed().as_secs_f64();

        for (p, o) in window.iter().zip(&outcomes) {
            self.purity.record(o, p.label.as_deref());
        }
        let (purity_core_only, purity_all) = self.purity.current();
        self.purity.end_window();

        let window_index = self.engine.window_index() - 1;
        let horizon = self.engine.params().horizon as u64;
        if self.engine.window_index() % horizon == 0 {
            let seq = window.last().map_or(0, |p| p.seq);
            self.final_clustering = final_clusters(self.engine.cores(), self.engine.params(), seq)?;
        }
        Ok(MetricsRow {
            window_index,
            engine: self.kind,
            purity_core_only,
            purity_all,
            num_core: self.engine.cores().len(),
            num_outlier: self.engine.outliers().len(),
            num_final_clusters: self.final_clustering.len(),
            window_wall_time_s: timing.then_some(elapsed),
        })
    }

    fn report(&self) -> Result<EngineReport> {
        let params = self.engine.params();
        let cores = self
            .engine
            .cores()
            .iter()
            .map(|c| {
                Ok(CoreSummary {
                    id: c.id(),
                    weight: c.weight(),
                    pdim: c.pdim(params)?,
                    radius: c.projected_radius(params)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EngineReport {
            engine: self.kind,
            windows: self.engine.window_index(),
            points_seen: self.engine.points_seen(),
            memory: memory_metric(&self.engine),
            final_clustering: self.final_clustering.clone(),
            cores,
        })
    }
}

/// Runs the configured engines over KDD-format lines from `reader`.
///
/// `sink` receives each metrics row as soon as it is produced.
pub fn run_reader<R, F>(reader: R, config: &RunConfig, mut sink: F) -> Result<RunOutput>
where
    R: BufRead + Send + 'static,
    F: FnMut(&MetricsRow) -> Result<()>,
{
    config.params.validate()?;
    let started = Instant::now();
    let params = &config.params;
    let rx = spawn_reader(reader, config.max_records);

    let mut lines_read = 0usize;
    let mut rejected = Vec::new();
    let mut next = || -> Result<Option<(usize, RawRecord)>> {
        for item in rx.iter() {
            lines_read += 1;
            match item {
                Item::Record(line, rec) => return Ok(Some((line, rec))),
                Item::Rejected(r) => {
                    warn!("rejected line {}: {}", r.line, r.reason);
                    rejected.push(r);
                }
                Item::Failed(e) => {
                    lines_read -= 1;
                    return Err(Error::io("<input>", e));
                }
            }
        }
        Ok(None)
    };

    let mut init_records = Vec::with_capacity(params.initial_points);
    while init_records.len() < params.initial_points {
        match next()? {
            Some((_, rec)) => init_records.push(rec),
            None => break,
        }
    }
    if init_records.len() < params.initial_points {
        return Err(Error::NotEnoughRecords {
            needed: params.initial_points,
            found: init_records.len(),
        });
    }
    let normalizer = match config.normalization {
        Normalization::MinmaxInitial => Some(fit_normalizer(&init_records)?),
        Normalization::None => None,
    };
    let to_point = |rec: RawRecord, seq: u64, normalizer: &Option<Normalizer>| {
        let values = match normalizer {
            Some(n) => n.apply(&rec.continuous),
            None => rec.continuous,
        };
        Point {
            values,
            label: Some(rec.label),
            seq,
        }
    };
    let init_points: Vec<Point> = init_records
        .into_iter()
        .enumerate()
        .map(|(i, rec)| to_point(rec, i as u64, &normalizer))
        .collect();
    let dim = init_points[0].dim();
    params.validate_for_dim(dim)?;

    let kinds = config.engine.kinds();
    let mut ea = if kinds.contains(&EngineKind::EA) {
        Some(Lane::<EaTuple>::new(EngineKind::EA, params, &init_points)?)
    } else {
        None
    };
    let mut cf = if kinds.contains(&EngineKind::CF) {
        Some(Lane::<CfTuple>::new(EngineKind::CF, params, &init_points)?)
    } else {
        None
    };
    for lane_cores in [ea.as_ref().map(|l| l.engine.cores().len()), cf.as_ref().map(|l| l.engine.cores().len())]
        .into_iter()
        .flatten()
    {
        info!("initialization produced {lane_cores} core micro-clusters");
    }

    let mut rows = Vec::new();
    let mut seq = params.initial_points as u64;
    let mut window = Vec::with_capacity(params.n_window);
    loop {
        let rec = next()?;
        let done = rec.is_none();
        if let Some((_, rec)) = rec {
            window.push(to_point(rec, seq, &normalizer));
            seq += 1;
        }
        if window.len() == params.n_window || (done && !window.is_empty()) {
            if let Some(lane) = ea.as_mut() {
                let row = lane.run_window(&window, config.timing)?;
                sink(&row)?;
                rows.push(row);
            }
            if let Some(lane) = cf.as_mut() {
                let row = lane.run_window(&window, config.timing)?;
                sink(&row)?;
                rows.push(row);
            }
            window.clear();
        }
        if done {
            break;
        }
    }

    let mut reports = Vec::new();
    if let Some(lane) = &ea {
        reports.push(lane.report()?);
    }
    if let Some(lane) = &cf {
        reports.push(lane.report()?);
    }
    let accepted = seq as usize;
    let inclusive_time_s = started.elapsed().as_secs_f64();
    info!(
        "{lines_read} lines: {accepted} accepted, {} rejected; {inclusive_time_s:.3} s inclusive",
        rejected.len()
    );
    Ok(RunOutput {
        rows,
        lines_read,
        accepted,
        rejected,
        dim,
        reports,
        ea: ea.map(|l| l.engine),
        cf: cf.map(|l| l.engine),
        inclusive_time_s,
    })
}

/// Runs over the configured input file without writing anything.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let path = config.input_path.as_deref().expect("validated");
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    run_reader(BufReader::new(file), config, |_| Ok(()))
}

/// Runs over the configured input file and writes `metrics.csv`,
/// `metrics.jsonl` and `clusters.json` into the output directory.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let input = config.input_path.as_deref().expect("validated");
    let out_dir = config
        .output_path
        .as_deref()
        .ok_or_else(|| Error::Config("no output directory given".into()))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let file = File::open(input).map_err(|e| Error::io(input, e))?;
    let csv_path = out_dir.join(METRICS_CSV);
    let jsonl_path = out_dir.join(METRICS_JSONL);
    let mut csv = create(&csv_path)?;
    let mut jsonl = create(&jsonl_path)?;
    writeln!(csv, "{}", MetricsRow::CSV_HEADER).map_err(|e| Error::io(&csv_path, e))?;

    let output = run_reader(BufReader::new(file), config, |row| {
        writeln!(csv, "{}", row.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
        serde_json::to_writer(&mut jsonl, row)?;
        writeln!(jsonl).map_err(|e| Error::io(&jsonl_path, e))
    })?;
    csv.flush().map_err(|e| Error::io(&csv_path, e))?;
    jsonl.flush().map_err(|e| Error::io(&jsonl_path, e))?;

    write_json(&out_dir.join(CLUSTERS_JSON), &clusters_document(&output))?;
    Ok(output)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
struct ClustersDocument<'a> {
    lines_read: usize,
    accepted: usize,
    rejected: usize,
    dim: usize,
    engines: &'a [EngineReport],
}

fn clusters_document(output: &RunOutput) -> ClustersDocument<'_> {
    ClustersDocument {
        lines_read: output.lines_read,
        accepted: output.accepted,
        rejected: output.rejected.len(),
        dim: output.dim,
        engines: &output.reports,
    }
}

/// Full tuple sets of every engine after a run.
#[derive(Debug, Serialize)]
pub struct StateDump<'a> {
    pub ea: Option<EngineDump<'a, EaTuple>>,
    pub cf: Option<EngineDump<'a, CfTuple>>,
}

#[derive(Debug, Serialize)]
pub struct EngineDump<'a, S> {
    pub window_index: u64,
    pub points_seen: u64,
    pub cores: &'a [S],
    pub outliers: &'a [S],
}

impl RunOutput {
    pub fn state_dump(&self) -> StateDump<'_> {
        fn dump<S>(e: &Engine<S>) -> EngineDump<'_, S>
        where
            S: Summary,
        {
            EngineDump {
                window_index: e.window_index(),
                points_seen: e.points_seen(),
                cores: e.cores(),
                outliers: e.outliers(),
            }
        }
        StateDump {
            ea: self.ea.as_ref().map(dump),
            cf: self.cf.as_ref().map(dump),
        }
    }
}
