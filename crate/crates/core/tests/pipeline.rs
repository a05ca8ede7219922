use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use projstream::config::{EngineChoice, RunConfig};
use projstream::evaluation::{EngineKind, MetricsRow};
use projstream::pipeline::{run_pipeline, run_reader};
use projstream::synth::{KddSynth, Schedule};

const INIT: usize = 60;
const N: usize = 20;

fn write_stream(dir: &Path, records: usize, seed: u64) -> PathBuf {
    let path = dir.join("stream.csv");
    let file = std::fs::File::create(&path).unwrap();
    KddSynth::new(Schedule::background(records), seed)
        .write_all(std::io::BufWriter::new(file))
        .unwrap();
    path
}

fn config(input: &Path, output: &Path) -> RunConfig {
    let mut c = RunConfig::default();
    c.apply_overrides([
        format!("initialPoints={INIT}").as_str(),
        format!("N={N}").as_str(),
        "engine=both",
        "timing=false",
    ])
    .unwrap();
    c.input_path = Some(input.to_owned());
    c.output_path = Some(output.to_owned());
    c
}

#[test]
fn three_windows_give_three_rows_per_engine() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT + 3 * N, 1);
    let out = dir.path().join("out");
    let run = run_pipeline(&config(&input, &out)).unwrap();

    assert_eq!(run.rows_for(EngineKind::EA).count(), 3);
    assert_eq!(run.rows_for(EngineKind::CF).count(), 3);

    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(MetricsRow::CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r.split(',').count(), 8, "{r}");
    }

    let jsonl = std::fs::read_to_string(out.join("metrics.jsonl")).unwrap();
    let parsed: Vec<MetricsRow> = jsonl
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(parsed, run.rows);

    let clusters: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("clusters.json")).unwrap()).unwrap();
    assert_eq!(clusters["engines"].as_array().unwrap().len(), 2);
    assert_eq!(clusters["accepted"], (INIT + 3 * N) as u64);
}

#[test]
fn rows_are_strictly_increasing_and_purity_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT + 7 * N + 5, 2);
    let run = run_pipeline(&config(&input, &dir.path().join("out"))).unwrap();
    for kind in [EngineKind::EA, EngineKind::CF] {
        let idx: Vec<u64> = run.rows_for(kind).map(|r| r.window_index).collect();
        // the trailing partial window still produces a row
        assert_eq!(idx, (0..8).collect::<Vec<_>>());
        for r in run.rows_for(kind) {
            for p in [r.purity_core_only, r.purity_all].into_iter().flatten() {
                assert!((0.0..=1.0).contains(&p));
            }
            assert!(r.window_wall_time_s.is_none());
        }
    }
}

#[test]
fn malformed_lines_are_counted_not_dropped() {
    let mut lines: Vec<String> = KddSynth::new(Schedule::background(INIT + 2 * N), 3).collect();
    lines.insert(5, "0,tcp,http,SF,1,2,normal.".into());
    let corrupt = format!("x{}", &lines[69][lines[69].find(',').unwrap()..]);
    lines.insert(70, corrupt);
    lines.insert(90, String::new());
    let text = lines.join("\n") + "\n";
    let mut c = config(Path::new("unused"), Path::new("unused"));
    c.engine = EngineChoice::EA;
    let run = run_reader(std::io::Cursor::new(text.into_bytes()), &c, |_| Ok(())).unwrap();
    assert_eq!(run.lines_read, lines.len());
    assert_eq!(run.accepted + run.rejected.len(), run.lines_read);
    assert_eq!(run.rejected.len(), 3);
    assert_eq!(
        run.rejected.iter().map(|r| r.line).collect::<Vec<_>>(),
        vec![6, 71, 91]
    );
    assert!(run.rejected.iter().all(|r| !r.reason.is_empty()));
}

#[test]
fn normalized_stream_stays_in_the_unit_box() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT + 5 * N, 4);
    let run = run_pipeline(&config(&input, &dir.path().join("out"))).unwrap();
    let ea = run.ea.as_ref().unwrap();
    for t in ea.cores().iter().chain(ea.outliers()) {
        assert!(t.ea1.iter().all(|x| (0.0..=1.0).contains(x)), "{:?}", t.ea1);
    }
    let cf = run.cf.as_ref().unwrap();
    for t in cf.cores().iter().chain(cf.outliers()) {
        for b in &t.window {
            assert!(b.values.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}

#[test]
fn identical_runs_write_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT + 6 * N + 3, 5);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_pipeline(&config(&input, &a)).unwrap();
    run_pipeline(&config(&input, &b)).unwrap();
    for f in ["metrics.csv", "metrics.jsonl", "clusters.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn short_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT - 1, 6);
    let err = run_pipeline(&config(&input, &dir.path().join("out"))).unwrap_err();
    assert!(matches!(err, projstream::Error::NotEnoughRecords { .. }), "{err}");
}

fn cli() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_projstream"));
    cmd.env_remove("RUST_LOG");
    cmd
}

#[test]
fn cli_run_compare_and_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), INIT + 2 * N, 7);
    let cfg = dir.path().join("run.conf");
    let mut f = std::fs::File::create(&cfg).unwrap();
    writeln!(f, "# small windows\nN = {N}\ninitialPoints = {INIT}\ntiming = false").unwrap();

    let out = dir.path().join("run");
    let status = cli()
        .args(["run", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "-c"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2);

    let out = dir.path().join("compare");
    let status = cli()
        .args(["compare", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "-c"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);

    let output = cli()
        .args(["inspect", input.to_str().unwrap(), "-c"])
        .arg(&cfg)
        .env("PROJSTREAM_ENGINE", "CF")
        .output()
        .unwrap();
    assert!(output.status.success());
    let state: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(state["ea"].is_null());
    assert_eq!(state["cf"]["window_index"], 2);
    assert!(state["cf"]["cores"].is_array());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_stream(dir.path(), 30, 8);
    let out = dir.path().join("out");
    let code = |args: &[&str]| cli().args(args).output().unwrap().status.code();

    assert_eq!(code(&["bogus"]), Some(2));
    let (i, o) = (input.to_str().unwrap(), out.to_str().unwrap());
    assert_eq!(code(&["run", i, "-o", o, "-s", "nonsense=1"]), Some(3));
    assert_eq!(code(&["run", i, "-o", o, "-s", "beta=2"]), Some(3));
    assert_eq!(code(&["run", "/nonexistent/input.csv", "-o", o]), Some(4));
    // 30 records cannot fill the default 1000-point initialization buffer
    assert_eq!(code(&["run", i, "-o", o]), Some(5));
}

#[test]
fn cli_synth_writes_the_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let status = cli()
        .args(["synth", "--background", "25", "-o", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 25);
}
