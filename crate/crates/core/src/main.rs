use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use projstream::config::{EngineChoice, RunConfig};
use projstream::pipeline::{self, RunOutput};
use projstream::synth::{KddSynth, Schedule};
use projstream::Error;

#[derive(Parser)]
#[command(name = "projstream", version, about = "Projected clustering of KDD-format connection streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline and write metrics.csv, metrics.jsonl and clusters.json.
    Run(RunArgs),
    /// Same as `run` with both engines on identical input.
    Compare(RunArgs),
    /// Run the pipeline and print the final micro-cluster sets as JSON.
    Inspect(RunArgs),
    /// Write a synthetic KDD-format stream.
    Synth {
        /// Destination file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Emit only this many background records instead of the attack schedule.
        #[arg(long)]
        background: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// KDD-format input file.
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// key = value configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> projstream::Result<RunConfig> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        config.apply_env(std::env::vars())?;
        config.apply_overrides(self.overrides.iter().map(String::as_str))?;
        if let Some(input) = &self.input {
            config.input_path = Some(input.clone());
        }
        if let Some(output) = &self.output {
            config.output_path = Some(output.clone());
        }
        Ok(config)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParam { .. } => 3,
        Error::Io { .. } | Error::Json(_) => 4,
        _ => 5,
    }
}

fn summarize(output: &RunOutput) {
    eprintln!(
        "{} lines read, {} accepted, {} rejected",
        output.lines_read,
        output.accepted,
        output.rejected.len()
    );
    for r in &output.reports {
        eprintln!(
            "{}: {} windows, {} core / {} outlier micro-clusters, {} final clusters",
            r.engine,
            r.windows,
            r.memory.num_core,
            r.memory.num_outlier,
            r.final_clustering.len()
        );
    }
}

fn execute(cli: Cli) -> projstream::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.load()?;
            summarize(&pipeline::run_pipeline(&config)?);
        }
        Command::Compare(args) => {
            let mut config = args.load()?;
            config.engine = EngineChoice::Both;
            summarize(&pipeline::run_pipeline(&config)?);
        }
        Command::Inspect(args) => {
            let config = args.load()?;
            let output = pipeline::run(&config)?;
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            serde_json::to_writer_pretty(&mut out, &output.state_dump())?;
            writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
        }
        Command::Synth {
            output,
            seed,
            background,
        } => {
            let schedule = background.map_or_else(Schedule::kdd_like, Schedule::background);
            let synth = KddSynth::new(schedule, seed);
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                    synth
                        .write_all(BufWriter::new(file))
                        .map_err(|e| Error::io(&path, e))?;
                }
                None => synth
                    .write_all(BufWriter::new(std::io::stdout().lock()))
                    .map_err(|e| Error::io("<stdout>", e))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
