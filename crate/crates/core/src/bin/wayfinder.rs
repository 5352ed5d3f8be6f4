use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wayfinder::dialogue::{extract_intent, DestinationLexicon, Stopwords};
use wayfinder::harness::{
    load_map, run_batch, run_loaded, write_trace, HarnessError, LoadedScenario, NoiseToggles, RunMetrics,
    RunStatus, Scenario,
};

#[derive(Parser)]
#[command(name = "wayfinder", version, about = "Guide-robot simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write metrics JSON here (`-` for stdout).
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Turn every noise source off.
        #[arg(long)]
        noiseless: bool,
    },
    /// Run seeds `first-seed .. first-seed + seeds` in parallel.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        noiseless: bool,
    },
    /// Parse a map file and print a summary.
    MapCheck { file: PathBuf },
    /// Resolve an utterance against a lexicon.
    Intent {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        utterance: String,
    },
}

const EXIT_PARSE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

enum Failure {
    Parse(String),
    Run(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_parse_error() {
            Failure::Parse(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Run(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load(path: &Path, noiseless: bool) -> Result<LoadedScenario, Failure> {
    let mut sc = Scenario::load(path)?;
    if noiseless {
        sc.noise = NoiseToggles::all(false);
    }
    Ok(LoadedScenario::load(&sc)?)
}

fn run_failed(m: &RunMetrics) -> bool {
    m.status != RunStatus::Reached || m.collision_count > 0
}

fn summary(seed: u64, m: &RunMetrics, dt: f64) -> String {
    format!(
        "seed {seed}: {} in {:.1} s, path {:.2} m, collisions {}, min clearance robot {:.3} m user {:.3} m",
        m.status.as_str(),
        m.ticks.saturating_sub(1) as f64 * dt,
        m.path_length,
        m.collision_count,
        m.min_clearance_robot,
        m.min_clearance_user
    )
}

fn write_metrics(m: &RunMetrics, out: &Path) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(m).expect("metrics serialize");
    if out == Path::new("-") {
        println!("{json}");
        Ok(())
    } else {
        std::fs::write(out, json + "\n").map_err(|e| io_err(out, e))
    }
}

fn execute(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Run {
            scenario,
            seed,
            trace,
            metrics,
            noiseless,
        } => {
            let loaded = load(&scenario, noiseless)?;
            let seed = seed.unwrap_or(loaded.scenario.seed);
            let out = run_loaded(&loaded, seed)?;
            if let Some(path) = trace {
                let f = File::create(&path).map_err(|e| io_err(&path, e))?;
                write_trace(&out.trace, BufWriter::new(f))?;
            }
            if let Some(path) = metrics {
                write_metrics(&out.metrics, &path)?;
            }
            eprintln!("{}", summary(seed, &out.metrics, loaded.scenario.params.dt));
            Ok(!run_failed(&out.metrics))
        }
        Command::Batch {
            scenario,
            seeds,
            first_seed,
            out,
            noiseless,
        } => {
            let loaded = load(&scenario, noiseless)?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            let seed_list: Vec<u64> = (first_seed..first_seed + seeds).collect();
            let results = run_batch(&loaded, &seed_list)?;
            let metrics_path = out.join("metrics.jsonl");
            let mut mf = BufWriter::new(File::create(&metrics_path).map_err(|e| io_err(&metrics_path, e))?);
            let mut failures = 0;
            for r in &results {
                let path = out.join(format!("seed-{}.jsonl", r.seed));
                let f = File::create(&path).map_err(|e| io_err(&path, e))?;
                write_trace(&r.output.trace, BufWriter::new(f))?;
                let line = serde_json::json!({ "seed": r.seed, "metrics": r.output.metrics });
                writeln!(mf, "{line}").map_err(|e| io_err(&metrics_path, e))?;
                if run_failed(&r.output.metrics) {
                    failures += 1;
                    eprintln!("{}", summary(r.seed, &r.output.metrics, loaded.scenario.params.dt));
                }
            }
            mf.flush().map_err(|e| io_err(&metrics_path, e))?;
            println!("{} runs, {} failed", results.len(), failures);
            Ok(failures == 0)
        }
        Command::MapCheck { file } => {
            let (grid, entities) = load_map(&read(&file)?).map_err(|e| Failure::Parse(format!("{}: {e}", file.display())))?;
            println!(
                "{} x {} cells at {} m, {} occupied, {} entities",
                grid.width(),
                grid.height(),
                grid.resolution(),
                grid.occupied_count(),
                entities.len()
            );
            Ok(true)
        }
        Command::Intent { lexicon, utterance } => {
            let lex = DestinationLexicon::parse(&read(&lexicon)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", lexicon.display())))?;
            match extract_intent(&utterance, &lex, &Stopwords::default()) {
                Ok(intent) => {
                    println!("{}", intent.confirmation_text);
                    Ok(true)
                }
                Err(e) => {
                    println!("{e}");
                    Ok(false)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAYFINDER_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Parse(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_PARSE)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
