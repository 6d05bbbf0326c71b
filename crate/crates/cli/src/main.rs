use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qem_core::harness::{
    load_record_variant, load_records, run_and_persist, selftest, summarize, validate_dir, ExperimentConfig,
    HarnessError, NoiseSpec, Technique,
};
use qem_core::{Backend, BenchmarkKind};

#[derive(Parser)]
#[command(name = "qem-bench", version, about = "Error mitigation benchmarks on a noisy Clifford simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV files.
    Run(RunArgs),
    /// Print improvement factors of a persisted experiment.
    Summarize {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Only this technique when the directory holds several.
        #[arg(long)]
        technique: Option<Technique>,
    },
    /// Check that a persisted directory loads and is consistent.
    Validate { dir: PathBuf },
    /// Check PEC representations and extrapolation coefficients.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<BenchmarkKind>,
    #[arg(long)]
    qem: Option<Technique>,
    #[arg(long)]
    qubits: Option<usize>,
    /// Comma-separated Clifford depths.
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// noiseless, depolarizing[:P] or calibration:NAME|PATH
    #[arg(long)]
    noise: Option<NoiseSpec>,
    /// Bundled calibration name (lima, kolkata12, aspen_m2) or file path.
    #[arg(long, conflicts_with = "noise")]
    calibration: Option<String>,
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    seed: Option<u64>,
    /// Data root; results go to OUT/software/QEM/CIRCUIT/PLATFORM/...
    #[arg(long, default_value = "data")]
    out: PathBuf,
    /// Cancel adjacent inverses before execution and protect folds with
    /// rotation barriers.
    #[arg(long)]
    optimize: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Io { path: path.clone(), message: e.to_string() })?;
                ExperimentConfig::from_toml(&text)?
            }
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = &self.$flag {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(circuit => circuit, qem => technique, qubits => n_qubits, depths => depths, shots => shots,
             instances => instances, trials => trials, noise => noise, backend => backend, seed => seed);
        if let Some(cal) = &self.calibration {
            c.noise = NoiseSpec::Calibration(cal.clone());
        }
        c.optimize |= self.optimize;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.config()?;
            let (record, dir) = run_and_persist(&config, &args.out)?;
            print!("{}", summarize(&record)?.render_table());
            println!("wrote {}", dir.display());
        }
        Command::Summarize { dir, format, technique } => {
            let records = match technique {
                Some(t) => vec![load_record_variant(&dir, t)?],
                None => load_records(&dir)?,
            };
            let summaries = records.iter().map(summarize).collect::<Result<Vec<_>, _>>()?;
            match format {
                Format::Table => summaries.iter().for_each(|s| print!("{}", s.render_table())),
                Format::Csv => summaries.iter().for_each(|s| print!("{}", s.to_csv())),
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&summaries).expect("summary serializes"))
                }
            }
        }
        Command::Validate { dir } => {
            for r in validate_dir(&dir)? {
                println!(
                    "ok {} {} rows x {} columns",
                    r.technique,
                    r.depths.len(),
                    r.columns()
                );
            }
        }
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
