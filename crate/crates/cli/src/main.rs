use anyhow::Context;
use clap::Parser;
use fermishadow_cli::figures::{figure_configs, FIGURES};
use fermishadow_cli::{run_experiment, write_csv, ExperimentConfig};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_MITIGATION: u8 = 3;

/// Runs a shadow experiment from a JSON config or a built-in figure sweep
/// and writes CSV results.
#[derive(Parser, Debug)]
#[command(name = "fermishadow", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "figure", required_unless_present = "figure")]
    config: Option<PathBuf>,

    /// Built-in panel sweep to reproduce.
    #[arg(long, value_name = "NAME", value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
    figure: Option<String>,

    /// Master seed; overrides the config.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, value_name = "DIR", env = "FERMISHADOW_OUT", default_value = ".")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,

    /// Write the resolved configs as JSON and stop.
    #[arg(long)]
    dry_run: bool,
}

enum Failure {
    Config(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load_configs(cli: &Cli) -> Result<Vec<ExperimentConfig>, Failure> {
    let mut cfgs = match (&cli.config, &cli.figure) {
        (Some(path), _) => {
            let source = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let cfg = ExperimentConfig::parse(&source).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            vec![cfg]
        }
        (None, Some(name)) => figure_configs(name, cli.seed.unwrap_or(1)).expect("validated by clap"),
        (None, None) => unreachable!("clap requires one source"),
    };
    if let Some(seed) = cli.seed {
        for c in &mut cfgs {
            c.master_seed = seed;
        }
    }
    for c in &cfgs {
        c.validate().map_err(|(key, msg)| Failure::Config(format!("{key}: {msg}")))?;
    }
    Ok(cfgs)
}

fn write_output(dir: &Path, cfg: &ExperimentConfig, with_config: bool, records: &[fermishadow_cli::ResultRecord]) -> anyhow::Result<PathBuf> {
    let csv_path = dir.join(cfg.output_name());
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(std::io::BufWriter::new(file), records).with_context(|| format!("writing {}", csv_path.display()))?;
    if with_config {
        write_config(&csv_path.with_extension("json"), cfg)?;
    }
    Ok(csv_path)
}

fn write_config(path: &Path, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(cfg)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfgs = load_configs(cli)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().context("building worker pool")?;
    if cli.dry_run {
        for cfg in &cfgs {
            let path = cli.out.join(cfg.output_name()).with_extension("json");
            write_config(&path, cfg)?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(false);
    }
    let mut failed = false;
    for cfg in &cfgs {
        let out = pool.install(|| run_experiment(cfg)).map_err(|e| Failure::Other(e.into()))?;
        let path = write_output(&cli.out, cfg, cli.figure.is_some(), &out.records)?;
        eprintln!("wrote {} ({} rows)", path.display(), out.records.len());
        if out.mitigation_failures > 0 {
            eprintln!("{}: {} mitigated estimate(s) failed; see the flag column", path.display(), out.mitigation_failures);
            failed = true;
        }
    }
    Ok(failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_MITIGATION),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
