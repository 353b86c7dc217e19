use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use s1lab_core::config::{Command, Format, RunConfig};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "s1lab", version, about = "Circle-valued maps: degrees, singularities, areas and recovery studies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for report files; reports go to stdout if omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for randomized checks; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report format; overrides the config
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Degree of a map or saved field on a circle
    Degree,
    /// Point singularities of a sampled field
    Singularities,
    /// Area breakdown of a sampled field and the relaxed target of a map
    Area,
    /// Convergence study of a recovery family
    Study,
    /// Sample a map or recovery members to field files
    Sample,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
    Both,
}

impl Cmd {
    fn kind(self) -> Command {
        match self {
            Cmd::Degree => Command::Degree,
            Cmd::Singularities => Command::Singularities,
            Cmd::Area => Command::Area,
            Cmd::Study => Command::Study,
            Cmd::Sample => Command::Sample,
        }
    }
}

fn load_config(cli: &Cli) -> s1lab_core::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| s1lab_core::Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Both => Format::Both,
        };
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.validate(cli.command.kind())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = load_config(&cli).and_then(|cfg| match cli.command {
        Cmd::Degree => commands::degree(&cfg),
        Cmd::Singularities => commands::singularities(&cfg),
        Cmd::Area => commands::area(&cfg),
        Cmd::Study => commands::study(&cfg),
        Cmd::Sample => commands::sample(&cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric_quality() { 2 } else { 1 })
        }
    }
}
