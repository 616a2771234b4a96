use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rulenet::datagen::FunctionId;
use rulenet::pipeline::{run_pipeline, PipelineConfig, PipelineError, Stage, StageRange, REPORT};

#[derive(Parser)]
#[command(name = "rulenet", version, about = "Rules from pruned neural networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the training data and the initial weights.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Classification function: F1-F7 or F9.
    #[arg(long, global = true)]
    function: Option<FunctionId>,
    #[arg(long, global = true)]
    stage_from: Option<Stage>,
    #[arg(long, global = true)]
    stage_to: Option<Stage>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Generate,
    Encode,
    Train,
    Prune,
    Extract,
    Evaluate,
    /// Run a range of stages, by default all of them.
    Pipeline,
}

fn config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.generator.seed = seed;
        cfg.train.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(f) = cli.function {
        cfg.generator.function = f;
    }
    let single = match cli.command {
        Command::Generate => Some(Stage::Generate),
        Command::Encode => Some(Stage::Encode),
        Command::Train => Some(Stage::Train),
        Command::Prune => Some(Stage::Prune),
        Command::Extract => Some(Stage::Extract),
        Command::Evaluate => Some(Stage::Evaluate),
        Command::Pipeline => None,
    };
    match single {
        Some(stage) => {
            if cli.stage_from.is_some() || cli.stage_to.is_some() {
                return Err(PipelineError::Validation(format!(
                    "--stage-from/--stage-to only apply to `pipeline`, not `{stage}`"
                )));
            }
            cfg.stages = StageRange::only(stage);
        }
        None => {
            if let Some(s) = cli.stage_from {
                cfg.stages.from = s;
            }
            if let Some(s) = cli.stage_to {
                cfg.stages.to = s;
            }
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| run_pipeline(&cfg));
    match result {
        Ok(summary) => {
            let names: Vec<&str> = summary.stages.iter().map(|s| s.name()).collect();
            eprintln!("ran {} in {}", names.join(", "), summary.out_dir.display());
            if summary.stages.contains(&Stage::Evaluate) {
                eprintln!("report: {}", summary.out_dir.join(REPORT).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
