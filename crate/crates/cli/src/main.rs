mod check;
mod commands;
mod toy;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metarepair_core::config::{ClientConfig, Config};
use metarepair_core::harness::VariantKind;
use metarepair_core::transforms::TransformKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or inputs; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Some work failed; exit code 1.
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Partial(_) => 1,
        }
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "metarepair", version, about = "Metamorphic robustness experiments for LLM program repair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config file plus per-field overrides.
#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus_manifest: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Replay fixture directory; selects the replay client.
    #[arg(long)]
    replay_dir: Option<PathBuf>,
    /// Synonym table for the dictionary provider.
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long)]
    samples_per_bug: Option<usize>,
    #[arg(long)]
    patch_count: Option<usize>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    permutation_iterations: Option<usize>,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p).map_err(|e| CliError::Usage(e.to_string()))?,
            None => {
                let (Some(m), Some(o)) = (&self.corpus_manifest, &self.output_dir) else {
                    return Err(CliError::Usage("give --config or both --corpus-manifest and --output-dir".into()));
                };
                let dir = self.replay_dir.clone().unwrap_or_else(|| o.join("replay"));
                Config::new(m, o, ClientConfig::Replay { dir })
            }
        };
        if let Some(v) = &self.corpus_manifest {
            cfg.corpus_manifest = v.clone();
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.replay_dir {
            cfg.client = ClientConfig::Replay { dir: v.clone() };
        }
        if let Some(v) = &self.synonyms {
            cfg.provider = metarepair_core::config::ProviderConfig::Dictionary { path: Some(v.clone()), cache: None };
        }
        if let Some(v) = self.samples_per_bug {
            cfg.samples_per_bug = v;
        }
        if let Some(v) = self.patch_count {
            cfg.patch_count = v;
        }
        if let Some(v) = self.parallelism {
            cfg.parallelism = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.permutation_iterations {
            cfg.permutation_iterations = v;
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantSelector {
    Original,
    Transformed,
    Both,
}

impl VariantSelector {
    pub fn kinds(self) -> Vec<VariantKind> {
        match self {
            VariantSelector::Original => vec![VariantKind::Original],
            VariantSelector::Transformed => vec![VariantKind::Transformed],
            VariantSelector::Both => vec![VariantKind::Original, VariantKind::Transformed],
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Apply the transformations to every bug and write the variants.
    Transform {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated subset of passes, e.g. RVar,F2W. All by default.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<TransformKind>,
    },
    /// Prompt the model for each bug variant and validate the patches.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantSelector,
    },
    /// Compute success-rate statistics and write the report tables.
    Analyze {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Result log; <output_dir>/results.jsonl by default.
        #[arg(long)]
        log: Option<PathBuf>,
        /// JSON lines of {bug_id, mean_nll} or {bug_id, token_logprobs}.
        #[arg(long)]
        nll: Option<PathBuf>,
    },
    /// Write the prompt for every bug variant with its replay hash.
    Prompts {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantSelector,
    },
    /// Differential check of the transformations on generated programs.
    DiffCheck {
        #[arg(long, default_value_t = 1000)]
        programs: u64,
        #[arg(long, default_value_t = 64)]
        inputs: usize,
        #[arg(long, default_value_t = 60)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write failing cases as JSON here.
        #[arg(long)]
        diff_report: Option<PathBuf>,
    },
    /// Run a toy project's assertions against its single-method class.
    ToyTest { project: PathBuf },
    /// Print a method file in canonical form.
    Fmt { file: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Transform { cfg, kinds } => cfg.load().and_then(|c| commands::transform(&c, &kinds)),
        Command::Run { cfg, variant } => cfg.load().and_then(|c| commands::run(&c, variant)),
        Command::Analyze { cfg, log, nll } => {
            cfg.load().and_then(|c| commands::analyze(&c, log.as_deref(), nll.as_deref()))
        }
        Command::Prompts { cfg, variant } => cfg.load().and_then(|c| commands::prompts(&c, variant)),
        Command::DiffCheck { programs, inputs, budget, seed, diff_report } => {
            check::diff_check(programs, inputs, budget, seed, diff_report.as_deref())
        }
        Command::ToyTest { project } => toy::run(&project),
        Command::Fmt { file } => commands::fmt(&file),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
