mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "molsynth", about = "Molecule parsing, descriptors, tri-modal alignment, instruction synthesis and evaluation")]
#[command(disable_version_flag = true, args_override_self = true, subcommand_required = false, arg_required_else_help = true)]
pub struct Cli {
    /// Print the package version and the bundled data-table versions.
    #[arg(long)]
    version: bool,

    /// key = value file; command-line flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for per-molecule work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Where to write the resolved-config echo (default: next to the main
    /// output as <out>.cfg).
    #[arg(long, global = true, value_name = "PATH")]
    echo: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonicalize a SMILES file, one molecule per line.
    Parse(ParseArgs),
    /// Compute descriptor values for a SMILES file.
    Props(PropsArgs),
    /// Train the alignment model on a triplet CSV.
    TrainAlign(TrainArgs),
    /// Build a triplet CSV from SMILES plus captions (file or model).
    GenTriplets(GenArgs),
    /// Expand triplets into instruction records (JSONL).
    Synth(SynthArgs),
    /// Split a line-oriented file 8:1:1 into train/validation/test.
    Split(SplitArgs),
    /// Score a prediction file.
    Eval(EvalArgs),
    /// Merge CSV reports into one table.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Parse(_) => "parse",
            Command::Props(_) => "props",
            Command::TrainAlign(_) => "train-align",
            Command::GenTriplets(_) => "gen-triplets",
            Command::Synth(_) => "synth",
            Command::Split(_) => "split",
            Command::Eval(_) => "eval",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fail on the first invalid line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct PropsArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Descriptor manifest (one id per line); the bundled one by default.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub triplets: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch loss history CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub epochs: usize,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.01)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long, default_value_t = 128)]
    pub ff: usize,
    #[arg(long, default_value_t = 32)]
    pub joint: usize,
    #[arg(long, default_value_t = 128)]
    pub max_len: usize,
    /// Quantile bins per descriptor.
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long, default_value_t = 1000)]
    pub text_vocab: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.07)]
    pub tau: f64,
    /// Gradient-norm cap (0 disables).
    #[arg(long, default_value_t = 1.0)]
    pub clip: f64,
    /// Keep an EMA copy of the weights with this decay, saved as
    /// <out>.ema.json.
    #[arg(long)]
    pub ema: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// SMILES file, one per line.
    #[arg(long)]
    pub smiles: PathBuf,
    /// Caption file aligned line by line with --smiles.
    #[arg(long, conflicts_with = "checkpoint")]
    pub captions: Option<PathBuf>,
    /// Caption with a trained model instead.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub triplets: PathBuf,
    /// Comma-separated subset of mc,tbmg,mpp,mcmg.
    #[arg(long, default_value = "mc,tbmg,mpp,mcmg")]
    pub tasks: String,
    /// Records per task.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Descriptors the MPP questions ask about.
    #[arg(long, default_value = "ExactMolWt,MolLogP")]
    pub mpp_props: String,
    /// Draw with replacement once a task's distinct pairs run out.
    #[arg(long)]
    pub allow_replacement: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Directory receiving train/validation/test files.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// caption, molgen, proppred or multiconstraint.
    #[arg(long)]
    pub task: String,
    /// Predictions, one per line.
    #[arg(long)]
    pub pred: PathBuf,
    /// References: one per line (caption, molgen) or smiles,value CSV
    /// (proppred).
    #[arg(long = "ref", value_name = "PATH")]
    pub reference: Option<PathBuf>,
    /// Constraint CSV for multiconstraint.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// md or csv.
    #[arg(long, default_value = "md")]
    pub report: String,
    /// Row label in the report.
    #[arg(long, default_value = "model")]
    pub label: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// CSV reports written by `eval --report csv`; repeatable.
    #[arg(long = "in", value_name = "PATH", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "md")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::apply_config_file(&raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = Cli::from_arg_matches(&matches).expect("derive matches its own command");
    if cli.version {
        println!("molsynth {}", env!("CARGO_PKG_VERSION"));
        for (name, v) in molsynth_core::data_table_versions() {
            println!("{name} table v{v}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        let _ = Cli::command().print_help();
        return ExitCode::from(2);
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let echo = config::echo(&matches, command.name());
    for line in echo.lines().filter(|l| !l.starts_with('#')) {
        log::info!("config: {line}");
    }
    match commands::run(&cli, command).and_then(|out| config::write_echo(&cli, out.as_deref(), &echo)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
