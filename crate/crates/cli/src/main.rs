//! `translit`: train transliteration cost models and use them.
//!
//! Exit status is 0 on success, 1 on a usage error, 2 on a data error.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(
    name = "translit",
    version,
    about = "Learned substring transliteration"
)]
pub struct Cli {
    /// Seed for every random choice (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// TOML file with defaults; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a raw pair file and split it into train/tune/test.
    Clean(CleanArgs),
    /// Learn a cost model from a pair file.
    Train(TrainArgs),
    /// Construct the k best transliterations of a word.
    Transliterate(TranslitArgs),
    /// Transliterate through an intermediate language.
    Pivot(PivotArgs),
    /// Find the lexicon words closest to a word.
    Match(MatchArgs),
    /// Score a model on held-out pairs.
    Evaluate(EvaluateArgs),
    /// Export the single-character cost matrix as CSV.
    Heatmap(HeatmapArgs),
    /// Scan two lexicons for cross-language friends.
    Friends(FriendsArgs),
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving train.tsv, tune.tsv, test.tsv and rejects.tsv.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long)]
    pub keep_punctuation: bool,
    #[arg(long)]
    pub keep_whitespace: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-round statistics CSV; defaults to `<out>.stats.csv`.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value = "src")]
    pub src_lang: String,
    #[arg(long, default_value = "tgt")]
    pub tgt_lang: String,
    /// Train on the seeded 80% split only instead of the whole file.
    #[arg(long)]
    pub split: bool,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub rounds: Option<u32>,
    #[arg(long)]
    pub lmax: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub cost_floor: Option<f64>,
    #[arg(long)]
    pub early_stop: Option<f64>,
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub warmup_rounds: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenFlags {
    /// Extra cost allowed above the word length.
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TranslitArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: Option<u32>,
    #[command(flatten)]
    pub gen: GenFlags,
}

#[derive(Debug, Args)]
pub struct PivotArgs {
    /// Model from the source language into the pivot language.
    #[arg(long)]
    pub first: PathBuf,
    /// Model from the pivot language into the target language.
    #[arg(long)]
    pub second: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: Option<u32>,
    /// Intermediates kept per leg; defaults to 5k.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub beam: Option<u32>,
    #[command(flatten)]
    pub gen: GenFlags,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: Option<u32>,
    /// Also report this word's rank in the whole lexicon (on stderr).
    #[arg(long)]
    pub gold: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Held-out `source<TAB>target` pairs.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,20,100")]
    pub k_list: Vec<usize>,
    #[arg(long, default_value = "ours")]
    pub name: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub gen: GenFlags,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Row characters; defaults to the model's source alphabet.
    #[arg(long)]
    pub src_chars: Option<String>,
    /// Column characters; defaults to the model's target alphabet.
    #[arg(long)]
    pub tgt_chars: Option<String>,
}

#[derive(Debug, Args)]
pub struct FriendsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub src_lexicon: PathBuf,
    #[arg(long)]
    pub tgt_lexicon: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub src_emb: PathBuf,
    #[arg(long)]
    pub tgt_emb: PathBuf,
    /// Record TSV, one row per candidate pair.
    #[arg(long)]
    pub out: PathBuf,
    /// Cohort summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// TP/EP/B/N counts CSV.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Language label of the counts row; defaults to the model's target.
    #[arg(long)]
    pub lang: Option<String>,
    /// Gold true-friend pairs (TSV); enables F1 scoring.
    #[arg(long, requires = "gold_false")]
    pub gold_true: Option<PathBuf>,
    #[arg(long, requires = "gold_true")]
    pub gold_false: Option<PathBuf>,
    /// either, translation, embedding or both.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub next_cohort: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<usize>,
    #[arg(long)]
    pub min_len: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => FileConfig::default(),
    };
    let threads = cli.threads.map(usize::from).or(file.threads);
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(&cli, &file, &mut out).and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
