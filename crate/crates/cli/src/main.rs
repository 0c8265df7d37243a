mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

/// Train, evaluate, and query character n-gram embedding models.
#[derive(Debug, Parser)]
#[command(name = "charagram", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// Parsed once per process, so variant size does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
enum Command {
    /// Count n-grams over both sides of a pair file and write a vocabulary.
    BuildVocab(BuildVocabArgs),
    /// Train a model on paraphrase pairs.
    Train(TrainArgs),
    /// Correlate model similarities with gold scores.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Print one embedding per input line.
    Embed(EmbedArgs),
    /// Nearest words from a word list.
    Nn(NnArgs),
    /// Nearest n-grams in the model vocabulary.
    NnNgram(NnNgramArgs),
    /// Compare the analytic gradient of one batch against central differences.
    AuditGrad(AuditArgs),
}

#[derive(Debug, Args)]
struct BuildVocabArgs {
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pair file (phrase1<TAB>phrase2).
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated n-gram orders.
    #[arg(long)]
    orders: Option<String>,
    /// mincount:C or topk:K.
    #[arg(long)]
    policy: Option<String>,
    /// lower or preserve.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    vocab: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    /// linear or tanh.
    #[arg(long)]
    activation: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    /// L2 strength.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    /// max or mix.
    #[arg(long)]
    sampling: Option<String>,
    /// same-side or both-sides.
    #[arg(long)]
    pool: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Keep file order for the first epoch.
    #[arg(long)]
    curriculum: bool,
    /// lower or preserve; must match the vocabulary.
    #[arg(long)]
    case: Option<String>,
    /// Similarity file (text1<TAB>text2<TAB>gold) tracked during training.
    #[arg(long)]
    eval_pairs: Option<String>,
    /// Fraction of an epoch between development evaluations.
    #[arg(long)]
    eval_every: Option<String>,
    /// Write the training curve as TSV.
    #[arg(long)]
    curve: Option<String>,
    /// Write each epoch's pair order, one epoch per line.
    #[arg(long)]
    order_log: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Spearman's rho on one word-similarity file.
    Word(EvalWordArgs),
    /// Pearson's r on every file in a directory, with group means.
    Sts(EvalStsArgs),
    /// Pearson's r within bins of OOV count or sentence length.
    Bins(EvalBinsArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    /// Case handling applied to inputs; must match the training vocabulary.
    #[arg(long, default_value = "lower")]
    case: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Text,
    Tsv,
}

#[derive(Debug, Args)]
struct EvalWordArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    dataset: PathBuf,
    /// Allowed gold range as MIN,MAX. Unbounded when omitted.
    #[arg(long)]
    scale: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EvalStsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Directory of similarity files.
    #[arg(long)]
    datasets: PathBuf,
    /// dataset<TAB>group lines.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, default_value = "0,5")]
    scale: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EvalBinsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    datasets: PathBuf,
    /// oov:WORDLIST or length.
    #[arg(long)]
    by: String,
    /// Comma-separated bins such as "0,1,2,>=1". Defaults depend on --by.
    #[arg(long)]
    bins: Option<String>,
    #[arg(long, default_value = "0,5")]
    scale: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Read one text per line from standard input.
    #[arg(long, conflicts_with = "text")]
    stdin: bool,
    text: Vec<String>,
}

#[derive(Debug, Args)]
struct NnArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    wordlist: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(required = true)]
    query: Vec<String>,
}

#[derive(Debug, Args)]
struct NnNgramArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// N-grams to look up. `_` stands for a boundary space when the literal
    /// n-gram is absent.
    #[arg(required = true)]
    ngram: Vec<String>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    pairs: PathBuf,
    /// Number of leading pairs forming the audited batch.
    #[arg(long, default_value_t = 5)]
    batch: usize,
    #[arg(long, default_value = "0.4")]
    margin: String,
    #[arg(long, default_value = "1e-6")]
    lambda: String,
    #[arg(long, default_value = "max")]
    sampling: String,
    #[arg(long, default_value = "same-side")]
    pool: String,
    #[arg(long, default_value = "0")]
    seed: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
