//! Subcommand implementations.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use charagram::analyzer::{build_working_vocab, nearest_neighbors, ngram_neighbors};
use charagram::evaluator::{
    binned_eval, default_length_bins, default_oov_bins, eval_sts, eval_word_sim, parse_bins, Binning, EvalReport,
    SimDataset,
};
use charagram::io::{self as cio, RunConfig};
use charagram::trainer::{finite_diff_audit, train, TrainConfig, TrainObserver};
use charagram::vocab::{build_vocab, encode_text};
use charagram::{CaseMode, ErrorKind, Model, Model64, NGramVocab, Orders, VocabPolicy};

use crate::format::general;
use crate::{
    AuditArgs, BuildVocabArgs, Command, EmbedArgs, EvalBinsArgs, EvalCommand, EvalStsArgs, EvalWordArgs,
    NnArgs, NnNgramArgs, OutputFormat, TrainArgs,
};

/// Significant digits printed for embedding components and cosines.
const DIGITS: usize = 9;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(charagram::Error),
    Output(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            },
            CliError::Output(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "writing output: {e}"),
        }
    }
}

impl From<charagram::Error> for CliError {
    fn from(e: charagram::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Output(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::BuildVocab(a) => build_vocab_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Eval(EvalCommand::Word(a)) => eval_word(a),
        Command::Eval(EvalCommand::Sts(a)) => eval_sts_cmd(a),
        Command::Eval(EvalCommand::Bins(a)) => eval_bins(a),
        Command::Embed(a) => embed(a),
        Command::Nn(a) => nn(a),
        Command::NnNgram(a) => nn_ngram(a),
        Command::AuditGrad(a) => audit(a),
    }
}

fn missing(path: &Path, what: &str) -> CliError {
    CliError::Core(charagram::Error::Io {
        path: path.to_path_buf(),
        source: io::Error::new(io::ErrorKind::NotFound, format!("{what} not found")),
    })
}

fn require_file(path: &Path) -> CliResult {
    if path.exists() && !path.is_dir() {
        Ok(())
    } else {
        Err(missing(path, "file"))
    }
}

fn require_dir(path: &Path) -> CliResult {
    if path.is_dir() {
        Ok(())
    } else {
        Err(missing(path, "directory"))
    }
}

/// The directory an output file will be written into must already exist.
fn require_writable(path: &Path) -> CliResult {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(missing(dir, "output directory")),
        _ => Ok(()),
    }
}

fn required(cfg: &RunConfig, key: &str) -> CliResult<PathBuf> {
    cfg.get(key)
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Usage(format!("missing --{} (or `{key}=` in the config file)", key.replace('_', "-"))))
}

/// Loads `--config` if given and overlays every flag that was set.
fn layered_config(file: Option<&Path>, flags: &[(&str, Option<&String>)]) -> CliResult<RunConfig> {
    let mut cfg = match file {
        Some(p) => {
            require_file(p)?;
            // A malformed config file is a usage problem, not bad data.
            RunConfig::load(p).map_err(|e| match e {
                charagram::Error::Parse { .. } => CliError::Usage(e.to_string()),
                other => other.into(),
            })?
        }
        None => RunConfig::default(),
    };
    let mut overrides = RunConfig::default();
    for (key, value) in flags {
        if let Some(v) = value {
            overrides.set(key, v.as_str())?;
        }
    }
    cfg.merge(&overrides);
    Ok(cfg)
}

fn echo_config(command: &str, cfg: &RunConfig) {
    eprintln!("# {command} effective configuration");
    for line in cfg.to_string().lines() {
        eprintln!("#   {line}");
    }
}

fn parse_case(s: &str) -> CliResult<CaseMode> {
    Ok(s.parse()?)
}

fn parse_scale(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("bad --scale {s:?}; expected MIN,MAX"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

const UNBOUNDED: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

fn load_model64(path: &Path) -> CliResult<(Model64, NGramVocab)> {
    require_file(path)?;
    let (model, vocab) = cio::load_model(path)?;
    Ok((model.cast(), vocab))
}

fn build_vocab_cmd(a: BuildVocabArgs) -> CliResult {
    let mut cfg = layered_config(
        a.config.as_deref(),
        &[
            ("input", a.input.as_ref()),
            ("orders", a.orders.as_ref()),
            ("policy", a.policy.as_ref()),
            ("case", a.case.as_ref()),
            ("out", a.out.as_ref()),
        ],
    )?;
    for (key, default) in [("orders", "2,3,4"), ("policy", "mincount:1"), ("case", "lower")] {
        if cfg.get(key).is_none() {
            cfg.set(key, default)?;
        }
    }
    let input = required(&cfg, "input")?;
    let out = required(&cfg, "out")?;
    let orders: Orders = cfg.orders()?.expect("defaulted");
    let policy: VocabPolicy = cfg.policy()?.expect("defaulted");
    let case = parse_case(cfg.get("case").expect("defaulted"))?;
    echo_config("build-vocab", &cfg);
    require_file(&input)?;
    require_writable(&out)?;

    let pairs = cio::load_pairs(&input)?;
    let vocab = build_vocab(pairs.phrases(), &orders, policy, case)?;
    cio::write_vocab(&vocab, &out)?;
    log::info!("wrote {} n-grams to {}", vocab.len(), out.display());
    Ok(())
}

/// Development-set tracking and batch-order logging during training.
struct TrainHooks<'a> {
    dev: Option<(&'a SimDataset, &'a NGramVocab)>,
    case: CaseMode,
    orders: Vec<Vec<usize>>,
}

impl TrainObserver<f64> for TrainHooks<'_> {
    fn on_epoch_start(&mut self, _epoch: usize, order: &[usize]) {
        self.orders.push(order.to_vec());
    }

    fn evaluate(&mut self, model: &Model<f64>) -> Vec<(String, f64)> {
        let Some((ds, vocab)) = self.dev else {
            return Vec::new();
        };
        match eval_word_sim(model, vocab, ds, self.case) {
            Ok(rho) => vec![("dev_spearman".to_string(), rho)],
            Err(e) => {
                log::warn!("development evaluation skipped: {e}");
                Vec::new()
            }
        }
    }
}

fn train_cmd(a: TrainArgs) -> CliResult {
    let curriculum = a.curriculum.then(|| "true".to_string());
    let cfg = layered_config(
        a.config.as_deref(),
        &[
            ("pairs", a.pairs.as_ref()),
            ("vocab", a.vocab.as_ref()),
            ("out", a.out.as_ref()),
            ("dim", a.dim.as_ref()),
            ("activation", a.activation.as_ref()),
            ("margin", a.margin.as_ref()),
            ("lambda", a.lambda.as_ref()),
            ("learning_rate", a.learning_rate.as_ref()),
            ("batch", a.batch.as_ref()),
            ("sampling", a.sampling.as_ref()),
            ("pool", a.pool.as_ref()),
            ("epochs", a.epochs.as_ref()),
            ("seed", a.seed.as_ref()),
            ("curriculum", curriculum.as_ref()),
            ("case", a.case.as_ref()),
            ("eval_pairs", a.eval_pairs.as_ref()),
            ("eval_every", a.eval_every.as_ref()),
            ("curve", a.curve.as_ref()),
        ],
    )?;
    let config: TrainConfig = cfg.train_config(TrainConfig::default())?;
    let pairs_path = required(&cfg, "pairs")?;
    let vocab_path = required(&cfg, "vocab")?;
    let out = required(&cfg, "out")?;
    let dev_path = cfg.get("eval_pairs").map(PathBuf::from);
    let curve_path = cfg.get("curve").map(PathBuf::from);

    let mut effective = cio::describe(&config);
    for key in ["pairs", "vocab", "out", "eval_pairs", "curve"] {
        if let Some(v) = cfg.get(key) {
            effective.set(key, v)?;
        }
    }
    echo_config("train", &effective);

    require_file(&pairs_path)?;
    require_file(&vocab_path)?;
    if let Some(p) = &dev_path {
        require_file(p)?;
    }
    for p in [Some(&out), curve_path.as_ref(), a.order_log.as_ref()].into_iter().flatten() {
        require_writable(p)?;
    }

    let pairs = cio::load_pairs(&pairs_path)?;
    let vocab = cio::read_vocab(&vocab_path)?;
    let dev = dev_path.as_deref().map(|p| cio::load_simset(p, UNBOUNDED)).transpose()?;
    let mut hooks = TrainHooks { dev: dev.as_ref().map(|d| (d, &vocab)), case: config.case, orders: Vec::new() };

    let started = Instant::now();
    let output = train::<f64>(&pairs, &vocab, &config, &mut hooks)?;
    log::info!("trained {} epochs in {:.2?}", config.epochs, started.elapsed());

    cio::save_model(&output.model, &vocab, &out)?;
    if let Some(p) = &curve_path {
        let mut tsv = String::from("examples_seen\tmetric\tvalue\n");
        tsv.push_str(&output.curve.to_tsv());
        cio::write_atomic(p, tsv.as_bytes())?;
    }
    if let Some(p) = &a.order_log {
        let text: String = hooks
            .orders
            .iter()
            .enumerate()
            .map(|(e, order)| {
                let idx: Vec<String> = order.iter().map(usize::to_string).collect();
                format!("{}\t{}\n", e + 1, idx.join(","))
            })
            .collect();
        cio::write_atomic(p, text.as_bytes())?;
    }

    let mut stdout = io::stdout().lock();
    for (e, loss) in output.epoch_losses.iter().enumerate() {
        writeln!(stdout, "epoch\t{}\tloss\t{}", e + 1, general(*loss, DIGITS))?;
    }
    Ok(())
}

fn print_report(report: &EvalReport, format: OutputFormat, metric: &str) -> CliResult {
    let text = match format {
        OutputFormat::Text => report.to_text(),
        OutputFormat::Tsv => report.to_tsv(metric),
    };
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn eval_word(a: EvalWordArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    let scale = a.scale.as_deref().map(parse_scale).transpose()?.unwrap_or(UNBOUNDED);
    require_file(&a.dataset)?;
    let (model, vocab) = load_model64(&a.model.model)?;
    let ds = cio::load_simset(&a.dataset, scale)?;
    let rho = eval_word_sim(&model, &vocab, &ds, case)?;
    let report = EvalReport { per_dataset: vec![(ds.name, rho)], ..Default::default() };
    print_report(&report, a.format, "spearman")
}

fn eval_sts_cmd(a: EvalStsArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    let scale = parse_scale(&a.scale)?;
    require_dir(&a.datasets)?;
    if let Some(g) = &a.groups {
        require_file(g)?;
    }
    let (model, vocab) = load_model64(&a.model.model)?;
    let datasets = cio::load_simset_dir(&a.datasets, scale)?;
    let groups = a.groups.as_deref().map(cio::load_groups).transpose()?.unwrap_or_default();
    let report = eval_sts(&model, &vocab, &datasets, &groups, case)?;
    print_report(&report, a.format, "pearson")
}

fn eval_bins(a: EvalBinsArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    let scale = parse_scale(&a.scale)?;
    let reference_path = match a.by.as_str() {
        "length" => None,
        other => match other.strip_prefix("oov:") {
            Some(p) if !p.is_empty() => Some(PathBuf::from(p)),
            _ => return Err(CliError::Usage(format!("bad --by {other:?}; expected oov:WORDLIST or length"))),
        },
    };
    let bins = match (&a.bins, &reference_path) {
        (Some(spec), _) => parse_bins(spec)?,
        (None, Some(_)) => default_oov_bins(),
        (None, None) => default_length_bins(),
    };
    require_dir(&a.datasets)?;
    if let Some(p) = &reference_path {
        require_file(p)?;
    }
    let (model, vocab) = load_model64(&a.model.model)?;
    let datasets = cio::load_simset_dir(&a.datasets, scale)?;
    let reference = reference_path.as_deref().map(cio::load_reference_vocab).transpose()?;
    let binning = match &reference {
        Some(r) => Binning::ByOov(r),
        None => Binning::ByMaxLength,
    };
    let rows = binned_eval(&model, &vocab, &datasets, binning, &bins, case)?;
    let report = EvalReport { bins: Some(rows), ..Default::default() };
    print_report(&report, a.format, "pearson")
}

fn embed(a: EmbedArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    if !a.stdin && a.text.is_empty() {
        return Err(CliError::Usage("give TEXT arguments or --stdin".into()));
    }
    let (model, vocab) = load_model64(&a.model.model)?;
    let mut out = io::BufWriter::new(io::stdout().lock());
    let mut emit = |text: &str| -> CliResult {
        let emb = model.embed(&encode_text(text, &vocab, case))?;
        if emb.oov_fallback {
            log::warn!("no known n-grams in {text:?}; embedding is h(b)");
        }
        let fields: Vec<String> = emb.values.iter().map(|&v| general(v, DIGITS)).collect();
        writeln!(out, "{}", fields.join("\t"))?;
        Ok(())
    };
    if a.stdin {
        for line in io::stdin().lock().lines() {
            let line = line?;
            emit(line.strip_suffix('\r').unwrap_or(&line))?;
        }
    } else {
        for t in &a.text {
            emit(t)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn nn(a: NnArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    require_file(&a.wordlist)?;
    let (model, vocab) = load_model64(&a.model.model)?;
    let words = cio::load_wordlist(&a.wordlist)?;
    let wv = build_working_vocab(&words, &model, &vocab, case)?;
    let mut out = io::stdout().lock();
    for q in &a.query {
        for (word, cos) in nearest_neighbors(q, &wv, &model, &vocab, case, a.k)? {
            writeln!(out, "{q}\t{word}\t{}", general(cos, DIGITS))?;
        }
    }
    Ok(())
}

fn nn_ngram(a: NnNgramArgs) -> CliResult {
    let (model, vocab) = load_model64(&a.model)?;
    let mut out = io::stdout().lock();
    for q in &a.ngram {
        let key = if vocab.get(q).is_none() && q.contains('_') { q.replace('_', " ") } else { q.clone() };
        for (gram, cos) in ngram_neighbors(&key, &model, &vocab, a.k)? {
            writeln!(out, "{q}\t{gram}\t{}", general(cos, DIGITS))?;
        }
    }
    Ok(())
}

fn audit(a: AuditArgs) -> CliResult {
    let case = parse_case(&a.model.case)?;
    require_file(&a.pairs)?;
    let (model, vocab) = load_model64(&a.model.model)?;
    let mut cfg = RunConfig::default();
    cfg.set("margin", a.margin.as_str())?;
    cfg.set("lambda", a.lambda.as_str())?;
    cfg.set("sampling", a.sampling.as_str())?;
    cfg.set("pool", a.pool.as_str())?;
    cfg.set("seed", a.seed.as_str())?;
    cfg.set("case", case.to_string())?;
    cfg.set("dim", model.dim().to_string())?;
    cfg.set("activation", model.activation().to_string())?;
    let config = cfg.train_config(TrainConfig::default())?;
    echo_config("audit-grad", &cfg);

    let pairs = cio::load_pairs(&a.pairs)?;
    let batch: Vec<(String, String)> = pairs.pairs().iter().take(a.batch).cloned().collect();
    let started = Instant::now();
    let report = finite_diff_audit(&model, &vocab, &batch, &config)?;
    log::info!("audited {} parameters in {:.2?}", report.checked, started.elapsed());
    let mut out = io::stdout().lock();
    writeln!(out, "max_rel_error\t{:e}", report.max_rel_error)?;
    writeln!(out, "checked\t{}", report.checked)?;
    writeln!(out, "min_hinge_distance\t{:e}", report.min_hinge_distance)?;
    Ok(())
}
