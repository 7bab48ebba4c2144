//! Subcommands of the `termorder` binary.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use termorder::axiom::{self, Source, SuiteConfig};
use termorder::eval::{self, Qrels, Run};
use termorder::index::manifest_hash;
use termorder::synth::{SynthConfig, SyntheticCollection};
use termorder::text::{read_corpus, read_topics, CorpusFormat};
use termorder::{batch_search, Analyzer, Config, Model, PositionalIndex, Query, Vocabulary};

/// Analyzer settings stored next to an index so topics are analyzed the same way.
const ANALYZER_FILE: &str = "analyzer.txt";

#[derive(Debug, Parser)]
#[command(name = "termorder", version, about = "Order-aware retrieval experiments")]
pub struct Cli {
    /// Flat key=value config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Raw config override, repeatable: --set plm.sigma=50
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Index a corpus and persist it.
    BuildIndex(BuildIndexArgs),
    /// Rank every topic and write a TREC run.
    BatchSearch(BatchSearchArgs),
    /// MAP and P@10 of a run, optionally against a baseline run.
    Eval(EvalArgs),
    /// Association between relevance and query-term order.
    AnalyzeOrder(AnalyzeOrderArgs),
    /// Check the term-order constraint on perturbed document pairs.
    CheckAxioms(CheckAxiomsArgs),
    /// MAP over a range of window sizes or order-weight strengths.
    Sweep(SweepArgs),
    /// Write a seeded synthetic corpus, topics and qrels.
    GenerateSynthetic(SynthArgs),
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// SITO / ordered window for both models.
    #[arg(long)]
    pub window: Option<u32>,
    /// Dirichlet prior for both models.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// PLM-M order-weight strength.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lambda_ow: Option<f64>,
    /// `sito` or `neutral` (g = h = 1).
    #[arg(long)]
    pub order_weights: Option<String>,
    /// Query pairs for the ordered-window component: `all` or `non-adjacent`.
    #[arg(long)]
    pub ow_pairs: Option<String>,
}

impl ParamArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("window", self.window.map(|v| v.to_string()));
        push("mu", self.mu.map(|v| v.to_string()));
        push("plm.sigma", self.sigma.map(|v| v.to_string()));
        push("plm.lambda", self.lambda.map(|v| v.to_string()));
        push("sdm.lambda_ow", self.lambda_ow.map(|v| v.to_string()));
        push("sdm.order_weights", self.order_weights.clone());
        push("sdm.ordered_pairs", self.ow_pairs.clone());
        out
    }
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// `trec` or `lines`.
    #[arg(long, default_value = "trec")]
    pub format: String,
    #[arg(long)]
    pub index: PathBuf,
    /// Drop a small English stopword list.
    #[arg(long)]
    pub stopwords: bool,
}

#[derive(Debug, Args)]
pub struct BatchSearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long)]
    pub model: Model,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tag: Option<String>,
    /// Output run file (default stdout).
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Per-query TSV report.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeOrderArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long, default_value_t = eval::ASSOCIATION_WINDOW)]
    pub window: u32,
    /// Per-pair association TSV.
    #[arg(long)]
    pub tsv: Option<PathBuf>,
    /// Dump collection SITO values of every query pair as TSV.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckAxiomsArgs {
    /// Draw pairs and base documents from this index.
    #[arg(long, conflicts_with = "synthetic")]
    pub index: Option<PathBuf>,
    /// Use a generated collection with planted pairs.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, value_delimiter = ',', default_value = "sdm,sdm-m,plm,plm-m")]
    pub models: Vec<Model>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    pub gaps: Vec<usize>,
    /// Append the pair without the isolating pad token.
    #[arg(long)]
    pub no_pad: bool,
    /// Run with and without the pad token.
    #[arg(long)]
    pub verbose: bool,
    /// Per-trial TSV log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Window,
    Lambda,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Defaults: 2..=15 for window, 0.5,1,2,4,8 for lambda.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    #[arg(long)]
    pub model: Model,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub docs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Data(e) => {
                // library errors already render their source; skip repeats
                let mut shown = String::new();
                for cause in e.chain() {
                    let text = cause.to_string();
                    if !shown.contains(&text) {
                        if !shown.is_empty() {
                            shown.push_str(": ");
                        }
                        shown.push_str(&text);
                    }
                }
                f.write_str(&shown)
            }
        }
    }
}

impl From<termorder::Error> for CliError {
    fn from(e: termorder::Error) -> Self {
        match e {
            termorder::Error::InvalidParam(_) => CliError::Usage(e.into()),
            _ => CliError::Data(e.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<termorder::Error>() {
            Ok(inner) => inner.into(),
            Err(e) => CliError::Data(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(anyhow!(msg.into()))
}

fn timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}

fn output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn resolve(cli: &Cli, extra: Vec<(String, String)>) -> CliResult<Config> {
    let mut overrides = Vec::new();
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(t) = cli.threads {
        overrides.push(("threads".into(), t.to_string()));
    }
    overrides.extend(extra);
    Ok(Config::resolve(cli.config.as_deref(), &overrides)?)
}

fn analyzer_for(stopwords: bool) -> Analyzer {
    if stopwords {
        Analyzer::with_default_stopwords()
    } else {
        Analyzer::new()
    }
}

fn load_index(dir: &Path) -> CliResult<(PositionalIndex, Analyzer, String)> {
    let index = PositionalIndex::load(dir)?;
    let stopwords = fs::read_to_string(dir.join(ANALYZER_FILE))
        .map(|s| s.lines().any(|l| l.trim() == "stopwords=true"))
        .unwrap_or(false);
    let hash = manifest_hash(dir)?;
    Ok((index, analyzer_for(stopwords), hash))
}

fn load_topics(path: &Path, analyzer: &Analyzer, vocab: &Vocabulary) -> CliResult<Vec<Query>> {
    Ok(read_topics(path, analyzer, vocab)?)
}

pub fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::BuildIndex(a) => build_index(&cli, a),
        Command::BatchSearch(a) => batch(&cli, a),
        Command::Eval(a) => evaluate(&cli, a),
        Command::AnalyzeOrder(a) => analyze_order(&cli, a),
        Command::CheckAxioms(a) => check_axioms(&cli, a),
        Command::Sweep(a) => sweep(&cli, a),
        Command::GenerateSynthetic(a) => generate(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn build_index(cli: &Cli, a: &BuildIndexArgs) -> CliResult {
    let format: CorpusFormat = a.format.parse()?;
    let mut cfg = resolve(
        cli,
        vec![
            ("corpus".into(), a.corpus.display().to_string()),
            ("index".into(), a.index.display().to_string()),
            ("format".into(), format.to_string()),
        ],
    )?;
    cfg.stopwords |= a.stopwords;
    let analyzer = analyzer_for(cfg.stopwords);
    let mut vocab = Vocabulary::new();
    let docs: Vec<_> = read_corpus(&a.corpus, format, &analyzer, &mut vocab)?.collect::<Result<_, _>>()?;
    let index = PositionalIndex::build(vocab, docs)?;
    index.save(&a.index)?;
    fs::write(a.index.join(ANALYZER_FILE), format!("stopwords={}\nstemmer=porter\n", cfg.stopwords))
        .with_context(|| format!("cannot write {}", a.index.display()))?;
    let stats = index.stats();
    println!(
        "docs={} tokens={} vocab={} manifest_sha256={}",
        stats.num_docs,
        stats.total_tokens,
        index.vocab().len(),
        manifest_hash(&a.index)?
    );
    Ok(())
}

fn batch(cli: &Cli, a: &BatchSearchArgs) -> CliResult {
    let mut extra = a.params.overrides();
    extra.push(("index".into(), a.index.display().to_string()));
    extra.push(("topics".into(), a.topics.display().to_string()));
    if let Some(k) = a.k {
        extra.push(("k".into(), k.to_string()));
    }
    if let Some(t) = &a.tag {
        extra.push(("tag".into(), t.clone()));
    }
    let cfg = resolve(cli, extra)?;
    let (index, analyzer, hash) = load_index(&a.index)?;
    let queries = load_topics(&a.topics, &analyzer, index.vocab())?;
    let tag = cfg.tag.clone().unwrap_or_else(|| a.model.name().to_string());
    let run = batch_search(&index, &queries, a.model, &cfg.params, cfg.k, &tag)?;
    let mut out = output(a.run.as_deref())?;
    run.write(&mut out)?;
    out.flush()?;
    if let Some(path) = &a.run {
        // run files carry no comments; the resolved config goes alongside
        let mut side = path.as_os_str().to_owned();
        side.push(".config");
        fs::write(PathBuf::from(side), cfg.header(Some(&hash), &timestamp()))?;
    }
    Ok(())
}

fn evaluate(cli: &Cli, a: &EvalArgs) -> CliResult {
    let mut extra = vec![
        ("run".to_string(), a.run.display().to_string()),
        ("qrels".to_string(), a.qrels.display().to_string()),
    ];
    if let Some(b) = &a.baseline {
        extra.push(("baseline".into(), b.display().to_string()));
    }
    let cfg = resolve(cli, extra)?;
    let run = Run::read(&a.run)?;
    let qrels = Qrels::read(&a.qrels)?;
    let report = match &a.baseline {
        Some(b) => eval::compare(&run, &Run::read(b)?, &qrels),
        None => eval::evaluate(&run, &qrels),
    };
    let header = cfg.header(None, &timestamp());
    let mut out = io::stdout().lock();
    out.write_all(header.as_bytes())?;
    report.write_summary(&mut out)?;
    if let Some(path) = &a.tsv {
        let mut w = output(Some(path))?;
        w.write_all(header.as_bytes())?;
        report.write_tsv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn analyze_order(cli: &Cli, a: &AnalyzeOrderArgs) -> CliResult {
    let cfg = resolve(
        cli,
        vec![
            ("index".into(), a.index.display().to_string()),
            ("topics".into(), a.topics.display().to_string()),
            ("qrels".into(), a.qrels.display().to_string()),
        ],
    )?;
    let (index, analyzer, hash) = load_index(&a.index)?;
    let queries = load_topics(&a.topics, &analyzer, index.vocab())?;
    let qrels = Qrels::read(&a.qrels)?;
    let report = eval::order_association(&queries, &qrels, &index, a.window);
    let header = format!("{}# association_window={}\n", cfg.header(Some(&hash), &timestamp()), a.window);
    let mut out = io::stdout().lock();
    out.write_all(header.as_bytes())?;
    report.write_summary(&mut out)?;
    if let Some(path) = &a.tsv {
        let mut w = output(Some(path))?;
        w.write_all(header.as_bytes())?;
        report.write_tsv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.pairs {
        let sito = termorder::Sito::new(cfg.params.sdm.window)?;
        let mut w = output(Some(path))?;
        w.write_all(header.as_bytes())?;
        writeln!(w, "# sito_window={}", sito.window())?;
        writeln!(w, "term_a\tterm_b\tdf_ab\tdf_ba\tsem")?;
        let mut seen = std::collections::BTreeSet::new();
        for q in &queries {
            for (i, &x) in q.terms.iter().enumerate() {
                for &y in &q.terms[i + 1..] {
                    if x == y || !seen.insert((x, y)) {
                        continue;
                    }
                    let (ab, ba) = sito.doc_freqs(&index, x, y);
                    let name = |t| index.vocab().surface(t).unwrap_or("<oov>");
                    writeln!(w, "{}\t{}\t{ab}\t{ba}\t{:.6}", name(x), name(y), sito.sem(&index, x, y))?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn check_axioms(cli: &Cli, a: &CheckAxiomsArgs) -> CliResult {
    let mut extra = a.params.overrides();
    if let Some(t) = a.trials {
        extra.push(("trials".into(), t.to_string()));
    }
    if let Some(s) = a.seed {
        extra.push(("seed".into(), s.to_string()));
    }
    if let Some(i) = &a.index {
        extra.push(("index".into(), i.display().to_string()));
    }
    let cfg = resolve(cli, extra)?;
    let synthetic;
    let loaded;
    let (source, hash) = match (&a.index, a.synthetic) {
        (Some(dir), _) => {
            loaded = load_index(dir)?;
            (Source::Index(&loaded.0), Some(loaded.2.clone()))
        }
        (None, true) => {
            let coll = SyntheticCollection::generate(SynthConfig {
                seed: cfg.seed,
                ..SynthConfig::default()
            })?;
            let idx = coll.build_index()?;
            synthetic = (coll, idx);
            (Source::Synthetic(&synthetic.0, &synthetic.1), None)
        }
        (None, false) => return Err(usage("check-axioms needs --index DIR or --synthetic")),
    };
    let pads: Vec<bool> = if a.verbose { vec![true, false] } else { vec![!a.no_pad] };
    let header = cfg.header(hash.as_deref(), &timestamp());
    let mut out = io::stdout().lock();
    out.write_all(header.as_bytes())?;
    let mut log = a.log.as_deref().map(|p| output(Some(p))).transpose()?;
    if let Some(w) = log.as_mut() {
        w.write_all(header.as_bytes())?;
    }
    for pad in pads {
        let suite = SuiteConfig {
            trials: cfg.trials,
            gaps: a.gaps.clone(),
            seed: cfg.seed,
            pad,
            ..SuiteConfig::default()
        };
        let report = axiom::run_suite(&a.models, &source, &suite, &cfg.params)?;
        writeln!(out, "pad={pad}")?;
        report.write_summary(&mut out)?;
        if let Some(w) = log.as_mut() {
            report.write_tsv(w)?;
        }
    }
    if let Some(mut w) = log {
        w.flush()?;
    }
    Ok(())
}

/// One `(value, MAP, P@10)` row per swept value.
pub fn sweep_rows(
    index: &PositionalIndex,
    queries: &[Query],
    qrels: &Qrels,
    model: Model,
    base: &Config,
    param: SweepParam,
    values: &[f64],
) -> CliResult<Vec<(f64, f64, f64)>> {
    let mut rows = Vec::new();
    for &v in values {
        let mut cfg = base.clone();
        match param {
            SweepParam::Window => {
                if v.fract() != 0.0 || v < 2.0 {
                    return Err(usage(format!("window values are integers >= 2, got {v}")));
                }
                cfg.set("window", &(v as u32).to_string())?;
            }
            SweepParam::Lambda => cfg.set("plm.lambda", &v.to_string())?,
        }
        cfg.validate()?;
        let run = batch_search(index, queries, model, &cfg.params, cfg.k, model.name())?;
        let report = eval::evaluate(&run, qrels);
        rows.push((v, report.map, report.p10));
    }
    Ok(rows)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> CliResult {
    let mut extra = a.params.overrides();
    extra.push(("index".into(), a.index.display().to_string()));
    extra.push(("topics".into(), a.topics.display().to_string()));
    extra.push(("qrels".into(), a.qrels.display().to_string()));
    if let Some(k) = a.k {
        extra.push(("k".into(), k.to_string()));
    }
    let cfg = resolve(cli, extra)?;
    if a.param == SweepParam::Lambda && !matches!(a.model, Model::PlmM) {
        log::warn!("lambda only affects plm-m; {} rows will not vary", a.model);
    }
    let values: Vec<f64> = match (a.values.is_empty(), a.param) {
        (false, _) => a.values.clone(),
        (true, SweepParam::Window) => (2..=15).map(f64::from).collect(),
        (true, SweepParam::Lambda) => vec![0.5, 1.0, 2.0, 4.0, 8.0],
    };
    let (index, analyzer, hash) = load_index(&a.index)?;
    let queries = load_topics(&a.topics, &analyzer, index.vocab())?;
    let qrels = Qrels::read(&a.qrels)?;
    let rows = sweep_rows(&index, &queries, &qrels, a.model, &cfg, a.param, &values)?;
    let mut out = output(a.out.as_deref())?;
    out.write_all(cfg.header(Some(&hash), &timestamp()).as_bytes())?;
    let name = match a.param {
        SweepParam::Window => "window",
        SweepParam::Lambda => "lambda",
    };
    writeln!(out, "# model={}", a.model)?;
    writeln!(out, "{name}\tmap\tp10")?;
    for (v, map, p10) in rows {
        writeln!(out, "{v}\t{map:.6}\t{p10:.6}")?;
    }
    out.flush()?;
    Ok(())
}

fn generate(a: &SynthArgs) -> CliResult {
    let coll = SyntheticCollection::generate(SynthConfig::with_docs(a.docs, a.seed))?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> io::Result<()>| -> CliResult {
        let path = a.out.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    };
    write("corpus.trec", &|w| coll.write_trec(w))?;
    write("topics.tsv", &|w| coll.write_topics(w))?;
    write("qrels.txt", &|w| coll.write_qrels(w))?;
    println!("docs={} topics={}", coll.documents.len(), coll.pairs.len());
    Ok(())
}
