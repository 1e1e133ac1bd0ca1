//! `artsel`: build instance databases, train per-head forests, restore
//! articles in stripped text and evaluate.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use artsel::aan::{load_rules, AAnTrie};
use artsel::corpus::{
    extract_instances, read_db, read_gold, respell, strip_articles, tokenize, write_db, write_gold, NounPhraseInstance,
    StrippedDocument,
};
use artsel::dtree::TreeConfig;
use artsel::eval::{
    baselines, curve_to_text, default_curve_sizes, evaluate, learning_curve, percent, restore_document, run_experiment,
    EvaluationReport, ExperimentConfig, ExperimentMeta,
};
use artsel::forest::{train_forest, ForestConfig, TreeForest};
use artsel::{write_atomic, ArticleLabel};

#[derive(Parser)]
#[command(name = "artsel", version, about = "Decide between \"the\" and \"a/an\" with per-head decision trees")]
struct Cli {
    /// Worker threads for training (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Extra diagnostics on stderr (per-head training log, per-slot trace).
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract article-anchored noun phrases from raw text into a database.
    BuildDb {
        /// Text files; blank lines separate documents.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Replace every article by ??? and write the removed articles as gold.
    Strip {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Train a forest of per-head trees.
    Train {
        #[arg(long)]
        db: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Fill the ??? slots of a stripped text.
    Apply {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        /// Output file (default: stdout).
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Gold sidecar from `strip`; prints a score to stderr.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// a/an rule file replacing the bundled one.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Held-out evaluation on a database, or a model on a text.
    Eval {
        #[arg(long, required_unless_present = "text")]
        db: Option<PathBuf>,
        /// Evaluate this model instead of training on a split.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Labeled raw text to strip and restore with `--model`.
        #[arg(long, requires = "model", conflicts_with = "db")]
        text: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[command(flatten)]
        thresholds: Thresholds,
    },
    /// Learning curve for one head noun.
    Curve {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        head: String,
        #[arg(long)]
        seed: u64,
        /// Comma-separated ascending training sizes (default: ten steps from 0).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0.9)]
        train_fraction: f64,
        #[arg(long, default_value_t = 4)]
        min_feature_count: u64,
        #[arg(long, default_value_t = 0.98)]
        purity: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Coin-flip and always-"the" accuracies.
    Baseline {
        #[arg(long, required_unless_present = "gold", conflicts_with = "gold")]
        db: Option<PathBuf>,
        /// Gold sidecar from `strip`.
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Args, Clone, Copy)]
struct Thresholds {
    /// Heads seen fewer times get no tree.
    #[arg(long, default_value_t = 25)]
    min_head_count: usize,
    /// Features on fewer node instances are not asked about.
    #[arg(long, default_value_t = 4)]
    min_feature_count: u64,
    /// Majority fraction at which a node stops splitting.
    #[arg(long, default_value_t = 0.98)]
    purity: f64,
    /// Keep only this many trees, most frequent heads first.
    #[arg(long)]
    max_trees: Option<usize>,
}

impl Thresholds {
    fn forest(&self) -> Result<ForestConfig> {
        if !(0.5..=1.0).contains(&self.purity) {
            bail!("--purity must be in [0.5, 1], got {}", self.purity);
        }
        if self.min_feature_count == 0 {
            bail!("--min-feature-count must be at least 1");
        }
        Ok(ForestConfig {
            min_head_count: self.min_head_count,
            max_trees: self.max_trees,
            tree: TreeConfig { purity: self.purity, min_feature_count: self.min_feature_count },
            ..ForestConfig::default()
        })
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, body: &str) -> Result<()> {
    write_atomic(path, body.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn load_db(path: &Path) -> Result<Vec<NounPhraseInstance>> {
    read_db(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_model(path: &Path) -> Result<TreeForest> {
    TreeForest::from_text(&read(path)?).with_context(|| format!("parsing model {}", path.display()))
}

fn check_fraction(train_fraction: f64) -> Result<()> {
    if !(0.0..1.0).contains(&train_fraction) {
        bail!("--train-fraction must be in [0, 1), got {train_fraction}");
    }
    Ok(())
}

/// Blank-line separated documents, each tokenized on its own.
fn documents(text: &str) -> impl Iterator<Item = &str> {
    text.split("\n\n").map(str::trim).filter(|d| !d.is_empty())
}

fn build_db(inputs: &[PathBuf], out: &Path) -> Result<()> {
    let mut db = Vec::new();
    for path in inputs {
        let text = read(path)?;
        for doc in documents(&text) {
            db.extend(extract_instances(&tokenize(doc)).instances.into_iter().map(|mut i| {
                i.source_position = None;
                i
            }));
        }
    }
    write(out, &write_db(&db))?;
    if db.is_empty() {
        eprintln!("warning: no articles found; wrote an empty database");
        return Ok(());
    }
    let count = |s: &str| db.iter().filter(|i| i.article.eq_ignore_ascii_case(s)).count();
    let n = db.len() as f64;
    println!(
        "{} instances: a = {} / an = {} / the = {}",
        db.len(),
        percent(count("a") as f64 / n),
        percent(count("an") as f64 / n),
        percent(count("the") as f64 / n)
    );
    Ok(())
}

fn strip(input: &Path, out: &Path, gold: &Path) -> Result<()> {
    let text = read(input)?;
    let doc = strip_articles(&tokenize(&text));
    write(out, &respell(&text, &doc.tokens))?;
    write(gold, &write_gold(&doc.gold))?;
    println!("{} articles stripped", doc.gold.len());
    Ok(())
}

fn train(db: &Path, out: &Path, thresholds: &Thresholds, verbose: bool) -> Result<()> {
    let database = load_db(db)?;
    let forest = train_forest(&database, &thresholds.forest()?);
    write(out, &forest.to_text())?;
    if verbose {
        let mut heads: Vec<_> = forest.trees.iter().collect();
        heads.sort_by(|a, b| b.1.instances.cmp(&a.1.instances).then_with(|| a.0.cmp(b.0)));
        for (head, model) in heads {
            eprintln!("{head}\t{} instances\t{} questions", model.instances, model.tree.question_count());
        }
    }
    println!(
        "{} trees, {} questions, trained on {} instances",
        forest.trees.len(),
        forest.total_questions(),
        database.len()
    );
    Ok(())
}

fn trie(rules: Option<&Path>) -> Result<AAnTrie> {
    match rules {
        None => Ok(AAnTrie::shipped().clone()),
        Some(path) => load_rules(&read(path)?).with_context(|| format!("parsing rules {}", path.display())),
    }
}

fn apply(
    model: &Path,
    input: &Path,
    out: Option<&Path>,
    gold: Option<&Path>,
    rules: Option<&Path>,
    verbose: bool,
) -> Result<()> {
    let forest = load_model(model)?;
    let trie = trie(rules)?;
    let text = read(input)?;
    let gold = match gold {
        Some(path) => read_gold(&read(path)?).with_context(|| format!("parsing gold {}", path.display()))?,
        None => Vec::new(),
    };
    let doc = StrippedDocument { tokens: tokenize(&text), gold };
    if let Some(bad) = doc.gold.iter().find(|g| g.position >= doc.tokens.len()) {
        bail!("gold position {} is past the end of the text ({} tokens)", bad.position, doc.tokens.len());
    }
    let restoration = restore_document(&doc, &forest, &trie);
    if verbose {
        for d in &restoration.decisions {
            eprintln!("{}", d.trace_line());
        }
    }
    let restored = respell(&text, &restoration.tokens);
    match out {
        Some(path) => write(path, &restored)?,
        None => io::stdout().write_all(restored.as_bytes())?,
    }
    if let Some(report) = &restoration.report {
        eprint!("{}", report.to_text());
    }
    Ok(())
}

fn render(report: &EvaluationReport, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Jsonl => format!("{}\n", report.to_json_line()),
    }
}

#[allow(clippy::too_many_arguments)]
fn eval(
    db: Option<&Path>,
    model: Option<&Path>,
    text: Option<&Path>,
    seed: u64,
    train_fraction: f64,
    format: Format,
    out: Option<&Path>,
    thresholds: &Thresholds,
) -> Result<()> {
    let report = match (db, model, text) {
        (_, Some(model), Some(text)) => {
            let forest = load_model(model)?;
            let raw = read(text)?;
            let mut counts = Vec::new();
            for doc in documents(&raw) {
                let stripped = strip_articles(&tokenize(doc));
                if let Some(r) = restore_document(&stripped, &forest, AAnTrie::shipped()).report {
                    counts.push(r);
                }
            }
            merge(&counts).context("no articles in the text")?
        }
        (Some(db), Some(model), None) => {
            let forest = load_model(model)?;
            let mut report = evaluate(&forest, &load_db(db)?);
            report.meta =
                ExperimentMeta { trees: Some(forest.trees.len()), forest: Some(forest.config), ..Default::default() };
            report
        }
        (Some(db), None, None) => {
            check_fraction(train_fraction)?;
            let config = ExperimentConfig { train_fraction, seed, forest: thresholds.forest()? };
            run_experiment(&load_db(db)?, &config)?
        }
        _ => bail!("give --db, or --model with --db or --text"),
    };
    let body = render(&report, format);
    match out {
        Some(path) => write(path, &body)?,
        None => print!("{body}"),
    }
    Ok(())
}

/// Sums per-document reports.
fn merge(reports: &[EvaluationReport]) -> Option<EvaluationReport> {
    let mut it = reports.iter();
    let mut total = it.next()?.clone();
    for r in it {
        total.total += r.total;
        total.successes += r.successes;
        total.class_successes += r.class_successes;
        let (c, d) = (&mut total.confusion, &r.confusion);
        c.the_as_the += d.the_as_the;
        c.the_as_a_an += d.the_as_a_an;
        c.a_an_as_the += d.a_an_as_the;
        c.a_an_as_a_an += d.a_an_as_a_an;
        if let (Some(a), Some(b)) = (&mut total.coverage, &r.coverage) {
            let (x, y) = (&mut a.counts, &b.counts);
            x.covered_total += y.covered_total;
            x.covered_correct += y.covered_correct;
            x.fallback_total += y.fallback_total;
            x.fallback_correct += y.fallback_correct;
        }
    }
    total.accuracy = total.successes as f64 / total.total as f64;
    total.class_accuracy = total.class_successes as f64 / total.total as f64;
    total.coverage = total.coverage.map(|c| c.counts.report());
    Some(total)
}

#[allow(clippy::too_many_arguments)]
fn curve(
    db: &Path,
    head: &str,
    seed: u64,
    sizes: Option<&[usize]>,
    train_fraction: f64,
    min_feature_count: u64,
    purity: f64,
    out: &Path,
) -> Result<()> {
    check_fraction(train_fraction)?;
    let key = head.to_lowercase();
    let instances: Vec<NounPhraseInstance> =
        load_db(db)?.into_iter().filter(|i| i.label().is_some() && i.head_key() == key).collect();
    if instances.is_empty() {
        bail!("head {head:?} does not occur in {}", db.display());
    }
    let sizes = match sizes {
        Some(s) => s.to_vec(),
        None => default_curve_sizes(instances.len()),
    };
    let config = TreeConfig { purity, min_feature_count };
    let points = learning_curve(&instances, &sizes, seed, 1.0 - train_fraction, &config)?;
    write(out, &curve_to_text(&points))?;
    for p in &points {
        println!("{:>8}  {:>6}  {} questions", p.training_instances, percent(p.test_accuracy), p.tree_size);
    }
    Ok(())
}

fn baseline(db: Option<&Path>, gold: Option<&Path>, seed: u64, format: Format) -> Result<()> {
    let labels: Vec<ArticleLabel> = match (db, gold) {
        (Some(db), _) => load_db(db)?.iter().filter_map(NounPhraseInstance::label).collect(),
        (None, Some(gold)) => read_gold(&read(gold)?)?.into_iter().map(|g| g.label).collect(),
        (None, None) => bail!("give --db or --gold"),
    };
    let table = baselines(&labels, seed)?;
    match format {
        Format::Text => print!("{}", table.to_text()),
        Format::Jsonl => println!("{}", table.to_json_line()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().context("configuring worker threads")?;
    }
    let verbose = cli.verbose;
    match &cli.command {
        Command::BuildDb { inputs, out } => build_db(inputs, out),
        Command::Strip { input, out, gold } => strip(input, out, gold),
        Command::Train { db, out, thresholds } => train(db, out, thresholds, verbose),
        Command::Apply { model, input, out, gold, rules } => {
            apply(model, input, out.as_deref(), gold.as_deref(), rules.as_deref(), verbose)
        }
        Command::Eval { db, model, text, seed, train_fraction, format, out, thresholds } => eval(
            db.as_deref(),
            model.as_deref(),
            text.as_deref(),
            *seed,
            *train_fraction,
            *format,
            out.as_deref(),
            thresholds,
        ),
        Command::Curve { db, head, seed, sizes, train_fraction, min_feature_count, purity, out } => {
            curve(db, head, *seed, sizes.as_deref(), *train_fraction, *min_feature_count, *purity, out)
        }
        Command::Baseline { db, gold, seed, format } => baseline(db.as_deref(), gold.as_deref(), *seed, *format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
