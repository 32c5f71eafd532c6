use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use simpeval::corpus::{self, Split};
use simpeval::embed::{greedy_match_score, EmbeddingProvider, ProviderSpec};
use simpeval::entropy::{self, LogBase};
use simpeval::harness::{self, EarlyStopPolicy, EvalConfig, ReportFormat, ReportRow};
use simpeval::ngram::{self, BleuConfig, Scale, Smoothing};
use simpeval::text::{tokenize, SentenceSplitter, TokenSequence};
use simpeval::{diagnostics, PROVIDER_ENV};

#[derive(Parser)]
#[command(name = "simpeval", version, about = "Evaluation toolkit for document-level text simplification")]
struct Cli {
    /// Document-pair manifest (JSON lines); defaults to the bundled table.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Embedding provider: file:DIR | http:URL | det:SEED,DIM
    #[arg(long, global = true, env = PROVIDER_ENV)]
    provider: Option<String>,
    /// Per-attempt timeout for HTTP providers, in milliseconds.
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,
    /// Logarithm base of the match-length entropy denominator.
    #[arg(long, global = true, default_value = "2")]
    log_base: LogBase,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// csv | markdown | json (default depends on the command)
    #[arg(long, global = true)]
    format: Option<ReportFormat>,
    /// Abbreviation list for sentence splitting, one per line.
    #[arg(long, global = true)]
    abbreviations: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tokens of a text.
    Tokenize {
        /// Text file, or `-` for stdin.
        #[arg(default_value = "-")]
        input: String,
        /// Print one sentence per line instead of one token per line.
        #[arg(long)]
        sentences: bool,
    },
    /// Bag-of-words and match-length entropy of a text.
    Entropy {
        #[arg(default_value = "-")]
        input: String,
        /// Use the exhaustive O(M^2) scan instead of the suffix index.
        #[arg(long)]
        naive: bool,
    },
    /// Document-level BLEU.
    Bleu {
        #[arg(long)]
        hypothesis: String,
        #[arg(long)]
        reference: String,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        /// Replace zero n-gram matches by this count.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Report on the 0..1 scale instead of 0..100.
        #[arg(long)]
        unit: bool,
    },
    /// ROUGE-L precision, recall and F1.
    Rouge {
        #[arg(long)]
        hypothesis: String,
        #[arg(long)]
        reference: String,
    },
    /// Greedy-matching embedding similarity.
    Bertscore {
        #[arg(long)]
        hypothesis: String,
        #[arg(long)]
        reference: String,
        /// File-provider key prefix: embeddings are read from KEY.hypothesis.json / KEY.reference.json.
        #[arg(long, default_value = "doc")]
        key: String,
    },
    /// Copying, repetition and truncation diagnostics.
    Diagnose {
        #[arg(long)]
        output: String,
        #[arg(long)]
        source: String,
    },
    /// Sentence-split, shuffle and mask texts for domain adaptation.
    Mask {
        /// Plain-text inputs.
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long, default_value_t = 0.15)]
        rate: f64,
        /// Output JSON-lines file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Show the train/dev/test assignment of the manifest.
    Splits {
        /// Move a document: ID=train|dev|test (repeatable).
        #[arg(long = "move", value_name = "ID=SPLIT")]
        moves: Vec<String>,
    },
    /// Score a batch of records and print the results table.
    Evaluate {
        /// JSON lines with source_id, source, hypothesis, reference.
        #[arg(default_value = "-")]
        records: String,
        /// Label of the averaged row.
        #[arg(long, default_value = "average")]
        label: String,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
    },
    /// Pick the best and stopping epoch from per-epoch BERTScore F1 values.
    Earlystop {
        /// Scores separated by whitespace, commas or newlines.
        #[arg(default_value = "-")]
        input: String,
        #[arg(long, default_value_t = 100)]
        max_epochs: usize,
        #[arg(long)]
        patience: Option<usize>,
    },
    /// Re-render a results table in another format.
    Report {
        #[arg(default_value = "-")]
        input: String,
        /// Format of the input table.
        #[arg(long, default_value = "json")]
        from: ReportFormat,
    },
}

enum CliError {
    /// Bad arguments or unreadable inputs.
    Config(String),
    /// The computation itself failed or only partly succeeded.
    Failed(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn failed(e: impl std::fmt::Display) -> Self {
        CliError::Failed(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Config(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

impl Cli {
    fn splitter(&self) -> Result<SentenceSplitter, CliError> {
        match &self.abbreviations {
            Some(p) => SentenceSplitter::from_file(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
            None => Ok(SentenceSplitter::default()),
        }
    }

    fn provider(&self) -> Result<ProviderSpec, CliError> {
        let spec = self
            .provider
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("no embedding provider; pass --provider or set {PROVIDER_ENV}")))?;
        let mut spec: ProviderSpec = spec.parse().map_err(CliError::config)?;
        if let (ProviderSpec::Http { timeout, .. }, Some(ms)) = (&mut spec, self.timeout_ms) {
            *timeout = std::time::Duration::from_millis(ms);
        }
        Ok(spec)
    }

    fn manifest(&self) -> Result<Vec<corpus::DocumentPair>, CliError> {
        match &self.manifest {
            Some(p) => corpus::load_manifest(p).map_err(CliError::config),
            None => Ok(corpus::bundled_manifest()),
        }
    }

    fn json(&self) -> bool {
        self.format == Some(ReportFormat::Json)
    }
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Tokenize { input, sentences } => cmd_tokenize(&cli, input, *sentences),
        Command::Entropy { input, naive } => cmd_entropy(&cli, input, *naive),
        Command::Bleu { hypothesis, reference, max_order, epsilon, unit } => {
            let config = BleuConfig {
                max_order: *max_order,
                smoothing: epsilon.map_or(Smoothing::None, Smoothing::Epsilon),
                scale: if *unit { Scale::Unit } else { Scale::Percent },
            };
            let (hyp, reference) = (tokenize(&read_input(hypothesis)?), tokenize(&read_input(reference)?));
            let score = ngram::bleu(&hyp, &reference, &config).map_err(CliError::config)?;
            if cli.json() {
                print_json(&serde_json::to_value(&score).expect("serializable"));
            } else {
                println!("BLEU = {:.4}", score.score);
                let p: Vec<String> = score.precisions.iter().map(|p| format!("{p:.4}")).collect();
                println!("precisions = {}", p.join(" / "));
                println!("brevity_penalty = {:.4} (hyp {} / ref {})", score.brevity_penalty, score.hypothesis_len, score.reference_len);
            }
            Ok(())
        }
        Command::Rouge { hypothesis, reference } => {
            let r = ngram::rouge_l(&tokenize(&read_input(hypothesis)?), &tokenize(&read_input(reference)?));
            if cli.json() {
                print_json(&serde_json::to_value(r).expect("serializable"));
            } else {
                println!("ROUGE-L P = {:.6} R = {:.6} F1 = {:.6} (LCS {})", r.precision, r.recall, r.f1, r.lcs_length);
            }
            Ok(())
        }
        Command::Bertscore { hypothesis, reference, key } => {
            let provider = cli.provider()?;
            let hyp = tokenize(&read_input(hypothesis)?);
            let reference = tokenize(&read_input(reference)?);
            let h = provider.embed(&format!("{key}.hypothesis"), &hyp).map_err(CliError::failed)?;
            let r = provider.embed(&format!("{key}.reference"), &reference).map_err(CliError::failed)?;
            let s = greedy_match_score(&h, &r).map_err(CliError::failed)?;
            if cli.json() {
                print_json(&serde_json::to_value(s).expect("serializable"));
            } else {
                println!("BERTscore P = {:.6} R = {:.6} F1 = {:.6}", s.precision, s.recall, s.f1);
            }
            Ok(())
        }
        Command::Diagnose { output, source } => {
            let report = diagnostics::diagnose(&read_input(output)?, &read_input(source)?, &cli.splitter()?).map_err(CliError::config)?;
            if cli.json() {
                print_json(&serde_json::to_value(&report).expect("serializable"));
            } else {
                println!("copy_rate = {:.4}", report.copy_rate);
                println!("compression_ratio = {:.4}", report.compression_ratio);
                println!("repeated_sentences = {}", report.repeated_sentence_count);
                for r in &report.repeated_sentences {
                    println!("  {}x  {}", r.multiplicity, r.sentence);
                }
                let rates: Vec<String> = report.repeated_ngram_rate.iter().map(|r| format!("{r:.3}")).collect();
                println!("repeated_ngram_rate[1..8] = {}", rates.join(" "));
                println!("longest_repeated_span = {}", report.longest_repeated_span);
            }
            Ok(())
        }
        Command::Mask { inputs, rate, out } => cmd_mask(&cli, inputs, *rate, out),
        Command::Splits { moves } => cmd_splits(&cli, moves),
        Command::Evaluate { records, label, max_order } => cmd_evaluate(&cli, records, label, *max_order),
        Command::Earlystop { input, max_epochs, patience } => {
            let text = read_input(input)?;
            let scores = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| CliError::Config(format!("not a score: {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let policy = EarlyStopPolicy { max_epochs: *max_epochs, patience: *patience };
            let out = harness::early_stop_select(&scores, &policy).map_err(CliError::config)?;
            if cli.json() {
                print_json(&json!({"best_epoch": out.best_epoch, "stop_epoch": out.stop_epoch, "notation": out.notation(&policy)}));
            } else {
                println!("best_epoch = {}", out.best_epoch);
                println!("stop_epoch = {}", out.stop_epoch);
                println!("notation = {}", out.notation(&policy));
            }
            Ok(())
        }
        Command::Report { input, from } => {
            let rows = harness::parse_report(&read_input(input)?, *from).map_err(CliError::config)?;
            print!("{}", harness::render_report(&rows, cli.format.unwrap_or(ReportFormat::Markdown)));
            Ok(())
        }
    }
}

fn cmd_tokenize(cli: &Cli, input: &str, sentences: bool) -> CliResult {
    let text = read_input(input)?;
    if sentences {
        let split = cli.splitter()?.split(&text);
        if cli.json() {
            let v: Vec<_> = split.iter().map(|(span, seq)| json!({"start": span.start, "end": span.end, "tokens": seq})).collect();
            print_json(&json!(v));
        } else {
            for (_, seq) in split {
                println!("{}", seq.surface_text());
            }
        }
        return Ok(());
    }
    let seq = tokenize(&text);
    if cli.json() {
        print_json(&serde_json::to_value(&seq).expect("serializable"));
    } else {
        for t in &seq {
            println!("{}\t{}\t{}", t.surface, t.normalized, if t.is_punctuation { "P" } else { "W" });
        }
    }
    Ok(())
}

fn cmd_entropy(cli: &Cli, input: &str, naive: bool) -> CliResult {
    let seq = tokenize(&read_input(input)?);
    let profile =
        if naive { entropy::sup_match_lengths_naive(&seq) } else { entropy::sup_match_lengths_indexed(&seq) }.map_err(CliError::config)?;
    let sup = entropy::sup_entropy(&profile, cli.log_base).map_err(CliError::config)?;
    let bow = entropy::bow_entropy(&seq);
    if cli.json() {
        print_json(&json!({
            "bow_bits": bow,
            "sup": sup,
            "log_base": cli.log_base,
            "tokens": seq.len(),
            "m": profile.m(),
            "n": profile.horizon(),
        }));
    } else {
        println!("tokens = {}  M = {}  N = {}", seq.len(), profile.m(), profile.horizon());
        println!("BOW = {bow:.4}");
        println!("SUP = {sup:.4}");
    }
    Ok(())
}

fn cmd_mask(cli: &Cli, inputs: &[String], rate: f64, out: &Path) -> CliResult {
    let splitter = cli.splitter()?;
    let mut sentences: Vec<TokenSequence> = Vec::new();
    for input in inputs {
        sentences.extend(splitter.split(&read_input(input)?).into_iter().map(|(_, s)| s));
    }
    let pairs = corpus::generate_masked_pairs(&sentences, rate, cli.seed).map_err(CliError::config)?;
    let tagged: Vec<_> = pairs.iter().map(|p| p.to_tagged()).collect();
    corpus::export_pairs(&tagged, out, corpus::ExportFormat::JsonLines).map_err(CliError::config)?;
    eprintln!("wrote {} masked pairs to {}", tagged.len(), out.display());
    Ok(())
}

fn cmd_splits(cli: &Cli, moves: &[String]) -> CliResult {
    let manifest = cli.manifest()?;
    let moves = moves
        .iter()
        .map(|m| {
            let (id, split) = m.split_once('=').ok_or_else(|| CliError::Config(format!("expected ID=SPLIT, got {m:?}")))?;
            Ok((id.to_owned(), split.parse::<Split>().map_err(CliError::Config)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let assignment = corpus::assign_splits(&manifest, &moves).map_err(CliError::config)?;
    if cli.json() {
        print_json(&serde_json::to_value(&assignment).expect("serializable"));
    } else {
        for doc in &manifest {
            let split = assignment.split_of(&doc.source_id).expect("every id is assigned");
            println!("{}\t{}\t{}", doc.source_id, serde_json::to_value(split).expect("serializable").as_str().unwrap_or(""), doc.title);
        }
    }
    Ok(())
}

fn cmd_evaluate(cli: &Cli, records: &str, label: &str, max_order: usize) -> CliResult {
    let content = read_input(records)?;
    let records = harness::parse_records(&content).map_err(|(line, e)| CliError::Config(format!("{records}: line {line}: {e}")))?;
    if records.is_empty() {
        return Err(CliError::Config("no records to evaluate".into()));
    }
    if let Some(path) = &cli.manifest {
        let manifest = corpus::load_manifest(path).map_err(CliError::config)?;
        let known: HashSet<&str> = manifest.iter().map(|d| d.source_id.as_str()).collect();
        if let Some(r) = records.iter().find(|r| !known.contains(r.source_id.as_str())) {
            return Err(CliError::Config(format!("source_id {:?} is not in the manifest", r.source_id)));
        }
    }
    let provider = cli.provider()?;
    let config = EvalConfig { bleu: BleuConfig { max_order, ..Default::default() }, log_base: cli.log_base, splitter: cli.splitter()? };
    let eval = harness::evaluate_corpus(&records, &provider, &config, label);

    match cli.format.unwrap_or(ReportFormat::Markdown) {
        ReportFormat::Json => print_json(&serde_json::to_value(&eval).expect("serializable")),
        format => {
            let mut rows: Vec<ReportRow> =
                eval.records.iter().filter_map(|r| r.metrics().map(|m| m.report_row(r.source_id.clone()))).collect();
            rows.extend(eval.average.clone());
            print!("{}", harness::render_report(&rows, format));
        }
    }
    for r in &eval.records {
        if let harness::RecordStatus::Failed { error } = &r.status {
            eprintln!("failed: {}: {error}", r.source_id);
        }
    }
    match eval.failed() {
        0 => Ok(()),
        n => Err(CliError::Failed(format!("{n} of {} records failed", eval.records.len()))),
    }
}
