use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use subtok_core::harness::{
    self, ExperimentConfig, HarnessError, ReportFormat, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL,
};
use subtok_core::metrics::{score_corpus, Tokenization};
use subtok_core::model::{Algorithm, ModelError, TokenizerModel, TokenizerSpec};
use subtok_core::sentencepiece::{ModelType, DEFAULT_MAX_PIECE_CHARS};
use subtok_core::{normalize, NormalizationConfig};

#[derive(Parser)]
#[command(name = "subtok", version, about = "Subword tokenizers and translation metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean text line by line with a normalization config.
    Normalize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a tokenizer on a corpus and write a model directory.
    Train {
        #[arg(long)]
        algo: Algorithm,
        /// Number of BPE merges.
        #[arg(long)]
        merges: Option<usize>,
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long, default_value = "subword")]
        model_type: ModelType,
        #[arg(long, default_value_t = DEFAULT_MAX_PIECE_CHARS)]
        max_piece_chars: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode sentences into space-separated tokens.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode space-separated tokens back into sentences.
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score hypotheses against references; prints JSON.
    Score {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricChoice::All)]
        metric: MetricChoice,
        #[arg(long, default_value = "word-split-punct")]
        tokenization: Tokenization,
    },
    /// Run an experiment config and write comparison reports.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated list of tsv, json, md; defaults to the config's list.
        #[arg(long, value_delimiter = ',')]
        format: Vec<ReportFormat>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print tokenizer statistics for a corpus as JSON.
    Stats {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricChoice {
    All,
    Bleu,
    Ter,
    Chrf,
    Ribes,
    Meteor,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::new(e.exit_code(), e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subtok: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Normalize { config, input, out } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError::new(EXIT_CONFIG, format!("{}: {e}", config.display())))?;
            let cfg: NormalizationConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::new(EXIT_CONFIG, format!("{}: {e}", config.display())))?;
            let lines = read_input(input.as_deref())?;
            let normalized: Vec<String> = lines.iter().map(|l| normalize(l, &cfg)).collect();
            write_output(out.as_deref(), &normalized)
        }
        Command::Train {
            algo,
            merges,
            vocab_size,
            model_type,
            max_piece_chars,
            input,
            out,
        } => {
            let spec = train_spec(algo, merges, vocab_size, model_type, max_piece_chars)?;
            let corpus = harness::read_lines(&input)?;
            let model = TokenizerModel::train(&spec, &corpus)
                .map_err(|e| CliError::new(harness::model_exit_code(&e), e))?;
            model
                .save(&out)
                .map_err(|e| CliError::new(EXIT_INTERNAL, e))
        }
        Command::Encode { model, input, out } => {
            let model = load_model(&model)?;
            let lines = read_input(input.as_deref())?;
            let encoded: Vec<String> = lines.iter().map(|l| model.encode(l).to_string()).collect();
            write_output(out.as_deref(), &encoded)
        }
        Command::Decode { model, input, out } => {
            let model = load_model(&model)?;
            let lines = read_input(input.as_deref())?;
            let mut decoded = Vec::with_capacity(lines.len());
            for (n, line) in lines.iter().enumerate() {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let d = model.decode(&tokens);
                if let Some(issue) = d.issue {
                    eprintln!("subtok: line {}: {issue:?}", n + 1);
                }
                decoded.push(d.text);
            }
            write_output(out.as_deref(), &decoded)
        }
        Command::Score {
            hyp,
            reference,
            metric,
            tokenization,
        } => {
            let hyp_lines = read_lines_allow_empty(&hyp)?;
            let ref_lines = read_lines_allow_empty(&reference)?;
            let score = score_corpus(&hyp_lines, &ref_lines, tokenization)
                .map_err(|e| CliError::new(EXIT_DATA, e))?;
            let all = [
                (MetricChoice::Bleu, "bleu", score.bleu),
                (MetricChoice::Ter, "ter", score.ter),
                (MetricChoice::Chrf, "chrf", score.chrf),
                (MetricChoice::Ribes, "ribes", score.ribes),
                (MetricChoice::Meteor, "meteor_exact", score.meteor_exact),
            ];
            let mut obj = Map::new();
            obj.insert("tokenization".into(), json!(score.tokenization));
            obj.insert("segments".into(), json!(score.segments));
            for (choice, key, value) in all {
                if metric == MetricChoice::All || metric == choice {
                    obj.insert(key.into(), json!(value));
                }
            }
            print_json(&Value::Object(obj))
        }
        Command::Compare {
            config,
            out_dir,
            format,
            workers,
        } => {
            let loaded = ExperimentConfig::load(&config)?;
            let formats = if format.is_empty() {
                loaded.config.formats.clone()
            } else {
                format
            };
            let report = harness::run_compare(&loaded, workers)?;
            for f in formats {
                let path = harness::emit_report(&report, f, &out_dir)?;
                eprintln!("subtok: wrote {}", path.display());
            }
            Ok(())
        }
        Command::Stats { model, input } => {
            let model = load_model(&model)?;
            let lines = harness::read_lines(&input)?;
            let stats = harness::compute_stats(&model, &lines)?;
            let mut value = serde_json::to_value(&stats).map_err(|e| CliError::new(EXIT_INTERNAL, e))?;
            value["algo"] = json!(model.algorithm());
            print_json(&value)
        }
    }
}

fn train_spec(
    algo: Algorithm,
    merges: Option<usize>,
    vocab_size: Option<usize>,
    model_type: ModelType,
    max_piece_chars: usize,
) -> Result<TokenizerSpec, CliError> {
    let need_vocab = || {
        vocab_size.ok_or_else(|| CliError::new(EXIT_CONFIG, format!("--vocab-size is required for {algo}")))
    };
    Ok(match algo {
        Algorithm::Bpe => {
            if merges.is_some() == vocab_size.is_some() {
                return Err(CliError::new(
                    EXIT_CONFIG,
                    "bpe needs exactly one of --merges or --vocab-size",
                ));
            }
            TokenizerSpec::Bpe { merges, vocab_size }
        }
        Algorithm::WordPiece => TokenizerSpec::WordPiece {
            vocab_size: need_vocab()?,
        },
        Algorithm::SentencePiece => TokenizerSpec::SentencePiece {
            vocab_size: need_vocab()?,
            model_type,
            max_piece_chars,
        },
    })
}

fn load_model(dir: &Path) -> Result<TokenizerModel, CliError> {
    TokenizerModel::load(dir).map_err(|e: ModelError| CliError::new(EXIT_DATA, e))
}

fn read_lines_allow_empty(path: &Path) -> Result<Vec<String>, CliError> {
    match harness::read_lines(path) {
        Err(HarnessError::EmptyFile { .. }) => Ok(Vec::new()),
        other => Ok(other?),
    }
}

/// Lines of a file, or of stdin when no path is given.
fn read_input(path: Option<&Path>) -> Result<Vec<String>, CliError> {
    if let Some(p) = path {
        return read_lines_allow_empty(p);
    }
    let mut bytes = Vec::new();
    io::stdin()
        .read_to_end(&mut bytes)
        .map_err(|e| CliError::new(EXIT_DATA, format!("stdin: {e}")))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        CliError::new(
            EXIT_DATA,
            format!("stdin: not valid UTF-8 at byte offset {}", e.utf8_error().valid_up_to()),
        )
    })?;
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let body = text.strip_suffix('\n').unwrap_or(&text);
    Ok(body.split('\n').map(str::to_owned).collect())
}

fn write_output(path: Option<&Path>, lines: &[String]) -> Result<(), CliError> {
    let mut body = String::new();
    for l in lines {
        body.push_str(l);
        body.push('\n');
    }
    let result = match path {
        Some(p) => fs::write(p, body).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    };
    result.map_err(|m| CliError::new(EXIT_INTERNAL, m))
}

fn print_json(value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::new(EXIT_INTERNAL, e))?;
    println!("{text}");
    Ok(())
}
