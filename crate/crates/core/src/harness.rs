//! Corpus loading, tokenizer statistics, experiment runs and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bpe::BpeError;
use crate::metrics::{self, MetricScore, MetricsError, Tokenization};
use crate::model::{Algorithm, ModelError, TokenizerModel, TokenizerSpec};
use crate::normalizer::{normalize, pretokenize, NormalizationConfig};
use crate::sentencepiece::SpError;
use crate::wordpiece::WordPieceError;

pub const CONFIG_SCHEMA: &str = "subtok-exp v1";
pub const REPORT_SCHEMA: &str = "subtok-report v1";
/// Frozen column order of the comparison table.
pub const TSV_HEADER: &str = "Model\tLanguage Pair\tBLEU\tTER\tMETEOR\tCHRF\tRIBES\tCOMET";
pub const COMET_PLACEHOLDER: &str = "n/a";
pub const MISSING_SCORE: &str = "—";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{path}: invalid experiment config: {source}")]
    ConfigParse {
        path: String,
        source: serde_json::Error,
    },
    #[error("unknown language code `{0}` (use one of {codes} or an `x-` prefix for a custom code)", codes = KNOWN_LANGUAGES.join(", "))]
    UnknownLanguage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: not valid UTF-8 at byte offset {offset}")]
    NotUtf8 { path: String, offset: usize },
    #[error("{path}: file is empty")]
    EmptyFile { path: String },
    #[error("line count mismatch: source has {src_n} lines, target has {tgt_n}")]
    LineCountMismatch { src_n: usize, tgt_n: usize },
    #[error("corpus has no words")]
    EmptyCorpus,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{tokenizer} {direction}: {source}")]
    Task {
        tokenizer: Algorithm,
        direction: String,
        source: Box<HarnessError>,
    },
    #[error("{direction}: {source}")]
    Direction {
        direction: String,
        source: Box<HarnessError>,
    },
    #[error("{path}: cannot write report: {source}")]
    Output { path: String, source: io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. }
            | HarnessError::ConfigParse { .. }
            | HarnessError::UnknownLanguage(_) => EXIT_CONFIG,
            HarnessError::Io { .. }
            | HarnessError::NotUtf8 { .. }
            | HarnessError::EmptyFile { .. }
            | HarnessError::LineCountMismatch { .. }
            | HarnessError::EmptyCorpus
            | HarnessError::Metrics(_) => EXIT_DATA,
            HarnessError::Model(e) => model_exit_code(e),
            HarnessError::Task { source, .. } | HarnessError::Direction { source, .. } => {
                source.exit_code()
            }
            HarnessError::Output { .. } | HarnessError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Exit code for a tokenizer error: bad size targets are configuration
/// problems, empty or unreadable inputs are data problems.
pub fn model_exit_code(e: &ModelError) -> i32 {
    match e {
        ModelError::BpeTargetMissing
        | ModelError::WordPiece(WordPieceError::VocabSizeTooSmall { .. })
        | ModelError::SentencePiece(SpError::VocabSizeTooSmall { .. }) => EXIT_CONFIG,
        ModelError::Bpe(BpeError::EmptyCorpus)
        | ModelError::WordPiece(WordPieceError::EmptyCorpus)
        | ModelError::SentencePiece(SpError::EmptyCorpus)
        | ModelError::Io { .. } => EXIT_DATA,
        _ => EXIT_INTERNAL,
    }
}

// ------------------------------------------------------------ corpora

pub const KNOWN_LANGUAGES: [&str; 12] = [
    "AS", "BN", "GU", "HI", "KN", "ML", "MR", "OR", "PA", "TA", "TE", "EN",
];

/// A two-letter code from the supported set, or a custom code written with
/// an `x-` prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageCode {
    code: String,
    custom: bool,
}

impl LanguageCode {
    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn is_custom(&self) -> bool {
        self.custom
    }
}

impl FromStr for LanguageCode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(custom) = s.strip_prefix("x-").filter(|c| !c.is_empty()) {
            if custom.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Ok(Self {
                    code: custom.to_ascii_uppercase(),
                    custom: true,
                });
            }
        }
        let upper = s.to_ascii_uppercase();
        if KNOWN_LANGUAGES.contains(&upper.as_str()) {
            Ok(Self {
                code: upper,
                custom: false,
            })
        } else {
            Err(HarnessError::UnknownLanguage(s.to_owned()))
        }
    }
}

impl TryFrom<String> for LanguageCode {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LanguageCode> for String {
    fn from(l: LanguageCode) -> String {
        if l.custom {
            format!("x-{}", l.code)
        } else {
            l.code
        }
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

/// `EN-HI` style name of a translation direction.
pub fn direction_name(source: &LanguageCode, target: &LanguageCode) -> String {
    format!("{source}-{target}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub source_path: PathBuf,
    pub target_path: PathBuf,
    pub source_lang: LanguageCode,
    pub target_lang: LanguageCode,
    pub pairs: Vec<(String, String)>,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(s, _)| s.as_str())
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(_, t)| t.as_str())
    }
}

/// Reads a UTF-8 file as lines. Only the LF terminator is removed; a final
/// LF does not start an extra line, and blank lines are kept.
pub fn read_lines(path: &Path) -> Result<Vec<String>, HarnessError> {
    let bytes = fs::read(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if bytes.is_empty() {
        return Err(HarnessError::EmptyFile {
            path: path.display().to_string(),
        });
    }
    let text = String::from_utf8(bytes).map_err(|e| HarnessError::NotUtf8 {
        path: path.display().to_string(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    Ok(body.split('\n').map(str::to_owned).collect())
}

pub fn load_parallel(
    src_path: &Path,
    tgt_path: &Path,
    langs: (LanguageCode, LanguageCode),
) -> Result<ParallelCorpus, HarnessError> {
    let src = read_lines(src_path)?;
    let tgt = read_lines(tgt_path)?;
    if src.len() != tgt.len() {
        return Err(HarnessError::LineCountMismatch {
            src_n: src.len(),
            tgt_n: tgt.len(),
        });
    }
    Ok(ParallelCorpus {
        source_path: src_path.to_owned(),
        target_path: tgt_path.to_owned(),
        source_lang: langs.0,
        target_lang: langs.1,
        pairs: src.into_iter().zip(tgt).collect(),
    })
}

// -------------------------------------------------------------- stats

/// Intrinsic statistics of a tokenizer over one side of a corpus. The
/// integer counts are exact; the ratios are derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub vocab_size: usize,
    pub sentences: u64,
    pub words: u64,
    pub tokens: u64,
    pub unk_tokens: u64,
    /// Characters excluding whitespace.
    pub chars: u64,
    pub token_types: u64,
    pub fertility: f64,
    pub unk_rate: f64,
    pub compression: f64,
    pub type_token_ratio: f64,
}

impl CorpusStats {
    pub fn fertility_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.tokens, self.words)
    }

    pub fn unk_rate_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.unk_tokens, self.tokens.max(1))
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_stats<S: AsRef<str> + Sync>(
    model: &TokenizerModel,
    corpus_side: &[S],
) -> Result<CorpusStats, HarnessError> {
    let unk = model.unk_token();
    let per_sentence: Vec<(u64, u64, u64, Vec<String>)> = corpus_side
        .par_iter()
        .map(|s| {
            let s = s.as_ref();
            let tokens = model.encode(s).into_tokens();
            let words = pretokenize(s).len() as u64;
            let chars = s.chars().filter(|c| !c.is_whitespace()).count() as u64;
            let unks = unk.map_or(0, |u| tokens.iter().filter(|t| *t == u).count()) as u64;
            (words, chars, unks, tokens)
        })
        .collect();
    let mut types = BTreeSet::new();
    let (mut words, mut chars, mut unk_tokens, mut tokens) = (0, 0, 0, 0);
    for (w, c, u, t) in &per_sentence {
        words += w;
        chars += c;
        unk_tokens += u;
        tokens += t.len() as u64;
        types.extend(t.iter().map(String::as_str));
    }
    if words == 0 {
        return Err(HarnessError::EmptyCorpus);
    }
    let token_types = types.len() as u64;
    Ok(CorpusStats {
        vocab_size: model.vocab_size(),
        sentences: corpus_side.len() as u64,
        words,
        tokens,
        unk_tokens,
        chars,
        token_types,
        fertility: ratio(tokens, words),
        unk_rate: ratio(unk_tokens, tokens),
        compression: ratio(tokens, chars),
        type_token_ratio: ratio(token_types, tokens),
    })
}

// ------------------------------------------------------------- config

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Tsv,
    Json,
    Md,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Tsv => "tsv",
            ReportFormat::Json => "json",
            ReportFormat::Md => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            "md" => Ok(ReportFormat::Md),
            _ => Err(format!("unknown report format `{s}` (expected tsv, json or md)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionConfig {
    pub source_lang: LanguageCode,
    pub target_lang: LanguageCode,
    pub train_source: PathBuf,
    pub train_target: PathBuf,
    pub test_source: PathBuf,
    pub test_target: PathBuf,
    /// Translation output per tokenizer name, line-aligned with `test_target`.
    #[serde(default)]
    pub hypotheses: BTreeMap<String, PathBuf>,
}

impl DirectionConfig {
    pub fn name(&self) -> String {
        direction_name(&self.source_lang, &self.target_lang)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub normalization: NormalizationConfig,
    #[serde(default)]
    pub metric_tokenization: Tokenization,
    pub tokenizers: Vec<TokenizerSpec>,
    pub directions: Vec<DirectionConfig>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Tsv]
}

/// A parsed config plus where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub path: PathBuf,
    /// Directory that relative data paths are resolved against.
    pub base_dir: PathBuf,
    pub sha256: String,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<LoadedConfig, HarnessError> {
        let bytes = fs::read(path).map_err(|e| HarnessError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let config: ExperimentConfig =
            serde_json::from_slice(&bytes).map_err(|source| HarnessError::ConfigParse {
                path: path.display().to_string(),
                source,
            })?;
        config.validate().map_err(|message| HarnessError::Config {
            path: path.display().to_string(),
            message,
        })?;
        Ok(LoadedConfig {
            config,
            path: path.to_owned(),
            base_dir: path.parent().map(Path::to_owned).unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema != CONFIG_SCHEMA {
            return Err(format!("schema must be \"{CONFIG_SCHEMA}\", found \"{}\"", self.schema));
        }
        if self.tokenizers.is_empty() {
            return Err("no tokenizers listed".into());
        }
        if self.directions.is_empty() {
            return Err("no directions listed".into());
        }
        if self.formats.is_empty() {
            return Err("no report formats listed".into());
        }
        let mut seen = BTreeSet::new();
        for t in &self.tokenizers {
            if !seen.insert(t.algorithm()) {
                return Err(format!("tokenizer `{}` listed twice", t.algorithm()));
            }
        }
        let mut names = BTreeSet::new();
        for d in &self.directions {
            if !names.insert(d.name()) {
                return Err(format!("direction {} listed twice", d.name()));
            }
            for key in d.hypotheses.keys() {
                if !seen.iter().any(|a| a.name() == key) {
                    return Err(format!(
                        "direction {}: hypotheses for `{key}`, which is not a listed tokenizer",
                        d.name()
                    ));
                }
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: Algorithm,
    pub language_pair: String,
    /// Absent when no hypotheses were supplied for this row.
    pub scores: Option<MetricScore>,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionPaths {
    pub language_pair: String,
    pub train_source: String,
    pub train_target: String,
    pub test_source: String,
    pub test_target: String,
    pub hypotheses: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_sha256: String,
    pub config_path: String,
    pub tool_version: String,
    pub generated_at: String,
    pub corpora: Vec<DirectionPaths>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

struct DirectionData {
    name: String,
    train: Vec<String>,
    test_target: Vec<String>,
    hypotheses: BTreeMap<String, Vec<String>>,
}

fn tagged(tokenizer: Algorithm, direction: &str) -> impl Fn(HarnessError) -> HarnessError + '_ {
    move |e| HarnessError::Task {
        tokenizer,
        direction: direction.to_owned(),
        source: Box::new(e),
    }
}

fn load_direction(
    loaded: &LoadedConfig,
    d: &DirectionConfig,
) -> Result<DirectionData, HarnessError> {
    let cfg = &loaded.config;
    let norm = |lines: Vec<String>| -> Vec<String> {
        lines.par_iter().map(|l| normalize(l, &cfg.normalization)).collect()
    };
    let langs = (d.source_lang.clone(), d.target_lang.clone());
    let train = load_parallel(
        &loaded.resolve(&d.train_source),
        &loaded.resolve(&d.train_target),
        langs.clone(),
    )?;
    let test = load_parallel(
        &loaded.resolve(&d.test_source),
        &loaded.resolve(&d.test_target),
        langs,
    )?;
    let mut train_lines: Vec<String> = train.sources().map(str::to_owned).collect();
    train_lines.extend(train.targets().map(str::to_owned));
    let test_target = norm(test.targets().map(str::to_owned).collect());
    let mut hypotheses = BTreeMap::new();
    for (name, path) in &d.hypotheses {
        hypotheses.insert(name.clone(), norm(read_lines(&loaded.resolve(path))?));
    }
    Ok(DirectionData {
        name: d.name(),
        train: norm(train_lines),
        test_target,
        hypotheses,
    })
}

fn run_task(
    spec: &TokenizerSpec,
    data: &DirectionData,
    tokenization: Tokenization,
) -> Result<ReportRow, HarnessError> {
    let algo = spec.algorithm();
    let tag = tagged(algo, &data.name);
    let model = TokenizerModel::train(spec, &data.train).map_err(|e| tag(e.into()))?;
    let stats = compute_stats(&model, &data.test_target).map_err(&tag)?;
    let scores = data
        .hypotheses
        .get(algo.name())
        .map(|hyp| metrics::score_corpus(hyp, &data.test_target, tokenization))
        .transpose()
        .map_err(|e| tag(e.into()))?;
    Ok(ReportRow {
        model: algo,
        language_pair: data.name.clone(),
        scores,
        stats,
    })
}

/// Runs every (tokenizer, direction) task and gathers rows in config order:
/// directions outer, tokenizers inner. `workers` of `None` uses all cores.
pub fn run_compare(
    loaded: &LoadedConfig,
    workers: Option<usize>,
) -> Result<ComparisonReport, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let cfg = &loaded.config;
    pool.install(|| {
        let data: Vec<DirectionData> = cfg
            .directions
            .iter()
            .map(|d| {
                load_direction(loaded, d).map_err(|e| HarnessError::Direction {
                    direction: d.name(),
                    source: Box::new(e),
                })
            })
            .collect::<Result<_, _>>()?;
        let tasks: Vec<(&TokenizerSpec, &DirectionData)> = data
            .iter()
            .flat_map(|d| cfg.tokenizers.iter().map(move |t| (t, d)))
            .collect();
        let rows = tasks
            .par_iter()
            .map(|(spec, d)| run_task(spec, d, cfg.metric_tokenization))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComparisonReport {
            metadata: metadata(loaded),
            rows,
        })
    })
}

fn metadata(loaded: &LoadedConfig) -> ReportMetadata {
    let s = |p: &Path| p.display().to_string();
    ReportMetadata {
        config_sha256: loaded.sha256.clone(),
        config_path: s(&loaded.path),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        corpora: loaded
            .config
            .directions
            .iter()
            .map(|d| DirectionPaths {
                language_pair: d.name(),
                train_source: s(&d.train_source),
                train_target: s(&d.train_target),
                test_source: s(&d.test_source),
                test_target: s(&d.test_target),
                hypotheses: d.hypotheses.iter().map(|(k, v)| (k.clone(), s(v))).collect(),
            })
            .collect(),
    }
}

fn cell(v: f64) -> String {
    format!("{v:.2}")
}

/// Metric cells in header order, BLEU through COMET.
fn metric_cells(scores: Option<&MetricScore>) -> [String; 6] {
    match scores {
        Some(s) => [
            cell(s.bleu),
            cell(s.ter),
            cell(s.meteor_exact),
            cell(s.chrf),
            cell(s.ribes),
            COMET_PLACEHOLDER.to_owned(),
        ],
        None => {
            let m = || MISSING_SCORE.to_owned();
            [m(), m(), m(), m(), m(), COMET_PLACEHOLDER.to_owned()]
        }
    }
}

pub fn render_tsv(report: &ComparisonReport) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(row.model.name());
        out.push('\t');
        out.push_str(&row.language_pair);
        for c in metric_cells(row.scores.as_ref()) {
            out.push('\t');
            out.push_str(&c);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: &'static str,
    metadata: &'a ReportMetadata,
    columns: Vec<&'static str>,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: Algorithm,
    language_pair: &'a str,
    bleu: Option<f64>,
    ter: Option<f64>,
    meteor: Option<f64>,
    chrf: Option<f64>,
    ribes: Option<f64>,
    comet: &'static str,
    metric_tokenization: Option<Tokenization>,
    segments: Option<usize>,
    stats: &'a CorpusStats,
}

pub fn render_json(report: &ComparisonReport) -> String {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let s = r.scores.as_ref();
            JsonRow {
                model: r.model,
                language_pair: &r.language_pair,
                bleu: s.map(|s| s.bleu),
                ter: s.map(|s| s.ter),
                meteor: s.map(|s| s.meteor_exact),
                chrf: s.map(|s| s.chrf),
                ribes: s.map(|s| s.ribes),
                comet: COMET_PLACEHOLDER,
                metric_tokenization: s.map(|s| s.tokenization),
                segments: s.map(|s| s.segments),
                stats: &r.stats,
            }
        })
        .collect();
    let doc = JsonReport {
        schema: REPORT_SCHEMA,
        metadata: &report.metadata,
        columns: TSV_HEADER.split('\t').collect(),
        rows,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

pub fn render_md(report: &ComparisonReport) -> String {
    let mut models: Vec<Algorithm> = Vec::new();
    for r in &report.rows {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
    }
    let mut out = String::from("# Tokenizer comparison\n");
    for model in models {
        out.push_str(&format!("\n## {model}\n\n"));
        out.push_str("| Language Pair | BLEU | TER | METEOR | CHRF | RIBES | COMET | Vocab | Fertility | UNK rate | Compression | TTR |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---|---:|---:|---:|---:|---:|\n");
        for r in report.rows.iter().filter(|r| r.model == model) {
            let st = &r.stats;
            out.push_str(&format!(
                "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
                r.language_pair,
                metric_cells(r.scores.as_ref()).join(" | "),
                st.vocab_size,
                st.fertility,
                st.unk_rate,
                st.compression,
                st.type_token_ratio,
            ));
        }
    }
    out
}

pub fn render_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => render_tsv(report),
        ReportFormat::Json => render_json(report),
        ReportFormat::Md => render_md(report),
    }
}

/// Writes `report.<ext>` into `out_dir`, creating the directory.
pub fn emit_report(
    report: &ComparisonReport,
    format: ReportFormat,
    out_dir: &Path,
) -> Result<PathBuf, HarnessError> {
    let output_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| HarnessError::Output { path, source }
    };
    fs::create_dir_all(out_dir).map_err(output_err(out_dir))?;
    let path = out_dir.join(format!("report.{}", format.extension()));
    fs::write(&path, render_report(report, format)).map_err(output_err(&path))?;
    Ok(path)
}
