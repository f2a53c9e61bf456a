//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use subtok_core::bpe::{decode_bpe, train_bpe, BpeConfig, BpeModel, BpeTarget, MergeRule};
use subtok_core::metrics::{self, kendall_tau, ribes_alignment, RibesParams, SegmentPair};
use subtok_core::sentencepiece::{train_sp, ModelType, SpConfig, SpModel};
use subtok_core::wordpiece::{pair_score, WordPieceConfig, WordPieceVocab};
use subtok_core::{normalize, pretokenize, NormalizationConfig, ScriptId};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus() -> Vec<String> {
    fs::read_to_string(fixtures().join("corpus.txt"))
        .expect("fixture corpus")
        .lines()
        .map(str::to_owned)
        .collect()
}

fn subtok(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_subtok"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "subtok {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1
fn tokenizer_determinism() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let input = fixtures().join("corpus.txt");
    let input = input.to_str().unwrap();
    let runs: [(&str, &[&str]); 3] = [
        ("bpe", &["--merges", "1000"]),
        ("wordpiece", &["--vocab-size", "1000"]),
        ("sentencepiece", &["--vocab-size", "1000"]),
    ];
    for (algo, extra) in runs {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{algo}-{run}"));
            let mut args = vec!["train", "--algo", algo, "--in", input, "--out", out.to_str().unwrap()];
            args.extend_from_slice(extra);
            subtok(&args)?;
            outputs.push(dir_bytes(&out));
        }
        check(outputs[0] == outputs[1], || format!("{algo}: model files differ between runs"))?;
        check(outputs[0].len() == 2, || format!("{algo}: expected 2 model files"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?} (limit 30 s)"))?;
    Ok(format!("3 tokenizers x 2 runs byte-identical in {:.1} s", elapsed.as_secs_f64()))
}

// 2
fn sentencepiece_lossless() -> Outcome {
    let lines = corpus();
    let mut report = Vec::new();
    for model_type in [ModelType::Character, ModelType::Subword] {
        let model = train_sp(&lines, 1000, model_type).map_err(|e| e.to_string())?;
        let ok = lines
            .iter()
            .filter(|s| model.decode(&model.encode(s)).text == **s)
            .count();
        check(ok == lines.len(), || format!("{model_type}: {ok}/{} lossless", lines.len()))?;
        report.push(format!("{model_type} {ok}/{}", lines.len()));
    }
    Ok(report.join(", "))
}

// 3
fn bpe_vocabulary_arithmetic() -> Outcome {
    let lines = corpus();
    let mut report = Vec::new();
    for n in [0usize, 10, 100] {
        let model = train_bpe(&lines, BpeTarget::NumMerges(n)).map_err(|e| e.to_string())?;
        let base = model.base_alphabet().len();
        let vocab = model.vocabulary();
        check(model.merges().len() == n, || format!("{n}: learned {} merges", model.merges().len()))?;
        check(vocab.len() == base + n, || format!("{n}: |vocab| {} != {base} + {n}", vocab.len()))?;
        // Every symbol the encoder emits on the corpus is in the vocabulary;
        // a bare end-of-word marker is internal and never surfaces.
        for word in lines.iter().flat_map(|l| pretokenize(l)) {
            for piece in model.segment_word(&word) {
                check(piece == "</w>" || vocab.contains(&piece), || {
                    format!("{n}: produced `{piece}` outside the vocabulary")
                })?;
            }
        }
        report.push(format!("{n}: {} = {base}+{n}", vocab.len()));
    }
    Ok(report.join("; "))
}

// 4
fn segmentation_conventions() -> Outcome {
    let alphabet: BTreeSet<char> = "पंखो".chars().collect();
    let rule = |l: &str, r: &str, rank| MergeRule {
        left: l.into(),
        right: r.into(),
        rank,
    };
    let bpe = BpeModel::from_parts(
        alphabet,
        vec![
            rule("प", "ं", 0),
            rule("ख", "ो", 1),
            rule("खो", "ं", 2),
            rule("खों", "</w>", 3),
        ],
        BpeConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let tokens = bpe.encode("पंखों").into_tokens();
    check(tokens == ["पं@@", "खों"], || format!("bpe encode gave {tokens:?}"))?;
    let text = decode_bpe(&["पं@@", "खों"], "@@").text;
    check(text == "पंखों", || format!("bpe decode gave {text}"))?;

    let wp = WordPieceVocab::from_tokens(
        ["[UNK]", "मधु", "##मेह"].map(String::from).to_vec(),
        WordPieceConfig::default(),
        3,
    )
    .map_err(|e| e.to_string())?;
    let tokens = wp.encode("मधुमेह").into_tokens();
    check(tokens == ["मधु", "##मेह"], || format!("wordpiece encode gave {tokens:?}"))?;
    let text = wp.decode(&tokens).text;
    check(text == "मधुमेह", || format!("wordpiece decode gave {text}"))?;

    let sp = SpModel::from_pieces(
        vec![("▁उन्होंने".into(), 1), ("▁कहा".into(), 1)],
        SpConfig::new(2, ModelType::Subword),
    );
    let tokens = sp.encode("उन्होंने कहा").into_tokens();
    check(tokens == ["▁उन्होंने", "▁कहा"], || format!("sentencepiece encode gave {tokens:?}"))?;
    let text = sp.decode(&tokens).text;
    check(text == "उन्होंने कहा", || format!("sentencepiece decode gave {text}"))?;
    Ok("पं@@ खों, मधु ##मेह, ▁उन्होंने ▁कहा all reproduced".into())
}

// 5
fn wordpiece_score_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let fx: u64 = rng.gen_range(1..=1_000_000);
        let fy: u64 = rng.gen_range(1..=1_000_000);
        let fxy: u64 = rng.gen_range(1..=fx.min(fy));
        let k: u64 = rng.gen_range(2..=1000);
        let got = pair_score(fxy, fx, fy).map_err(|e| e.to_string())?;
        let exact = Ratio::new(fxy as u128, fx as u128 * fy as u128);
        check(got == exact, || format!("score({fxy},{fx},{fy}) = {got}, expected {exact}"))?;
        let as_f64 = *got.numer() as f64 / *got.denom() as f64;
        let oracle = fxy as f64 / (fx as f64 * fy as f64);
        check((as_f64 - oracle).abs() <= 1e-12, || {
            format!("float form differs: {as_f64} vs {oracle}")
        })?;
        let scaled = pair_score(k * fxy, k * fx, k * fy).map_err(|e| e.to_string())?;
        check(scaled == got / k as u128, || format!("scale law fails for k={k}"))?;
    }
    Ok("50 triples exact; scale law exact".into())
}

// 6
fn metric_identity() -> Outcome {
    let vocab = [
        "the", "cat", "sat", "on", "mat", "a", "b", "कहा", "उन्होंने", "भी", ",", ".", "।", "42",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut long_pairs = Vec::new();
    for _ in 0..200 {
        let len = rng.gen_range(1..=20);
        let s: Vec<&str> = (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let ter = metrics::ter(&s, &s).map_err(|e| e.to_string())?;
        check(ter.total_edits() == 0, || format!("ter({s:?}) = {}", ter.score()))?;
        let joined = s.join(" ");
        let chrf = metrics::chrf(&joined, &joined, 6, 2.0);
        check((chrf - 100.0).abs() <= 1e-9, || format!("chrf({joined}) = {chrf}"))?;
        let ribes = metrics::ribes(&s, &s, RibesParams::default());
        check((ribes - 1.0).abs() <= 1e-9, || format!("ribes({joined}) = {ribes}"))?;
        if s.len() >= 4 {
            long_pairs.push(SegmentPair::new(&s, &s));
        }
    }
    let bleu = metrics::bleu(&long_pairs, 4).map_err(|e| e.to_string())?;
    check((bleu - 100.0).abs() <= 1e-9, || format!("corpus bleu = {bleu}"))?;
    Ok(format!("200 segments; bleu over {} pairs = {bleu}", long_pairs.len()))
}

// 7
fn all_sequences(alphabet: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in 0..alphabet as u8 {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn edit_distance(a: &[u8], b: &[u8]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut cur = vec![i; b.len() + 1];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every arrangement reachable from `hyp` by block shifts, with the fewest
/// shifts needed to reach it.
fn shift_closure(hyp: &[u8]) -> Vec<(Vec<u8>, usize)> {
    let mut dist: HashMap<Vec<u8>, usize> = HashMap::from([(hyp.to_vec(), 0)]);
    let mut queue = VecDeque::from([hyp.to_vec()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        let n = s.len();
        for start in 0..n {
            for len in 1..=n - start {
                let mut rest = s.clone();
                let span: Vec<u8> = rest.drain(start..start + len).collect();
                for dest in 0..=rest.len() {
                    let mut t = rest.clone();
                    t.splice(dest..dest, span.iter().copied());
                    if !dist.contains_key(&t) {
                        dist.insert(t.clone(), d + 1);
                        queue.push_back(t);
                    }
                }
            }
        }
    }
    dist.into_iter().collect()
}

fn optimal_ter_edits(closure: &[(Vec<u8>, usize)], reference: &[u8]) -> usize {
    closure
        .iter()
        .map(|(s, d)| d + edit_distance(s, reference))
        .min()
        .unwrap()
}

fn ter_oracle() -> Outcome {
    let start = Instant::now();
    let names = ["a", "b", "c", "d"];
    let words = |s: &[u8]| -> Vec<&str> { s.iter().map(|&c| names[c as usize]).collect() };
    let seqs = all_sequences(4, 5);
    let refs: Vec<&Vec<u8>> = seqs.iter().filter(|s| !s.is_empty()).collect();
    let (pairs, equal, worse_than_optimal_gap, below_optimal) = seqs
        .par_iter()
        .map(|hyp| {
            let closure = shift_closure(hyp);
            let hyp_words = words(hyp);
            let mut acc = (0u64, 0u64, 0usize, 0u64);
            for r in &refs {
                let greedy = metrics::ter(&hyp_words, &words(r)).unwrap().total_edits();
                let optimal = optimal_ter_edits(&closure, r);
                acc.0 += 1;
                if greedy == optimal {
                    acc.1 += 1;
                } else if greedy < optimal {
                    acc.3 += 1;
                } else {
                    acc.2 = acc.2.max(greedy - optimal);
                }
            }
            acc
        })
        .reduce(
            || (0, 0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2), a.3 + b.3),
        );
    check(below_optimal == 0, || format!("{below_optimal} pairs scored below the optimum"))?;
    let rate = equal as f64 / pairs as f64;
    check(rate >= 0.95, || format!("equality on {:.4} of {pairs} pairs (need 0.95)", rate))?;

    let curated: [(&str, &str, Ratio<u64>); 3] = [
        ("a b c d e", "a b c d e", Ratio::from_integer(0)),
        ("a X c d e", "a b c d e", Ratio::new(1, 5)),
        ("c a b", "a b c", Ratio::new(1, 3)),
    ];
    for (h, r, expected) in curated {
        let hw: Vec<&str> = h.split(' ').collect();
        let rw: Vec<&str> = r.split(' ').collect();
        let got = metrics::ter(&hw, &rw).map_err(|e| e.to_string())?.ratio();
        check(got == expected, || format!("ter({h} | {r}) = {got}, expected {expected}"))?;
        // The curated values are also the exhaustive optimum.
        let mut ids: HashMap<String, u8> = HashMap::new();
        let mut encode = |ws: &[&str]| -> Vec<u8> {
            ws.iter()
                .map(|w| {
                    let next = ids.len() as u8;
                    *ids.entry(w.to_string()).or_insert(next)
                })
                .collect()
        };
        let (hs, rs) = (encode(&hw), encode(&rw));
        let optimum = optimal_ter_edits(&shift_closure(&hs), &rs);
        check(Ratio::new(optimum as u64, rs.len() as u64) == expected, || {
            format!("exhaustive optimum for ({h} | {r}) is {optimum}")
        })?;
    }
    Ok(format!(
        "{pairs} pairs exhaustive; greedy == optimal on {:.4}%; max gap {worse_than_optimal_gap}; curated exact; {:.1} s",
        100.0 * rate,
        start.elapsed().as_secs_f64()
    ))
}

// 8
fn pairwise_tau(v: &[usize]) -> Ratio<i64> {
    let k = v.len() as i64;
    if k < 2 {
        return Ratio::from_integer(0);
    }
    let mut s = 0i64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            s += (v[j] as i64 - v[i] as i64).signum();
        }
    }
    Ratio::new(s, k * (k - 1) / 2)
}

fn kendall_oracle() -> Outcome {
    let lists = all_sequences(6, 6);
    for l in &lists {
        let v: Vec<usize> = l.iter().map(|&x| x as usize).collect();
        let (got, want) = (kendall_tau(&v), pairwise_tau(&v));
        check(got == want, || format!("tau({v:?}) = {got}, expected {want}"))?;
    }
    // Alignment-derived position lists from token lists of length <= 6.
    let words = ["a", "b", "c"];
    let seqs = all_sequences(3, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut aligned_checked = 0;
    for _ in 0..20_000 {
        let h = &seqs[rng.gen_range(0..seqs.len())];
        let r = &seqs[rng.gen_range(0..seqs.len())];
        let hw: Vec<&str> = h.iter().map(|&c| words[c as usize]).collect();
        let rw: Vec<&str> = r.iter().map(|&c| words[c as usize]).collect();
        let positions = ribes_alignment(&hw, &rw);
        let (got, want) = (kendall_tau(&positions), pairwise_tau(&positions));
        check(got == want, || format!("alignment {positions:?}: {got} vs {want}"))?;
        aligned_checked += 1;
    }
    Ok(format!(
        "{} rank lists exhaustive + {aligned_checked} alignments exact",
        lists.len()
    ))
}

// 9
const HALANT: char = '\u{094D}';
const NUKTA: char = '\u{093C}';

/// Halant and nukta occurrences, counting a nukta inside precomposed letters.
fn marks(s: &str) -> (usize, usize) {
    let halant = s.chars().filter(|&c| c == HALANT).count();
    let nukta = s
        .chars()
        .filter(|&c| c == NUKTA || matches!(c as u32, 0x0929 | 0x0931 | 0x0934 | 0x0958..=0x095F))
        .count();
    (halant, nukta)
}

fn normalization_safety() -> Outcome {
    let pool: Vec<char> = "abcXYZéÉñüÅ 0123456789\t  \"'“”‘’«»—–…,.?!।॥कखगचजटडढनपफबमयरलवशसहािीुूेैोौंःँ़्०१२३४५६७८९\u{0958}\u{0959}\u{095C}\u{095E}\u{0929}\u{0931}\u{0934}\u{200B}\u{200C}\u{200D}\u{FEFF}\u{0301}\u{0308}\u{0007}\u{00A0}০১੧૨୩௪౫೬൭"
        .chars()
        .collect();
    let configs = [
        NormalizationConfig::all(),
        NormalizationConfig {
            numeral_target: Some(ScriptId::Devanagari),
            ..NormalizationConfig::all()
        },
        NormalizationConfig {
            numeral_target: Some(ScriptId::Latin),
            ..NormalizationConfig::all()
        },
        NormalizationConfig {
            canonicalize_indic: true,
            strip_redundant_quotes: true,
            ..NormalizationConfig::default()
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let len = rng.gen_range(0..40);
        let s: String = (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let cfg = &configs[i % configs.len()];
        let once = normalize(&s, cfg);
        let twice = normalize(&once, cfg);
        check(once == twice, || format!("not a fixed point: {s:?} -> {once:?} -> {twice:?}"))?;
    }
    let text = fs::read_to_string(fixtures().join("devanagari_marks.txt")).unwrap();
    let (mut h_in, mut n_in, mut h_out, mut n_out) = (0, 0, 0, 0);
    for line in text.lines() {
        let out = normalize(line, &NormalizationConfig::all());
        let (a, b) = marks(line);
        let (c, d) = marks(&out);
        check(c >= a && d >= b, || format!("marks lost in {line:?} -> {out:?}"))?;
        h_in += a;
        n_in += b;
        h_out += c;
        n_out += d;
    }
    Ok(format!(
        "1000 fuzzed fixed points; halant {h_in}->{h_out}, nukta {n_in}->{n_out}"
    ))
}

// 10
fn harness_golden_run() -> Outcome {
    const HEADER: &str = "Model\tLanguage Pair\tBLEU\tTER\tMETEOR\tCHRF\tRIBES\tCOMET";
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let config = fixtures().join("experiment/exp.json");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = tmp.path().join(format!("run{run}"));
        subtok(&[
            "compare",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--format",
            "tsv,json,md",
        ])?;
        outputs.push(out);
    }
    let tsv = fs::read_to_string(outputs[0].join("report.tsv")).unwrap();
    let mut lines = tsv.lines();
    check(lines.next() == Some(HEADER), || "TSV header differs".into())?;
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        check(cells.len() == 8, || format!("row has {} cells: {line}", cells.len()))?;
        let identity = [
            (2, "BLEU", 100.0, 1e-9),
            (3, "TER", 0.0, 0.0),
            (5, "CHRF", 100.0, 1e-9),
            (6, "RIBES", 1.0, 1e-9),
        ];
        for (i, name, want, tol) in identity {
            let v: f64 = cells[i].parse().map_err(|_| format!("{name} cell `{}`", cells[i]))?;
            check((v - want).abs() <= tol, || format!("{name} = {v} in {line}"))?;
        }
        check(cells[7] == "n/a", || "COMET cell is not n/a".into())?;
        rows += 1;
    }
    check(rows == 6, || format!("expected 6 rows, found {rows}"))?;
    for name in ["report.tsv", "report.md"] {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        check(a == b, || format!("{name} differs between runs"))?;
    }
    let strip = |p: PathBuf| -> String {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("\"generated_at\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    check(
        strip(outputs[0].join("report.json")) == strip(outputs[1].join("report.json")),
        || "report.json differs beyond the timestamp".into(),
    )?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?} (limit 60 s)"))?;
    Ok(format!("{rows} identity rows, reruns identical, {:.1} s", elapsed.as_secs_f64()))
}

// 11
fn bpe_throughput() -> Outcome {
    let lines = corpus();
    let model = train_bpe(&lines, BpeTarget::NumMerges(1000)).map_err(|e| e.to_string())?;
    let sentences: Vec<&String> = lines.iter().cycle().take(10_000).collect();
    let start = Instant::now();
    let mut tokens = 0usize;
    for s in &sentences {
        tokens += model.encode(s).len();
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?} (limit 10 s)"))?;
    Ok(format!(
        "10000 sentences, {tokens} tokens in {:.3} s",
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("tokenizer determinism", tokenizer_determinism),
        ("sentencepiece losslessness", sentencepiece_lossless),
        ("bpe vocabulary arithmetic", bpe_vocabulary_arithmetic),
        ("segmentation conventions", segmentation_conventions),
        ("wordpiece score formula", wordpiece_score_formula),
        ("metric identity suite", metric_identity),
        ("ter oracle", ter_oracle),
        ("kendall oracle", kendall_oracle),
        ("normalization idempotence and indic safety", normalization_safety),
        ("harness golden run", harness_golden_run),
        ("bpe throughput", bpe_throughput),
    ];
    let mut failed = HashSet::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        match run() {
            Ok(detail) => println!("PASS [{n:>2}] {name}: {detail}"),
            Err(why) => {
                println!("FAIL [{n:>2}] {name}: {why}");
                failed.insert(n);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed",
        criteria.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
