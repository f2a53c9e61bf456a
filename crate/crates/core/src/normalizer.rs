//! Script-aware text cleanup applied before tokenizer training and encoding.
//!
//! Every step is an independent switch on [`NormalizationConfig`]. When
//! several are enabled they always run in the same order:
//!
//! 1. non-printable removal
//! 2. extended punctuation mapping
//! 3. Latin accent stripping
//! 4. Indic canonicalization
//! 5. numeral conversion
//! 6. Latin lowercasing
//! 7. redundant quote stripping
//! 8. whitespace collapse
//!
//! The composition is idempotent for every configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::{canonical_combining_class, is_combining_mark};
use unicode_normalization::UnicodeNormalization;

/// Canonical combining class of nukta signs in every Indic block.
const NUKTA_CLASS: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptId {
    Latin,
    Devanagari,
    Bengali,
    Gurmukhi,
    Gujarati,
    Odia,
    Tamil,
    Telugu,
    Kannada,
    Malayalam,
    #[serde(rename = "Assamese-Bengali")]
    AssameseBengali,
}

impl ScriptId {
    pub const ALL: [ScriptId; 11] = [
        ScriptId::Latin,
        ScriptId::Devanagari,
        ScriptId::Bengali,
        ScriptId::Gurmukhi,
        ScriptId::Gujarati,
        ScriptId::Odia,
        ScriptId::Tamil,
        ScriptId::Telugu,
        ScriptId::Kannada,
        ScriptId::Malayalam,
        ScriptId::AssameseBengali,
    ];

    /// First codepoint of the script's decimal digit block (the digit zero).
    pub fn digit_zero(self) -> char {
        match self {
            ScriptId::Latin => '\u{0030}',
            ScriptId::Devanagari => '\u{0966}',
            ScriptId::Bengali | ScriptId::AssameseBengali => '\u{09E6}',
            ScriptId::Gurmukhi => '\u{0A66}',
            ScriptId::Gujarati => '\u{0AE6}',
            ScriptId::Odia => '\u{0B66}',
            ScriptId::Tamil => '\u{0BE6}',
            ScriptId::Telugu => '\u{0C66}',
            ScriptId::Kannada => '\u{0CE6}',
            ScriptId::Malayalam => '\u{0D66}',
        }
    }

    /// Value 0..=9 if `c` is a decimal digit of this script.
    pub fn digit_value(self, c: char) -> Option<u32> {
        let offset = (c as u32).checked_sub(self.digit_zero() as u32)?;
        (offset < 10).then_some(offset)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptId::Latin => "Latin",
            ScriptId::Devanagari => "Devanagari",
            ScriptId::Bengali => "Bengali",
            ScriptId::Gurmukhi => "Gurmukhi",
            ScriptId::Gujarati => "Gujarati",
            ScriptId::Odia => "Odia",
            ScriptId::Tamil => "Tamil",
            ScriptId::Telugu => "Telugu",
            ScriptId::Kannada => "Kannada",
            ScriptId::Malayalam => "Malayalam",
            ScriptId::AssameseBengali => "Assamese-Bengali",
        }
    }
}

impl fmt::Display for ScriptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScriptId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScriptId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown script `{s}`"))
    }
}

/// Switches for each cleanup step. All default to off.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub lowercase_latin: bool,
    pub strip_latin_accents: bool,
    pub map_extended_punctuation: bool,
    pub numeral_target: Option<ScriptId>,
    pub remove_nonprintable: bool,
    pub collapse_whitespace: bool,
    pub strip_redundant_quotes: bool,
    pub canonicalize_indic: bool,
}

impl NormalizationConfig {
    /// Every step enabled, numerals left alone.
    pub fn all() -> Self {
        Self {
            lowercase_latin: true,
            strip_latin_accents: true,
            map_extended_punctuation: true,
            numeral_target: None,
            remove_nonprintable: true,
            collapse_whitespace: true,
            strip_redundant_quotes: true,
            canonicalize_indic: true,
        }
    }
}

pub fn normalize(text: &str, config: &NormalizationConfig) -> String {
    let mut out = text.to_owned();
    if config.remove_nonprintable {
        out = remove_nonprintable(&out);
    }
    if config.map_extended_punctuation {
        out = map_extended_punctuation(&out);
    }
    if config.strip_latin_accents {
        out = strip_latin_accents(&out);
    }
    if config.canonicalize_indic {
        out = canonicalize_indic(&out);
    }
    if let Some(target) = config.numeral_target {
        out = convert_numerals(&out, target);
    }
    if config.lowercase_latin {
        out = lowercase_latin(&out);
    }
    if config.strip_redundant_quotes {
        out = strip_redundant_quotes(&out);
    }
    if config.collapse_whitespace {
        out = collapse_whitespace(&out);
    }
    out
}

/// Replaces ASCII digits with the digit at the same offset in `target`.
pub fn convert_numerals(text: &str, target: ScriptId) -> String {
    let zero = target.digit_zero() as u32;
    text.chars()
        .map(|c| match c {
            '0'..='9' => char::from_u32(zero + (c as u32 - '0' as u32)).unwrap_or(c),
            _ => c,
        })
        .collect()
}

/// Maps the decimal digits of every known script back to ASCII.
pub fn numerals_to_ascii(text: &str) -> String {
    text.chars()
        .map(|c| {
            ScriptId::ALL
                .iter()
                .find_map(|s| s.digit_value(c))
                .and_then(|v| char::from_digit(v, 10))
                .unwrap_or(c)
        })
        .collect()
}

fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c as u32,
            0x0041..=0x005A
            | 0x0061..=0x007A
            | 0x00AA
            | 0x00BA
            | 0x00C0..=0x02AF
            | 0x1D00..=0x1DBF
            | 0x1E00..=0x1EFF
            | 0x2C60..=0x2C7F
            | 0xA720..=0xA7FF
            | 0xAB30..=0xAB6F
            | 0xFF21..=0xFF3A
            | 0xFF41..=0xFF5A)
}

/// Drops combining marks that sit on Latin letters.
///
/// Latin letters are canonically decomposed first so precomposed forms
/// (`é`) lose their marks too. Everything else, including matras, halant
/// and nukta on Indic consonants, passes through untouched.
pub fn strip_latin_accents(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut on_latin_base = false;
    for c in text.chars() {
        if is_combining_mark(c) {
            if !on_latin_base || is_indic(c) {
                out.push(c);
            }
            continue;
        }
        let mut parts = std::iter::once(c).nfd();
        let base = parts.next().unwrap_or(c);
        if is_latin_letter(base) {
            out.push(base);
            out.extend(parts.filter(|p| !is_combining_mark(*p)));
            on_latin_base = true;
        } else {
            out.push(c);
            on_latin_base = false;
        }
    }
    out
}

fn is_indic(c: char) -> bool {
    matches!(c as u32, 0x0900..=0x0DFF)
}

/// Brings text into canonical composed form, keeping nukta sequences decomposed.
///
/// NFC alone is not enough: a handful of nukta letters (U+0929, U+0931,
/// U+0934) compose while their siblings (U+0958..U+095F) are composition
/// exclusions. Expanding every letter whose decomposition carries a nukta
/// makes visually identical spellings byte-identical.
pub fn canonicalize_indic(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.nfc() {
        if is_indic(c) && has_nukta_decomposition(c) {
            out.extend(std::iter::once(c).nfd());
        } else {
            out.push(c);
        }
    }
    out
}

fn has_nukta_decomposition(c: char) -> bool {
    let mut parts = std::iter::once(c).nfd();
    parts.next();
    parts.any(|p| canonical_combining_class(p) == NUKTA_CLASS)
}

fn is_nonprintable(c: char) -> bool {
    if c.is_whitespace() {
        return false;
    }
    if c.is_control() {
        return true;
    }
    // Format characters that carry no rendering. ZWJ/ZWNJ (U+200C/D) shape
    // Indic conjuncts and are kept.
    matches!(c as u32,
        0x00AD
        | 0x061C
        | 0x180E
        | 0x200B
        | 0x200E
        | 0x200F
        | 0x202A..=0x202E
        | 0x2060..=0x2064
        | 0x2066..=0x206F
        | 0xFEFF
        | 0xFFF9..=0xFFFB)
}

pub fn remove_nonprintable(text: &str) -> String {
    text.chars().filter(|c| !is_nonprintable(*c)).collect()
}

/// Fixed table: curly quotes to ASCII quotes, dashes to `-`, ellipsis to
/// `...`, fullwidth punctuation to ASCII. DANDA and double DANDA are kept.
pub fn map_extended_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' | '\u{2039}'
            | '\u{203A}' => out.push('\''),
            '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' | '\u{00AB}'
            | '\u{00BB}' => out.push('"'),
            '\u{2010}'..='\u{2015}' | '\u{2212}' => out.push('-'),
            '\u{2026}' => out.push_str("..."),
            '\u{FF01}' => out.push('!'),
            '\u{FF0C}' => out.push(','),
            '\u{FF0E}' => out.push('.'),
            '\u{FF1A}' => out.push(':'),
            '\u{FF1B}' => out.push(';'),
            '\u{FF1F}' => out.push('?'),
            _ => out.push(c),
        }
    }
    out
}

pub fn lowercase_latin(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if is_latin_letter(c) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn closing_quote(open: char) -> Option<char> {
    match open {
        '"' => Some('"'),
        '\'' => Some('\''),
        '`' => Some('`'),
        '\u{201C}' => Some('\u{201D}'),
        '\u{2018}' => Some('\u{2019}'),
        '\u{00AB}' => Some('\u{00BB}'),
        _ => None,
    }
}

fn opening_quote(close: char) -> Option<char> {
    match close {
        '"' => Some('"'),
        '\'' => Some('\''),
        '`' => Some('`'),
        '\u{201D}' => Some('\u{201C}'),
        '\u{2019}' => Some('\u{2018}'),
        '\u{00BB}' => Some('\u{00AB}'),
        _ => None,
    }
}

fn is_quote(c: char) -> bool {
    closing_quote(c).is_some() || opening_quote(c).is_some()
}

fn is_content(c: char) -> bool {
    !c.is_whitespace() && !is_quote(c)
}

/// Removes leading and trailing quote characters that have no partner.
///
/// A leading quote survives when its closing counterpart occurs later in the
/// line with some text in between; a trailing quote survives when its
/// opening counterpart occurs earlier, again with text in between. Interior
/// quotes are never touched.
pub fn strip_redundant_quotes(text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    loop {
        let mut changed = false;
        if let Some(first) = chars.iter().position(|c| !c.is_whitespace()) {
            let c = chars[first];
            if is_quote(c) {
                let paired = closing_quote(c).is_some_and(|close| {
                    let rest = &chars[first + 1..];
                    rest.iter()
                        .position(|&x| is_content(x))
                        .is_some_and(|k| rest[k + 1..].contains(&close))
                });
                if !paired {
                    chars.remove(first);
                    changed = true;
                }
            }
        }
        if let Some(last) = chars.iter().rposition(|c| !c.is_whitespace()) {
            let c = chars[last];
            if is_quote(c) {
                let paired = opening_quote(c).is_some_and(|open| {
                    let before = &chars[..last];
                    before
                        .iter()
                        .rposition(|&x| is_content(x))
                        .is_some_and(|k| before[..k].contains(&open))
                });
                if !paired {
                    chars.remove(last);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    chars.into_iter().collect()
}

/// Runs of whitespace become a single space; both ends are trimmed.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace pre-tokenization: maximal non-whitespace runs, in order.
pub fn pretokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

pub(crate) fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c as u32,
            0x00A1 | 0x00A7 | 0x00AB | 0x00B6 | 0x00B7 | 0x00BB | 0x00BF
            | 0x0964 | 0x0965
            | 0x2010..=0x2027
            | 0x2030..=0x205E
            | 0x3001..=0x3003
            | 0xFF01..=0xFF0F
            | 0xFF1A..=0xFF20)
}

/// Like [`pretokenize`], but every punctuation character becomes its own
/// token. A `.` or `,` between two digits stays inside the number.
pub fn pretokenize_split_punct(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            let numeric_separator = matches!(c, '.' | ',')
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_numeric()
                && chars[i + 1].is_numeric();
            if is_punctuation(c) && !numeric_separator {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
                out.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HALANT: char = '\u{094D}';
    const NUKTA: char = '\u{093C}';

    #[test]
    fn all_on_strips_accent_case_and_space() {
        assert_eq!(normalize("Café  x", &NormalizationConfig::all()), "cafe x");
    }

    #[test]
    fn empty_and_clean_devanagari_pass_through() {
        let all = NormalizationConfig::all();
        assert_eq!(normalize("", &all), "");
        assert_eq!(normalize("कहा ,", &all), "कहा ,");
    }

    #[test]
    fn numerals() {
        assert_eq!(convert_numerals("4 months", ScriptId::Devanagari), "\u{096A} months");
        assert_eq!(convert_numerals("abc", ScriptId::Devanagari), "abc");
        assert_eq!(convert_numerals("09", ScriptId::Latin), "09");
        assert_eq!(convert_numerals("2024", ScriptId::Tamil), "\u{0BE8}\u{0BE6}\u{0BE8}\u{0BEA}");
    }

    #[test]
    fn digit_blocks_are_ten_wide_and_distinct() {
        for script in ScriptId::ALL {
            let zero = script.digit_zero();
            let nine = char::from_u32(zero as u32 + 9).unwrap();
            assert_eq!(script.digit_value(nine), Some(9));
            assert!(nine.is_numeric(), "{script}: {nine:?}");
            assert_eq!(script.digit_value(char::from_u32(zero as u32 + 10).unwrap()), None);
        }
    }

    #[test]
    fn accents() {
        assert_eq!(strip_latin_accents("résumé"), "resume");
        assert_eq!(strip_latin_accents("naïve"), "naive");
        assert_eq!(strip_latin_accents("क्या"), "क्या");
        // already decomposed input
        assert_eq!(strip_latin_accents("e\u{0301}te\u{0301}"), "ete");
        // a nukta after a space has no Latin base and survives
        assert_eq!(strip_latin_accents(" \u{093C}"), " \u{093C}");
    }

    #[test]
    fn indic_canonicalization() {
        assert_eq!(canonicalize_indic("\u{0958}"), "\u{0915}\u{093C}");
        assert_eq!(canonicalize_indic("\u{0928}\u{093C}"), "\u{0928}\u{093C}");
        assert_eq!(canonicalize_indic("\u{0929}"), "\u{0928}\u{093C}");
        assert_eq!(canonicalize_indic("hello"), "hello");
        // Tamil two-part vowel sign composes
        assert_eq!(canonicalize_indic("\u{0B95}\u{0BC6}\u{0BBE}"), "\u{0B95}\u{0BCA}");
    }

    #[test]
    fn punctuation_table() {
        assert_eq!(
            map_extended_punctuation("\u{201C}hi\u{201D} \u{2014} wait\u{2026} \u{0964}"),
            "\"hi\" - wait... \u{0964}"
        );
    }

    #[test]
    fn redundant_quotes() {
        assert_eq!(strip_redundant_quotes("\"hello"), "hello");
        assert_eq!(strip_redundant_quotes("hello\""), "hello");
        assert_eq!(strip_redundant_quotes("\"hello\""), "\"hello\"");
        assert_eq!(strip_redundant_quotes("say \"hi\" now"), "say \"hi\" now");
        assert_eq!(strip_redundant_quotes("''x"), "x");
        assert_eq!(strip_redundant_quotes("\u{201D}x"), "x");
    }

    #[test]
    fn nonprintable() {
        assert_eq!(remove_nonprintable("a\u{200B}b\u{0007}c\u{FEFF}"), "abc");
        // ZWJ inside a conjunct is kept
        assert_eq!(remove_nonprintable("क्\u{200D}ष"), "क्\u{200D}ष");
    }

    #[test]
    fn lowercase_only_latin() {
        assert_eq!(lowercase_latin("ÀB Σ क"), "àb Σ क");
    }

    #[test]
    fn pretokenize_examples() {
        assert_eq!(pretokenize("यह खोज"), vec!["यह", "खोज"]);
        assert_eq!(pretokenize("a  b\tc"), vec!["a", "b", "c"]);
        assert!(pretokenize("").is_empty());
        assert_eq!(pretokenize("कहा, अब"), vec!["कहा,", "अब"]);
    }

    #[test]
    fn split_punct_keeps_numbers() {
        assert_eq!(
            pretokenize_split_punct("He said, 3.14 is \"pi\"।"),
            vec!["He", "said", ",", "3.14", "is", "\"", "pi", "\"", "\u{0964}"]
        );
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = NormalizationConfig {
            numeral_target: Some(ScriptId::AssameseBengali),
            ..NormalizationConfig::all()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"Assamese-Bengali\""));
        assert_eq!(serde_json::from_str::<NormalizationConfig>(&json).unwrap(), cfg);
        assert!(serde_json::from_str::<NormalizationConfig>("{\"bogus\":true}").is_err());
    }

    fn count_marks(s: &str) -> usize {
        s.nfd().filter(|&c| c == HALANT || c == NUKTA).count()
    }

    fn config_strategy() -> impl Strategy<Value = NormalizationConfig> {
        (
            any::<[bool; 7]>(),
            proptest::option::of(proptest::sample::select(ScriptId::ALL.to_vec())),
        )
            .prop_map(|(b, numeral_target)| NormalizationConfig {
                lowercase_latin: b[0],
                strip_latin_accents: b[1],
                map_extended_punctuation: b[2],
                numeral_target,
                remove_nonprintable: b[3],
                collapse_whitespace: b[4],
                strip_redundant_quotes: b[5],
                canonicalize_indic: b[6],
            })
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}", cfg in config_strategy()) {
            let once = normalize(&s, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }

        #[test]
        fn normalize_is_idempotent_on_mixed_scripts(
            s in "[a-zA-Zéèïñ \t\"'“”‘’क-ह़्ािीुूेैोौंँ०-९0-9\u{0958}-\u{095F}\u{0929}\u{200B}\u{200D}\u{0301}\u{0308}]{0,30}",
            cfg in config_strategy(),
        ) {
            let once = normalize(&s, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }

        #[test]
        fn accent_stripping_keeps_indic_marks(s in "[क-ह़्ािीु \u{0958}-\u{095F}a-zé]{0,30}") {
            prop_assert_eq!(count_marks(&strip_latin_accents(&s)), count_marks(&s));
        }

        #[test]
        fn numeral_round_trip(s in "[0-9 a-z]{0,20}", script in proptest::sample::select(ScriptId::ALL.to_vec())) {
            prop_assert_eq!(numerals_to_ascii(&convert_numerals(&s, script)), s);
        }

        #[test]
        fn pretokenize_is_stable(s in "\\PC{0,40}") {
            let words = pretokenize(&s);
            prop_assert!(words.iter().all(|w| !w.is_empty()));
            prop_assert_eq!(pretokenize(&words.join(" ")), words);
        }
    }
}
