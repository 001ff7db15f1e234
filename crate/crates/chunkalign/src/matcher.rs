//! Word-level and chunk-level matching.
//!
//! A word pair is tried against four procedures in a fixed precedence
//! order: bilingual lexicon lookup, a target-to-target synonym fallback
//! into the lexicon, numeric equality after digit normalization, and a
//! phonetic comparison of transliterated consonant skeletons. The fixed
//! order keeps the cheap, precise checks ahead of the noisy ones and
//! makes the reported [`MatchKind`] stable.
//!
//! Chunk matching compares headwords first; noun chunks with two or more
//! content words on both sides may instead match when at least half of
//! the source content words find a target counterpart.

use std::collections::BTreeMap;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::chunker::Chunk;
use crate::corpus::{BilingualLexicon, SynonymTable};
use crate::{read_utf8, Error, Result};

/// How a word pair matched. The order is the precedence order: a pair
/// that the lexicon covers is never reported as phonetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Lexicon,
    SynonymFallback,
    Numeric,
    Phonetic,
    None,
}

impl MatchKind {
    pub fn is_match(&self) -> bool {
        *self != MatchKind::None
    }
}

fn is_strippable(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '।' | '॥'
                | '\u{2018}'..='\u{201F}'
                | '«'
                | '»'
                | '…'
                | '–'
                | '—'
                | '‐'
                | '·'
                | '¡'
                | '¿'
        )
}

/// Normalize a word for lookup: strip surrounding punctuation, lowercase
/// and apply Unicode canonical composition. Idempotent; a pure
/// punctuation token normalizes to the empty string, which callers treat
/// as unmatchable.
pub fn normalize(word: &str) -> String {
    let trimmed = word.trim_matches(is_strippable);
    trimmed.to_lowercase().nfc().collect()
}

fn devanagari_digit(c: char) -> Option<char> {
    let offset = (c as u32).checked_sub(0x0966)?;
    if offset < 10 {
        char::from_u32(b'0' as u32 + offset)
    } else {
        None
    }
}

/// True when a normalized token is written entirely in digits (ASCII or
/// Devanagari), with optional grouping commas and at most one point.
pub fn is_numeric_token(normalized: &str) -> bool {
    parse_number(normalized).is_some()
}

/// Numeric value of a token, if it is one.
pub fn parse_number(word: &str) -> Option<f64> {
    let mut digits = String::new();
    let mut points = 0;
    for c in word.chars() {
        if c == ',' {
            continue;
        }
        if c == '.' {
            points += 1;
            digits.push(c);
        } else if c.is_ascii_digit() {
            digits.push(c);
        } else if let Some(d) = devanagari_digit(c) {
            digits.push(d);
        } else {
            return None;
        }
    }
    if points > 1 || !digits.chars().any(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Grapheme-to-Latin table used by the phonetic matcher. Loaded from TSV
/// lines `grapheme<TAB>latin`, where the Latin side may be empty for
/// signs that carry no phonetic unit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransliterationTable {
    map: BTreeMap<char, String>,
}

const DEVANAGARI_TABLE: &str = include_str!("../rules/translit_hi.tsv");

impl TransliterationTable {
    /// The shipped Devanagari table.
    pub fn devanagari() -> TransliterationTable {
        Self::parse_str(DEVANAGARI_TABLE, "builtin:devanagari")
            .expect("shipped transliteration table parses")
    }

    pub fn load(path: &Path) -> Result<TransliterationTable> {
        let content = read_utf8(path)?;
        Self::parse_str(&content, path)
    }

    pub fn parse_str(
        content: &str,
        label: impl Into<std::path::PathBuf>,
    ) -> Result<TransliterationTable> {
        let label = label.into();
        let mut map = BTreeMap::new();
        for (lineno, line) in content.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (grapheme, latin) = line.split_once('\t').ok_or_else(|| {
                Error::format(&label, lineno + 1, "expected `grapheme<TAB>latin`")
            })?;
            let mut chars = grapheme.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::format(
                    &label,
                    lineno + 1,
                    "grapheme must be a single character",
                ));
            };
            map.insert(c, latin.trim().to_string());
        }
        Ok(TransliterationTable { map })
    }

    /// Map a word to Latin. ASCII passes through, table entries are
    /// substituted, joiner characters vanish, and anything else is
    /// dropped with a log note.
    pub fn latinize(&self, word: &str) -> String {
        let mut out = String::new();
        for c in word.chars() {
            if c.is_ascii() {
                out.push(c);
            } else if let Some(unit) = self.map.get(&c) {
                out.push_str(unit);
            } else if matches!(c, '\u{200C}' | '\u{200D}') {
                // zero-width joiners carry no phonetic content
            } else {
                log::debug!("transliteration table has no entry for {c:?}; dropped");
            }
        }
        out
    }
}

/// Configurable suffix stripper applied when a direct lexicon lookup
/// fails; the lookup is retried once on the stripped form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stemmer {
    suffixes: Vec<String>,
}

impl Stemmer {
    pub fn new(mut suffixes: Vec<String>) -> Stemmer {
        suffixes.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
        Stemmer { suffixes }
    }

    /// Built-in defaults: English plural endings for `en`, oblique
    /// endings for `hi`, nothing for other tags.
    pub fn for_language(language: &str) -> Stemmer {
        let list: &[&str] = match language {
            "en" => &["es", "s"],
            "hi" => &["ियों", "ियाँ", "ियां", "ाओं", "ाएँ", "ाएं", "ओं", "ों", "ें", "ाँ", "ां"],
            _ => &[],
        };
        Stemmer::new(list.iter().map(|s| s.to_string()).collect())
    }

    /// The word itself plus at most one suffix-stripped variant.
    pub fn variants(&self, word: &str) -> Vec<String> {
        let mut out = vec![word.to_string()];
        for suffix in &self.suffixes {
            if let Some(stem) = word.strip_suffix(suffix.as_str()) {
                if stem.chars().count() >= 2 {
                    out.push(stem.to_string());
                    break;
                }
            }
        }
        out
    }
}

/// Everything the matcher consults, immutable once built.
#[derive(Debug, Clone, Default)]
pub struct MatchResources {
    pub lexicon: BilingualLexicon,
    pub synonyms: SynonymTable,
    pub translit: TransliterationTable,
    pub src_stemmer: Stemmer,
    pub tgt_stemmer: Stemmer,
}

impl MatchResources {
    pub fn new(lexicon: BilingualLexicon, src_lang: &str, tgt_lang: &str) -> MatchResources {
        MatchResources {
            lexicon,
            synonyms: SynonymTable::default(),
            translit: TransliterationTable::devanagari(),
            src_stemmer: Stemmer::for_language(src_lang),
            tgt_stemmer: Stemmer::for_language(tgt_lang),
        }
    }
}

const VOWEL_LIKE: &[char] = &['A', 'E', 'I', 'O', 'U', 'H'];

fn is_vowel_like(c: char) -> bool {
    VOWEL_LIKE.contains(&c)
}

/// Phonetic key: transliterate to Latin, uppercase, drop vowel runs
/// except a single leading one, and collapse repeated consonants. `H` is
/// treated as vowel-like, which folds aspiration digraphs (KH, TH, ...)
/// onto their base consonant and silent H onto nothing, so the same name
/// written in Latin and Devanagari produces the same skeleton.
pub fn phonetic_key(word: &str, translit: &TransliterationTable) -> String {
    let latin = translit.latinize(word).to_ascii_uppercase();
    let mut key = String::new();
    let mut leading = true;
    for c in latin.chars() {
        if !c.is_ascii_alphanumeric() {
            continue;
        }
        if is_vowel_like(c) {
            // only the first character of a leading vowel run survives
            if leading && key.is_empty() {
                key.push(c);
            }
            continue;
        }
        leading = false;
        if key.chars().last() == Some(c) {
            continue;
        }
        key.push(c);
    }
    key
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// True when two phonetic keys count as a match: equal, or both of
/// length at least four within edit distance one.
pub fn phonetic_keys_match(a: &str, b: &str) -> bool {
    if a.is_empty() || b.is_empty() {
        return false;
    }
    a == b || (a.len() >= 4 && b.len() >= 4 && levenshtein(a, b) <= 1)
}

/// Match one source word against one target word. Both are expected
/// normalized (the lookups re-normalize, so unnormalized input degrades
/// gracefully rather than wrongly).
pub fn match_words(src: &str, tgt: &str, res: &MatchResources) -> MatchKind {
    if src.is_empty() || tgt.is_empty() {
        return MatchKind::None;
    }
    let src_vars = res.src_stemmer.variants(src);
    let tgt_vars = res.tgt_stemmer.variants(tgt);

    for s in &src_vars {
        for t in &tgt_vars {
            if res.lexicon.contains(s, t) {
                return MatchKind::Lexicon;
            }
        }
    }

    for t in &tgt_vars {
        if let Some(synonyms) = res.synonyms.synonyms(t) {
            for syn in synonyms {
                for s in &src_vars {
                    if res.lexicon.contains(s, syn) {
                        return MatchKind::SynonymFallback;
                    }
                }
            }
        }
    }

    if let (Some(a), Some(b)) = (parse_number(src), parse_number(tgt)) {
        if a == b {
            return MatchKind::Numeric;
        }
    }

    let key_src = phonetic_key(src, &res.translit);
    let key_tgt = phonetic_key(tgt, &res.translit);
    if phonetic_keys_match(&key_src, &key_tgt) {
        return MatchKind::Phonetic;
    }
    MatchKind::None
}

/// Normalized matching words of a chunk, precomputed once per sentence
/// by the aligner so repeated scoring does not re-normalize.
#[derive(Debug, Clone)]
pub struct ChunkWords {
    pub head: String,
    pub content: Vec<String>,
}

impl ChunkWords {
    pub fn from_chunk(chunk: &Chunk) -> ChunkWords {
        let head = normalize(&chunk.head_token().text);
        let content = chunk
            .content_words()
            .iter()
            .map(|t| normalize(&t.text))
            .filter(|w| !w.is_empty())
            .collect();
        ChunkWords { head, content }
    }

    pub fn matches(&self, other: &ChunkWords, res: &MatchResources) -> bool {
        if match_words(&self.head, &other.head, res).is_match() {
            return true;
        }
        if self.content.len() >= 2 && other.content.len() >= 2 {
            let needed = self.content.len().div_ceil(2);
            let mut used = vec![false; other.content.len()];
            let mut matched = 0;
            for word in &self.content {
                for (j, candidate) in other.content.iter().enumerate() {
                    if !used[j] && match_words(word, candidate, res).is_match() {
                        used[j] = true;
                        matched += 1;
                        break;
                    }
                }
                if matched >= needed {
                    return true;
                }
            }
        }
        false
    }
}

/// Chunk-level match: headwords first, then the content-word majority
/// rule. Verb chunks expose only their head as content, so the majority
/// rule never fires for them.
pub fn match_chunks(src: &Chunk, tgt: &Chunk, res: &MatchResources) -> bool {
    ChunkWords::from_chunk(src).matches(&ChunkWords::from_chunk(tgt), res)
}
