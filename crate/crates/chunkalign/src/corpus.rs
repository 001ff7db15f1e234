//! Corpus, lexicon and synonym-table loading.
//!
//! Two corpus encodings are understood: plain text with one sentence per
//! line, and the bracket notation for pre-chunked text where noun chunks
//! sit in `[...]` and verb chunks in `((...))`. Lexicons and synonym
//! tables are TSV: `source<TAB>target1|target2|...`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::chunker::{self, Chunk, ChunkKind, ChunkRuleSet};
use crate::matcher::{is_numeric_token, normalize};
use crate::{read_utf8, Error, Result};

/// Lexical role of a token, assigned from the closed-class word lists of
/// a [`ChunkRuleSet`]. `Unknown` is reserved for tokens with no lexical
/// content (punctuation); they never join a chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenRole {
    Content,
    Adposition,
    Determiner,
    Auxiliary,
    Numeral,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub role: TokenRole,
}

impl Token {
    pub fn new(text: impl Into<String>, role: TokenRole) -> Self {
        Token {
            text: text.into(),
            role,
        }
    }

    /// True for roles that may head a chunk and carry lexical information.
    pub fn is_content(&self) -> bool {
        matches!(self.role, TokenRole::Content | TokenRole::Numeral)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    /// 0-based position within its text.
    pub index: usize,
    pub tokens: Vec<Token>,
    /// Populated by the chunker or by the pre-chunked parser.
    pub chunks: Vec<Chunk>,
    /// Non-whitespace character count, the unit of the length baseline.
    pub char_length: usize,
}

impl Sentence {
    pub fn new(index: usize, tokens: Vec<Token>) -> Self {
        let char_length = tokens.iter().map(|t| t.text.chars().count()).sum();
        Sentence {
            index,
            tokens,
            chunks: Vec::new(),
            char_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Text {
    pub language: String,
    pub sentences: Vec<Sentence>,
}

impl Text {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Word-translation table mapping normalized source words to the set of
/// normalized target words. Stored in sorted maps so that every
/// serialization of the table is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BilingualLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl BilingualLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: &str, target: &str) {
        let s = normalize(source);
        let t = normalize(target);
        if !s.is_empty() && !t.is_empty() {
            self.entries.entry(s).or_default().insert(t);
        }
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.entries
            .get(&normalize(source))
            .map(|set| set.contains(&normalize(target)))
            .unwrap_or(false)
    }

    pub fn translations(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(&normalize(source))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.entries.iter()
    }

    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        for (src, tgts) in &self.entries {
            out.push_str(src);
            out.push('\t');
            let joined: Vec<&str> = tgts.iter().map(|s| s.as_str()).collect();
            out.push_str(&joined.join("|"));
            out.push('\n');
        }
        out
    }
}

/// Target-to-target synonym lookup used as the fallback when the
/// bilingual lookup misses. Stored exactly as given; no symmetric closure
/// is taken.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynonymTable {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, synonym: &str) {
        let w = normalize(word);
        let s = normalize(synonym);
        if !w.is_empty() && !s.is_empty() {
            self.entries.entry(w).or_default().insert(s);
        }
    }

    pub fn synonyms(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(&normalize(word))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn make_token(raw: &str, rules: &ChunkRuleSet) -> Token {
    let norm = normalize(raw);
    let role = if norm.is_empty() {
        TokenRole::Unknown
    } else if is_numeric_token(&norm) {
        TokenRole::Numeral
    } else if rules.is_determiner(&norm) {
        TokenRole::Determiner
    } else if rules.is_adposition(&norm) {
        TokenRole::Adposition
    } else if rules.is_auxiliary(&norm) {
        TokenRole::Auxiliary
    } else {
        TokenRole::Content
    };
    Token::new(raw, role)
}

/// Load a plain corpus: UTF-8, one sentence per line, blank lines
/// skipped. Token roles come from the rule set's word lists.
pub fn load_text(path: &Path, language: &str, rules: &ChunkRuleSet) -> Result<Text> {
    let content = read_utf8(path)?;
    let text = parse_text_str(&content, language, rules)?;
    if text.is_empty() {
        return Err(Error::EmptyCorpus { path: path.into() });
    }
    Ok(text)
}

/// String-input form of [`load_text`]. An empty result is not an error
/// here; only the file loader insists on a non-empty corpus.
pub fn parse_text_str(content: &str, language: &str, rules: &ChunkRuleSet) -> Result<Text> {
    let mut sentences = Vec::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<Token> = line
            .split_whitespace()
            .map(|raw| make_token(raw, rules))
            .collect();
        sentences.push(Sentence::new(sentences.len(), tokens));
    }
    Ok(Text {
        language: language.to_string(),
        sentences,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BracketSym {
    OpenNoun,
    CloseNoun,
    OpenVerb,
    CloseVerb,
}

/// Split one whitespace-separated piece into words and bracket symbols.
/// Only `[`, `]`, `((` and `))` are structural; single parentheses stay
/// part of the word.
fn lex_piece(piece: &str, out: &mut Vec<(Option<BracketSym>, String)>) {
    let mut rest = piece;
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<(Option<BracketSym>, String)>| {
        if !word.is_empty() {
            out.push((None, std::mem::take(word)));
        }
    };
    while !rest.is_empty() {
        let sym = if rest.starts_with("((") {
            Some((BracketSym::OpenVerb, 2))
        } else if rest.starts_with("))") {
            Some((BracketSym::CloseVerb, 2))
        } else if rest.starts_with('[') {
            Some((BracketSym::OpenNoun, 1))
        } else if rest.starts_with(']') {
            Some((BracketSym::CloseNoun, 1))
        } else {
            None
        };
        match sym {
            Some((s, n)) => {
                flush(&mut word, out);
                out.push((Some(s), String::new()));
                rest = &rest[n..];
            }
            None => {
                let ch = rest.chars().next().unwrap();
                word.push(ch);
                rest = &rest[ch.len_utf8()..];
            }
        }
    }
    flush(&mut word, out);
}

/// Parse a pre-chunked corpus in bracket notation. Tokens outside any
/// bracket stay un-chunked. Chunk heads are selected with the rule set's
/// head policy, falling back to the last token for chunks without any
/// content word.
pub fn parse_prechunked(path: &Path, language: &str, rules: &ChunkRuleSet) -> Result<Text> {
    let content = read_utf8(path)?;
    let text = parse_prechunked_str(&content, language, rules, path)?;
    if text.is_empty() {
        return Err(Error::EmptyCorpus { path: path.into() });
    }
    Ok(text)
}

pub fn parse_prechunked_str(
    content: &str,
    language: &str,
    rules: &ChunkRuleSet,
    label: impl Into<std::path::PathBuf>,
) -> Result<Text> {
    let label = label.into();
    let mut sentences = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut symbols = Vec::new();
        for piece in line.split_whitespace() {
            lex_piece(piece, &mut symbols);
        }

        let mut tokens: Vec<Token> = Vec::new();
        let mut chunks: Vec<Chunk> = Vec::new();
        // (kind, token start index) while inside a bracket pair
        let mut open: Option<(ChunkKind, usize)> = None;
        for (sym, word) in symbols {
            match sym {
                None => tokens.push(make_token(&word, rules)),
                Some(BracketSym::OpenNoun) | Some(BracketSym::OpenVerb) => {
                    if open.is_some() {
                        return Err(Error::format(&label, lineno, "nested chunk bracket"));
                    }
                    let kind = if sym == Some(BracketSym::OpenNoun) {
                        ChunkKind::Noun
                    } else {
                        ChunkKind::Verb
                    };
                    open = Some((kind, tokens.len()));
                }
                Some(BracketSym::CloseNoun) | Some(BracketSym::CloseVerb) => {
                    let closing = if sym == Some(BracketSym::CloseNoun) {
                        ChunkKind::Noun
                    } else {
                        ChunkKind::Verb
                    };
                    match open.take() {
                        None => {
                            return Err(Error::format(
                                &label,
                                lineno,
                                "closing bracket without matching opener",
                            ))
                        }
                        Some((kind, start)) => {
                            if kind != closing {
                                return Err(Error::format(
                                    &label,
                                    lineno,
                                    "mismatched chunk brackets",
                                ));
                            }
                            if tokens.len() == start {
                                return Err(Error::format(&label, lineno, "empty chunk"));
                            }
                            let ctokens = tokens[start..].to_vec();
                            let head = chunker::head_index(&ctokens, kind, rules)
                                .unwrap_or(ctokens.len() - 1);
                            chunks.push(Chunk {
                                kind,
                                start,
                                tokens: ctokens,
                                head,
                            });
                        }
                    }
                }
            }
        }
        if open.is_some() {
            return Err(Error::format(&label, lineno, "unbalanced chunk bracket"));
        }
        let mut sentence = Sentence::new(sentences.len(), tokens);
        sentence.chunks = chunks;
        sentences.push(sentence);
    }
    Ok(Text {
        language: language.to_string(),
        sentences,
    })
}

/// Render a sentence back into bracket notation.
pub fn sentence_to_bracket_string(sentence: &Sentence) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut covered = vec![false; sentence.tokens.len()];
    let mut by_start: BTreeMap<usize, &Chunk> = BTreeMap::new();
    for chunk in &sentence.chunks {
        by_start.insert(chunk.start, chunk);
        for i in chunk.start..chunk.start + chunk.tokens.len() {
            if i < covered.len() {
                covered[i] = true;
            }
        }
    }
    let mut i = 0;
    while i < sentence.tokens.len() {
        if let Some(chunk) = by_start.get(&i) {
            let words: Vec<&str> = chunk.tokens.iter().map(|t| t.text.as_str()).collect();
            let body = words.join(" ");
            parts.push(match chunk.kind {
                ChunkKind::Noun => format!("[{body}]"),
                ChunkKind::Verb => format!("(({body}))"),
            });
            i += chunk.tokens.len();
        } else {
            debug_assert!(!covered[i]);
            parts.push(sentence.tokens[i].text.clone());
            i += 1;
        }
    }
    parts.join(" ")
}

/// Render a whole text in bracket notation, one sentence per line.
pub fn text_to_bracket_string(text: &Text) -> String {
    let mut out = String::new();
    for sentence in &text.sentences {
        out.push_str(&sentence_to_bracket_string(sentence));
        out.push('\n');
    }
    out
}

/// Render a text as a plain corpus, one sentence per line.
pub fn text_to_plain_string(text: &Text) -> String {
    let mut out = String::new();
    for sentence in &text.sentences {
        let words: Vec<&str> = sentence.tokens.iter().map(|t| t.text.as_str()).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

fn parse_pair_table(content: &str, label: &Path) -> Result<Vec<(String, Vec<String>, usize)>> {
    let mut rows = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (src, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(label, lineno, "expected `source<TAB>targets`"))?;
        let src = normalize(src);
        if src.is_empty() {
            return Err(Error::format(label, lineno, "empty source word"));
        }
        let targets: Vec<String> = rest
            .split('|')
            .map(normalize)
            .filter(|t| !t.is_empty())
            .collect();
        if targets.is_empty() {
            return Err(Error::format(label, lineno, "no target words"));
        }
        rows.push((src, targets, lineno));
    }
    Ok(rows)
}

/// Load a bilingual lexicon. Duplicate source lines merge their targets.
pub fn load_lexicon(path: &Path) -> Result<BilingualLexicon> {
    let content = read_utf8(path)?;
    parse_lexicon_str(&content, path)
}

pub fn parse_lexicon_str(content: &str, label: impl Into<std::path::PathBuf>) -> Result<BilingualLexicon> {
    let label = label.into();
    let mut lexicon = BilingualLexicon::new();
    for (src, targets, _) in parse_pair_table(content, &label)? {
        for t in targets {
            lexicon.insert(&src, &t);
        }
    }
    Ok(lexicon)
}

/// Load a synonym table; same format as the lexicon with both columns in
/// the target language.
pub fn load_synonyms(path: &Path) -> Result<SynonymTable> {
    let content = read_utf8(path)?;
    parse_synonyms_str(&content, path)
}

pub fn parse_synonyms_str(content: &str, label: impl Into<std::path::PathBuf>) -> Result<SynonymTable> {
    let label = label.into();
    let mut table = SynonymTable::new();
    for (word, synonyms, _) in parse_pair_table(content, &label)? {
        for s in synonyms {
            table.insert(&word, &s);
        }
    }
    Ok(table)
}
