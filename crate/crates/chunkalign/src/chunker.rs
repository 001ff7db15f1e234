//! Rule-driven shallow chunker.
//!
//! A chunk rule set carries the closed-class word lists used for token
//! role assignment, a head-selection policy per chunk kind, and an
//! ordered list of role-sequence patterns such as `adp? det* content+`.
//! Chunking walks the sentence left to right and at each position takes
//! the longest pattern match (first rule in file order on ties); content
//! tokens not covered by any rule become singleton noun chunks so every
//! lexical word can still take part in matching.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::corpus::{Sentence, Text, Token, TokenRole};
use crate::matcher::normalize;
use crate::{read_utf8, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkKind {
    Noun,
    Verb,
}

impl fmt::Display for ChunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChunkKind::Noun => write!(f, "noun"),
            ChunkKind::Verb => write!(f, "verb"),
        }
    }
}

/// A contiguous group of related tokens. `start` is the offset of the
/// first token within the owning sentence, `head` is relative to
/// `tokens`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub start: usize,
    pub tokens: Vec<Token>,
    pub head: usize,
}

impl Chunk {
    pub fn head_token(&self) -> &Token {
        &self.tokens[self.head]
    }

    /// Tokens used for matching: every token except adpositions and
    /// determiners for noun chunks, the headword alone for verb chunks.
    pub fn content_words(&self) -> Vec<&Token> {
        match self.kind {
            ChunkKind::Verb => vec![self.head_token()],
            ChunkKind::Noun => self
                .tokens
                .iter()
                .filter(|t| {
                    !matches!(
                        t.role,
                        TokenRole::Adposition | TokenRole::Determiner | TokenRole::Unknown
                    )
                })
                .collect(),
        }
    }
}

/// Which content token of a chunk becomes the headword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadPolicy {
    LastContent,
    FirstContent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternAtom {
    Content,
    Determiner,
    Adposition,
    Auxiliary,
    Numeral,
}

impl PatternAtom {
    fn matches(&self, token: &Token) -> bool {
        match self {
            PatternAtom::Content => token.is_content(),
            PatternAtom::Determiner => token.role == TokenRole::Determiner,
            PatternAtom::Adposition => token.role == TokenRole::Adposition,
            PatternAtom::Auxiliary => token.role == TokenRole::Auxiliary,
            PatternAtom::Numeral => token.role == TokenRole::Numeral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repeat {
    One,
    ZeroOrOne,
    ZeroOrMore,
    OneOrMore,
}

impl Repeat {
    fn bounds(&self) -> (usize, usize) {
        match self {
            Repeat::One => (1, 1),
            Repeat::ZeroOrOne => (0, 1),
            Repeat::ZeroOrMore => (0, usize::MAX),
            Repeat::OneOrMore => (1, usize::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PatternItem {
    atom: PatternAtom,
    repeat: Repeat,
}

#[derive(Debug, Clone, PartialEq)]
struct ChunkRule {
    kind: ChunkKind,
    items: Vec<PatternItem>,
}

impl ChunkRule {
    /// Longest match at `pos`: each quantifier is greedy and backtracks
    /// when the remainder of the pattern cannot be satisfied.
    fn match_at(&self, tokens: &[Token], pos: usize) -> Option<usize> {
        fn go(items: &[PatternItem], tokens: &[Token], pos: usize) -> Option<usize> {
            let Some(item) = items.first() else {
                return Some(0);
            };
            let (min_rep, max_rep) = item.repeat.bounds();
            let mut run = 0;
            while run < max_rep
                && pos + run < tokens.len()
                && item.atom.matches(&tokens[pos + run])
            {
                run += 1;
            }
            if run < min_rep {
                return None;
            }
            let mut k = run;
            loop {
                if let Some(rest) = go(&items[1..], tokens, pos + k) {
                    return Some(k + rest);
                }
                if k == min_rep {
                    return None;
                }
                k -= 1;
            }
        }
        go(&self.items, tokens, pos).filter(|len| *len > 0)
    }
}

/// Per-language chunking configuration: closed-class word lists, head
/// policies and the pattern rules, loaded from a `.rules` file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkRuleSet {
    pub language: String,
    determiners: BTreeSet<String>,
    adpositions: BTreeSet<String>,
    auxiliaries: BTreeSet<String>,
    noun_head: HeadPolicy,
    verb_head: HeadPolicy,
    rules: Vec<ChunkRule>,
}

const EN_RULES: &str = include_str!("../rules/en.rules");
const HI_RULES: &str = include_str!("../rules/hi.rules");
const SYN_RULES: &str = include_str!("../rules/syn.rules");

impl ChunkRuleSet {
    /// Rule sets shipped with the binary: `en`, `hi` and the synthetic
    /// corpus language `syn`.
    pub fn builtin(language: &str) -> Result<ChunkRuleSet> {
        let content = match language {
            "en" => EN_RULES,
            "hi" => HI_RULES,
            "syn" | "syn-src" | "syn-tgt" => SYN_RULES,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "no built-in chunk rules for language `{other}`; pass a rules file"
                )))
            }
        };
        parse_rules_str(content, format!("builtin:{language}"))
    }

    pub fn load(path: &Path) -> Result<ChunkRuleSet> {
        let content = read_utf8(path)?;
        parse_rules_str(&content, path)
    }

    pub fn is_determiner(&self, normalized: &str) -> bool {
        self.determiners.contains(normalized)
    }

    pub fn is_adposition(&self, normalized: &str) -> bool {
        self.adpositions.contains(normalized)
    }

    pub fn is_auxiliary(&self, normalized: &str) -> bool {
        self.auxiliaries.contains(normalized)
    }

    pub fn head_policy(&self, kind: ChunkKind) -> HeadPolicy {
        match kind {
            ChunkKind::Noun => self.noun_head,
            ChunkKind::Verb => self.verb_head,
        }
    }
}

fn parse_policy(value: &str, label: &Path, lineno: usize) -> Result<HeadPolicy> {
    match value {
        "last_content" => Ok(HeadPolicy::LastContent),
        "first_content" => Ok(HeadPolicy::FirstContent),
        other => Err(Error::format(
            label,
            lineno,
            format!("unknown head policy `{other}`"),
        )),
    }
}

fn parse_pattern(value: &str, label: &Path, lineno: usize) -> Result<Vec<PatternItem>> {
    let mut items = Vec::new();
    for raw in value.split_whitespace() {
        let (name, repeat) = match raw.chars().last() {
            Some('?') => (&raw[..raw.len() - 1], Repeat::ZeroOrOne),
            Some('*') => (&raw[..raw.len() - 1], Repeat::ZeroOrMore),
            Some('+') => (&raw[..raw.len() - 1], Repeat::OneOrMore),
            _ => (raw, Repeat::One),
        };
        let atom = match name {
            "content" => PatternAtom::Content,
            "det" => PatternAtom::Determiner,
            "adp" => PatternAtom::Adposition,
            "aux" => PatternAtom::Auxiliary,
            "num" => PatternAtom::Numeral,
            other => {
                return Err(Error::format(
                    label,
                    lineno,
                    format!("unknown pattern atom `{other}`"),
                ))
            }
        };
        items.push(PatternItem { atom, repeat });
    }
    if items.is_empty() {
        return Err(Error::format(label, lineno, "empty pattern"));
    }
    Ok(items)
}

fn parse_rules_str(content: &str, label: impl Into<std::path::PathBuf>) -> Result<ChunkRuleSet> {
    let label = label.into();
    let mut language = String::new();
    let mut determiners = BTreeSet::new();
    let mut adpositions = BTreeSet::new();
    let mut auxiliaries = BTreeSet::new();
    let mut noun_head = HeadPolicy::LastContent;
    let mut verb_head = HeadPolicy::LastContent;
    let mut rules = Vec::new();
    let mut section = String::new();

    for (lineno, raw) in content.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(Error::format(&label, lineno, "malformed section header"));
            };
            section = name.trim().to_string();
            continue;
        }
        if section.is_empty() {
            if let Some(value) = line.strip_prefix("language") {
                language = value.trim().to_string();
                continue;
            }
            return Err(Error::format(&label, lineno, "content before any section"));
        }
        match section.as_str() {
            "determiners" | "prepositions" | "postpositions" | "auxiliaries" => {
                let set = match section.as_str() {
                    "determiners" => &mut determiners,
                    "auxiliaries" => &mut auxiliaries,
                    _ => &mut adpositions,
                };
                for word in line.split_whitespace() {
                    let w = normalize(word);
                    if !w.is_empty() {
                        set.insert(w);
                    }
                }
            }
            "heads" => {
                let (kind, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::format(&label, lineno, "expected `kind = policy`"))?;
                let policy = parse_policy(value.trim(), &label, lineno)?;
                match kind.trim() {
                    "noun" => noun_head = policy,
                    "verb" => verb_head = policy,
                    other => {
                        return Err(Error::format(
                            &label,
                            lineno,
                            format!("unknown chunk kind `{other}`"),
                        ))
                    }
                }
            }
            "rules" => {
                let (kind, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::format(&label, lineno, "expected `kind = pattern`"))?;
                let kind = match kind.trim() {
                    "noun" => ChunkKind::Noun,
                    "verb" => ChunkKind::Verb,
                    other => {
                        return Err(Error::format(
                            &label,
                            lineno,
                            format!("unknown chunk kind `{other}`"),
                        ))
                    }
                };
                rules.push(ChunkRule {
                    kind,
                    items: parse_pattern(value.trim(), &label, lineno)?,
                });
            }
            other => {
                return Err(Error::format(
                    &label,
                    lineno,
                    format!("unknown section `{other}`"),
                ));
            }
        }
    }

    if language.is_empty() {
        return Err(Error::format(&label, 1, "missing `language` line"));
    }
    // the closed-class lists must not overlap or role assignment would
    // depend on lookup order
    for w in &determiners {
        if adpositions.contains(w) || auxiliaries.contains(w) {
            return Err(Error::format(
                &label,
                1,
                format!("word `{w}` appears in more than one closed-class list"),
            ));
        }
    }
    for w in &adpositions {
        if auxiliaries.contains(w) {
            return Err(Error::format(
                &label,
                1,
                format!("word `{w}` appears in more than one closed-class list"),
            ));
        }
    }
    Ok(ChunkRuleSet {
        language,
        determiners,
        adpositions,
        auxiliaries,
        noun_head,
        verb_head,
        rules,
    })
}

/// Head position for a token slice of the given chunk kind. Content
/// tokens (including numerals) are the only head candidates, which keeps
/// trailing postpositions and leading auxiliaries out.
pub fn head_index(tokens: &[Token], kind: ChunkKind, rules: &ChunkRuleSet) -> Result<usize> {
    let pick = |policy: HeadPolicy| match policy {
        HeadPolicy::FirstContent => tokens.iter().position(Token::is_content),
        HeadPolicy::LastContent => tokens.iter().rposition(Token::is_content),
    };
    pick(rules.head_policy(kind)).ok_or(Error::HeadlessChunk)
}

/// Head selection for an existing chunk under the given rules.
pub fn select_head(chunk: &Chunk, rules: &ChunkRuleSet) -> Result<usize> {
    head_index(&chunk.tokens, chunk.kind, rules)
}

/// Chunk one sentence in place. Total on valid sentences: rule matches
/// that would produce a chunk without a head are skipped, and uncovered
/// content tokens become singleton noun chunks.
pub fn chunk_sentence(sentence: &mut Sentence, rules: &ChunkRuleSet) {
    let tokens = &sentence.tokens;
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        // all rule matches at i, longest first, file order on ties
        let mut matches: Vec<(usize, usize)> = rules
            .rules
            .iter()
            .enumerate()
            .filter_map(|(ri, rule)| rule.match_at(tokens, i).map(|len| (len, ri)))
            .collect();
        matches.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut placed = false;
        for (len, ri) in matches {
            let kind = rules.rules[ri].kind;
            let ctokens = tokens[i..i + len].to_vec();
            if let Ok(head) = head_index(&ctokens, kind, rules) {
                chunks.push(Chunk {
                    kind,
                    start: i,
                    tokens: ctokens,
                    head,
                });
                i += len;
                placed = true;
                break;
            }
        }
        if !placed {
            if tokens[i].is_content() {
                chunks.push(Chunk {
                    kind: ChunkKind::Noun,
                    start: i,
                    tokens: vec![tokens[i].clone()],
                    head: 0,
                });
            }
            i += 1;
        }
    }
    sentence.chunks = chunks;
}

/// Chunk every sentence of a text.
pub fn chunk_text(text: &mut Text, rules: &ChunkRuleSet) {
    for sentence in &mut text.sentences {
        chunk_sentence(sentence, rules);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_text_str;

    fn en() -> ChunkRuleSet {
        ChunkRuleSet::builtin("en").unwrap()
    }

    fn hi() -> ChunkRuleSet {
        ChunkRuleSet::builtin("hi").unwrap()
    }

    fn chunked(line: &str, rules: &ChunkRuleSet) -> Sentence {
        let mut text = parse_text_str(line, &rules.language, rules).unwrap();
        let mut sentence = text.sentences.remove(0);
        chunk_sentence(&mut sentence, rules);
        sentence
    }

    #[test]
    fn cast_iron_pump_is_one_noun_chunk() {
        let s = chunked("of the cast iron pump", &en());
        assert_eq!(s.chunks.len(), 1);
        let c = &s.chunks[0];
        assert_eq!(c.kind, ChunkKind::Noun);
        assert_eq!(c.tokens.len(), 5);
        assert_eq!(c.head_token().text, "pump");
        let content: Vec<&str> = c.content_words().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(content, vec!["cast", "iron", "pump"]);
    }

    #[test]
    fn auxiliary_run_is_one_verb_chunk() {
        let s = chunked("would have been going fast", &en());
        assert_eq!(s.chunks.len(), 1);
        let c = &s.chunks[0];
        assert_eq!(c.kind, ChunkKind::Verb);
        assert_eq!(c.head_token().text, "going");
        // verb chunks expose only the headword for matching
        let content: Vec<&str> = c.content_words().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(content, vec!["going"]);
    }

    #[test]
    fn red_party_and_is_playing_heads() {
        let s = chunked("The red party", &en());
        assert_eq!(s.chunks.len(), 1);
        assert_eq!(s.chunks[0].head_token().text, "party");

        let s = chunked("is playing", &en());
        assert_eq!(s.chunks.len(), 1);
        assert_eq!(s.chunks[0].kind, ChunkKind::Verb);
        assert_eq!(s.chunks[0].head_token().text, "playing");
    }

    #[test]
    fn unknown_word_becomes_singleton_noun_chunk() {
        let s = chunked("xyzzy", &en());
        assert_eq!(s.chunks.len(), 1);
        assert_eq!(s.chunks[0].kind, ChunkKind::Noun);
        assert_eq!(s.chunks[0].tokens.len(), 1);
    }

    #[test]
    fn punctuation_stays_unchunked() {
        let s = chunked("The fish .", &en());
        assert_eq!(s.chunks.len(), 1);
        let covered: usize = s.chunks.iter().map(|c| c.tokens.len()).sum();
        assert_eq!(covered, 2);
    }

    #[test]
    fn hindi_postposition_excluded_from_head() {
        let s = chunked("इस विशालकाय प्रवासी मछलि के", &hi());
        assert_eq!(s.chunks.len(), 1);
        assert_eq!(s.chunks[0].head_token().text, "मछलि");
    }

    #[test]
    fn headless_chunk_is_an_error() {
        let rules = en();
        let chunk = Chunk {
            kind: ChunkKind::Noun,
            start: 0,
            tokens: vec![Token::new("the", TokenRole::Determiner)],
            head: 0,
        };
        assert!(matches!(
            select_head(&chunk, &rules),
            Err(Error::HeadlessChunk)
        ));
    }

    #[test]
    fn chunking_is_deterministic_and_partitions_content() {
        let rules = en();
        let line = "The red party of the cast iron pump would have been going fast in 1991 .";
        let a = chunked(line, &rules);
        let b = chunked(line, &rules);
        assert_eq!(a, b);
        assert!(a.chunks.len() <= a.tokens.len());
        // every content token is covered exactly once
        let mut covered = vec![0usize; a.tokens.len()];
        for c in &a.chunks {
            for i in c.start..c.start + c.tokens.len() {
                covered[i] += 1;
            }
        }
        for (i, token) in a.tokens.iter().enumerate() {
            assert!(covered[i] <= 1, "token {i} covered twice");
            if token.is_content() {
                assert_eq!(covered[i], 1, "content token {} uncovered", token.text);
            }
        }
    }

    #[test]
    fn numerals_join_noun_chunks() {
        let s = chunked("in 1991", &en());
        assert_eq!(s.chunks.len(), 1);
        assert_eq!(s.chunks[0].head_token().text, "1991");
    }
}
