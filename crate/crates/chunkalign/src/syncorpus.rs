//! Deterministic synthetic parallel corpora with known gold alignments.
//!
//! Source sentences are chunk sequences over a synthetic vocabulary;
//! target sentences are chunk-wise translations with optional chunk
//! reordering (free word order), filler postpositions, per-sentence
//! deletions and adjacent-sentence merges. Surface forms are disjoint
//! across the two languages and use disjoint consonant alphabets, so no
//! accidental lexicon, numeric or phonetic match is possible; target
//! word lengths are decorrelated from source word lengths on purpose,
//! which starves length-based alignment of its signal while leaving
//! lexical matching untouched.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::aligner::{AlignGroup, Alignment};
use crate::chunker::{Chunk, ChunkKind};
use crate::corpus::{BilingualLexicon, Sentence, Text, Token, TokenRole};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    /// Number of text pairs.
    pub texts: usize,
    /// Mean sentences per text; actual counts vary uniformly by about a
    /// third around the mean.
    pub sentences_mean: usize,
    pub chunks_min: usize,
    pub chunks_max: usize,
    pub words_min: usize,
    pub words_max: usize,
    /// Distinct word pairs in the synthetic vocabulary.
    pub vocabulary: usize,
    /// Fraction of the true word pairs present in the emitted lexicon.
    /// Lexicons at lower coverage are subsets of those at higher
    /// coverage for the same seed.
    pub coverage: f64,
    /// Probability that a source sentence has no translation.
    pub deletion_rate: f64,
    /// Probability that two adjacent source sentences merge into one
    /// target sentence.
    pub merge_rate: f64,
    /// Permute chunks within each target sentence.
    pub reorder: bool,
    /// Probability of appending filler postpositions to a target chunk.
    pub filler_rate: f64,
    /// Leading source sentences with no translation in every text.
    pub leading_deletions: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            texts: 1,
            sentences_mean: 21,
            chunks_min: 2,
            chunks_max: 6,
            words_min: 1,
            words_max: 3,
            vocabulary: 300,
            coverage: 1.0,
            deletion_rate: 0.0,
            merge_rate: 0.0,
            reorder: true,
            filler_rate: 0.5,
            leading_deletions: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coverage", self.coverage),
            ("deletion rate", self.deletion_rate),
            ("merge rate", self.merge_rate),
            ("filler rate", self.filler_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be within [0, 1], got {v}"
                )));
            }
        }
        if self.vocabulary == 0 {
            return Err(Error::InvalidConfig("vocabulary must not be empty".into()));
        }
        if self.chunks_min == 0 || self.chunks_min > self.chunks_max {
            return Err(Error::InvalidConfig("bad chunks-per-sentence range".into()));
        }
        if self.words_min == 0 || self.words_min > self.words_max {
            return Err(Error::InvalidConfig("bad words-per-chunk range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedText {
    pub id: String,
    pub source: Text,
    pub target: Text,
    pub gold: Alignment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub texts: Vec<GeneratedText>,
    /// Lexicon at the configured coverage.
    pub lexicon: BilingualLexicon,
    /// Full-coverage lexicon for oracle runs.
    pub full_lexicon: BilingualLexicon,
}

const SRC_CONSONANTS: [char; 5] = ['b', 'd', 'g', 'v', 'j'];
const TGT_CONSONANTS: [char; 5] = ['k', 'm', 'p', 't', 'l'];
const PAD_CONSONANTS: [char; 3] = ['n', 'r', 'x'];
/// Filler postpositions; also listed in the `syn` rule file.
pub const FILLERS: [&str; 6] = ["qa", "qe", "qi", "qo", "qu", "qy"];

fn encode(mut id: usize, alphabet: &[char; 5]) -> String {
    let mut out = String::new();
    loop {
        out.push(alphabet[id % 5]);
        id /= 5;
        if id == 0 {
            break;
        }
    }
    out
}

fn source_word(id: usize) -> String {
    format!("s{}", encode(id, &SRC_CONSONANTS))
}

/// Target surface form: a permuted encoding plus padding whose length
/// depends only on the word id, so target word lengths do not track
/// source word lengths.
fn target_word(id: usize, perm: &[usize]) -> String {
    let mut word = format!("z{}", encode(perm[id], &TGT_CONSONANTS));
    let pad = (id.wrapping_mul(2654435761) >> 7) % 9;
    for k in 0..pad {
        word.push(PAD_CONSONANTS[(id + k) % PAD_CONSONANTS.len()]);
    }
    word
}

fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// A source sentence as drawn: chunk layout over vocabulary ids.
#[derive(Debug, Clone)]
struct SentencePlan {
    chunks: Vec<(ChunkKind, Vec<usize>)>,
}

fn draw_sentence_plan(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> SentencePlan {
    let chunk_count = rng.gen_range(cfg.chunks_min..=cfg.chunks_max);
    // distinct ids per sentence so heads are unambiguous within a pair
    let budget = chunk_count * cfg.words_max;
    let ids = rand::seq::index::sample(rng, cfg.vocabulary, budget.min(cfg.vocabulary));
    let mut ids = ids.into_iter();
    let mut chunks = Vec::new();
    for _ in 0..chunk_count {
        let verb = rng.gen_bool(0.15);
        let words = if verb {
            1
        } else {
            rng.gen_range(cfg.words_min..=cfg.words_max)
        };
        let members: Vec<usize> = (&mut ids).take(words).collect();
        if members.is_empty() {
            break;
        }
        chunks.push((
            if verb { ChunkKind::Verb } else { ChunkKind::Noun },
            members,
        ));
    }
    SentencePlan { chunks }
}

fn build_sentence(
    index: usize,
    chunks: &[(ChunkKind, Vec<Vec<Token>>)],
) -> Sentence {
    let mut tokens = Vec::new();
    let mut built = Vec::new();
    for (kind, words) in chunks {
        let start = tokens.len();
        let flat: Vec<Token> = words.iter().flatten().cloned().collect();
        tokens.extend(flat.iter().cloned());
        let head = flat
            .iter()
            .rposition(Token::is_content)
            .expect("generated chunks always have a content word");
        built.push(Chunk {
            kind: *kind,
            start,
            tokens: flat,
            head,
        });
    }
    let mut sentence = Sentence::new(index, tokens);
    sentence.chunks = built;
    sentence
}

fn source_sentence(index: usize, plan: &SentencePlan) -> Sentence {
    let chunks: Vec<(ChunkKind, Vec<Vec<Token>>)> = plan
        .chunks
        .iter()
        .map(|(kind, ids)| {
            let words: Vec<Vec<Token>> = ids
                .iter()
                .map(|&id| vec![Token::new(source_word(id), TokenRole::Content)])
                .collect();
            (*kind, words)
        })
        .collect();
    build_sentence(index, &chunks)
}

/// Translate a run of source plans into one target sentence.
fn target_sentence(
    index: usize,
    plans: &[&SentencePlan],
    perm: &[usize],
    rng: &mut ChaCha8Rng,
    cfg: &GenConfig,
) -> Sentence {
    let mut chunks: Vec<(ChunkKind, Vec<Vec<Token>>)> = Vec::new();
    for plan in plans {
        for (kind, ids) in &plan.chunks {
            let mut words: Vec<Vec<Token>> = ids
                .iter()
                .map(|&id| vec![Token::new(target_word(id, perm), TokenRole::Content)])
                .collect();
            if rng.gen_bool(cfg.filler_rate) {
                let filler = FILLERS[rng.gen_range(0..FILLERS.len())];
                words
                    .last_mut()
                    .unwrap()
                    .push(Token::new(filler, TokenRole::Adposition));
            }
            chunks.push((*kind, words));
        }
    }
    if cfg.reorder {
        chunks.shuffle(rng);
    }
    build_sentence(index, &chunks)
}

/// Generate a corpus. Deterministic: the same configuration produces the
/// same corpus, and changing only `coverage` changes only the lexicon.
pub fn generate(cfg: &GenConfig) -> Result<Corpus> {
    cfg.validate()?;

    // independent streams so corpus structure is stable across coverage
    let mut perm: Vec<usize> = (0..cfg.vocabulary).collect();
    perm.shuffle(&mut stream(cfg.seed, 1));

    let mut full_lexicon = BilingualLexicon::new();
    for id in 0..cfg.vocabulary {
        full_lexicon.insert(&source_word(id), &target_word(id, &perm));
    }
    let mut coverage_order: Vec<usize> = (0..cfg.vocabulary).collect();
    coverage_order.shuffle(&mut stream(cfg.seed, 2));
    let kept = ((cfg.coverage * cfg.vocabulary as f64).ceil() as usize).min(cfg.vocabulary);
    let mut lexicon = BilingualLexicon::new();
    for &id in coverage_order.iter().take(kept) {
        lexicon.insert(&source_word(id), &target_word(id, &perm));
    }

    let mut texts = Vec::new();
    for t in 0..cfg.texts {
        let mut rng = stream(cfg.seed, 1000 + t as u64);
        let spread = (cfg.sentences_mean / 3).max(1);
        let lo = cfg.sentences_mean.saturating_sub(spread).max(1);
        let hi = cfg.sentences_mean + spread;
        let n = rng.gen_range(lo..=hi).max(cfg.leading_deletions + 1);

        let plans: Vec<SentencePlan> = (0..n).map(|_| draw_sentence_plan(&mut rng, cfg)).collect();
        let source: Vec<Sentence> = plans
            .iter()
            .enumerate()
            .map(|(i, p)| source_sentence(i, p))
            .collect();

        let mut target: Vec<Sentence> = Vec::new();
        let mut gold = Alignment::default();
        let mut i = 0usize;
        while i < n {
            if i < cfg.leading_deletions || rng.gen_bool(cfg.deletion_rate) {
                gold.unaligned_src.push(i);
                i += 1;
                continue;
            }
            let j = target.len();
            if i + 1 < n && rng.gen_bool(cfg.merge_rate) {
                target.push(target_sentence(
                    j,
                    &[&plans[i], &plans[i + 1]],
                    &perm,
                    &mut rng,
                    cfg,
                ));
                gold.groups.push(AlignGroup {
                    src: vec![i, i + 1],
                    tgt: vec![j],
                    score: 1.0,
                });
                i += 2;
            } else {
                target.push(target_sentence(j, &[&plans[i]], &perm, &mut rng, cfg));
                gold.groups.push(AlignGroup::one_one(i, j, 1.0));
                i += 1;
            }
        }
        gold.sort();

        texts.push(GeneratedText {
            id: format!("{t:03}"),
            source: Text {
                language: "syn-src".into(),
                sentences: source,
            },
            target: Text {
                language: "syn-tgt".into(),
                sentences: target,
            },
            gold,
        });
    }

    Ok(Corpus {
        texts,
        lexicon,
        full_lexicon,
    })
}

/// Write a corpus to a directory: `src_<id>.txt` / `tgt_<id>.txt` in
/// bracket notation, `gold_<id>.tsv`, and the two lexicons.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: String, content: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))
    };
    for text in &corpus.texts {
        write(
            format!("src_{}.txt", text.id),
            crate::corpus::text_to_bracket_string(&text.source),
        )?;
        write(
            format!("tgt_{}.txt", text.id),
            crate::corpus::text_to_bracket_string(&text.target),
        )?;
        write(format!("gold_{}.tsv", text.id), text.gold.to_tsv_string())?;
    }
    write("lexicon.tsv".to_string(), corpus.lexicon.to_tsv_string())?;
    write(
        "lexicon_full.tsv".to_string(),
        corpus.full_lexicon.to_tsv_string(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aligner::GroupKind;

    #[test]
    fn clean_config_gives_identity_gold() {
        let cfg = GenConfig {
            texts: 3,
            ..GenConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        for text in &corpus.texts {
            assert_eq!(text.source.len(), text.target.len());
            assert!(text.gold.unaligned_src.is_empty());
            assert!(text.gold.unaligned_tgt.is_empty());
            for (k, g) in text.gold.groups.iter().enumerate() {
                assert_eq!(g.src, vec![k]);
                assert_eq!(g.tgt, vec![k]);
                assert_eq!(g.kind(), GroupKind::OneOne);
            }
        }
    }

    #[test]
    fn leading_deletion_burst_marks_prefix() {
        let cfg = GenConfig {
            leading_deletions: 4,
            texts: 2,
            ..GenConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        for text in &corpus.texts {
            assert_eq!(&text.gold.unaligned_src[..4], &[0, 1, 2, 3]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig {
            seed: 7,
            texts: 2,
            deletion_rate: 0.2,
            merge_rate: 0.1,
            ..GenConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        write_corpus(&a, dir_a.path()).unwrap();
        write_corpus(&b, dir_b.path()).unwrap();
        for entry in std::fs::read_dir(dir_a.path()).unwrap() {
            let entry = entry.unwrap();
            let name = entry.file_name();
            let left = std::fs::read(entry.path()).unwrap();
            let right = std::fs::read(dir_b.path().join(&name)).unwrap();
            assert_eq!(left, right, "file {name:?} differs between runs");
        }
    }

    #[test]
    fn gold_is_monotone_and_partitions_everything() {
        let cfg = GenConfig {
            seed: 11,
            texts: 5,
            deletion_rate: 0.15,
            merge_rate: 0.15,
            leading_deletions: 2,
            ..GenConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        for text in &corpus.texts {
            let gold = &text.gold;
            let mut seen_src = vec![false; text.source.len()];
            let mut seen_tgt = vec![false; text.target.len()];
            let mut mark = |flags: &mut Vec<bool>, idx: usize| {
                assert!(!flags[idx], "index {idx} appears twice");
                flags[idx] = true;
            };
            for g in &gold.groups {
                for &i in &g.src {
                    mark(&mut seen_src, i);
                }
                for &j in &g.tgt {
                    mark(&mut seen_tgt, j);
                }
            }
            for &i in &gold.unaligned_src {
                mark(&mut seen_src, i);
            }
            for &j in &gold.unaligned_tgt {
                mark(&mut seen_tgt, j);
            }
            assert!(seen_src.iter().all(|&b| b), "source not fully covered");
            assert!(seen_tgt.iter().all(|&b| b), "target not fully covered");
            for w in gold.groups.windows(2) {
                assert!(w[0].src.last() < w[1].src.first());
                assert!(w[0].tgt.last() < w[1].tgt.first());
            }
        }
    }

    #[test]
    fn merged_groups_add_chunk_counts() {
        let cfg = GenConfig {
            seed: 3,
            texts: 4,
            merge_rate: 0.5,
            filler_rate: 0.0,
            ..GenConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        let mut merges = 0;
        for text in &corpus.texts {
            for g in &text.gold.groups {
                if g.kind() == GroupKind::ManyOne {
                    merges += 1;
                    let src_chunks: usize = g
                        .src
                        .iter()
                        .map(|&i| text.source.sentences[i].chunks.len())
                        .sum();
                    let tgt_chunks = text.target.sentences[g.tgt[0]].chunks.len();
                    assert_eq!(src_chunks, tgt_chunks);
                }
            }
        }
        assert!(merges > 0, "merge rate 0.5 should produce merges");
    }

    #[test]
    fn coverage_lexicons_are_nested() {
        let base = GenConfig {
            seed: 5,
            texts: 1,
            ..GenConfig::default()
        };
        let full = generate(&GenConfig {
            coverage: 1.0,
            ..base.clone()
        })
        .unwrap();
        let seventy = generate(&GenConfig {
            coverage: 0.7,
            ..base.clone()
        })
        .unwrap();
        let forty = generate(&GenConfig {
            coverage: 0.4,
            ..base
        })
        .unwrap();
        // same corpus regardless of coverage
        assert_eq!(full.texts, seventy.texts);
        assert_eq!(full.texts, forty.texts);
        // nested lexicons
        assert!(forty.lexicon.len() < seventy.lexicon.len());
        assert!(seventy.lexicon.len() < full.lexicon.len());
        for (src, tgts) in forty.lexicon.iter() {
            for t in tgts {
                assert!(seventy.lexicon.contains(src, t));
                assert!(full.lexicon.contains(src, t));
            }
        }
    }

    #[test]
    fn bracket_files_roundtrip_through_the_parser() {
        let cfg = GenConfig {
            seed: 9,
            texts: 1,
            ..GenConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        let rules = crate::chunker::ChunkRuleSet::builtin("syn").unwrap();
        let text = &corpus.texts[0].target;
        let serialized = crate::corpus::text_to_bracket_string(text);
        let parsed =
            crate::corpus::parse_prechunked_str(&serialized, &text.language, &rules, "t").unwrap();
        assert_eq!(&parsed, text);
    }

    #[test]
    fn invalid_rates_are_rejected() {
        let cfg = GenConfig {
            deletion_rate: 1.5,
            ..GenConfig::default()
        };
        assert!(generate(&cfg).is_err());
    }
}
