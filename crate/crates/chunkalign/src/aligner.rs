//! Sentence-pair scoring and the sorted greedy one-one aligner.
//!
//! The score of a sentence pair is the number of chunks that match each
//! other divided by the larger chunk count of the two sentences. All
//! pairs at or above the threshold are sorted by descending score and
//! scanned once; a pair is accepted when neither sentence is already
//! aligned and accepting it would not cross an earlier pair.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::corpus::{Sentence, Text};
use crate::many_many::{extend_by_chunk_counts, extend_by_rescoring, ExtensionConfig};
use crate::matcher::{ChunkWords, MatchResources};
use crate::{Error, Result};

/// A scored source/target sentence pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub src_index: usize,
    pub tgt_index: usize,
    pub score: f64,
    pub matching_chunks: usize,
}

#[derive(Debug, Clone)]
pub struct AlignerConfig {
    /// Minimum score a pair needs to become a candidate. Any value above
    /// zero works; the default suppresses single spurious chunk matches
    /// on sentences of around ten chunks.
    pub threshold: f64,
    /// Optional band half-width: candidate (i, j) is kept only when
    /// |i*(m/n) - j| <= window.
    pub window: Option<f64>,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            threshold: 0.1,
            window: None,
        }
    }
}

/// Shape of an alignment group in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    OneOne,
    OneMany,
    ManyOne,
    ManyMany,
    DelSrc,
    DelTgt,
}

impl GroupKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GroupKind::OneOne => "1-1",
            GroupKind::OneMany => "1-N",
            GroupKind::ManyOne => "N-1",
            GroupKind::ManyMany => "N-N",
            GroupKind::DelSrc => "del-src",
            GroupKind::DelTgt => "del-tgt",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An aligned group: one or more source sentences mapped to one or more
/// target sentences. Index vectors are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignGroup {
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub score: f64,
}

impl AlignGroup {
    pub fn one_one(src: usize, tgt: usize, score: f64) -> AlignGroup {
        AlignGroup {
            src: vec![src],
            tgt: vec![tgt],
            score,
        }
    }

    pub fn kind(&self) -> GroupKind {
        match (self.src.len(), self.tgt.len()) {
            (0, _) => GroupKind::DelTgt,
            (_, 0) => GroupKind::DelSrc,
            (1, 1) => GroupKind::OneOne,
            (1, _) => GroupKind::OneMany,
            (_, 1) => GroupKind::ManyOne,
            _ => GroupKind::ManyMany,
        }
    }

    pub fn min_src(&self) -> usize {
        *self.src.first().unwrap_or(&usize::MAX)
    }

    pub fn min_tgt(&self) -> usize {
        *self.tgt.first().unwrap_or(&usize::MAX)
    }
}

/// An ordered alignment: the aligned groups plus the sentences left
/// without a counterpart, which serialize as deletion lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Alignment {
    /// Aligned groups sorted by smallest source index.
    pub groups: Vec<AlignGroup>,
    pub unaligned_src: Vec<usize>,
    pub unaligned_tgt: Vec<usize>,
}

impl Alignment {
    pub fn sort(&mut self) {
        self.groups.sort_by_key(AlignGroup::min_src);
        self.unaligned_src.sort_unstable();
        self.unaligned_tgt.sort_unstable();
    }

    /// Serialize to the alignment TSV: one group per line,
    /// `src<TAB>tgt<TAB>score<TAB>kind`, indices comma-separated and
    /// 0-based, `-` marking the empty side of a deletion. Deletions are
    /// one line per sentence; target deletions interleave by target
    /// index.
    pub fn to_tsv_string(&self) -> String {
        fn fmt_side(indices: &[usize]) -> String {
            if indices.is_empty() {
                "-".to_string()
            } else {
                indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        }

        let mut src_lines: Vec<(Vec<usize>, Vec<usize>, f64)> = Vec::new();
        for g in &self.groups {
            src_lines.push((g.src.clone(), g.tgt.clone(), g.score));
        }
        for &i in &self.unaligned_src {
            src_lines.push((vec![i], Vec::new(), 0.0));
        }
        src_lines.sort_by_key(|(src, _, _)| *src.first().unwrap_or(&usize::MAX));

        let mut out = String::new();
        let mut pending_tgt = self.unaligned_tgt.iter().copied().peekable();
        for (src, tgt, score) in &src_lines {
            if let Some(&min_tgt) = tgt.first() {
                while pending_tgt.peek().is_some_and(|&j| j < min_tgt) {
                    let j = pending_tgt.next().unwrap();
                    out.push_str(&format!("-\t{j}\t0.0000\tdel-tgt\n"));
                }
            }
            let kind = AlignGroup {
                src: src.clone(),
                tgt: tgt.clone(),
                score: *score,
            }
            .kind();
            out.push_str(&format!(
                "{}\t{}\t{score:.4}\t{kind}\n",
                fmt_side(src),
                fmt_side(tgt)
            ));
        }
        for j in pending_tgt {
            out.push_str(&format!("-\t{j}\t0.0000\tdel-tgt\n"));
        }
        out
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn from_tsv_str(content: &str, label: impl Into<std::path::PathBuf>) -> Result<Alignment> {
        let label = label.into();
        fn parse_side(field: &str, label: &Path, lineno: usize) -> Result<Vec<usize>> {
            if field == "-" {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            for part in field.split(',') {
                let idx: usize = part.trim().parse().map_err(|_| {
                    Error::format(label, lineno, format!("bad sentence index `{part}`"))
                })?;
                out.push(idx);
            }
            out.sort_unstable();
            Ok(out)
        }

        let mut alignment = Alignment::default();
        for (lineno, line) in content.lines().enumerate() {
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::format(&label, lineno, "expected 4 tab-separated fields"));
            }
            let src = parse_side(fields[0], &label, lineno)?;
            let tgt = parse_side(fields[1], &label, lineno)?;
            let score: f64 = fields[2].trim().parse().map_err(|_| {
                Error::format(&label, lineno, format!("bad score `{}`", fields[2]))
            })?;
            let group = AlignGroup { src, tgt, score };
            if group.kind().as_str() != fields[3].trim() {
                return Err(Error::format(
                    &label,
                    lineno,
                    format!(
                        "kind `{}` does not match group shape `{}`",
                        fields[3].trim(),
                        group.kind()
                    ),
                ));
            }
            match group.kind() {
                GroupKind::DelSrc => alignment.unaligned_src.extend(group.src),
                GroupKind::DelTgt => alignment.unaligned_tgt.extend(group.tgt),
                _ => alignment.groups.push(group),
            }
        }
        alignment.sort();
        Ok(alignment)
    }

    pub fn load_tsv(path: &Path) -> Result<Alignment> {
        let content = crate::read_utf8(path)?;
        Alignment::from_tsv_str(&content, path)
    }
}

/// Score one sentence pair: chunks are consumed greedily in order, each
/// source chunk taking the first target chunk it matches that no earlier
/// source chunk claimed. Sentences without chunks score zero.
pub fn score_of_match(s: &Sentence, t: &Sentence, res: &MatchResources) -> CandidatePair {
    let src_words: Vec<ChunkWords> = s.chunks.iter().map(ChunkWords::from_chunk).collect();
    let tgt_words: Vec<ChunkWords> = t.chunks.iter().map(ChunkWords::from_chunk).collect();
    let matching_chunks = count_matching_chunks(&src_words, &tgt_words, res);
    CandidatePair {
        src_index: s.index,
        tgt_index: t.index,
        score: pair_score(matching_chunks, s.chunks.len(), t.chunks.len()),
        matching_chunks,
    }
}

fn pair_score(matching: usize, src_chunks: usize, tgt_chunks: usize) -> f64 {
    let denom = src_chunks.max(tgt_chunks);
    if denom == 0 {
        0.0
    } else {
        matching as f64 / denom as f64
    }
}

fn count_matching_chunks(
    src: &[ChunkWords],
    tgt: &[ChunkWords],
    res: &MatchResources,
) -> usize {
    let mut used = vec![false; tgt.len()];
    let mut matched = 0;
    for sc in src {
        for (j, tc) in tgt.iter().enumerate() {
            if !used[j] && sc.matches(tc, res) {
                used[j] = true;
                matched += 1;
                break;
            }
        }
    }
    matched
}

/// Sort candidates for the greedy scan: score descending, then source
/// and target index ascending so equal scores resolve deterministically.
pub fn sort_candidates(candidates: &mut [CandidatePair]) {
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.src_index.cmp(&b.src_index))
            .then(a.tgt_index.cmp(&b.tgt_index))
    });
}

/// Score every pair of the two texts (optionally banded) and return the
/// candidates at or above the threshold, sorted for the greedy scan.
pub fn build_candidates(
    src: &Text,
    tgt: &Text,
    cfg: &AlignerConfig,
    res: &MatchResources,
) -> Vec<CandidatePair> {
    let src_words: Vec<Vec<ChunkWords>> = src
        .sentences
        .iter()
        .map(|s| s.chunks.iter().map(ChunkWords::from_chunk).collect())
        .collect();
    let tgt_words: Vec<Vec<ChunkWords>> = tgt
        .sentences
        .iter()
        .map(|s| s.chunks.iter().map(ChunkWords::from_chunk).collect())
        .collect();

    let n = src.sentences.len() as f64;
    let m = tgt.sentences.len() as f64;
    let mut candidates = Vec::new();
    for (i, s) in src.sentences.iter().enumerate() {
        for (j, t) in tgt.sentences.iter().enumerate() {
            if let Some(w) = cfg.window {
                if n > 0.0 && (i as f64 * (m / n) - j as f64).abs() > w {
                    continue;
                }
            }
            let matching = count_matching_chunks(&src_words[i], &tgt_words[j], res);
            let score = pair_score(matching, s.chunks.len(), t.chunks.len());
            if score >= cfg.threshold {
                candidates.push(CandidatePair {
                    src_index: i,
                    tgt_index: j,
                    score,
                    matching_chunks: matching,
                });
            }
        }
    }
    sort_candidates(&mut candidates);
    candidates
}

/// Why the greedy scan rejected (or kept) a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanDecision {
    Accepted,
    /// One of the two sentences is already aligned.
    RejectedOneOne,
    /// Accepting the pair would cross an accepted pair.
    RejectedCrossing,
}

#[derive(Debug, Clone)]
pub struct ScanEvent {
    pub src_index: usize,
    pub tgt_index: usize,
    pub score: f64,
    pub decision: ScanDecision,
}

/// The greedy scan with a decision trace. `candidates` must already be
/// sorted (see [`sort_candidates`]); `n` and `m` are the text sizes used
/// to compute the unaligned remainder.
pub fn align_one_one_traced(
    candidates: &[CandidatePair],
    n: usize,
    m: usize,
) -> (Alignment, Vec<ScanEvent>) {
    let mut used_src = vec![false; n];
    let mut used_tgt = vec![false; m];
    let mut accepted: Vec<(usize, usize, f64)> = Vec::new();
    let mut events = Vec::new();

    for cand in candidates {
        let (a, b) = (cand.src_index, cand.tgt_index);
        let decision = if used_src[a] || used_tgt[b] {
            ScanDecision::RejectedOneOne
        } else if accepted.iter().any(|&(c, d, _)| {
            // sign(a-c) must equal sign(b-d); equality cannot happen here
            (a > c) != (b > d)
        }) {
            ScanDecision::RejectedCrossing
        } else {
            used_src[a] = true;
            used_tgt[b] = true;
            accepted.push((a, b, cand.score));
            ScanDecision::Accepted
        };
        events.push(ScanEvent {
            src_index: a,
            tgt_index: b,
            score: cand.score,
            decision,
        });
    }

    accepted.sort_by_key(|&(a, _, _)| a);
    let alignment = Alignment {
        groups: accepted
            .into_iter()
            .map(|(a, b, score)| AlignGroup::one_one(a, b, score))
            .collect(),
        unaligned_src: (0..n).filter(|&i| !used_src[i]).collect(),
        unaligned_tgt: (0..m).filter(|&j| !used_tgt[j]).collect(),
    };
    (alignment, events)
}

/// First-pass alignment: one-one groups only.
pub fn align_one_one(candidates: &[CandidatePair], n: usize, m: usize) -> Alignment {
    align_one_one_traced(candidates, n, m).0
}

/// Pipeline options for [`align_texts`].
#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub aligner: AlignerConfig,
    pub extension: ExtensionConfig,
    pub extend_chunk_counts: bool,
    pub extend_rescoring: bool,
}

/// Full lexical pipeline over two chunked texts: candidate scoring, the
/// greedy one-one pass, then the optional one-many extensions.
pub fn align_texts(
    src: &Text,
    tgt: &Text,
    res: &MatchResources,
    opts: &PipelineOptions,
) -> Alignment {
    let candidates = build_candidates(src, tgt, &opts.aligner, res);
    let mut alignment = align_one_one(&candidates, src.len(), tgt.len());
    if opts.extend_chunk_counts {
        alignment = extend_by_chunk_counts(&alignment, src, tgt, &opts.extension);
    }
    if opts.extend_rescoring {
        alignment = extend_by_rescoring(&alignment, &candidates, &opts.extension);
    }
    alignment
}

/// Index sets touched by an alignment, used for validation.
pub(crate) fn index_universe(alignment: &Alignment) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut src = BTreeSet::new();
    let mut tgt = BTreeSet::new();
    for g in &alignment.groups {
        src.extend(g.src.iter().copied());
        tgt.extend(g.tgt.iter().copied());
    }
    src.extend(alignment.unaligned_src.iter().copied());
    tgt.extend(alignment.unaligned_tgt.iter().copied());
    (src, tgt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunker::{chunk_text, ChunkRuleSet};
    use crate::corpus::{parse_text_str, BilingualLexicon};

    fn identity_resources(words: &[&str]) -> MatchResources {
        let mut lex = BilingualLexicon::new();
        for w in words {
            lex.insert(w, w);
        }
        MatchResources::new(lex, "xx", "xx")
    }

    /// Texts whose pair scores reproduce the worked six-score example as
    /// fractions of 40 chunks: 30/40, 20/40, 15/40, 10/40, 7/40, 5/40.
    fn worked_example() -> (Text, Text, MatchResources) {
        let rules = ChunkRuleSet::builtin("syn").unwrap();
        let word = |i: usize| format!("w{i}");
        let mut next = 1000usize;
        let mut filler = |count: usize| {
            let mut out = Vec::new();
            for _ in 0..count {
                out.push(word(next));
                next += 1;
            }
            out.join(" ")
        };
        let range = |lo: usize, hi: usize| (lo..hi).map(word).collect::<Vec<_>>().join(" ");

        // t1 carries words 0..30; s1/s2/s3 overlap it on nested prefixes
        // so the pairwise intersections are exactly 5, 15 and 30.
        let s1 = format!("{} {}", range(0, 5), filler(35));
        let s2 = format!("{} {} {}", range(0, 15), range(30, 50), filler(5));
        let s3 = format!("{} {} {}", range(0, 30), range(50, 57), filler(3));
        let s4 = format!("{} {}", range(30, 40), filler(30));
        let t1 = format!("{} {}", range(0, 30), filler(10));
        let t2 = format!("{} {} {}", range(30, 50), range(50, 57), filler(13));

        let src_text = [s1, s2, s3, s4].join("\n");
        let tgt_text = [t1, t2].join("\n");
        let mut src = parse_text_str(&src_text, "syn", &rules).unwrap();
        let mut tgt = parse_text_str(&tgt_text, "syn", &rules).unwrap();
        chunk_text(&mut src, &rules);
        chunk_text(&mut tgt, &rules);
        for s in src.sentences.iter().chain(tgt.sentences.iter()) {
            assert_eq!(s.chunks.len(), 40);
        }
        let words: Vec<String> = (0..1400).map(word).collect();
        let refs: Vec<&str> = words.iter().map(|s| s.as_str()).collect();
        let res = identity_resources(&refs);
        (src, tgt, res)
    }

    #[test]
    fn score_is_matching_over_max() {
        let rules = ChunkRuleSet::builtin("syn").unwrap();
        let mut src = parse_text_str("a b c d", "syn", &rules).unwrap();
        let mut tgt = parse_text_str("a b c d", "syn", &rules).unwrap();
        chunk_text(&mut src, &rules);
        chunk_text(&mut tgt, &rules);
        let res = identity_resources(&["a", "b", "c", "d"]);
        let pair = score_of_match(&src.sentences[0], &tgt.sentences[0], &res);
        assert_eq!(pair.matching_chunks, 4);
        assert_eq!(pair.score, 1.0);

        let res_none = identity_resources(&[]);
        let pair = score_of_match(&src.sentences[0], &tgt.sentences[0], &res_none);
        assert_eq!(pair.score, 0.0);
    }

    #[test]
    fn score_handles_chunkless_sentences() {
        let rules = ChunkRuleSet::builtin("en").unwrap();
        let mut src = parse_text_str(". , !", "en", &rules).unwrap();
        let mut tgt = parse_text_str("fish", "en", &rules).unwrap();
        chunk_text(&mut src, &rules);
        chunk_text(&mut tgt, &rules);
        assert!(src.sentences[0].chunks.is_empty());
        let res = identity_resources(&["fish"]);
        let pair = score_of_match(&src.sentences[0], &tgt.sentences[0], &res);
        assert_eq!(pair.score, 0.0);
        assert_eq!(pair.matching_chunks, 0);
    }

    #[test]
    fn score_arithmetic_three_of_six() {
        // 3 matches, 5 source chunks, 6 target chunks -> 3/6
        let rules = ChunkRuleSet::builtin("syn").unwrap();
        let mut src = parse_text_str("a b c x y", "syn", &rules).unwrap();
        let mut tgt = parse_text_str("a b c u v w", "syn", &rules).unwrap();
        chunk_text(&mut src, &rules);
        chunk_text(&mut tgt, &rules);
        let res = identity_resources(&["a", "b", "c"]);
        let pair = score_of_match(&src.sentences[0], &tgt.sentences[0], &res);
        assert_eq!(pair.matching_chunks, 3);
        assert_eq!(pair.score, 0.5);
    }

    #[test]
    fn build_candidates_reproduces_worked_example_order() {
        let (src, tgt, res) = worked_example();
        let cfg = AlignerConfig::default();
        let candidates = build_candidates(&src, &tgt, &cfg, &res);
        let order: Vec<(usize, usize, usize)> = candidates
            .iter()
            .map(|c| (c.src_index, c.tgt_index, c.matching_chunks))
            .collect();
        assert_eq!(
            order,
            vec![(2, 0, 30), (1, 1, 20), (1, 0, 15), (3, 1, 10), (2, 1, 7), (0, 0, 5)]
        );
    }

    #[test]
    fn greedy_scan_matches_worked_example() {
        let (src, tgt, res) = worked_example();
        let candidates = build_candidates(&src, &tgt, &AlignerConfig::default(), &res);
        let (alignment, events) = align_one_one_traced(&candidates, 4, 2);
        let pairs: Vec<(usize, usize)> = alignment
            .groups
            .iter()
            .map(|g| (g.src[0], g.tgt[0]))
            .collect();
        assert_eq!(pairs, vec![(2, 0), (3, 1)]);
        assert_eq!(alignment.unaligned_src, vec![0, 1]);
        assert!(alignment.unaligned_tgt.is_empty());
        assert_eq!(events[1].decision, ScanDecision::RejectedCrossing);
        assert_eq!(events[2].decision, ScanDecision::RejectedOneOne);
    }

    #[test]
    fn empty_candidates_leave_everything_unaligned() {
        let alignment = align_one_one(&[], 3, 2);
        assert!(alignment.groups.is_empty());
        assert_eq!(alignment.unaligned_src, vec![0, 1, 2]);
        assert_eq!(alignment.unaligned_tgt, vec![0, 1]);
    }

    #[test]
    fn diagonal_candidates_align_fully() {
        let mut candidates: Vec<CandidatePair> = (0..5)
            .map(|i| CandidatePair {
                src_index: i,
                tgt_index: i,
                score: 0.5,
                matching_chunks: 1,
            })
            .collect();
        sort_candidates(&mut candidates);
        let alignment = align_one_one(&candidates, 5, 5);
        assert_eq!(alignment.groups.len(), 5);
        assert!(alignment.unaligned_src.is_empty());
    }

    #[test]
    fn window_restricts_candidate_band() {
        let (src, tgt, res) = worked_example();
        let cfg = AlignerConfig {
            threshold: 0.1,
            window: Some(0.5),
        };
        let candidates = build_candidates(&src, &tgt, &cfg, &res);
        // n=4, m=2: only pairs with |i*0.5 - j| <= 0.5 survive
        for c in &candidates {
            let drift = (c.src_index as f64 * 0.5 - c.tgt_index as f64).abs();
            assert!(drift <= 0.5, "candidate ({},{}) outside band", c.src_index, c.tgt_index);
        }
        assert!(candidates.iter().any(|c| c.src_index == 2 && c.tgt_index == 1));
        assert!(!candidates.iter().any(|c| c.src_index == 2 && c.tgt_index == 0));
    }

    #[test]
    fn tsv_roundtrip_and_format() {
        let alignment = Alignment {
            groups: vec![
                AlignGroup::one_one(0, 0, 1.0),
                AlignGroup {
                    src: vec![1, 2],
                    tgt: vec![1],
                    score: 0.6667,
                },
            ],
            unaligned_src: vec![3],
            unaligned_tgt: vec![2],
        };
        let tsv = alignment.to_tsv_string();
        let expected = "0\t0\t1.0000\t1-1\n1,2\t1\t0.6667\tN-1\n3\t-\t0.0000\tdel-src\n-\t2\t0.0000\tdel-tgt\n";
        assert_eq!(tsv, expected);
        let parsed = Alignment::from_tsv_str(&tsv, "t").unwrap();
        assert_eq!(parsed, alignment);
    }

    #[test]
    fn tsv_interleaves_target_deletions() {
        let alignment = Alignment {
            groups: vec![AlignGroup::one_one(0, 1, 0.5), AlignGroup::one_one(1, 2, 0.5)],
            unaligned_src: vec![],
            unaligned_tgt: vec![0, 3],
        };
        let tsv = alignment.to_tsv_string();
        let lines: Vec<&str> = tsv.lines().collect();
        assert!(lines[0].starts_with("-\t0"), "leading target deletion first: {tsv}");
        assert!(lines[3].starts_with("-\t3"), "trailing target deletion last: {tsv}");
    }

    #[test]
    fn tsv_rejects_kind_shape_mismatch() {
        let err = Alignment::from_tsv_str("0\t0\t1.0000\tN-1\n", "t").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }
}
