//! One-many and many-one extensions over a first-pass alignment.
//!
//! Two procedures run as an ordered, individually switchable pipeline.
//! The chunk-count procedure uses the rough proportionality of chunk
//! counts across a language pair: a pair whose counts are far apart is
//! probably missing a neighbour sentence, so the adjacent unaligned
//! sentence that best balances the counts is attached. The rescoring
//! procedure re-reads the candidate scores, ignoring the one-one rule
//! for the already-aligned member, and attaches unaligned sentences to
//! adjacent groups. Neither procedure ever removes or shrinks a
//! first-pass pair.

use crate::aligner::{AlignGroup, Alignment, CandidatePair};
use crate::corpus::Text;

#[derive(Debug, Clone)]
pub struct ExtensionConfig {
    /// Chunk-count imbalance that triggers an attachment attempt, and
    /// the band the merged ratio must fall back into. Must exceed 1.
    pub ratio_bound: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        ExtensionConfig { ratio_bound: 1.5 }
    }
}

/// Groups may grow to 1-3 / 3-1; past that the proportionality argument
/// stops holding.
const MAX_GROUP_SIDE: usize = 3;

fn groups_linear(a: &AlignGroup, b: &AlignGroup) -> bool {
    let a_before_b = a.src.last() < b.src.first() && a.tgt.last() < b.tgt.first();
    let b_before_a = b.src.last() < a.src.first() && b.tgt.last() < a.tgt.first();
    a_before_b || b_before_a
}

/// True when `group` (hypothetically already updated) stays monotone
/// against every other group.
fn placement_is_linear(groups: &[AlignGroup], at: usize, updated: &AlignGroup) -> bool {
    groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != at)
        .all(|(_, other)| groups_linear(updated, other))
}

fn chunk_sum(text: &Text, indices: &[usize]) -> usize {
    indices
        .iter()
        .map(|&i| text.sentences[i].chunks.len())
        .sum()
}

/// Attach adjacent unaligned sentences to groups whose chunk counts are
/// out of proportion. For a source-heavy pair the unaligned target
/// neighbour that brings the counts closest together is attached,
/// provided the merged ratio falls inside `[1/rho, rho]`; symmetric for
/// target-heavy pairs. Existing pairs are never removed.
pub fn extend_by_chunk_counts(
    alignment: &Alignment,
    src: &Text,
    tgt: &Text,
    cfg: &ExtensionConfig,
) -> Alignment {
    let rho = cfg.ratio_bound;
    let mut out = alignment.clone();
    out.sort();

    for gi in 0..out.groups.len() {
        let group = out.groups[gi].clone();
        let cs = chunk_sum(src, &group.src);
        let ct = chunk_sum(tgt, &group.tgt);
        if cs == 0 || ct == 0 {
            continue;
        }

        // source-heavy: attach a target neighbour
        if cs as f64 > ct as f64 * rho && group.src.len() == 1 && group.tgt.len() < MAX_GROUP_SIDE
        {
            let lo = group.tgt.first().unwrap().checked_sub(1);
            let hi = Some(group.tgt.last().unwrap() + 1).filter(|&j| j < tgt.sentences.len());
            let mut best: Option<(usize, usize)> = None; // (|cs - merged|, index)
            for j in [lo, hi].into_iter().flatten() {
                if !out.unaligned_tgt.contains(&j) {
                    continue;
                }
                let merged = ct + tgt.sentences[j].chunks.len();
                let gap = cs.abs_diff(merged);
                if best.map(|(g, bj)| (gap, j) < (g, bj)).unwrap_or(true) {
                    best = Some((gap, j));
                }
            }
            if let Some((_, j)) = best {
                let merged = ct + tgt.sentences[j].chunks.len();
                let ratio = cs as f64 / merged as f64;
                if ratio >= 1.0 / rho && ratio <= rho {
                    let mut updated = group.clone();
                    updated.tgt.push(j);
                    updated.tgt.sort_unstable();
                    if placement_is_linear(&out.groups, gi, &updated) {
                        out.groups[gi] = updated;
                        out.unaligned_tgt.retain(|&x| x != j);
                    }
                }
            }
        }

        // target-heavy: attach a source neighbour
        let group = out.groups[gi].clone();
        let cs = chunk_sum(src, &group.src);
        let ct = chunk_sum(tgt, &group.tgt);
        if ct as f64 > cs as f64 * rho && group.tgt.len() == 1 && group.src.len() < MAX_GROUP_SIDE
        {
            let lo = group.src.first().unwrap().checked_sub(1);
            let hi = Some(group.src.last().unwrap() + 1).filter(|&i| i < src.sentences.len());
            let mut best: Option<(usize, usize)> = None;
            for i in [lo, hi].into_iter().flatten() {
                if !out.unaligned_src.contains(&i) {
                    continue;
                }
                let merged = cs + src.sentences[i].chunks.len();
                let gap = ct.abs_diff(merged);
                if best.map(|(g, bi)| (gap, i) < (g, bi)).unwrap_or(true) {
                    best = Some((gap, i));
                }
            }
            if let Some((_, i)) = best {
                let merged = cs + src.sentences[i].chunks.len();
                let ratio = ct as f64 / merged as f64;
                if ratio >= 1.0 / rho && ratio <= rho {
                    let mut updated = group.clone();
                    updated.src.push(i);
                    updated.src.sort_unstable();
                    if placement_is_linear(&out.groups, gi, &updated) {
                        out.groups[gi] = updated;
                        out.unaligned_src.retain(|&x| x != i);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Re-scan the candidate list and attach unaligned sentences to the
/// group of their aligned counterpart. The attachment must be adjacent
/// (index distance one) to a sentence already in the group on its own
/// side, keep the group monotone against all others, and keep the other
/// side of the group a single sentence.
pub fn extend_by_rescoring(
    alignment: &Alignment,
    candidates: &[CandidatePair],
    _cfg: &ExtensionConfig,
) -> Alignment {
    let mut out = alignment.clone();
    out.sort();

    for cand in candidates {
        let (x, y) = (cand.src_index, cand.tgt_index);
        let src_group = out.groups.iter().position(|g| g.src.contains(&x));
        let tgt_group = out.groups.iter().position(|g| g.tgt.contains(&y));
        match (src_group, tgt_group) {
            // unaligned source sentence, aligned target sentence
            (None, Some(gi)) if out.unaligned_src.contains(&x) => {
                let group = &out.groups[gi];
                if group.tgt.len() != 1 || group.src.len() >= MAX_GROUP_SIDE {
                    continue;
                }
                let adjacent = group.src.first().unwrap().checked_sub(1) == Some(x)
                    || group.src.last().unwrap() + 1 == x;
                if !adjacent {
                    continue;
                }
                let mut updated = group.clone();
                updated.src.push(x);
                updated.src.sort_unstable();
                if placement_is_linear(&out.groups, gi, &updated) {
                    out.groups[gi] = updated;
                    out.unaligned_src.retain(|&i| i != x);
                }
            }
            // unaligned target sentence, aligned source sentence
            (Some(gi), None) if out.unaligned_tgt.contains(&y) => {
                let group = &out.groups[gi];
                if group.src.len() != 1 || group.tgt.len() >= MAX_GROUP_SIDE {
                    continue;
                }
                let adjacent = group.tgt.first().unwrap().checked_sub(1) == Some(y)
                    || group.tgt.last().unwrap() + 1 == y;
                if !adjacent {
                    continue;
                }
                let mut updated = group.clone();
                updated.tgt.push(y);
                updated.tgt.sort_unstable();
                if placement_is_linear(&out.groups, gi, &updated) {
                    out.groups[gi] = updated;
                    out.unaligned_tgt.retain(|&j| j != y);
                }
            }
            _ => {}
        }
    }
    out.sort();
    out
}
