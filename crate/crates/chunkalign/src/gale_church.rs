//! Character-length dynamic-programming sentence aligner, the
//! comparison baseline.
//!
//! Each group kind has a prior probability and a length cost derived
//! from how far the target length strays from the expected multiple of
//! the source length. A dynamic program over prefix pairs minimizes the
//! total cost with the moves 1-1, 1-0, 0-1, 2-1, 1-2 and 2-2; texts run
//! whole, with no paragraph anchors to resynchronize on, so large
//! deletions are exactly where this baseline drifts.

use statrs::function::erf::erfc;

use crate::aligner::{AlignGroup, Alignment};
use crate::corpus::Text;
use crate::{Error, Result};

/// The six DP moves. The order is the tie-break preference: 1-1 first,
/// then moves consuming fewer sentences, source-consuming before
/// target-consuming.
pub const MOVES: [MoveKind; 6] = [
    MoveKind::OneOne,
    MoveKind::OneZero,
    MoveKind::ZeroOne,
    MoveKind::TwoOne,
    MoveKind::OneTwo,
    MoveKind::TwoTwo,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    OneOne,
    OneZero,
    ZeroOne,
    TwoOne,
    OneTwo,
    TwoTwo,
}

impl MoveKind {
    /// (source sentences, target sentences) the move consumes.
    pub fn step(&self) -> (usize, usize) {
        match self {
            MoveKind::OneOne => (1, 1),
            MoveKind::OneZero => (1, 0),
            MoveKind::ZeroOne => (0, 1),
            MoveKind::TwoOne => (2, 1),
            MoveKind::OneTwo => (1, 2),
            MoveKind::TwoTwo => (2, 2),
        }
    }

    pub fn is_deletion(&self) -> bool {
        matches!(self, MoveKind::OneZero | MoveKind::ZeroOne)
    }

    fn prior_index(&self) -> usize {
        match self {
            MoveKind::OneOne => 0,
            MoveKind::OneZero => 1,
            MoveKind::ZeroOne => 2,
            MoveKind::TwoOne => 3,
            MoveKind::OneTwo => 4,
            MoveKind::TwoTwo => 5,
        }
    }

    /// Position in the tie-break preference order.
    pub fn rank(&self) -> usize {
        MOVES.iter().position(|m| m == self).unwrap()
    }
}

/// Length-model parameters: expected target/source character ratio, the
/// per-character variance of the difference, and the prior probability
/// of each group kind. Raw priors are normalized to sum to one at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthModelParams {
    pub mean_ratio: f64,
    pub variance: f64,
    priors: [f64; 6],
}

impl Default for LengthModelParams {
    fn default() -> Self {
        // classic defaults: c = 1, s^2 = 6.8, and the published group
        // probabilities with the two-way kinds split evenly
        LengthModelParams::new(1.0, 6.8, [0.89, 0.00495, 0.00495, 0.0445, 0.0445, 0.011])
            .expect("default parameters are valid")
    }
}

impl LengthModelParams {
    /// Priors are given in move order 1-1, 1-0, 0-1, 2-1, 1-2, 2-2 and
    /// normalized so they sum to exactly one.
    pub fn new(mean_ratio: f64, variance: f64, priors: [f64; 6]) -> Result<LengthModelParams> {
        if !(mean_ratio > 0.0) || !mean_ratio.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "length model mean ratio must be positive, got {mean_ratio}"
            )));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "length model variance must be positive, got {variance}"
            )));
        }
        let sum: f64 = priors.iter().sum();
        if !(sum > 0.0) || priors.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidConfig(
                "length model priors must all be positive".to_string(),
            ));
        }
        let priors = priors.map(|p| p / sum);
        Ok(LengthModelParams {
            mean_ratio,
            variance,
            priors,
        })
    }

    pub fn prior(&self, kind: MoveKind) -> f64 {
        self.priors[kind.prior_index()]
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "length model priors sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

// Floor on the tail probability so extreme length mismatches stay at a
// large finite cost instead of infinity.
const MIN_TAIL_PROB: f64 = 1e-300;

/// Cost of forming one group: the negated log prior plus, for
/// non-deletion kinds, the negated log tail probability of the observed
/// length difference. Lengths are summed characters of the sentences the
/// move consumes; deletions cost their prior alone.
pub fn length_cost(src_len: usize, tgt_len: usize, kind: MoveKind, params: &LengthModelParams) -> f64 {
    let prior_cost = -params.prior(kind).ln();
    if kind.is_deletion() {
        return prior_cost;
    }
    let src = src_len.max(1) as f64;
    let delta = (tgt_len as f64 - src * params.mean_ratio) / (src * params.variance).sqrt();
    // two-sided tail probability of |delta| under a standard normal
    let tail = erfc(delta.abs() / std::f64::consts::SQRT_2).max(MIN_TAIL_PROB);
    prior_cost - tail.ln()
}

/// Length-based alignment of two texts by dynamic programming over
/// prefix pairs. Ties prefer 1-1, then the move consuming fewer
/// sentences; the result is deterministic.
pub fn align_gc(src: &Text, tgt: &Text, params: &LengthModelParams) -> Alignment {
    let n = src.sentences.len();
    let m = tgt.sentences.len();
    // prefix character sums: src_prefix[i] = chars of sentences 0..i
    let mut src_prefix = vec![0usize; n + 1];
    for (i, s) in src.sentences.iter().enumerate() {
        src_prefix[i + 1] = src_prefix[i] + s.char_length;
    }
    let mut tgt_prefix = vec![0usize; m + 1];
    for (j, t) in tgt.sentences.iter().enumerate() {
        tgt_prefix[j + 1] = tgt_prefix[j] + t.char_length;
    }

    let width = m + 1;
    let idx = |i: usize, j: usize| i * width + j;
    let mut dist = vec![f64::INFINITY; (n + 1) * width];
    let mut choice: Vec<Option<MoveKind>> = vec![None; (n + 1) * width];
    dist[0] = 0.0;

    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut best_move = None;
            for kind in MOVES {
                let (di, dj) = kind.step();
                if di > i || dj > j {
                    continue;
                }
                let prev = dist[idx(i - di, j - dj)];
                if !prev.is_finite() {
                    continue;
                }
                let src_len = src_prefix[i] - src_prefix[i - di];
                let tgt_len = tgt_prefix[j] - tgt_prefix[j - dj];
                let total = prev + length_cost(src_len, tgt_len, kind, params);
                // strict improvement only: earlier moves in MOVES win ties
                if total < best {
                    best = total;
                    best_move = Some(kind);
                }
            }
            dist[idx(i, j)] = best;
            choice[idx(i, j)] = best_move;
        }
    }

    // backtrace
    let mut moves = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let kind = choice[idx(i, j)].expect("every cell above the origin has a move");
        let (di, dj) = kind.step();
        moves.push(kind);
        i -= di;
        j -= dj;
    }
    moves.reverse();

    let mut alignment = Alignment::default();
    let (mut i, mut j) = (0usize, 0usize);
    for kind in moves {
        let (di, dj) = kind.step();
        let src_len = src_prefix[i + di] - src_prefix[i];
        let tgt_len = tgt_prefix[j + dj] - tgt_prefix[j];
        let cost = length_cost(src_len, tgt_len, kind, params);
        match kind {
            MoveKind::OneZero => alignment.unaligned_src.push(i),
            MoveKind::ZeroOne => alignment.unaligned_tgt.push(j),
            _ => alignment.groups.push(AlignGroup {
                src: (i..i + di).collect(),
                tgt: (j..j + dj).collect(),
                score: cost,
            }),
        }
        i += di;
        j += dj;
    }
    alignment.sort();
    alignment
}

/// Total cost of an alignment produced by [`align_gc`], recomputed from
/// the texts. Used by tests and diagnostics.
pub fn alignment_cost(alignment: &Alignment, src: &Text, tgt: &Text, params: &LengthModelParams) -> f64 {
    let sum_src = |indices: &[usize]| -> usize {
        indices.iter().map(|&i| src.sentences[i].char_length).sum()
    };
    let sum_tgt = |indices: &[usize]| -> usize {
        indices.iter().map(|&j| tgt.sentences[j].char_length).sum()
    };
    let mut total = 0.0;
    for g in &alignment.groups {
        let kind = match (g.src.len(), g.tgt.len()) {
            (1, 1) => MoveKind::OneOne,
            (2, 1) => MoveKind::TwoOne,
            (1, 2) => MoveKind::OneTwo,
            (2, 2) => MoveKind::TwoTwo,
            other => panic!("unexpected group shape {other:?} in a length-based alignment"),
        };
        total += length_cost(sum_src(&g.src), sum_tgt(&g.tgt), kind, params);
    }
    total += alignment.unaligned_src.len() as f64 * length_cost(0, 0, MoveKind::OneZero, params);
    total += alignment.unaligned_tgt.len() as f64 * length_cost(0, 0, MoveKind::ZeroOne, params);
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunker::ChunkRuleSet;
    use crate::corpus::parse_text_str;

    fn text_with_lengths(lengths: &[usize]) -> Text {
        let rules = ChunkRuleSet::builtin("syn").unwrap();
        let lines: Vec<String> = lengths.iter().map(|&n| "x".repeat(n.max(1))).collect();
        parse_text_str(&lines.join("\n"), "syn", &rules).unwrap()
    }

    /// Standard normal CDF by Simpson quadrature, independent of the
    /// implementation's error-function route.
    fn phi_oracle(x: f64) -> f64 {
        let density = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let (a, b) = (0.0, x.abs());
        let n = 4000;
        let h = (b - a) / n as f64;
        let mut sum = density(a) + density(b);
        for k in 1..n {
            let t = a + k as f64 * h;
            sum += density(t) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = sum * h / 3.0;
        if x >= 0.0 {
            0.5 + integral
        } else {
            0.5 - integral
        }
    }

    fn cost_oracle(src_len: f64, tgt_len: f64, prior: f64) -> f64 {
        let delta = (tgt_len - src_len) / (src_len * 6.8).sqrt();
        let p = 2.0 * (1.0 - phi_oracle(delta.abs()));
        -prior.ln() - p.ln()
    }

    #[test]
    fn equal_lengths_cost_is_prior_only() {
        let params = LengthModelParams::default();
        let cost = length_cost(120, 120, MoveKind::OneOne, &params);
        // delta = 0, tail probability 1; the cost is the normalized 1-1
        // prior, within rounding of -ln 0.89
        assert!((cost - 0.116433811255618).abs() < 1e-12, "cost {cost}");
        assert!((cost - (-f64::ln(0.89))).abs() < 1e-3);
    }

    #[test]
    fn cost_is_monotone_in_length_gap() {
        let params = LengthModelParams::default();
        let mut last = length_cost(100, 100, MoveKind::OneOne, &params);
        for tgt in (101..160).step_by(7) {
            let cost = length_cost(100, tgt, MoveKind::OneOne, &params);
            assert!(cost >= last, "cost should not decrease with |delta|");
            last = cost;
        }
    }

    #[test]
    fn frozen_cost_value_matches_quadrature_oracle() {
        let params = LengthModelParams::default();
        let cost = length_cost(100, 118, MoveKind::OneOne, &params);
        // frozen from the quadrature oracle
        assert!((cost - 0.829731946386975).abs() < 1e-9, "cost {cost}");
        let prior = 0.89f64 / 0.9999;
        assert!((cost - cost_oracle(100.0, 118.0, prior)).abs() < 1e-9);
    }

    #[test]
    fn deletion_cost_is_prior_alone() {
        let params = LengthModelParams::default();
        let cost = length_cost(57, 0, MoveKind::OneZero, &params);
        assert!((cost - (-(0.00495f64 / 0.9999).ln())).abs() < 1e-12);
        assert_eq!(cost, length_cost(1, 0, MoveKind::OneZero, &params));
    }

    #[test]
    fn default_priors_sum_to_one() {
        LengthModelParams::default().validate().unwrap();
        let err = LengthModelParams::new(1.0, 6.8, [0.0; 6]).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn identical_single_sentences_align_one_one() {
        let src = text_with_lengths(&[40]);
        let tgt = text_with_lengths(&[40]);
        let alignment = align_gc(&src, &tgt, &LengthModelParams::default());
        assert_eq!(alignment.groups.len(), 1);
        assert_eq!(alignment.groups[0].src, vec![0]);
        assert_eq!(alignment.groups[0].tgt, vec![0]);
        assert!(alignment.unaligned_src.is_empty());
    }

    #[test]
    fn merged_lengths_produce_two_one_group() {
        let src = text_with_lengths(&[50, 60]);
        let tgt = text_with_lengths(&[110]);
        let alignment = align_gc(&src, &tgt, &LengthModelParams::default());
        assert_eq!(alignment.groups.len(), 1);
        assert_eq!(alignment.groups[0].src, vec![0, 1]);
        assert_eq!(alignment.groups[0].tgt, vec![0]);
    }

    #[test]
    fn one_sided_texts_become_deletions() {
        let src = text_with_lengths(&[30, 40]);
        let tgt = Text {
            language: "syn".into(),
            sentences: vec![],
        };
        let alignment = align_gc(&src, &tgt, &LengthModelParams::default());
        assert!(alignment.groups.is_empty());
        assert_eq!(alignment.unaligned_src, vec![0, 1]);
    }
}
