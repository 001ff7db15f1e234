//! Scoring predicted alignments against gold and emitting report data.
//!
//! Precision is micro-averaged: correct groups summed over all texts
//! divided by predicted groups summed over all texts. Deletions are
//! first-class groups, one per sentence. In strict mode a predicted
//! group is correct only when the identical group exists in gold; with
//! partial credit it is enough to intersect a gold group on both sides,
//! which is the right handicap for a baseline that can only form
//! fixed-shape groups. Recall (gold groups covered) is reported as well.

use std::collections::BTreeSet;

use crate::aligner::{index_universe, AlignGroup, Alignment};
use crate::{Error, Result};

/// Per-text evaluation record.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEval {
    pub text_id: String,
    pub predicted: usize,
    pub correct: usize,
    pub gold_groups: usize,
    pub covered_gold: usize,
}

impl TextEval {
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            0.0
        } else {
            self.correct as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold_groups == 0 {
            0.0
        } else {
            self.covered_gold as f64 / self.gold_groups as f64
        }
    }

    pub fn error_pct(&self) -> f64 {
        100.0 * (1.0 - self.precision())
    }
}

/// Micro-averaged totals over a set of per-text records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalSummary {
    pub texts: usize,
    pub predicted: usize,
    pub correct: usize,
    pub gold_groups: usize,
    pub covered_gold: usize,
}

impl EvalSummary {
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            0.0
        } else {
            self.correct as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold_groups == 0 {
            0.0
        } else {
            self.covered_gold as f64 / self.gold_groups as f64
        }
    }
}

/// Pool per-text records into micro-averaged totals.
pub fn aggregate(records: &[TextEval]) -> EvalSummary {
    let mut summary = EvalSummary {
        texts: records.len(),
        ..EvalSummary::default()
    };
    for r in records {
        summary.predicted += r.predicted;
        summary.correct += r.correct;
        summary.gold_groups += r.gold_groups;
        summary.covered_gold += r.covered_gold;
    }
    summary
}

fn groups_intersect(a: &AlignGroup, b: &AlignGroup) -> bool {
    let hit = |xs: &[usize], ys: &[usize]| xs.iter().any(|x| ys.contains(x));
    hit(&a.src, &b.src) && hit(&a.tgt, &b.tgt)
}

fn group_correct(group: &AlignGroup, against: &[AlignGroup], partial_credit: bool) -> bool {
    if partial_credit {
        against.iter().any(|g| groups_intersect(group, g))
    } else {
        against.iter().any(|g| g.src == group.src && g.tgt == group.tgt)
    }
}

/// Score one predicted alignment against gold. Deletions count as
/// predicted groups and are correct when the same sentence is deleted on
/// the same side in gold.
pub fn score_alignment(
    text_id: &str,
    pred: &Alignment,
    gold: &Alignment,
    partial_credit: bool,
) -> Result<TextEval> {
    let (gold_src, gold_tgt) = index_universe(gold);
    let (pred_src, pred_tgt) = index_universe(pred);
    if !pred_src.is_subset(&gold_src) || !pred_tgt.is_subset(&gold_tgt) {
        return Err(Error::Eval(format!(
            "text {text_id}: predicted alignment uses sentence indices outside the gold text"
        )));
    }

    let gold_del_src: BTreeSet<usize> = gold.unaligned_src.iter().copied().collect();
    let gold_del_tgt: BTreeSet<usize> = gold.unaligned_tgt.iter().copied().collect();
    let pred_del_src: BTreeSet<usize> = pred.unaligned_src.iter().copied().collect();
    let pred_del_tgt: BTreeSet<usize> = pred.unaligned_tgt.iter().copied().collect();

    let mut predicted = pred.groups.len();
    let mut correct = pred
        .groups
        .iter()
        .filter(|g| group_correct(g, &gold.groups, partial_credit))
        .count();
    predicted += pred_del_src.len() + pred_del_tgt.len();
    correct += pred_del_src.intersection(&gold_del_src).count();
    correct += pred_del_tgt.intersection(&gold_del_tgt).count();

    let mut gold_groups = gold.groups.len();
    let mut covered = gold
        .groups
        .iter()
        .filter(|g| group_correct(g, &pred.groups, partial_credit))
        .count();
    gold_groups += gold_del_src.len() + gold_del_tgt.len();
    covered += gold_del_src.intersection(&pred_del_src).count();
    covered += gold_del_tgt.intersection(&pred_del_tgt).count();

    Ok(TextEval {
        text_id: text_id.to_string(),
        predicted,
        correct,
        gold_groups,
        covered_gold: covered,
    })
}

/// Histogram row: texts whose error percentage falls in `[low, high)`,
/// the final bucket closed at 100.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramRow {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Bucket per-text error percentages over `[0, 100]`.
pub fn error_histogram(records: &[TextEval], bucket_width: f64) -> Result<Vec<HistogramRow>> {
    if records.is_empty() {
        return Err(Error::Eval("no reports to histogram".to_string()));
    }
    if !(bucket_width > 0.0) || bucket_width > 100.0 {
        return Err(Error::InvalidConfig(format!(
            "bucket width must be in (0, 100], got {bucket_width}"
        )));
    }
    let buckets = (100.0 / bucket_width).ceil() as usize;
    let mut rows: Vec<HistogramRow> = (0..buckets)
        .map(|i| HistogramRow {
            low: i as f64 * bucket_width,
            high: ((i + 1) as f64 * bucket_width).min(100.0),
            count: 0,
        })
        .collect();
    for r in records {
        let err = r.error_pct().clamp(0.0, 100.0);
        let mut bucket = (err / bucket_width).floor() as usize;
        if bucket >= buckets {
            bucket = buckets - 1;
        }
        rows[bucket].count += 1;
    }
    Ok(rows)
}

/// Comparison row for two aligner runs over the same texts.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub text_id: String,
    pub precision_a: f64,
    pub precision_b: f64,
}

/// Join two report sets on text id, sorted by the second aligner's
/// precision ascending (ties by id) so the weakest texts for B lead.
pub fn compare_aligners(a: &[TextEval], b: &[TextEval]) -> Result<Vec<CompareRow>> {
    let ids_a: BTreeSet<&str> = a.iter().map(|r| r.text_id.as_str()).collect();
    let ids_b: BTreeSet<&str> = b.iter().map(|r| r.text_id.as_str()).collect();
    if ids_a != ids_b {
        return Err(Error::Eval(
            "compared reports cover different text ids".to_string(),
        ));
    }
    if ids_a.len() != a.len() || ids_b.len() != b.len() {
        return Err(Error::Eval("duplicate text ids in a report".to_string()));
    }
    let mut rows: Vec<CompareRow> = a
        .iter()
        .map(|ra| {
            let rb = b.iter().find(|r| r.text_id == ra.text_id).unwrap();
            CompareRow {
                text_id: ra.text_id.clone(),
                precision_a: ra.precision(),
                precision_b: rb.precision(),
            }
        })
        .collect();
    rows.sort_by(|x, y| {
        x.precision_b
            .total_cmp(&y.precision_b)
            .then_with(|| x.text_id.cmp(&y.text_id))
    });
    Ok(rows)
}

/// One plottable alignment-path row; `None` marks the deleted side.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub src: Option<usize>,
    pub tgt: Option<f64>,
}

/// Flatten an alignment into path rows: one row per source sentence with
/// the centroid of its target group, deletions with an empty field.
pub fn export_path(alignment: &Alignment) -> Vec<PathRow> {
    let mut rows = Vec::new();
    for g in &alignment.groups {
        let centroid = g.tgt.iter().sum::<usize>() as f64 / g.tgt.len() as f64;
        for &i in &g.src {
            rows.push(PathRow {
                src: Some(i),
                tgt: Some(centroid),
            });
        }
    }
    for &i in &alignment.unaligned_src {
        rows.push(PathRow {
            src: Some(i),
            tgt: None,
        });
    }
    // source indices are unique across groups and deletions
    rows.sort_by(|a, b| a.src.cmp(&b.src));
    for &j in &alignment.unaligned_tgt {
        rows.push(PathRow {
            src: None,
            tgt: Some(j as f64),
        });
    }
    rows
}

fn fmt_f64(x: f64) -> String {
    // trims trailing zeros: 9 -> "9", 9.5 -> "9.5"
    format!("{x}")
}

pub fn report_csv(records: &[TextEval]) -> String {
    let mut out = String::from("text_id,predicted,correct,precision,error_pct,recall,gold\n");
    let mut sorted: Vec<&TextEval> = records.iter().collect();
    sorted.sort_by(|a, b| a.text_id.cmp(&b.text_id));
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{}\n",
            r.text_id,
            r.predicted,
            r.correct,
            r.precision(),
            r.error_pct(),
            r.recall(),
            r.gold_groups
        ));
    }
    out
}

pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut out = String::from("bucket_low,bucket_high,text_count\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.low),
            fmt_f64(row.high),
            row.count
        ));
    }
    out
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("text_id,precision_a,precision_b\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.4},{:.4}\n",
            row.text_id, row.precision_a, row.precision_b
        ));
    }
    out
}

pub fn path_csv(rows: &[PathRow]) -> String {
    let mut out = String::from("src_index,tgt_index\n");
    for row in rows {
        let src = row.src.map(|i| i.to_string()).unwrap_or_default();
        let tgt = row.tgt.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!("{src},{tgt}\n"));
    }
    out
}

/// Parse a report CSV back into records (used by the compare command).
pub fn parse_report_csv(content: &str, label: impl Into<std::path::PathBuf>) -> Result<Vec<TextEval>> {
    let label = label.into();
    let mut records = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::format(&label, lineno + 1, "expected 7 columns"));
        }
        let parse_count = |s: &str| -> Result<usize> {
            s.trim()
                .parse()
                .map_err(|_| Error::format(&label, lineno + 1, format!("bad count `{s}`")))
        };
        records.push(TextEval {
            text_id: fields[0].trim().to_string(),
            predicted: parse_count(fields[1])?,
            correct: parse_count(fields[2])?,
            gold_groups: parse_count(fields[6])?,
            covered_gold: 0, // recall columns are derived, not round-tripped
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aligner::AlignGroup;

    fn one_one(pairs: &[(usize, usize)]) -> Alignment {
        Alignment {
            groups: pairs
                .iter()
                .map(|&(a, b)| AlignGroup::one_one(a, b, 1.0))
                .collect(),
            unaligned_src: vec![],
            unaligned_tgt: vec![],
        }
    }

    #[test]
    fn identical_alignments_score_perfectly() {
        let gold = one_one(&[(0, 0), (1, 1)]);
        let eval = score_alignment("t", &gold, &gold, false).unwrap();
        assert_eq!(eval.precision(), 1.0);
        assert_eq!(eval.recall(), 1.0);
        assert_eq!(eval.error_pct(), 0.0);
    }

    #[test]
    fn worked_example_pairs_score_two_of_two() {
        let pred = Alignment {
            groups: vec![AlignGroup::one_one(2, 0, 0.75), AlignGroup::one_one(3, 1, 0.25)],
            unaligned_src: vec![0, 1],
            unaligned_tgt: vec![],
        };
        let eval = score_alignment("t", &pred, &pred.clone(), false).unwrap();
        assert_eq!(eval.predicted, 4);
        assert_eq!(eval.correct, 4);
    }

    #[test]
    fn partial_credit_splits_from_strict() {
        let pred = one_one(&[(0, 0)]);
        let gold = Alignment {
            groups: vec![AlignGroup {
                src: vec![0, 1],
                tgt: vec![0],
                score: 1.0,
            }],
            unaligned_src: vec![],
            unaligned_tgt: vec![],
        };
        let strict = score_alignment("t", &pred, &gold, false).unwrap();
        assert_eq!((strict.correct, strict.predicted), (0, 1));
        let partial = score_alignment("t", &pred, &gold, true).unwrap();
        assert_eq!((partial.correct, partial.predicted), (1, 1));
    }

    #[test]
    fn deletions_compare_by_side_and_index() {
        let pred = Alignment {
            groups: vec![],
            unaligned_src: vec![3],
            unaligned_tgt: vec![],
        };
        let mut gold = pred.clone();
        let eval = score_alignment("t", &pred, &gold, false).unwrap();
        assert_eq!(eval.correct, 1);
        gold.unaligned_src = vec![];
        gold.unaligned_tgt = vec![3];
        let err = score_alignment("t", &pred, &gold, false);
        assert!(err.is_err(), "src index 3 does not exist in gold universe");
    }

    #[test]
    fn out_of_range_prediction_is_an_error() {
        let pred = one_one(&[(5, 5)]);
        let gold = one_one(&[(0, 0)]);
        assert!(score_alignment("t", &pred, &gold, false).is_err());
    }

    #[test]
    fn strict_precision_never_exceeds_partial() {
        let pred = Alignment {
            groups: vec![
                AlignGroup::one_one(0, 0, 1.0),
                AlignGroup {
                    src: vec![1, 2],
                    tgt: vec![1],
                    score: 1.0,
                },
            ],
            unaligned_src: vec![3],
            unaligned_tgt: vec![],
        };
        let gold = Alignment {
            groups: vec![
                AlignGroup::one_one(0, 0, 1.0),
                AlignGroup::one_one(1, 1, 1.0),
            ],
            unaligned_src: vec![2, 3],
            unaligned_tgt: vec![],
        };
        let strict = score_alignment("t", &pred, &gold, false).unwrap();
        let partial = score_alignment("t", &pred, &gold, true).unwrap();
        assert!(strict.precision() <= partial.precision());
    }

    #[test]
    fn micro_average_reproduces_published_totals() {
        let records = vec![TextEval {
            text_id: "all".into(),
            predicted: 3021,
            correct: 2849,
            gold_groups: 3021,
            covered_gold: 2849,
        }];
        let summary = aggregate(&records);
        let precision = summary.precision();
        assert!((precision - 2849.0 / 3021.0).abs() < 1e-12);
        assert_eq!(format!("{:.1}%", precision * 100.0), "94.3%");
    }

    #[test]
    fn histogram_buckets_cover_the_range() {
        let perfect = TextEval {
            text_id: "a".into(),
            predicted: 10,
            correct: 10,
            gold_groups: 10,
            covered_gold: 10,
        };
        let rows = error_histogram(&[perfect.clone(), perfect], 5.0).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].count, 2);
        assert!(rows[1..].iter().all(|r| r.count == 0));
        assert!(error_histogram(&[], 5.0).is_err());
    }

    #[test]
    fn full_error_lands_in_last_bucket() {
        let bad = TextEval {
            text_id: "a".into(),
            predicted: 10,
            correct: 0,
            gold_groups: 10,
            covered_gold: 0,
        };
        let rows = error_histogram(&[bad], 30.0).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.last().unwrap().count, 1);
        assert_eq!(rows.last().unwrap().high, 100.0);
    }

    #[test]
    fn compare_sorts_by_second_aligner() {
        let rec = |id: &str, correct: usize| TextEval {
            text_id: id.into(),
            predicted: 10,
            correct,
            gold_groups: 10,
            covered_gold: correct,
        };
        let a = vec![rec("x", 10), rec("y", 10)];
        let b = vec![rec("x", 9), rec("y", 5)];
        let rows = compare_aligners(&a, &b).unwrap();
        assert_eq!(rows[0].text_id, "y");
        assert_eq!(rows[1].text_id, "x");
        assert!((rows[0].precision_a - 1.0).abs() < 1e-12);

        let disjoint = vec![rec("z", 1)];
        assert!(compare_aligners(&a, &disjoint).is_err());
    }

    #[test]
    fn path_rows_for_diagonal_and_deletions() {
        let alignment = one_one(&[(0, 0), (1, 1), (2, 2)]);
        let rows = export_path(&alignment);
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.src, Some(i));
            assert_eq!(row.tgt, Some(i as f64));
        }

        let with_del = Alignment {
            groups: vec![AlignGroup::one_one(0, 0, 1.0)],
            unaligned_src: vec![16, 17, 18, 19],
            unaligned_tgt: vec![],
        };
        let rows = export_path(&with_del);
        let deleted: Vec<&PathRow> = rows.iter().filter(|r| r.tgt.is_none()).collect();
        assert_eq!(deleted.len(), 4);
        let csv = path_csv(&rows);
        assert!(csv.contains("16,\n"));

        assert_eq!(path_csv(&[]), "src_index,tgt_index\n");
    }

    #[test]
    fn centroid_of_one_many_groups() {
        let alignment = Alignment {
            groups: vec![AlignGroup {
                src: vec![4],
                tgt: vec![2, 3],
                score: 1.0,
            }],
            unaligned_src: vec![],
            unaligned_tgt: vec![],
        };
        let rows = export_path(&alignment);
        assert_eq!(rows[0].tgt, Some(2.5));
        assert_eq!(path_csv(&rows), "src_index,tgt_index\n4,2.5\n");
    }

    #[test]
    fn report_csv_roundtrips_counts() {
        let records = vec![TextEval {
            text_id: "007".into(),
            predicted: 21,
            correct: 20,
            gold_groups: 21,
            covered_gold: 20,
        }];
        let csv = report_csv(&records);
        let parsed = parse_report_csv(&csv, "t").unwrap();
        assert_eq!(parsed[0].text_id, "007");
        assert_eq!(parsed[0].predicted, 21);
        assert_eq!(parsed[0].correct, 20);
    }
}
