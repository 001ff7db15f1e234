//! Command-line interface: one binary, six subcommands.
//!
//! `chunk` turns plain text into bracket notation, `align` runs the
//! lexical pipeline, `gc-align` the length baseline, `eval` scores
//! predictions against gold, `compare` joins two report files and `gen`
//! writes a synthetic corpus. `align`, `gc-align` and `eval` accept
//! either single files or directories of files paired by text id (the
//! stem after an alphabetic `prefix_`). Defaults can be overridden by a
//! `key = value` configuration file; explicit flags win over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::aligner::{align_texts, Alignment, AlignerConfig, PipelineOptions};
use crate::chunker::{chunk_text, ChunkRuleSet};
use crate::corpus::{self, Text};
use crate::evaluator::{self, TextEval};
use crate::gale_church::{align_gc, LengthModelParams};
use crate::many_many::ExtensionConfig;
use crate::matcher::{MatchResources, Stemmer, TransliterationTable};
use crate::syncorpus::{self, GenConfig};
use crate::{Error, Result};

#[derive(Parser)]
#[command(
    name = "chunkalign",
    version,
    about = "Bilingual sentence alignment from lexical chunk matching",
    after_help = "Exit codes: 0 success, 2 usage error, 3 I/O error, 4 format error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk a plain corpus into bracket notation
    Chunk(ChunkArgs),
    /// Align a source text with its translation using chunk matching
    Align(AlignArgs),
    /// Align using the character-length dynamic-programming baseline
    GcAlign(GcAlignArgs),
    /// Score predicted alignments against gold alignments
    Eval(EvalArgs),
    /// Join two evaluation reports into a comparison table
    Compare(CompareArgs),
    /// Generate a synthetic parallel corpus with gold alignments
    Gen(GenArgs),
}

#[derive(Args)]
struct ChunkArgs {
    /// Plain input corpus, one sentence per line
    #[arg(long)]
    input: PathBuf,
    /// Language tag selecting the built-in chunk rules (en, hi, syn)
    #[arg(long, default_value = "en")]
    lang: String,
    /// Chunk rules file overriding the built-in rules
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Output file in bracket notation
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    /// Source text: a file, or a directory of `*_<id>.txt` files
    #[arg(long)]
    source: PathBuf,
    /// Target text: a file, or a directory paired with --source by id
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value = "en")]
    source_lang: String,
    #[arg(long, default_value = "hi")]
    target_lang: String,
    /// Chunk rules file for the source language
    #[arg(long)]
    source_rules: Option<PathBuf>,
    /// Chunk rules file for the target language
    #[arg(long)]
    target_rules: Option<PathBuf>,
    /// Bilingual lexicon TSV: `source<TAB>t1|t2|...`
    #[arg(long)]
    lexicon: PathBuf,
    /// Optional target-target synonym TSV
    #[arg(long)]
    synonyms: Option<PathBuf>,
    /// Transliteration table TSV (default: built-in Devanagari)
    #[arg(long)]
    translit: Option<PathBuf>,
    /// Inputs are already chunked in bracket notation
    #[arg(long)]
    prechunked: bool,
    /// Minimum pair score kept as an alignment candidate
    #[arg(long)]
    threshold: Option<f64>,
    /// Candidate band half-width in sentences (default: no band)
    #[arg(long)]
    window: Option<f64>,
    /// Run both one-many extensions after the one-one pass
    #[arg(long)]
    many_many: bool,
    /// Run only the chunk-count extension
    #[arg(long)]
    extend_chunks: bool,
    /// Run only the rescoring extension
    #[arg(long)]
    extend_rescore: bool,
    /// Chunk-count imbalance bound for the extensions
    #[arg(long)]
    ratio_bound: Option<f64>,
    /// Output alignment TSV (file mode) or directory (directory mode)
    #[arg(long)]
    out: PathBuf,
    /// Parallel alignment jobs in directory mode
    #[arg(long)]
    jobs: Option<usize>,
    /// Key=value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GcAlignArgs {
    /// Source text: a file or a directory
    #[arg(long)]
    source: PathBuf,
    /// Target text: a file or a directory
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value = "en")]
    source_lang: String,
    #[arg(long, default_value = "hi")]
    target_lang: String,
    /// Inputs are in bracket notation
    #[arg(long)]
    prechunked: bool,
    /// Length-model parameter file (mean_ratio, variance, prior_* keys)
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output alignment TSV or directory
    #[arg(long)]
    out: PathBuf,
    /// Parallel alignment jobs in directory mode
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted alignment TSV, or a directory of them
    #[arg(long)]
    pred: PathBuf,
    /// Gold alignment TSV, or a directory paired with --pred by id
    #[arg(long)]
    gold: PathBuf,
    /// Count a predicted group as correct when it overlaps a gold group
    /// on both sides, instead of requiring identity
    #[arg(long)]
    partial_credit: bool,
    /// Directory receiving report.csv and histogram.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Histogram bucket width in error-percentage points
    #[arg(long, default_value_t = 5.0)]
    bucket_width: f64,
    /// Also write a path_<id>.csv step chart per text
    #[arg(long)]
    emit_paths: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// First report.csv (column precision_a)
    #[arg(long)]
    a: PathBuf,
    /// Second report.csv (column precision_b, sort key)
    #[arg(long)]
    b: PathBuf,
    /// Output compare.csv
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of text pairs to generate
    #[arg(long, default_value_t = 100)]
    texts: usize,
    /// Mean sentences per text
    #[arg(long, default_value_t = 21)]
    sentences_mean: usize,
    #[arg(long, default_value_t = 2)]
    chunks_min: usize,
    #[arg(long, default_value_t = 6)]
    chunks_max: usize,
    /// Synthetic vocabulary size (word pairs)
    #[arg(long, default_value_t = 300)]
    vocabulary: usize,
    /// Fraction of true word pairs kept in lexicon.tsv
    #[arg(long, default_value_t = 1.0)]
    coverage: f64,
    /// Probability that a source sentence has no translation
    #[arg(long, default_value_t = 0.0)]
    deletion_rate: f64,
    /// Probability that two adjacent source sentences merge
    #[arg(long, default_value_t = 0.0)]
    merge_rate: f64,
    /// Keep target chunks in source order
    #[arg(long)]
    no_reorder: bool,
    /// Probability of filler postpositions per target chunk
    #[arg(long, default_value_t = 0.5)]
    filler_rate: f64,
    /// Leading source sentences deleted in every text
    #[arg(long, default_value_t = 0)]
    burst: usize,
    /// Output directory
    #[arg(long)]
    out_dir: PathBuf,
}

/// Entry point; clap handles usage errors itself (exit 2).
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Chunk(args) => cmd_chunk(args),
        Command::Align(args) => cmd_align(args),
        Command::GcAlign(args) => cmd_gc_align(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn exists_or_err(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ))
    }
}

/// Write through a temp file and rename, so partial output never lands
/// under the final name.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, content).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `key = value` configuration file, `#` comments allowed.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let content = crate::read_utf8(path)?;
    let mut map = BTreeMap::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::format(path, lineno + 1, "expected `key = value`")
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad value for `{key}`: {v}")))
        })
        .transpose()
}

fn config_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    map.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad value for `{key}`: {v}")))
        })
        .transpose()
}

fn rules_for(language: &str, file: Option<&PathBuf>) -> Result<ChunkRuleSet> {
    match file {
        Some(path) => ChunkRuleSet::load(path),
        None => ChunkRuleSet::builtin(language),
    }
}

/// Text id of a corpus/alignment file: the stem, with one leading
/// alphabetic `prefix_` stripped (`gold_007` and `src_007` both map to
/// `007`).
fn text_id(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    match stem.split_once('_') {
        Some((prefix, rest))
            if !prefix.is_empty()
                && !rest.is_empty()
                && prefix.chars().all(|c| c.is_ascii_alphabetic()) =>
        {
            rest.to_string()
        }
        _ => stem.to_string(),
    }
}

/// Map of text id to file path for every file in `dir` with the given
/// extension.
fn discover(dir: &Path, extension: &str) -> Result<BTreeMap<String, PathBuf>> {
    let mut map = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some(extension) {
            continue;
        }
        let id = text_id(&path);
        if let Some(previous) = map.insert(id.clone(), path.clone()) {
            return Err(Error::InvalidConfig(format!(
                "text id `{id}` is ambiguous: {} and {}",
                previous.display(),
                path.display()
            )));
        }
    }
    Ok(map)
}

/// Pair source and target files by id when both paths are directories;
/// single files form one pair with an id derived from the source name.
fn pair_inputs(
    source: &Path,
    target: &Path,
) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    exists_or_err(source)?;
    exists_or_err(target)?;
    if source.is_dir() != target.is_dir() {
        return Err(Error::InvalidConfig(
            "--source and --target must both be files or both be directories".to_string(),
        ));
    }
    if !source.is_dir() {
        return Ok(vec![(
            text_id(source),
            source.to_path_buf(),
            target.to_path_buf(),
        )]);
    }
    let sources = discover(source, "txt")?;
    let targets = discover(target, "txt")?;
    let mut pairs = Vec::new();
    for (id, src_path) in sources {
        let tgt_path = targets.get(&id).ok_or_else(|| {
            Error::InvalidConfig(format!("no target file for text id `{id}`"))
        })?;
        pairs.push((id, src_path, tgt_path.clone()));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no .txt files found in {}",
            source.display()
        )));
    }
    Ok(pairs)
}

fn load_side(path: &Path, language: &str, rules: &ChunkRuleSet, prechunked: bool) -> Result<Text> {
    if prechunked {
        corpus::parse_prechunked(path, language, rules)
    } else {
        let mut text = corpus::load_text(path, language, rules)?;
        chunk_text(&mut text, rules);
        Ok(text)
    }
}

/// Run `work` over the pairs, optionally across a rayon pool, writing
/// one output file per text id into `out` (directory mode) or to `out`
/// itself (single pair).
fn run_pairs<F>(
    pairs: Vec<(String, PathBuf, PathBuf)>,
    out: &Path,
    jobs: Option<usize>,
    work: F,
) -> Result<()>
where
    F: Fn(&Path, &Path) -> Result<Alignment> + Sync,
{
    let single = pairs.len() == 1 && !out.is_dir() && out.extension().is_some();
    if single {
        let (_, src, tgt) = &pairs[0];
        let alignment = work(src, tgt)?;
        return write_atomic(out, &alignment.to_tsv_string());
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let one = |(id, src, tgt): &(String, PathBuf, PathBuf)| -> Result<()> {
        let alignment = work(src, tgt)?;
        write_atomic(&out.join(format!("{id}.tsv")), &alignment.to_tsv_string())
    };
    match jobs {
        Some(n) if n > 1 => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
            pool.install(|| pairs.par_iter().map(one).collect::<Result<Vec<()>>>())?;
        }
        _ => {
            for pair in &pairs {
                one(pair)?;
            }
        }
    }
    Ok(())
}

fn cmd_chunk(args: ChunkArgs) -> Result<()> {
    let rules = rules_for(&args.lang, args.rules.as_ref())?;
    let mut text = corpus::load_text(&args.input, &args.lang, &rules)?;
    chunk_text(&mut text, &rules);
    write_atomic(&args.out, &corpus::text_to_bracket_string(&text))
}

fn cmd_align(args: AlignArgs) -> Result<()> {
    for path in [Some(&args.lexicon), args.synonyms.as_ref(), args.translit.as_ref()]
        .into_iter()
        .flatten()
    {
        exists_or_err(path)?;
    }
    let config = match args.config.as_ref() {
        Some(path) => load_config(path)?,
        None => BTreeMap::new(),
    };

    let threshold = args
        .threshold
        .or(config_f64(&config, "threshold")?)
        .unwrap_or(0.1);
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be greater than 0, got {threshold}"
        )));
    }
    let window = args.window.or(config_f64(&config, "window")?);
    let ratio_bound = args
        .ratio_bound
        .or(config_f64(&config, "ratio_bound")?)
        .unwrap_or(1.5);
    if !(ratio_bound > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "ratio bound must exceed 1, got {ratio_bound}"
        )));
    }
    let jobs = args.jobs.or(config_usize(&config, "jobs")?);

    let src_rules = rules_for(&args.source_lang, args.source_rules.as_ref())?;
    let tgt_rules = rules_for(&args.target_lang, args.target_rules.as_ref())?;

    let mut resources = MatchResources {
        lexicon: corpus::load_lexicon(&args.lexicon)?,
        synonyms: Default::default(),
        translit: TransliterationTable::devanagari(),
        src_stemmer: Stemmer::for_language(&args.source_lang),
        tgt_stemmer: Stemmer::for_language(&args.target_lang),
    };
    if let Some(path) = args.synonyms.as_ref() {
        resources.synonyms = corpus::load_synonyms(path)?;
    }
    if let Some(path) = args.translit.as_ref() {
        resources.translit = TransliterationTable::load(path)?;
    }

    let opts = PipelineOptions {
        aligner: AlignerConfig { threshold, window },
        extension: ExtensionConfig { ratio_bound },
        extend_chunk_counts: args.many_many || args.extend_chunks,
        extend_rescoring: args.many_many || args.extend_rescore,
    };

    let pairs = pair_inputs(&args.source, &args.target)?;
    run_pairs(pairs, &args.out, jobs, |src_path, tgt_path| {
        let src = load_side(src_path, &args.source_lang, &src_rules, args.prechunked)?;
        let tgt = load_side(tgt_path, &args.target_lang, &tgt_rules, args.prechunked)?;
        Ok(align_texts(&src, &tgt, &resources, &opts))
    })
}

fn gc_params(path: Option<&PathBuf>) -> Result<LengthModelParams> {
    let Some(path) = path else {
        return Ok(LengthModelParams::default());
    };
    let map = load_config(path)?;
    let defaults = [0.89, 0.00495, 0.00495, 0.0445, 0.0445, 0.011];
    let keys = [
        "prior_1_1",
        "prior_1_0",
        "prior_0_1",
        "prior_2_1",
        "prior_1_2",
        "prior_2_2",
    ];
    let mut priors = defaults;
    for (slot, key) in priors.iter_mut().zip(keys) {
        if let Some(v) = config_f64(&map, key)? {
            *slot = v;
        }
    }
    LengthModelParams::new(
        config_f64(&map, "mean_ratio")?.unwrap_or(1.0),
        config_f64(&map, "variance")?.unwrap_or(6.8),
        priors,
    )
}

fn cmd_gc_align(args: GcAlignArgs) -> Result<()> {
    let params = gc_params(args.params.as_ref())?;
    params.validate()?;
    let src_rules = rules_for(&args.source_lang, None)?;
    let tgt_rules = rules_for(&args.target_lang, None)?;
    let pairs = pair_inputs(&args.source, &args.target)?;
    run_pairs(pairs, &args.out, args.jobs, |src_path, tgt_path| {
        // chunking is irrelevant here; only character lengths matter
        let src = load_side(src_path, &args.source_lang, &src_rules, args.prechunked)?;
        let tgt = load_side(tgt_path, &args.target_lang, &tgt_rules, args.prechunked)?;
        Ok(align_gc(&src, &tgt, &params))
    })
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    exists_or_err(&args.pred)?;
    exists_or_err(&args.gold)?;
    if args.pred.is_dir() != args.gold.is_dir() {
        return Err(Error::InvalidConfig(
            "--pred and --gold must both be files or both be directories".to_string(),
        ));
    }
    let pairs: Vec<(String, PathBuf, PathBuf)> = if args.pred.is_dir() {
        let preds = discover(&args.pred, "tsv")?;
        let golds = discover(&args.gold, "tsv")?;
        let mut pairs = Vec::new();
        for (id, pred_path) in preds {
            let gold_path = golds
                .get(&id)
                .ok_or_else(|| Error::Eval(format!("no gold alignment for text id `{id}`")))?;
            pairs.push((id, pred_path, gold_path.clone()));
        }
        if pairs.is_empty() {
            return Err(Error::Eval(format!(
                "no .tsv files found in {}",
                args.pred.display()
            )));
        }
        pairs
    } else {
        vec![(
            text_id(&args.pred),
            args.pred.clone(),
            args.gold.clone(),
        )]
    };

    let mut records: Vec<TextEval> = Vec::new();
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    for (id, pred_path, gold_path) in &pairs {
        let pred = Alignment::load_tsv(pred_path)?;
        let gold = Alignment::load_tsv(gold_path)?;
        records.push(evaluator::score_alignment(
            id,
            &pred,
            &gold,
            args.partial_credit,
        )?);
        if args.emit_paths {
            let rows = evaluator::export_path(&pred);
            write_atomic(
                &args.out_dir.join(format!("path_{id}.csv")),
                &evaluator::path_csv(&rows),
            )?;
        }
    }

    write_atomic(
        &args.out_dir.join("report.csv"),
        &evaluator::report_csv(&records),
    )?;
    let histogram = evaluator::error_histogram(&records, args.bucket_width)?;
    write_atomic(
        &args.out_dir.join("histogram.csv"),
        &evaluator::histogram_csv(&histogram),
    )?;

    let summary = evaluator::aggregate(&records);
    println!(
        "precision={:.4} recall={:.4} predicted={} correct={} gold={} texts={}",
        summary.precision(),
        summary.recall(),
        summary.predicted,
        summary.correct,
        summary.gold_groups,
        summary.texts
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let a = evaluator::parse_report_csv(&crate::read_utf8(&args.a)?, &args.a)?;
    let b = evaluator::parse_report_csv(&crate::read_utf8(&args.b)?, &args.b)?;
    let rows = evaluator::compare_aligners(&a, &b)?;
    write_atomic(&args.out, &evaluator::compare_csv(&rows))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let cfg = GenConfig {
        seed: args.seed,
        texts: args.texts,
        sentences_mean: args.sentences_mean,
        chunks_min: args.chunks_min,
        chunks_max: args.chunks_max,
        vocabulary: args.vocabulary,
        coverage: args.coverage,
        deletion_rate: args.deletion_rate,
        merge_rate: args.merge_rate,
        reorder: !args.no_reorder,
        filler_rate: args.filler_rate,
        leading_deletions: args.burst,
        ..GenConfig::default()
    };
    let corpus = syncorpus::generate(&cfg)?;
    syncorpus::write_corpus(&corpus, &args.out_dir)?;
    println!(
        "wrote {} text pairs to {} (lexicon {} of {} entries)",
        corpus.texts.len(),
        args.out_dir.display(),
        corpus.lexicon.len(),
        corpus.full_lexicon.len()
    );
    Ok(())
}

/// CLI exit code for an error (usage errors are handled by clap itself).
pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Io { .. } | Error::InvalidUtf8 { .. } => 3,
        Error::InvalidConfig(_) => 2,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_ids_strip_alphabetic_prefixes() {
        assert_eq!(text_id(Path::new("/x/gold_007.tsv")), "007");
        assert_eq!(text_id(Path::new("src_007.txt")), "007");
        assert_eq!(text_id(Path::new("007.tsv")), "007");
        assert_eq!(text_id(Path::new("2_pass.tsv")), "2_pass");
    }

    #[test]
    fn config_parsing_and_precedence_types() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg");
        std::fs::write(&path, "# comment\nthreshold = 0.25\njobs = 4\n").unwrap();
        let map = load_config(&path).unwrap();
        assert_eq!(config_f64(&map, "threshold").unwrap(), Some(0.25));
        assert_eq!(config_usize(&map, "jobs").unwrap(), Some(4));
        assert_eq!(config_f64(&map, "window").unwrap(), None);
        assert!(config_usize(&map, "threshold").is_err());
    }
}
