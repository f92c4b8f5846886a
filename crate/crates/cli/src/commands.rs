use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use acueval::dataset::{
    dataset_stats, load_dataset, load_examples, load_score_matrix, write_score_csv, Dataset,
};
use acueval::metaeval::{
    self, acu_quality, candidate_similarity, histogram, mean_quality, AcuQuality, BenchmarkConfig,
    Coefficient,
};
use acueval::pipeline::corpus::shared_systems;
use acueval::pipeline::{score_corpus, CorpusOptions, Direction};
use acueval::pretrain::{
    build_corpus, parse_candidates, write_shards, CandidateSet, PretrainScorer, TwoStageBackends,
};
use acueval::{EvalExample, ScoreMatrix};
use serde::{Deserialize, Serialize};

use crate::args::{
    BenchmarkArgs, CheckerKind, ExtractorKind, PretrainArgs, QualityArgs, ScoreArgs, SimArgs,
    StatsArgs,
};
use crate::backends;
use crate::{CliResult, Failure};

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_jsonl<T: Serialize>(dir: &Path, name: &str, items: &[T]) -> CliResult {
    let mut w = create(dir, name)?;
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_matrix(dir: &Path, name: &str, m: &ScoreMatrix) -> CliResult {
    let mut w = create(dir, name)?;
    write_score_csv(m, &mut w)?;
    w.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> CliResult {
    let s = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    println!("{s}");
    Ok(())
}

pub fn stats(args: StatsArgs) -> CliResult {
    #[derive(Serialize)]
    struct MatrixStats {
        n_docs: usize,
        n_systems: usize,
        n_summaries: usize,
    }
    match load_dataset(&args.data.dataset, args.data.format)? {
        Dataset::Examples(ds) => print_json(&dataset_stats(&ds)),
        Dataset::Matrix(m) => print_json(&MatrixStats {
            n_docs: m.n_docs(),
            n_systems: m.n_systems(),
            n_summaries: m.n_docs() * m.n_systems(),
        }),
    }
}

fn examples(path: &Path, format: acueval::dataset::DatasetFormat) -> CliResult<Vec<EvalExample>> {
    Ok(load_examples(path, format)?)
}

pub fn score(args: ScoreArgs) -> CliResult {
    let ds = examples(&args.data.dataset, args.data.format)?;
    let systems = shared_systems(&ds)?;
    let extractor = backends::extractor(&args.backends, Some(&ds))?;
    let checker = backends::checker(&args.backends, Some(&ds))?;
    let one_stage = if args.one_stage {
        Some(backends::client(&args.backends)?)
    } else {
        None
    };
    if args.workers == Some(0) {
        return Err(Failure::Usage("--workers must be positive".into()));
    }
    if args.dry_run {
        eprintln!(
            "dry run: {} examples x {} systems, extractor {}, checker {}",
            ds.len(),
            systems.len(),
            extractor.name(),
            checker.name()
        );
        return Ok(());
    }
    let direction: Direction = args.direction.into();
    let options = CorpusOptions {
        direction,
        aggregation: args.aggregation.into(),
        workers: args.workers,
    };
    let mut scores = score_corpus(&ds, extractor.as_ref(), checker.as_ref(), &options)?;

    let mut one_stage_matrix = None;
    if let Some(client) = one_stage {
        let dir = match direction {
            Direction::Recall => "recall",
            Direction::F1 => "f1",
        };
        let started = Instant::now();
        let mut rows = Vec::with_capacity(ds.len());
        for ex in &ds {
            let row = systems
                .iter()
                .map(|s| client.score(&ex.candidates[s], &ex.reference, dir))
                .collect::<acueval::Result<Vec<f64>>>()?;
            rows.push(row);
        }
        scores.timing.one_stage = Some(started.elapsed());
        let ids = ds.iter().map(|e| e.example_id.clone()).collect();
        one_stage_matrix = Some(ScoreMatrix::new(ids, systems.clone(), rows)?);
    }

    write_matrix(&args.out_dir, "scores.csv", &scores.matrix)?;
    write_jsonl(&args.out_dir, "audit.jsonl", &scores.audit)?;
    write_json(&args.out_dir, "timing.json", &scores.timing)?;
    if let Some(m) = &one_stage_matrix {
        write_matrix(&args.out_dir, "one_stage.csv", m)?;
    }
    eprintln!(
        "scored {} cells ({} units) in {:.3}s extraction + {:.3}s checking",
        scores.matrix.n_docs() * scores.matrix.n_systems(),
        scores.timing.checked_units,
        scores.timing.extraction.as_secs_f64(),
        scores.timing.checking.as_secs_f64()
    );
    Ok(())
}

pub fn benchmark(args: BenchmarkArgs) -> CliResult {
    let human = load_score_matrix(&args.human)?;
    let mut metrics = Vec::with_capacity(args.metrics.len());
    for (name, path) in &args.metrics {
        if metrics.iter().any(|(n, _)| n == name) {
            return Err(Failure::Usage(format!("metric `{name}` given twice")));
        }
        let m = load_score_matrix(path)?;
        m.aligned_to(&human).map_err(|e| {
            acueval::Error::Alignment(format!("metric `{name}` ({}): {e}", path.display()))
        })?;
        metrics.push((name.clone(), m));
    }
    if let Some(b) = &args.baseline {
        if !metrics.iter().any(|(n, _)| n == b) {
            return Err(Failure::Usage(format!(
                "baseline `{b}` is not one of the metrics"
            )));
        }
    }
    if args.dry_run {
        eprintln!(
            "dry run: {} docs x {} systems, {} metrics",
            human.n_docs(),
            human.n_systems(),
            metrics.len()
        );
        return Ok(());
    }
    let config = BenchmarkConfig {
        coefficients: if args.coefficients.is_empty() {
            vec![Coefficient::KendallB]
        } else {
            args.coefficients
        },
        baseline: args.baseline,
        resamples: args.resamples,
        seed: args.seed,
        alpha: args.alpha,
    };
    let report = metaeval::benchmark(&human, &metrics, &config)?;
    let mut w = create(&args.out_dir, "report.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    write_json(&args.out_dir, "report.json", &report)?;
    let table = report.render_table();
    let mut t = create(&args.out_dir, "report.txt")?;
    t.write_all(table.as_bytes())?;
    t.flush()?;
    print!("{table}");
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QualityLine {
    example_id: String,
    generated: Vec<String>,
    reference: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ExampleQuality {
    example_id: String,
    #[serde(flatten)]
    quality: AcuQuality,
}

#[derive(Debug, Serialize)]
struct QualityReport {
    matcher: acueval::metaeval::Matcher,
    /// Percentages.
    corpus: AcuQuality,
    examples: Vec<ExampleQuality>,
}

fn json_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| acueval::Error::Parse {
            line: i + 1,
            field: "<record>".into(),
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    if out.is_empty() {
        return Err(acueval::Error::Validation(format!("{}: no records", path.display())).into());
    }
    Ok(out)
}

pub fn quality(args: QualityArgs) -> CliResult {
    let lines: Vec<QualityLine> = json_lines(&args.input)?;
    let mut examples = Vec::with_capacity(lines.len());
    for l in &lines {
        let q = acu_quality(&l.generated, &l.reference, args.matcher)
            .map_err(|e| acueval::Error::Validation(format!("example `{}`: {e}", l.example_id)))?;
        examples.push(ExampleQuality {
            example_id: l.example_id.clone(),
            quality: q,
        });
    }
    if args.dry_run {
        eprintln!("dry run: {} examples", examples.len());
        return Ok(());
    }
    let per: Vec<AcuQuality> = examples.iter().map(|e| e.quality).collect();
    let corpus = mean_quality(&per)?.percent();
    for e in &mut examples {
        e.quality = e.quality.percent();
    }
    let report = QualityReport {
        matcher: args.matcher,
        corpus,
        examples,
    };
    write_json(&args.out_dir, "quality.json", &report)?;
    println!(
        "precision {:.2}  recall {:.2}  f1 {:.2}",
        corpus.precision, corpus.recall, corpus.f1
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceLine {
    example_id: String,
    source: String,
    reference: String,
}

pub fn gen_pretrain(args: PretrainArgs) -> CliResult {
    if args.shard_size == 0 {
        return Err(Failure::Usage("--shard-size must be positive".into()));
    }
    let two_stage = args.scorer == PretrainScorer::TwoStage;
    if two_stage
        && (args.backends.extractor == ExtractorKind::Gold
            || args.backends.checker == CheckerKind::Cached)
    {
        return Err(Failure::Usage(
            "gen-pretrain supports sentence, fixture or remote extractors and lexical or remote checkers".into(),
        ));
    }
    let (extractor, checker) = if two_stage {
        (
            Some(backends::extractor(&args.backends, None)?),
            Some(backends::checker(&args.backends, None)?),
        )
    } else {
        (None, None)
    };

    let set = match (&args.input, &args.sources) {
        (Some(path), _) => parse_candidates(BufReader::new(File::open(path)?))?,
        (None, Some(path)) => {
            let sources: Vec<SourceLine> = json_lines(path)?;
            if args.num_candidates == 0 {
                return Err(Failure::Usage("--num-candidates must be positive".into()));
            }
            let client = backends::client(&args.backends)?;
            if args.dry_run {
                eprintln!(
                    "dry run: {} sources, {} candidates each",
                    sources.len(),
                    args.num_candidates
                );
                return Ok(());
            }
            let mut set = CandidateSet::default();
            for s in sources {
                if set.references.contains_key(&s.example_id) {
                    return Err(acueval::Error::Validation(format!(
                        "duplicate example_id `{}`",
                        s.example_id
                    ))
                    .into());
                }
                let cands = client.generate(&s.source, args.num_candidates)?;
                set.candidates.insert(s.example_id.clone(), cands);
                set.references.insert(s.example_id, s.reference);
            }
            set
        }
        (None, None) => return Err(Failure::Usage("give --input or --sources".into())),
    };
    if args.dry_run {
        let n: usize = set.candidates.values().map(Vec::len).sum();
        eprintln!("dry run: {} examples, {n} candidates", set.candidates.len());
        return Ok(());
    }
    let b = match (&extractor, &checker) {
        (Some(e), Some(c)) => Some(TwoStageBackends {
            extractor: e.as_ref(),
            checker: c.as_ref(),
            aggregation: args.aggregation.into(),
        }),
        _ => None,
    };
    let records = build_corpus(&set.candidates, &set.references, args.scorer, b)?;
    let paths = write_shards(&records, &args.out_dir, args.shard_size)?;
    eprintln!("wrote {} records in {} shards", records.len(), paths.len());
    Ok(())
}

pub fn candidate_sim(args: SimArgs) -> CliResult {
    if args.bins == 0 {
        return Err(Failure::Usage("--bins must be positive".into()));
    }
    let ds = examples(&args.data.dataset, args.data.format)?;
    let dist = candidate_similarity(&ds)?;
    if args.dry_run {
        eprintln!("dry run: {} pairs", dist.pairs.len());
        return Ok(());
    }
    let bins = histogram(&dist.values(), args.bins)?;
    fs::create_dir_all(&args.out_dir)?;
    let mut w = create(&args.out_dir, "histogram.csv")?;
    writeln!(w, "lower,upper,count")?;
    for b in &bins {
        writeln!(w, "{:?},{:?},{}", b.lower, b.upper, b.count)?;
    }
    w.flush()?;
    write_jsonl(&args.out_dir, "pairs.jsonl", &dist.pairs)?;
    write_json(&args.out_dir, "summary.json", &dist.summary)?;
    let per_example: BTreeMap<&str, usize> = dist.pairs.iter().fold(BTreeMap::new(), |mut m, p| {
        *m.entry(p.example_id.as_str()).or_default() += 1;
        m
    });
    eprintln!(
        "{} pairs over {} examples, mean {:.4}",
        dist.pairs.len(),
        per_example.len(),
        dist.summary.mean
    );
    Ok(())
}
