use std::path::Path;

use litcat::evaluation::{evaluate, Benchmark, EvalInputs, SystemResults};
use litcat::harmonization::{Gazetteer, LinkStatus};
use litcat::pipeline::{eval_records, Pipeline, RunManifest, RunOptions, Stage, State};
use litcat::providers::config::{ProviderConfig, Profile};
use litcat::synthetic::write_corpus;

fn run(corpus: &Path, out: &Path, resume: bool) -> Pipeline {
    let providers = ProviderConfig::load(&corpus.join("providers.toml")).unwrap().build(Profile::Offline).unwrap();
    let mut opts = RunOptions::new(out);
    opts.input = Some(corpus.to_path_buf());
    opts.jobs = 4;
    opts.resume = resume;
    let p = Pipeline::new(opts, providers).unwrap();
    p.run_all().unwrap();
    p
}

#[test]
fn full_run_meets_recall_targets() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus).unwrap();
    let out = tmp.path().join("run");
    let started = std::time::Instant::now();
    let p = run(&corpus, &out, false);

    let m = RunManifest::load(&out).unwrap();
    assert_eq!(m.articles.len(), 20);
    assert_eq!(m.count(Stage::Gate, State::Excluded), 2);
    assert_eq!(m.count(Stage::Extract, State::Empty), 1);
    assert_eq!(m.count(Stage::Index, State::Done), 17);

    let catalog = p.open_catalog().unwrap();
    // 26 gold minus the split one plus its two halves
    assert_eq!(catalog.len(), 27);
    let statuses: Vec<LinkStatus> = catalog.snapshot().entries().map(|e| e.link_status).collect();
    assert_eq!(statuses.iter().filter(|s| **s == LinkStatus::VerifiedUrl).count(), 3);

    let bench = Benchmark::load(&corpus.join("benchmark.json")).unwrap();
    let (extracted, refined) = eval_records(&out, Gazetteer::bundled()).unwrap();
    let systems: Vec<SystemResults> = ["web-search", "dataset-search"]
        .iter()
        .map(|s| SystemResults::load(&corpus.join(format!("systems/{s}.json"))).unwrap())
        .collect();
    let inputs = EvalInputs { benchmark: &bench, extracted: &extracted, refined: Some(&refined), systems: &systems };
    let report = evaluate(&inputs, p.providers.embedding.as_ref(), p.providers.judge.as_ref()).unwrap();
    assert_eq!(report.recall.all_expanded.percent_text(), "100.00");
    assert!(report.recall.all_strict.basis_points().unwrap() >= 9000, "{}", report.recall.all_strict);
    assert!(report.recall.all_strict.numerator < report.recall.all_strict.denominator);
    assert!(report.protocol_dominance);
    let table = report.comparison.as_ref().unwrap();
    for s in &table.systems {
        assert!(table.union.matches.numerator >= s.matches.numerator);
    }
    assert!(started.elapsed().as_secs() < 60);
}

#[test]
fn resume_reuses_every_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    write_corpus(&corpus).unwrap();
    let out = tmp.path().join("run");
    run(&corpus, &out, false);
    let first = std::fs::read_to_string(out.join("catalog/entries.jsonl")).unwrap();
    let p = run(&corpus, &out, true);
    let m = RunManifest::load(&out).unwrap();
    for stage in [Stage::Gate, Stage::Extract, Stage::Verify, Stage::Refine, Stage::Link, Stage::Index] {
        let t = &m.timing[&stage];
        assert_eq!(t.reused, t.processed, "{stage}");
    }
    assert_eq!(std::fs::read_to_string(out.join("catalog/entries.jsonl")).unwrap(), first);
    assert_eq!(p.open_catalog().unwrap().len(), 27);
}

#[test]
fn stages_need_their_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let opts = RunOptions::new(tmp.path().join("run"));
    let p = Pipeline::new(opts, litcat::providers::config::ProviderSet::offline()).unwrap();
    let err = p.run_stage(Stage::Extract).unwrap_err().to_string();
    assert!(err.contains("missing input"), "{err}");
    assert!(p.run_stage(Stage::Ingest).is_err());
}
