//! Acceptance checks, one PASS or FAIL line each. Tolerances are the
//! constants below; the process exits nonzero when any check fails.
//!
//! The live check runs only when LITCAT_LIVE_PROVIDERS, LITCAT_LIVE_INPUT and
//! LITCAT_LIVE_BENCHMARK are set, and is reported without gating.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use serde_json::{json, Value};

use litcat::article::flatten_for_prompt;
use litcat::catalog::{Catalog, SearchQuery};
use litcat::evaluation::{
    assign, compare_search_systems, compute_recall, BenchmarkDataset, EvalReport, MatchRun, PairVerdict, Protocol, Ratio,
    Relevance, SystemResults, EVAL_REPORT_FORMAT,
};
use litcat::harmonization::{entry_id_for, normalize_geo, normalize_time, CatalogEntry, Gazetteer, GeoLevel, LinkStatus};
use litcat::linking::{allowed_transition, build_link_query, relink, FixtureProber, Liveness, RelinkConfig, UrlProber};
use litcat::pipeline::open_catalog;
use litcat::providers::reference::{HashedEmbedding, ReferenceJudge};
use litcat::providers::{Judgement, ProviderError, SearchHit, WebSearchProvider};
use litcat::records::read_record;
use litcat::schema::DataCard;
use litcat::synthetic::{articles, fabrications, stale_files};
use litcat::verification::{localize_card, verify_semantics, FieldVerdict};

mod temporal {
    include!("../../core/tests/fixtures/temporal_cases.rs");
}
mod geo {
    include!("../../core/tests/fixtures/geo_cases.rs");
}

const EXPANDED_RECALL_MIN_BP: u64 = 10_000;
const STRICT_RECALL_MIN_BP: u64 = 9_000;
const RUNTIME_LIMIT: Duration = Duration::from_secs(60);
const FABRICATED_FIELDS: usize = 10;
const MIN_TEMPORAL_CASES: usize = 30;
const MIN_GEO_CASES: usize = 30;
const DOMINANCE_INSTANCES: u32 = 256;
const UNION_INSTANCES: u32 = 100;
const FACET_QUERIES: u32 = 300;
const RELINK_CASES: u32 = 400;
const REFERENCE_L1_EXPANDED: f64 = 92.64;
const REFERENCE_TOLERANCE: f64 = 5.0;

type Check = Result<String, String>;

macro_rules! need {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_litcat")
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/synthetic")
}

fn litcat(args: &[&str]) -> Result<String, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("litcat {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Run {
    out: PathBuf,
    report: EvalReport,
    catalog: Catalog,
}

fn end_to_end(work: &Path) -> Result<(Run, String), String> {
    let corpus = corpus();
    let stale = stale_files(&corpus);
    need!(stale.is_empty(), "bundled corpus is out of date: {stale:?}");
    let out = work.join("run");
    let providers = corpus.join("providers.toml");
    let started = Instant::now();
    litcat(&["pipeline", "--input", p(&corpus), "--out", p(&out), "--providers", p(&providers)])?;
    litcat(&[
        "eval",
        "--out",
        p(&out),
        "--providers",
        p(&providers),
        "--benchmark",
        p(&corpus.join("benchmark.json")),
        "--system",
        p(&corpus.join("systems/web-search.json")),
        "--system",
        p(&corpus.join("systems/dataset-search.json")),
    ])?;
    let elapsed = started.elapsed();
    let report: EvalReport = read_record(&out.join("eval/report.json"), EVAL_REPORT_FORMAT).map_err(|e| e.to_string())?;
    let r = &report.recall;
    need!(report.benchmark_size > 0, "empty benchmark");
    need!(
        r.all_expanded.basis_points() >= Some(EXPANDED_RECALL_MIN_BP),
        "expanded recall {} below {}",
        r.all_expanded,
        EXPANDED_RECALL_MIN_BP as f64 / 100.0
    );
    need!(
        r.all_strict.basis_points() >= Some(STRICT_RECALL_MIN_BP),
        "strict recall {} below {}",
        r.all_strict,
        STRICT_RECALL_MIN_BP as f64 / 100.0
    );
    need!(elapsed < RUNTIME_LIMIT, "took {elapsed:?}");
    let catalog = open_catalog(&out, Arc::new(HashedEmbedding)).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} articles, {} entries; expanded recall {}, strict {}; {:.1}s",
        articles().len(),
        catalog.len(),
        r.all_expanded,
        r.all_strict,
        elapsed.as_secs_f64()
    );
    Ok((Run { out, report, catalog }, detail))
}

fn hallucination_filter() -> Check {
    let arts = articles();
    let fabs = fabrications();
    need!(fabs.len() == FABRICATED_FIELDS, "{} fabrications", fabs.len());
    let judge = ReferenceJudge::new();
    let (mut caught, mut kept, mut seeded) = (0, 0, 0);
    for fab in &fabs {
        let a = arts.iter().find(|a| a.paper_id == fab.paper_id).ok_or("unknown paper")?;
        let ds = a.datasets.iter().find(|d| d.key == fab.dataset).ok_or("unknown dataset")?;
        let parsed = a.parsed();
        let text = flatten_for_prompt(&parsed);
        need!(!text.contains(fab.quote), "{}: fabricated quote occurs in the article", fab.dataset);
        let card = fab.apply(&ds.card());
        let v = verify_semantics(&parsed.article_id, &card, &localize_card(&card, &text), &text, &judge).map_err(|e| e.to_string())?;
        let verdict = v.field_verdicts.get(&fab.field).copied();
        if matches!(verdict, Some(FieldVerdict::Unsupported | FieldVerdict::NoEvidence)) && v.card.field_text(fab.field).is_none() {
            caught += 1;
        }
        for (field, _) in ds.evidence.iter().filter(|(f, _)| *f != fab.field) {
            seeded += 1;
            if v.field_verdicts.get(field) == Some(&FieldVerdict::Supported) && v.card.field_text(*field) == ds.card().field_text(*field) {
                kept += 1;
            }
        }
    }
    need!(caught == FABRICATED_FIELDS, "caught {caught} of {FABRICATED_FIELDS} fabricated fields");
    need!(kept == seeded, "{} of {seeded} supported fields were filtered", seeded - kept);
    Ok(format!("{caught}/{FABRICATED_FIELDS} fabricated fields flagged, {kept}/{seeded} supported fields kept"))
}

fn temporal_suite() -> Check {
    need!(temporal::CASES.len() >= MIN_TEMPORAL_CASES, "only {} cases", temporal::CASES.len());
    let mut bad = Vec::new();
    for (input, want) in temporal::CASES {
        let t = normalize_time(input);
        let shown = if t.is_parsed() { t.to_string() } else { input.to_string() };
        if shown != *want {
            bad.push(format!("{input:?} -> {shown:?}"));
        }
    }
    for input in temporal::MALFORMED {
        let t = catch_unwind(|| normalize_time(input)).map_err(|_| format!("{input:?} panicked"))?;
        if t.is_parsed() || t.unparsed.as_deref() != Some(*input) {
            bad.push(format!("malformed {input:?} -> {t}"));
        }
    }
    need!(bad.is_empty(), "{}", bad.join("; "));
    Ok(format!("{} cases and {} malformed inputs", temporal::CASES.len(), temporal::MALFORMED.len()))
}

fn geo_suite() -> Check {
    need!(geo::CASES.len() >= MIN_GEO_CASES, "only {} cases", geo::CASES.len());
    let g = Gazetteer::bundled();
    let mut bad = Vec::new();
    for (input, codes) in geo::CASES {
        let s = normalize_geo(input, g);
        if s.country_codes.iter().map(String::as_str).collect::<Vec<_>>() != *codes {
            bad.push(format!("{input:?} -> {:?}", s.country_codes));
        }
    }
    for input in geo::GLOBAL {
        let s = normalize_geo(input, g);
        if s.level != Some(GeoLevel::Global) || !s.country_codes.is_empty() {
            bad.push(format!("{input:?} is not global: {:?}", s.level));
        }
    }
    for input in geo::UNRESOLVED {
        let s = normalize_geo(input, g);
        if s.is_resolved() || s.unresolved.as_deref() != Some(*input) {
            bad.push(format!("{input:?} resolved to {:?}", s.country_codes));
        }
    }
    need!(bad.is_empty(), "{}", bad.join("; "));
    Ok(format!("{} alias cases, {} global and {} unresolved inputs", geo::CASES.len(), geo::GLOBAL.len(), geo::UNRESOLVED.len()))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha))
}

fn judgement() -> impl Strategy<Value = Judgement> {
    prop_oneof![Just(Judgement::Same), Just(Judgement::SubsetOfA), Just(Judgement::SubsetOfB), Just(Judgement::Different)]
}

fn blank_card(id: &str, name: &str, summary: &str) -> DataCard {
    DataCard {
        dataset_id: id.into(),
        name: name.into(),
        summary: summary.into(),
        category: String::new(),
        sub_category: None,
        time_coverage_raw: None,
        geographic_coverage_raw: None,
        url: None,
        references: vec![],
        other_information: None,
        evidence: vec![],
    }
}

fn protocol_dominance() -> Check {
    let fixture = (
        prop::collection::vec(any::<bool>(), 1..12),
        prop::collection::vec((0usize..12, 0usize..15, 0u32..1000, judgement()), 0..60),
    );
    let count = Cell::new(0u32);
    runner(DOMINANCE_INSTANCES)
        .run(&fixture, |(levels, raw)| {
            count.set(count.get() + 1);
            let benches: Vec<BenchmarkDataset> = levels
                .iter()
                .enumerate()
                .map(|(i, l1)| BenchmarkDataset {
                    benchmark_id: format!("b{i:02}"),
                    paper_id: "p".into(),
                    annotation: blank_card("x", "x", "x"),
                    relevance: if *l1 { Relevance::L1 } else { Relevance::L2 },
                })
                .collect();
            let mut seen = HashSet::new();
            let verdicts: Vec<PairVerdict> = raw
                .into_iter()
                .filter(|(b, e, _, _)| *b < levels.len() && seen.insert((*b, *e)))
                .map(|(b, e, s, j)| PairVerdict {
                    benchmark_id: format!("b{b:02}"),
                    extracted_id: format!("e{e:02}"),
                    similarity: s as f64 / 1000.0,
                    judgement: j,
                    rationale: String::new(),
                })
                .collect();
            let run = MatchRun { strict: assign(&verdicts, Protocol::Strict), expanded: assign(&verdicts, Protocol::Expanded), verdicts };
            let r = compute_recall(&run, &benches);
            for (s, e) in [(r.all_strict, r.all_expanded), (r.l1_strict, r.l1_expanded)] {
                prop_assert!(s.numerator <= e.numerator && s.denominator == e.denominator);
            }
            let pairs = |p: Protocol| -> BTreeSet<(String, String)> {
                run.assignments(p)
                    .iter()
                    .flat_map(|a| a.matched_extracted_ids.iter().map(|e| (a.benchmark_id.clone(), e.clone())))
                    .collect()
            };
            prop_assert!(pairs(Protocol::Strict).is_subset(&pairs(Protocol::Expanded)));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let count = count.get();
    need!(count >= DOMINANCE_INSTANCES, "ran {count} instances");
    Ok(format!("{count} random instances: strict recall <= expanded, strict pairs within expanded"))
}

const TOPICS: &[&str] = &["taxi trajectories", "building footprints", "air quality sensors", "household travel survey", "street trees"];

fn topic_hit(rank: u32, topic: usize, good: bool) -> SearchHit {
    let t = TOPICS[topic];
    SearchHit {
        rank,
        url: format!("https://data.example.org/{topic}/{rank}"),
        title: if good { format!("City {t} dataset") } else { "Cooking recipes".into() },
        snippet: if good { format!("Records of {t} for the city. Download the dataset.") } else { "Pasta and sauces.".into() },
        engine_id: "x".into(),
    }
}

fn metric_arithmetic(run: Option<&Run>) -> Check {
    for (n, d, want) in [(190, 307, "61.89"), (248, 273, "90.84")] {
        let got = Ratio::new(n, d).percent_text();
        need!(got == want, "{n}/{d} gave {got}, want {want}");
    }
    let benches: Vec<BenchmarkDataset> = (0..TOPICS.len())
        .map(|i| BenchmarkDataset {
            benchmark_id: format!("b{i}"),
            paper_id: "p".into(),
            annotation: blank_card(&format!("b{i}"), &format!("City {} dataset", TOPICS[i]), &format!("Records of {} for the city.", TOPICS[i])),
            relevance: Relevance::L1,
        })
        .collect();
    let judge = ReferenceJudge::new();
    let plan = prop::collection::vec(prop::collection::vec(prop::collection::vec((0..TOPICS.len(), any::<bool>()), 0..4), TOPICS.len()), 1..4);
    runner(UNION_INSTANCES)
        .run(&plan, |plan| {
            let systems: Vec<SystemResults> = plan
                .iter()
                .enumerate()
                .map(|(s, per)| SystemResults {
                    system: format!("s{s}"),
                    results: per
                        .iter()
                        .enumerate()
                        .map(|(b, hits)| (format!("b{b}"), hits.iter().enumerate().map(|(r, (t, g))| topic_hit(r as u32 + 1, *t, *g)).collect()))
                        .collect(),
                })
                .collect();
            let table = compare_search_systems(&benches, &systems, &judge).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for row in &table.systems {
                prop_assert!(table.union.matches.numerator >= row.matches.numerator);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut detail = format!("190/307 -> 61.89, 248/273 -> 90.84; union >= every system on {UNION_INSTANCES} random fixtures");
    if let Some(run) = run {
        let table = run.report.comparison.as_ref().ok_or("synthetic report has no comparison")?;
        for row in &table.systems {
            need!(table.union.matches.numerator >= row.matches.numerator, "synthetic union below {}", row.system);
        }
        detail.push_str(&format!(" and on the synthetic systems (union {})", table.union.matches));
    }
    Ok(detail)
}

fn catalog_properties(run: &Run) -> Check {
    let entries: Vec<CatalogEntry> = run.catalog.snapshot().entries().cloned().collect();
    need!(!entries.is_empty(), "empty catalog");

    let cats: Vec<String> = entries.iter().map(|e| e.card.category.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let words = ["walkability", "taxi", "air", "quality", "city", "census", "satellite", "noise", "bike", "housing", "", "the"];
    let countries = ["US", "GB", "CN", "FR", "BR", "KR", "IN", "JP", "ZZ"];
    let total = |q: &SearchQuery| run.catalog.search(q).map(|r| r.total_matches);
    let query = (prop::collection::vec(0..words.len(), 0..3), 0..cats.len(), 0..countries.len(), 1990i32..2025, 0i32..10, 0usize..3);
    runner(FACET_QUERIES)
        .run(&query, |(kw, cat, country, from, span, kind)| {
            let base = SearchQuery {
                keywords: Some(kw.iter().map(|i| words[*i]).collect::<Vec<_>>().join(" ")),
                ..Default::default()
            };
            let mut narrowed = base.clone();
            match kind {
                0 => {
                    narrowed.categories.insert(cats[cat].clone());
                }
                1 => {
                    narrowed.countries.insert(countries[country].to_string());
                }
                _ => {
                    narrowed.year_from = Some(from);
                    narrowed.year_to = Some(from + span);
                }
            }
            let (a, b) = (total(&base).unwrap(), total(&narrowed).unwrap());
            prop_assert!(b <= a, "{narrowed:?}: {b} > {a}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let fresh = Catalog::in_memory(Arc::new(HashedEmbedding));
    fresh.upsert(entries.clone()).map_err(|e| e.to_string())?;
    let before: Vec<CatalogEntry> = fresh.snapshot().entries().cloned().collect();
    let again = fresh.upsert(entries.clone()).map_err(|e| e.to_string())?;
    let after: Vec<CatalogEntry> = fresh.snapshot().entries().cloned().collect();
    need!(again.inserted == 0 && again.changed == 0 && before == after, "second upsert changed the catalog: {again:?}");

    for e in &entries {
        let hits = run.catalog.rag_retrieve(&e.card.summary, 1).map_err(|e| e.to_string())?;
        need!(hits.first().map(|h| &h.entry.entry_id) == Some(&e.entry_id), "{:?} is not first for its own summary", e.card.name);
    }
    Ok(format!(
        "facets narrow on {FACET_QUERIES} random queries; upsert idempotent; {} of {} entries rank first for their own summary",
        entries.len(),
        entries.len()
    ))
}

struct Canned(Vec<SearchHit>);

impl WebSearchProvider for Canned {
    fn id(&self) -> &str {
        "canned"
    }

    fn web_search(&self, _query: &str, k: usize) -> Result<Vec<SearchHit>, ProviderError> {
        Ok(self.0.iter().take(k).cloned().collect())
    }
}

fn relink_conservatism(run: &Run) -> Check {
    let entries: Vec<CatalogEntry> = run.catalog.snapshot().entries().cloned().collect();
    let noise = ["Cooking recipes", "City data portal", "Download open data", "Urban mobility dataset", ""];
    let statuses = [200u16, 301, 401, 403, 404, 410, 429, 500, 503];
    let case = (
        0..entries.len(),
        0usize..3,
        0..statuses.len(),
        prop::collection::vec((0usize..3, 0..noise.len(), 0..noise.len()), 0..6),
    );
    let (kept_live, moved) = (Cell::new(0), Cell::new(0));
    runner(RELINK_CASES)
        .run(&case, |(i, start, status, kinds)| {
            let mut e = entries[i].clone();
            e.link_status = [LinkStatus::OriginalUrl, LinkStatus::ReferenceOnly, LinkStatus::VerifiedUrl][start];
            match e.link_status {
                LinkStatus::OriginalUrl => {
                    e.card.url.get_or_insert_with(|| "https://data.example.org/original".into());
                    e.access_url = None;
                }
                LinkStatus::ReferenceOnly => {
                    e.card.url = None;
                    e.access_url = None;
                }
                LinkStatus::VerifiedUrl => e.access_url = Some("https://verified.example.org/x".into()),
            }
            let prober = FixtureProber::new(e.card.url.clone().map(|u| (u, statuses[status])));
            let hits: Vec<SearchHit> = kinds
                .iter()
                .enumerate()
                .map(|(r, (kind, a, b))| {
                    let (title, snippet) = match kind {
                        0 => (build_link_query(&e), e.evidence_context.clone()),
                        1 => (build_link_query(&e), noise[*b].to_string()),
                        _ => (noise[*a].to_string(), noise[*b].to_string()),
                    };
                    SearchHit { rank: r as u32 + 1, url: format!("https://mirror{r}.example.net/"), title, snippet, engine_id: "f".into() }
                })
                .collect();
            let (out, _) = relink(&e, &Canned(hits), &HashedEmbedding, &prober, &RelinkConfig::default())
                .map_err(|err| TestCaseError::fail(err.to_string()))?;
            let dead = e.link_status == LinkStatus::OriginalUrl && prober.probe_url(e.card.url.as_deref().unwrap()) == Liveness::Dead;
            prop_assert!(allowed_transition(e.link_status, dead, out.link_status));
            prop_assert_eq!(&out.card, &e.card);
            if e.link_status == LinkStatus::OriginalUrl && !dead {
                prop_assert_eq!(&out, &e);
                kept_live.set(kept_live.get() + 1);
            }
            if out.link_status != e.link_status {
                moved.set(moved.get() + 1);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let statuses: BTreeMap<String, usize> = entries.iter().fold(BTreeMap::new(), |mut m, e| {
        *m.entry(format!("{:?}", e.link_status)).or_default() += 1;
        m
    });
    Ok(format!("{RELINK_CASES} fuzz cases ({} live originals kept, {} transitions, all allowed); synthetic statuses {statuses:?}", kept_live.get(), moved.get()))
}

struct Server(Child, String);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(out: &Path) -> Result<Server, String> {
    let providers = corpus().join("providers.toml");
    let mut child = Command::new(bin())
        .args(["serve", "--bind", "127.0.0.1:0", "--out", p(out), "--providers", p(&providers)])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    std::io::BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).map_err(|e| e.to_string())?;
    let base = line.trim().strip_prefix("listening on ").ok_or_else(|| format!("unexpected server output {line:?}"))?.to_string();
    Ok(Server(child, base))
}

fn http(method: &str, url: &str, body: Option<Value>) -> Result<(u16, Option<String>, Value), String> {
    let req = ureq::request(method, url);
    let res = match body {
        Some(b) => req.send_json(b),
        None => req.call(),
    };
    let res = match res {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => return Err(e.to_string()),
    };
    let status = res.status();
    let total = res.header("x-total-count").map(str::to_string);
    let text = res.into_string().map_err(|e| e.to_string())?;
    let v = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).map_err(|e| format!("{url}: {e}"))? };
    Ok((status, total, v))
}

fn api_contract(run: &Run) -> Check {
    let server = start_server(&run.out)?;
    let api = format!("{}/api/v1", server.1);
    let mut checks = 0;
    let mut expect = |what: &str, got: u16, want: u16, body: &Value| -> Result<(), String> {
        checks += 1;
        need!(got == want, "{what}: status {got}, want {want}: {body}");
        if want >= 400 {
            need!(body["status"] == want && body["code"].is_string() && body["message"].is_string(), "{what}: bad error body {body}");
        }
        Ok(())
    };

    let (s, _, b) = http("GET", &format!("{api}/datasets?q=walkability&country=US"), None)?;
    expect("walkability search", s, 200, &b)?;
    need!(b["entries"][0]["entry"]["card"]["Data_Name"] == "Walk Score walkability ratings", "walkability search: first hit {}", b["entries"][0]["entry"]["card"]["Data_Name"]);

    let (s, total, b) = http("GET", &format!("{api}/datasets"), None)?;
    expect("no params", s, 200, &b)?;
    need!(total.as_deref() == Some(run.catalog.len().to_string().as_str()), "X-Total-Count {total:?}");

    let direct = serde_json::to_value(run.catalog.search(&SearchQuery { keywords: Some("city data".into()), limit: 7, ..Default::default() }).unwrap()).unwrap();
    let (_, _, b) = http("GET", &format!("{api}/datasets?q=city+data&limit=7"), None)?;
    need!(b == direct, "search body differs from catalog.search");

    for bad in ["limit=0", "limit=500", "year_from=2020&year_to=2000", "colour=blue", "offset=x", "country=Atlantis"] {
        let (s, _, b) = http("GET", &format!("{api}/datasets?{bad}"), None)?;
        expect(bad, s, 400, &b)?;
    }

    let (_, _, all) = http("GET", &format!("{api}/datasets?limit=100"), None)?;
    for h in all["entries"].as_array().ok_or("no entries")? {
        let id = h["entry"]["entry_id"].as_str().unwrap();
        let (s, _, b) = http("GET", &format!("{api}/datasets/{id}"), None)?;
        expect("detail", s, 200, &b)?;
        need!(b == h["entry"], "detail of {id} differs from search hit");
    }
    let (s, _, b) = http("GET", &format!("{api}/datasets/e0000000000000000"), None)?;
    expect("unknown id", s, 404, &b)?;
    let arts = articles();
    let syn08 = arts.iter().find(|a| a.paper_id == "syn08").ok_or("no syn08")?;
    let (s, _, b) = http("GET", &format!("{api}/datasets/{}", entry_id_for(&syn08.parsed().article_id, "metro")), None)?;
    expect("rejected id", s, 404, &b)?;

    for e in run.catalog.snapshot().entries() {
        let (s, _, b) = http("POST", &format!("{api}/rag/query"), Some(json!({"text": e.card.summary, "k": 5})))?;
        expect("rag", s, 200, &b)?;
        need!(b["results"][0]["entry_id"] == e.entry_id.as_str(), "rag: {:?} not first for its summary", e.card.name);
    }
    for bad in [json!({"text": ""}), json!({"text": "taxi", "k": 0}), json!({"k": 2})] {
        let (s, _, b) = http("POST", &format!("{api}/rag/query"), Some(bad.clone()))?;
        expect(&format!("rag {bad}"), s, 400, &b)?;
    }

    let (s, _, stats) = http("GET", &format!("{api}/stats"), None)?;
    expect("stats", s, 200, &stats)?;
    need!(stats["entries"] == run.catalog.len(), "stats entries {}", stats["entries"]);
    let (_, _, alias) = http("GET", &format!("{}/api/stats", server.1), None)?;
    need!(alias == stats, "/api alias differs from /api/v1");
    let (s, _, b) = http("DELETE", &format!("{api}/datasets"), None)?;
    expect("delete", s, 405, &b)?;
    let (s, _, b) = http("GET", &format!("{api}/nowhere"), None)?;
    expect("unknown route", s, 404, &b)?;
    Ok(format!("{checks} HTTP checks against `litcat serve` on the synthetic run"))
}

fn live_mode(work: &Path) -> Option<Check> {
    let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
    let (providers, input, bench) = (var("LITCAT_LIVE_PROVIDERS")?, var("LITCAT_LIVE_INPUT")?, var("LITCAT_LIVE_BENCHMARK")?);
    let out = work.join("live");
    let run = || -> Check {
        let common = ["--out", p(&out), "--providers", &providers, "--profile", "live"];
        litcat(&[&["pipeline", "--input", &input][..], &common].concat())?;
        litcat(&[&["eval", "--benchmark", &bench][..], &common].concat())?;
        let report: EvalReport = read_record(&out.join("eval/report.json"), EVAL_REPORT_FORMAT).map_err(|e| e.to_string())?;
        let got = report.recall.l1_expanded.percent().unwrap_or(0.0);
        let within = (got - REFERENCE_L1_EXPANDED).abs() <= REFERENCE_TOLERANCE;
        Ok(format!(
            "expanded L1 recall {} vs published {REFERENCE_L1_EXPANDED} (±{REFERENCE_TOLERANCE}): {}",
            report.recall.l1_expanded,
            if within { "within" } else { "outside" }
        ))
    };
    Some(run())
}

fn guarded(f: impl FnOnce() -> Check) -> Check {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into())),
    }
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; they do not apply
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let work = tempfile::tempdir().expect("temp dir");
    let mut failed = 0;
    let mut line = |name: &str, r: Check| {
        match r {
            Ok(detail) => println!("PASS  {name:<24} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<24} {why}");
            }
        }
    };

    let (run, e2e) = match guarded_run(work.path()) {
        Ok((run, detail)) => (Some(run), Ok(detail)),
        Err(e) => (None, Err(e)),
    };
    line("synthetic-end-to-end", e2e);
    line("hallucination-filter", guarded(hallucination_filter));
    line("temporal-normalizer", guarded(temporal_suite));
    line("geographic-normalizer", guarded(geo_suite));
    line("protocol-dominance", guarded(protocol_dominance));
    line("metric-arithmetic", guarded(|| metric_arithmetic(run.as_ref())));
    let need_run = |f: fn(&Run) -> Check| -> Check {
        match &run {
            Some(r) => guarded(|| f(r)),
            None => Err("needs the synthetic run, which failed".into()),
        }
    };
    line("catalog-properties", need_run(catalog_properties));
    line("relink-conservatism", need_run(relink_conservatism));
    line("api-contract", need_run(api_contract));
    match live_mode(work.path()) {
        Some(Ok(detail)) => println!("INFO  {:<24} {detail} (reported, not gated)", "live-mode"),
        Some(Err(e)) => println!("INFO  {:<24} live run failed: {e} (not gated)", "live-mode"),
        None => println!("SKIP  {:<24} set LITCAT_LIVE_PROVIDERS, LITCAT_LIVE_INPUT and LITCAT_LIVE_BENCHMARK to run", "live-mode"),
    }
    if failed > 0 {
        println!("\n{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}

fn guarded_run(work: &Path) -> Result<(Run, String), String> {
    match catch_unwind(AssertUnwindSafe(|| end_to_end(work))) {
        Ok(r) => r,
        Err(_) => Err("panicked".into()),
    }
}
