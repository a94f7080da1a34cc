//! Acceptance runner: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use catnet::classifiers::{train, ClassifierSpec};
use catnet::kdd::{count_categories, AttackCategory, CategoryCounts, CategoryMap, Dataset, FeatureSchema, SampleSpec};
use catnet::metrics::evaluate_model;
use catnet::selection::{reference::reference_table, select, Assignment, SelectionPolicy};
use catnet::synth::{SyntheticCorpus, MINI_FIXTURE_COUNTS};

type Outcome = Result<String, String>;

fn catnet(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_catnet")).args(args).output().map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(String::from_utf8_lossy(&o.stdout).into_owned())
    } else {
        Err(format!("catnet {} exited {:?}: {}", args[0], o.status.code(), String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("CATNET_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn c1_data_map() -> Outcome {
    let official = data_dir().join("kddcup.data_10_percent");
    let (path, want, label) = if official.exists() {
        (official, CategoryCounts::KDD99_10_PERCENT, "official 10% file")
    } else {
        (support::fixture_path("kdd_mini_2000.txt"), CategoryCounts(MINI_FIXTURE_COUNTS), "official file absent, 2,000-record fixture")
    };
    let start = Instant::now();
    let file = File::open(&path).map_err(|e| e.to_string())?;
    let got = count_categories(BufReader::new(file), &FeatureSchema::kdd99(), &CategoryMap::kdd99())
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        got == want && secs <= 60.0,
        format!("{label}: {got} in {secs:.1}s"),
        format!("{label}: got {got}, want {want}, {secs:.1}s"),
    )
}

fn count_lines(path: &Path) -> usize {
    fs::read_to_string(path).map(|t| t.lines().count()).unwrap_or(0)
}

fn c2_sampling(work: &Path, corpus: &Path) -> Outcome {
    let run = |name: &str, seed: &str| -> Result<PathBuf, String> {
        let out = work.join(name);
        catnet(&["sample", "--source", s(corpus), "--seed", seed, "--out", s(&out)])?;
        Ok(out)
    };
    let a = run("sample_a", "7")?;
    let b = run("sample_b", "7")?;
    let c = run("sample_c", "8")?;
    let train = Dataset::load(a.join("train.txt"), FeatureSchema::kdd99(), CategoryMap::kdd99()).map_err(|e| e.to_string())?;
    let want = SampleSpec::kdd_training(7).per_category;
    let same = |f: &str| fs::read(a.join(f)).ok() == fs::read(b.join(f)).ok();
    let reproducible = same("train.txt") && same("test.txt") && same("sample.json");
    let differs = fs::read(a.join("train.txt")).ok() != fs::read(c.join("train.txt")).ok();
    check(
        train.len() == 49_596 && train.category_counts() == want && reproducible && differs,
        format!("{} records, {}, byte-identical rerun, new seed differs", train.len(), train.category_counts()),
        format!(
            "{} records ({}, lines {}), reproducible {reproducible}, seed-sensitive {differs}",
            train.len(),
            train.category_counts(),
            count_lines(&a.join("train.txt"))
        ),
    )
}

fn ids(a: &Assignment) -> Vec<String> {
    AttackCategory::ATTACKS.iter().map(|&c| a.id(c).unwrap_or("?").to_string()).collect()
}

fn c3_selection() -> Outcome {
    let start = Instant::now();
    let t = reference_table();
    let a = select(&t, &SelectionPolicy::accuracy_first(0.85)).map_err(|e| e.to_string())?;
    let b = select(&t, &SelectionPolicy::real_time(0.85, 20.0)).map_err(|e| e.to_string())?;
    let ms = start.elapsed().as_secs_f64() * 1000.0;
    let (a, b) = (ids(&a), ids(&b));
    check(
        a == ["JRip", "JRip", "DecisionTable", "OneR"] && b == ["J48", "BayesNet", "BayesNet", "OneR"],
        format!("no budget {a:?}, 20 s budget {b:?} in {ms:.1} ms"),
        format!("no budget {a:?}, 20 s budget {b:?}"),
    )
}

fn c4_flag_identity() -> Outcome {
    let (train_set, test) = support::split(&support::mini(), 0.75, 21);
    let checked = support::flag_identity(&train_set, &test, 5, 2024)?;
    let shown: Vec<String> = checked.iter().map(|a| ids(a).join("/")).collect();
    check(checked.len() >= 5, format!("{} random assignments exact: {}", checked.len(), shown.join(", ")), String::new())
}

fn c5_oracles() -> Outcome {
    let start = Instant::now();
    let data = support::mini();
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<String, String>| match r {
        Ok(m) => notes.push(format!("{name} {m}")),
        Err(e) => failures.push(format!("{name}: {e}")),
    };

    record("OneR", support::one_r(&data).map(|_| "exact".into()));
    let lbk = support::lbk_agreement(&support::stratified(&data, 500, 11), &data);
    record("LBk", check(lbk == 1.0, format!("{:.0}%", lbk * 100.0), format!("agreement {lbk}")));
    let (half_a, half_b) = support::split(&data, 0.5, 5);
    let (nb, nb_sum) = support::naive_bayes(&half_a, &half_b);
    record("NB", check(nb <= 1e-9 && nb_sum <= 1e-9, format!("{nb:.1e}/{nb_sum:.1e}"), format!("error {nb:e}, sum error {nb_sum:e}")));
    let mlp = support::mlp_gradient(&support::stratified(&data, 300, 2));
    record("MLP", check(mlp <= 1e-4, format!("{mlp:.1e}"), format!("relative error {mlp:e}")));
    let (kkt, in_box) = support::smo_kkt(&support::stratified(&data, 600, 4));
    record("SMO", check(kkt <= 1e-3 && in_box, format!("{kkt:.1e}"), format!("residual {kkt:e}, alpha in box {in_box}")));
    let cover = support::jrip_min_coverage(&data);
    record("JRip", check(cover >= 2, format!("min cover {cover}"), format!("a rule covers {cover}")));
    record("trees", support::tree_leaf_sums(&data).map(|_| "sums ok".into()));
    record("BayesNet", check(support::bayes_net_graph_ok(&data), "acyclic".into(), "cycle in K2 graph".into()));

    let secs = start.elapsed().as_secs_f64();
    if secs > 300.0 {
        failures.push(format!("took {secs:.0}s"));
    }
    if failures.is_empty() {
        Ok(format!("{} in {secs:.1}s", notes.join(", ")))
    } else {
        Err(failures.join("; "))
    }
}

fn c6_direction(corpus: &Dataset) -> Outcome {
    let sample = support::stratified(corpus, 20_000, 6);
    let (train_set, test) = support::split(&sample, 0.75, 6);
    let small = support::stratified(&sample, 5_000, 6);
    let (small_train, small_test) = support::split(&small, 0.75, 6);
    let mut aa = Vec::new();
    // timed budget excludes MLP and SMO, which run on the 5,000-record subsample
    let mut secs = 0.0;
    for spec in ClassifierSpec::all_defaults() {
        let small_scale = matches!(spec.name(), "MLP" | "SMO");
        let (tr, te) = if small_scale { (&small_train, &small_test) } else { (&train_set, &test) };
        let start = Instant::now();
        let model = train(&spec, tr).map_err(|e| format!("{}: {e}", spec.id()))?;
        let row = evaluate_model(&model, te).map_err(|e| format!("{}: {e}", spec.id()))?;
        if !small_scale {
            secs += start.elapsed().as_secs_f64();
        }
        aa.push((spec.name(), row.aa));
    }
    let get = |n: &str| aa.iter().find(|(m, _)| *m == n).unwrap().1;
    let nb = get("NaiveBayes");
    let trees_rules = ["J48", "NBTree", "DecisionTable", "JRip", "OneR"];
    let above = trees_rules.iter().all(|n| get(n) > nb);
    let floor = aa.iter().all(|(_, v)| *v >= 0.75);
    let shown: Vec<String> = aa.iter().map(|(n, v)| format!("{n} {:.2}", v * 100.0)).collect();
    check(
        above && floor && secs <= 900.0,
        format!("AA% {} in {secs:.0}s", shown.join(", ")),
        format!("trees/rules above NaiveBayes {above}, all >= 75% {floor}, {secs:.0}s: {}", shown.join(", ")),
    )
}

fn c7_metrics() -> Outcome {
    support::metric_oracle(1000, 7).map(|n| format!("{n} random confusion matrices match direct counts"))
}

fn pipeline(root: &Path) -> Result<(), String> {
    let d = |x: &str| root.join(x);
    let fixture = support::fixture_path("kdd_mini_2000.txt");
    catnet(&["sample", "--source", s(&fixture), "--counts", "400,500,100,20,80", "--test-total", "600", "--seed", "5", "--out", s(&d("sample"))])?;
    catnet(&["bench", "--train", s(&d("sample/train.txt")), "--test", s(&d("sample/test.txt")), "--seed", "5", "--redact-timings", "--out", s(&d("bench"))])?;
    catnet(&["select", "--table", s(&d("bench/table.csv")), "--out", s(&d("select"))])?;
    catnet(&[
        "detect", "--assignment", s(&d("select/assignment.json")), "--train", s(&d("sample/train.txt")),
        "--input", s(&d("sample/test.txt")), "--seed", "5", "--evaluate", "--redact-timings", "--out", s(&d("detect")),
    ])?;
    Ok(())
}

const REPORTS: [&str; 11] = [
    "sample/train.txt", "sample/test.txt", "sample/sample.json",
    "bench/table.csv", "bench/table.json", "bench/table.txt",
    "select/assignment.json", "select/trace.txt",
    "detect/detections.txt", "detect/summary.json", "detect/evaluation.txt",
];

fn c8_reproducibility(work: &Path) -> Outcome {
    let (a, b) = (work.join("run_a"), work.join("run_b"));
    pipeline(&a)?;
    pipeline(&b)?;
    let mut differ = Vec::new();
    let mut files = 0;
    for f in REPORTS {
        let (x, y) = (fs::read(a.join(f)), fs::read(b.join(f)));
        match (x, y) {
            (Ok(x), Ok(y)) if x == y => files += 1,
            _ => differ.push(f),
        }
    }
    check(differ.is_empty(), format!("{files} report files byte-identical across two runs"), format!("differ: {differ:?}"))
}

fn c9_stream_batch(work: &Path) -> Outcome {
    let fixture = support::fixture_path("kdd_mini_2000.txt");
    let (train_set, _) = support::split(&support::mini(), 0.75, 9);
    let train_path = work.join("c9_train.txt");
    train_set.save(&train_path).map_err(|e| e.to_string())?;
    let a = Assignment::manual([
        (AttackCategory::DoS, support::spec("J48")),
        (AttackCategory::Probe, support::spec("BayesNet")),
        (AttackCategory::U2R, support::spec("BayesNet")),
        (AttackCategory::R2L, support::spec("OneR")),
    ])
    .map_err(|e| e.to_string())?;
    let a_path = work.join("c9_assignment.json");
    fs::write(&a_path, a.to_json()).map_err(|e| e.to_string())?;
    let ens = work.join("c9.ens");
    let run = |mode: &str| -> Result<(String, serde_json::Value), String> {
        let out = work.join(format!("c9_{mode}"));
        let mut args = vec!["detect", "--input", s(&fixture), "--out", s(&out)];
        if mode == "batch" {
            args.extend(["--assignment", s(&a_path), "--train", s(&train_path), "--save-ensemble", s(&ens)]);
        } else {
            args.extend(["--ensemble", s(&ens), "--stream"]);
        }
        catnet(&args)?;
        let lines = fs::read_to_string(out.join("detections.txt")).map_err(|e| e.to_string())?;
        let summary = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        Ok((lines, summary))
    };
    let (batch, _) = run("batch")?;
    let (stream, summary) = run("stream")?;
    let rate = summary["stream"]["records_per_s"].as_f64().unwrap_or(0.0);
    let n = batch.lines().count();
    check(
        batch == stream && n == 2000 && rate > 1000.0,
        format!("{n} identical flag lines, stream {rate:.0} records/s"),
        format!("identical {}, lines {n}, stream {rate:.0} records/s", batch == stream),
    )
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    // synthetic stand-in for the 494,020-record 10% file, used by 2 and 6
    let corpus = SyntheticCorpus::new(494_020).kdd_10_percent();
    let corpus_path = work.path().join("kdd_10_percent_synthetic.txt");
    corpus.save(&corpus_path).expect("write synthetic corpus");

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("data-map fidelity", Box::new(c1_data_map)),
        ("sampling fidelity", Box::new(|| c2_sampling(work.path(), &corpus_path))),
        ("selection reproduction", Box::new(c3_selection)),
        ("ensemble flag-metric identity", Box::new(c4_flag_identity)),
        ("per-algorithm oracles", Box::new(c5_oracles)),
        ("directional sanity at 20k", Box::new(|| c6_direction(&corpus))),
        ("metric oracle", Box::new(c7_metrics)),
        ("pipeline reproducibility", Box::new(|| c8_reproducibility(work.path()))),
        ("stream/batch equivalence", Box::new(|| c9_stream_batch(work.path()))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed in {:.0}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
