//! End-to-end runs over the shipped fixtures: golden outputs, determinism
//! and the CLI exit-code contract.
//!
//! Set `CBTEXT_BLESS=1` to rewrite the golden files after an intended
//! output change.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use cbtext::pipeline::{run, sha256_file, Command, Overrides, RunConfig};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn bless() -> bool {
    std::env::var_os("CBTEXT_BLESS").is_some_and(|v| v != "0")
}

fn load(config: &str, out: &Path, seed: Option<u64>) -> RunConfig {
    let overrides = Overrides {
        seed,
        output_dir: Some(out.to_path_buf()),
    };
    RunConfig::load_with(&fixture(config), &overrides).unwrap()
}

fn compare_or_bless(actual: &Path, golden: &Path) {
    if bless() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::copy(actual, golden).unwrap();
        return;
    }
    let want = std::fs::read_to_string(golden)
        .unwrap_or_else(|e| panic!("{}: {e} (run with CBTEXT_BLESS=1 to create)", golden.display()));
    let got = std::fs::read_to_string(actual).unwrap();
    assert!(got == want, "{} differs from {}", actual.display(), golden.display());
}

fn non_empty_tables(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        assert!(text.lines().count() >= 2, "{name} has no data rows");
    }
    names
}

#[test]
fn nine_document_summary_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("nine/config.toml", dir.path(), None);
    run(Command::Ingest, &cfg, false).unwrap();
    let text = std::fs::read_to_string(dir.path().join("corpus_summary.csv")).unwrap();
    // word counts by hand: announcements 11+10+6, minutes 15+7+16, speeches 10+7+16
    assert_eq!(
        text,
        "channel,texts,words_average\n\
         announcement,3,9.0\n\
         minutes,3,12.7\n\
         speech,3,11.0\n\
         all,9,10.9\n"
    );
}

#[test]
fn nine_document_stages_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("nine/config.toml", dir.path(), None);
    for c in [Command::Ingest, Command::Score, Command::Counts, Command::Series] {
        run(c, &cfg, false).unwrap();
    }
    for name in non_empty_tables(dir.path()) {
        compare_or_bless(&dir.path().join(&name), &fixture("nine/golden").join(&name));
    }
}

#[test]
fn demo_report_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("demo/config.toml", dir.path(), None);
    run(Command::Report, &cfg, false).unwrap();
    let names = non_empty_tables(dir.path());

    // small tables in full, everything else by digest
    for name in [
        "corpus_summary.csv",
        "unit_roots.csv",
        "var_lag.csv",
        "var_report.csv",
        "granger.csv",
        "breaks.csv",
        "welch.csv",
        "correlations.csv",
        "topics_kl.csv",
        "fig3_crisis_topics.csv",
    ] {
        compare_or_bless(&dir.path().join(name), &fixture("demo/golden").join(name));
    }
    let digests: String = names
        .iter()
        .map(|n| format!("{}  {n}\n", sha256_file(&dir.path().join(n)).unwrap()))
        .collect();
    let listing = dir.path().join("outputs.sha256");
    std::fs::write(&listing, digests).unwrap();
    compare_or_bless(&listing, &fixture("demo/golden/outputs.sha256"));
}

#[test]
fn seed_override_changes_topics_only() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(Command::Topics, &load("demo/config.toml", a.path(), Some(1)), false).unwrap();
    run(Command::Topics, &load("demo/config.toml", b.path(), Some(2)), false).unwrap();
    let read = |d: &Path| std::fs::read(d.join("topics_announcement_theta.csv")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));

    let c = tempfile::tempdir().unwrap();
    run(Command::Topics, &load("demo/config.toml", c.path(), Some(1)), false).unwrap();
    assert_eq!(read(a.path()), read(c.path()));
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("nine/config.toml", dir.path(), None);
    run(Command::Ingest, &cfg, false).unwrap();
    let err = run(Command::Ingest, &cfg, false).unwrap_err();
    assert!(matches!(err, cbtext::error::Error::WouldOverwrite(_)), "{err}");
    run(Command::Ingest, &cfg, true).unwrap();
}

fn cli(args: &[&str], envs: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_cbtext"));
    cmd.args(args).env_remove("CBTEXT_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

/// Copies the nine-document fixture with `edit` applied to its config.
fn edited_nine(dir: &Path, edit: impl Fn(&str) -> String) -> PathBuf {
    let src = fixture("nine");
    for entry in ["manifest.csv", "texts"] {
        copy_tree(&src.join(entry), &dir.join(entry));
    }
    copy_tree(&fixture("lexicons"), &dir.parent().unwrap().join("lexicons"));
    let text = std::fs::read_to_string(src.join("config.toml")).unwrap();
    let path = dir.join("config.toml");
    std::fs::write(&path, edit(&text)).unwrap();
    path
}

fn copy_tree(from: &Path, to: &Path) {
    if from.is_dir() {
        std::fs::create_dir_all(to).unwrap();
        for e in std::fs::read_dir(from).unwrap() {
            let e = e.unwrap();
            copy_tree(&e.path(), &to.join(e.file_name()));
        }
    } else {
        std::fs::copy(from, to).unwrap();
    }
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out_s = out.to_str().unwrap();
    let good = fixture("nine/config.toml");
    let good_s = good.to_str().unwrap();

    let (code, err) = cli(&["ingest", "--config", good_s, "--out", out_s], &[]);
    assert_eq!(code, 0, "{err}");

    // second run without --force is a runtime failure
    let (code, err) = cli(&["ingest", "--config", good_s, "--out", out_s], &[]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("--force"), "{err}");
    let (code, err) = cli(&["ingest", "--config", good_s, "--out", out_s, "--force"], &[]);
    assert_eq!(code, 0, "{err}");

    let work = tmp.path().join("case");
    std::fs::create_dir_all(&work).unwrap();
    let missing = edited_nine(&work, |t| t.replace("../lexicons/lm.csv", "../lexicons/absent.csv"));
    let (code, err) = cli(&["score", "--config", missing.to_str().unwrap(), "--out", out_s, "--force"], &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("lexicons.lm.path"), "{err}");

    let bad_kind = edited_nine(&work, |t| t.replacen("kind = \"ratio\"", "kind = \"ratios\"", 1));
    let (code, err) = cli(&["score", "--config", bad_kind.to_str().unwrap(), "--out", out_s, "--force"], &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("indicators[0].kind"), "{err}");

    let (code, err) = cli(&["ingest", "--config", "/nonexistent/config.toml"], &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("--config"), "{err}");

    let (code, err) = cli(&["ingest", "--config", good_s, "--out", out_s, "--force"], &[("CBTEXT_THREADS", "zero")]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("CBTEXT_THREADS"), "{err}");
    let (code, err) = cli(&["score", "--config", good_s, "--out", out_s, "--force"], &[("CBTEXT_THREADS", "2")]);
    assert_eq!(code, 0, "{err}");

    // a manifest row pointing at a missing text is a runtime failure
    let broken = edited_nine(&work, |t| t.to_string());
    let manifest = work.join("manifest.csv");
    let text = std::fs::read_to_string(&manifest).unwrap().replace("texts/a1.txt", "texts/gone.txt");
    std::fs::write(&manifest, text).unwrap();
    let (code, err) = cli(&["ingest", "--config", broken.to_str().unwrap(), "--out", out_s, "--force"], &[]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("gone.txt"), "{err}");

    // topics without a seed is a config error unless --seed supplies one
    let topics = edited_nine(&work, |t| {
        format!("{t}\n[topics]\niterations = 20\n\n[[topics.slices]]\nname = \"all\"\nk = 2\n")
    });
    let (code, err) = cli(&["topics", "--config", topics.to_str().unwrap(), "--out", out_s, "--force"], &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("seed"), "{err}");
    let (code, err) =
        cli(&["topics", "--config", topics.to_str().unwrap(), "--out", out_s, "--force", "--seed", "3"], &[]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn empty_manifest_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("case");
    std::fs::create_dir_all(&work).unwrap();
    let cfg_path = edited_nine(&work, |t| t.to_string());
    std::fs::write(work.join("manifest.csv"), "id,channel,date,filename\n").unwrap();
    let cfg = RunConfig::load_with(
        &cfg_path,
        &Overrides {
            seed: None,
            output_dir: Some(tmp.path().join("out")),
        },
    )
    .unwrap();
    let err = run(Command::Ingest, &cfg, false).unwrap_err();
    assert!(err.to_string().contains("no documents"), "{err}");
}

#[test]
fn report_manifest_records_inputs_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("demo/config.toml", dir.path(), None);
    run(Command::Report, &cfg, false).unwrap();
    let text = std::fs::read_to_string(dir.path().join("run_manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["seed"], 20200315);
    assert_eq!(json["documents"], 238);
    let outputs: BTreeMap<String, String> = json["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| (o["file"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
        .collect();
    for (file, digest) in &outputs {
        assert_eq!(&sha256_file(&dir.path().join(file)).unwrap(), digest, "{file}");
    }
    assert!(outputs.contains_key("fig1_sentiment.csv"));
    assert_eq!(json["topic_models"].as_array().unwrap().len(), 4);
    assert!(json["inputs"].as_array().unwrap().iter().any(|i| i["role"] == "external:vix"));
}

#[test]
fn three_document_fixture_scores_shifted_polarity() {
    use cbtext::corpus::{load_corpus, NormalizationRules};
    use cbtext::lexicon::{default_shifters, load_sentiment_lexicon};
    use cbtext::sentiment::{Indicator, IndicatorKind};

    let root = fixture("three");
    let mut corpus = load_corpus(&root, &root.join("manifest.csv")).unwrap();
    corpus.tokenize_all(&NormalizationRules::default());
    let lex = load_sentiment_lexicon(&fixture("lexicons/huliu.csv")).unwrap();
    let ind = Indicator::new("huliu_polarity", IndicatorKind::PolarityClasses(lex, default_shifters()));
    let scores: Vec<f64> = corpus
        .tokenized_in_order()
        .map(|(_, toks)| ind.score(toks).unwrap())
        .collect();
    // "stable", "not good", "very good"
    assert_eq!(scores, vec![1.0, -1.0, 1.8]);
}
