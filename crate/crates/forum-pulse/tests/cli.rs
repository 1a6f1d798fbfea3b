use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], project: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forum-pulse"))
        .arg("--project")
        .arg(project)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(cli(&["topics", "fit"], tmp.path()).status.code(), Some(1));
    assert_eq!(cli(&["graph", "export", "--format", "png"], tmp.path()).status.code(), Some(1));
    let help = cli(&["--help"], tmp.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("metrics.csv"));
    assert_eq!(cli(&["--version"], tmp.path()).status.code(), Some(0));
}

#[test]
fn missing_inputs_are_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&["ingest", "--posts", "/no/such.jsonl", "--comments", "/no/c.jsonl"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage ingest"));
    let out = cli(&["topics", "dominance"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("topics_dominance"));
}

#[test]
fn stage_commands_chain() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let (posts, comments) = (fixture("posts.jsonl"), fixture("comments.jsonl"));
    let steps: &[&[&str]] = &[
        &["ingest", "--posts", &posts, "--comments", &comments],
        &["stats"],
        &["topics", "fit", "--k", "4", "--seed", "3", "--iters", "60", "--burn-in", "30"],
        &["topics", "dominance"],
        &["topics", "cooccur"],
        &["topics", "timeline"],
        &["lexicon", "profile", "--components", "40"],
        &["users", "metrics"],
        &["users", "top", "--k", "3"],
        &["graph", "build"],
        &["graph", "export", "--format", "graphml"],
        &["report"],
    ];
    for args in steps {
        let out = cli(args, p);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let art = p.join("artifacts");
    let model = std::fs::read_to_string(art.join("topic_words.csv")).unwrap();
    assert_eq!(model.lines().count(), 1 + 4 * 10);
    let components = std::fs::read_to_string(art.join("components.csv")).unwrap();
    assert_eq!(components.lines().count(), 1 + 20);
    assert!(art.join("graph.graphml").is_file());
    let out = cli(&["users", "top", "--k", "0"], p);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_command_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = tmp.path().join(dir).to_string_lossy().into_owned();
        let o = cli(&["fixture", "--seed", "5", "--posts", "20", "--out", &out], tmp.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["posts.jsonl", "comments.jsonl"] {
        assert_eq!(
            std::fs::read(tmp.path().join("a").join(f)).unwrap(),
            std::fs::read(tmp.path().join("b").join(f)).unwrap()
        );
    }
    let o = cli(&["fixture", "--posts", "0", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    let body = serde_json::json!({
        "ingest.posts": fixture("posts.jsonl"),
        "ingest.comments": fixture("comments.jsonl"),
        "topics.kmax": 4,
        "lda.iterations": 60,
        "lda.burn_in": 30,
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let mut digests = Vec::new();
    for threads in ["1", "4"] {
        let project = tmp.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_forum-pulse"))
            .args(["--project", &project.to_string_lossy(), "run", "--config", &cfg])
            .env("FORUM_PULSE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        digests.push(std::fs::read(project.join("artifacts/model.json")).unwrap());
    }
    assert!(digests[0] == digests[1]);
}
