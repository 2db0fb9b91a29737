use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use git2::{Repository, Signature, Time};
use tempfile::TempDir;

fn cvalue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvalue")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Three Java commits by two authors and one doc-only commit.
fn fixture() -> (TempDir, Vec<String>) {
    let dir = tempfile::tempdir().unwrap();
    let repo = Repository::init(dir.path()).unwrap();
    let steps: [(&str, &str, &str, &str); 4] = [
        ("Ann", "ann@example.com", "src/A.java", "class A {\n  int f(int x) {\n    return x + 1;\n  }\n}\n"),
        (
            "Ben",
            "ben@example.com",
            "src/A.java",
            "class A {\n  int f(int x) {\n    if (x > 2) {\n      x = x * 2;\n    }\n    return x + 1;\n  }\n  int g() { return f(3); }\n}\n",
        ),
        ("Ann", "ann@example.com", "src/B.java", "class B {\n  int h(A a) {\n    return a.g() + a.f(1);\n  }\n}\n"),
        ("docs[bot]", "docs[bot]@users.noreply.github.com", "README.md", "# notes\n"),
    ];
    let mut ids = Vec::new();
    for (i, (name, email, path, text)) in steps.iter().enumerate() {
        let full = dir.path().join(path);
        std::fs::create_dir_all(full.parent().unwrap()).unwrap();
        std::fs::write(&full, text).unwrap();
        let mut index = repo.index().unwrap();
        index.add_path(Path::new(path)).unwrap();
        index.write().unwrap();
        let tree = repo.find_tree(index.write_tree().unwrap()).unwrap();
        let sig = Signature::new(name, email, &Time::new(1_700_000_000 + 60 * i as i64, 0)).unwrap();
        let parent = repo.head().ok().map(|h| h.peel_to_commit().unwrap());
        let parents: Vec<_> = parent.iter().collect();
        let id = repo.commit(Some("HEAD"), &sig, &sig, "change", &tree, &parents).unwrap();
        ids.push(id.to_string());
    }
    (dir, ids)
}

fn analyze(repo: &Path, out: &Path) -> Output {
    cvalue(&["analyze", repo.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn analyzed() -> (TempDir, TempDir, PathBuf, Vec<String>) {
    let (repo, ids) = fixture();
    let work = tempfile::tempdir().unwrap();
    let run = work.path().join("run.json");
    let o = analyze(repo.path(), &run);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (repo, work, run, ids)
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(cvalue(&["--help"]).status.code(), Some(0));
    assert_eq!(cvalue(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(cvalue(&["report"]).status.code(), Some(1));
}

#[test]
fn not_a_repository_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = analyze(dir.path(), &dir.path().join("run.json"));
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("run.json").exists());
}

#[test]
fn unknown_branch_exits_2() {
    let (repo, _) = fixture();
    let out = repo.path().join("run.json");
    let o = cvalue(&["analyze", repo.path().to_str().unwrap(), "--branch", "nope", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_give_identical_reports() {
    let (repo, work, first, _) = analyzed();
    let second = work.path().join("again.json");
    assert!(analyze(repo.path(), &second).status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    let a = cvalue(&["report", first.to_str().unwrap(), "--format", "json"]);
    let b = cvalue(&["report", second.to_str().unwrap(), "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["commits"].as_array().unwrap().len(), 4);
}

#[test]
fn csv_report_and_inflated_filter() {
    let (_repo, _work, run, _) = analyzed();
    let o = cvalue(&["report", run.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4, "header plus three developers:\n{text}");
    let o = cvalue(&["report", run.to_str().unwrap(), "--format", "csv", "--inflated"]);
    let text = stdout(&o);
    assert!(text.contains("docs[bot]"), "{text}");
    assert!(!text.contains("ben@example.com"), "{text}");
}

#[test]
fn timing_goes_to_stderr() {
    let (repo, _) = fixture();
    let work = tempfile::tempdir().unwrap();
    let out = work.path().join("run.json");
    let o = cvalue(&["analyze", repo.path().to_str().unwrap(), "--out", out.to_str().unwrap(), "--timing"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("total:"));
}

#[test]
fn eval_correlates_labels() {
    let (_repo, work, run, ids) = analyzed();
    let labels = work.path().join("labels.csv");
    let body: String = ids[..3].iter().enumerate().map(|(i, id)| format!("{},{}\n", &id[..10], i + 1)).collect();
    std::fs::write(&labels, format!("commit,score\n{body}")).unwrap();
    let o = cvalue(&["eval", "--labels", labels.to_str().unwrap(), "--run", run.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("n = 3"), "{text}");
    let r: f64 = text.lines().find_map(|l| l.strip_prefix("r_s = ")).unwrap().parse().unwrap();
    assert!((-1.0..=1.0).contains(&r));
}

#[test]
fn eval_input_errors_exit_3() {
    let (_repo, work, run, ids) = analyzed();
    let labels = work.path().join("labels.csv");
    let eval = |labels: &Path, run: &Path| {
        cvalue(&["eval", "--labels", labels.to_str().unwrap(), "--run", run.to_str().unwrap()]).status.code()
    };
    std::fs::write(&labels, "deadbeef,1\n").unwrap();
    assert_eq!(eval(&labels, &run), Some(3), "unknown commit");
    std::fs::write(&labels, format!("{},1\n{},oops\n", ids[0], ids[1])).unwrap();
    assert_eq!(eval(&labels, &run), Some(3), "bad score");
    std::fs::write(&labels, format!("{},1\n", ids[0])).unwrap();
    assert_eq!(eval(&labels, &run), Some(3), "too few pairs");
    assert_eq!(eval(&labels, &work.path().join("missing.json")), Some(3), "missing run");
}
