use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gridqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridqa"))
        .args(args)
        .env_remove("GRIDQA_POOL_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["generate", "--out", out.to_str().unwrap(), "--set", "n_samples=24"];
    args.extend_from_slice(extra);
    gridqa(&args)
}

#[test]
fn generate_validate_and_self_score() {
    let dir = tempfile::tempdir().unwrap();
    let o = generate(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["train.jsonl", "valid.jsonl", "test.jsonl", "stats.json", "config.toml"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let splits: Vec<String> =
        ["train", "valid", "test"].iter().map(|s| dir.path().join(format!("{s}.jsonl")).display().to_string()).collect();
    let mut args = vec!["validate"];
    args.extend(splits.iter().map(String::as_str));
    let o = gridqa(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("24 samples checked, 0 invalid"));

    let train = &splits[0];
    let o = gridqa(&["score", "--predictions", train, "--references", train]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["overall"]["exact_match_error"], 0.0);

    let o = gridqa(&["inspect", train, "--limit", "1"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Q: ") && text.contains("A: ") && text.contains("t=0:"), "{text}");
}

#[test]
fn same_config_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate(a.path(), &["--set", "seed=5"]);
    generate(b.path(), &["--set", "seed=5"]);
    for f in ["train.jsonl", "valid.jsonl", "test.jsonl", "stats.json"] {
        assert!(fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    // The recorded config differs only in its output directory.
    let cfg = |d: &Path| {
        let text = fs::read_to_string(d.join("config.toml")).unwrap();
        text.lines().filter(|l| !l.starts_with("output_dir")).map(str::to_string).collect::<Vec<_>>()
    };
    assert_eq!(cfg(a.path()), cfg(b.path()));
}

#[test]
fn config_file_preset_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "preset = \"properties\"\nworld_size = 12\n").unwrap();
    let o = gridqa(&["config", "--config", cfg.to_str().unwrap(), "--set", "n_npcs=6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    for line in ["world_size = 12", "n_npcs = 6", "world_steps = 0", "n_snapshots = 1"] {
        assert!(text.lines().any(|l| l == line), "{line} not in\n{text}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = gridqa(&["generate", "--out", out, "--set", "no_such_key=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_key"), "{}", stderr(&o));

    assert_eq!(gridqa(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gridqa(&["generate", "--set", "oops"]).status.code(), Some(1));

    let o = gridqa(&[
        "generate", "--out", out, "--set", "world_size=4", "--set", "n_npcs=40", "--set", "max_scene_attempts=1",
        "--set", "n_samples=2",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let missing = dir.path().join("missing.jsonl");
    let o = gridqa(&["score", "--predictions", missing.to_str().unwrap(), "--references", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn misaligned_predictions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &[]);
    let train = dir.path().join("train.jsonl");
    let preds = dir.path().join("preds.jsonl");
    fs::write(&preds, "{\"id\": \"nope\", \"answer_text\": \"x\"}\n").unwrap();
    let o = gridqa(&["score", "--predictions", preds.to_str().unwrap(), "--references", train.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown prediction ids [nope]"), "{}", stderr(&o));

    let o = gridqa(&["inspect", train.to_str().unwrap(), "--id", "missing"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupted_records_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &[]);
    let train = dir.path().join("train.jsonl");
    let text = fs::read_to_string(&train).unwrap();
    let mut first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["answer_text"] = "definitely wrong".into();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, format!("{first}\n")).unwrap();
    let o = gridqa(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("differs from the oracle"), "{}", stderr(&o));
}

#[test]
fn pool_directory_replaces_names() {
    let dir = tempfile::tempdir().unwrap();
    let pools = dir.path().join("pools");
    fs::create_dir(&pools).unwrap();
    let names = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"];
    fs::write(pools.join("names.txt"), names.join("\n")).unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_gridqa"))
        .args(["generate", "--out", out.to_str().unwrap(), "--set", "n_samples=10"])
        .env("GRIDQA_POOL_DIR", &pools)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for split in ["train", "valid", "test"] {
        for line in fs::read_to_string(out.join(format!("{split}.jsonl"))).unwrap().lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            for t in v["context_relational"]["triples"].as_array().unwrap() {
                if t["triples_words"][0] == "has_name" {
                    let n = t["triples_words"][1].as_str().unwrap();
                    assert!(names.contains(&n), "{n}");
                }
            }
        }
    }
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(&dir).unwrap() {
        let path = e.unwrap().path();
        let o = gridqa(&["config", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
        n += 1;
    }
    assert_eq!(n, 6);
}
