use std::path::Path;
use std::process::{Command, Output};

fn bench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaoa-bench"))
        .current_dir(dir)
        .args(args)
        .env_remove("QAOA_OUT_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

const TINY: &str = "n = 8\ne_p_values = [0.5]\nper_class = 2\ndepths = [1]\nbudgets = [5000]\nworkers = 1\n";

#[test]
fn tiny_pipeline_and_determinism() {
    let mut artifacts = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("c.toml"), TINY).unwrap();
        for cmd in ["generate", "run", "analyze"] {
            let o = bench(dir.path(), &["--config", "c.toml", cmd]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let out = dir.path().join("out");
        let journal = std::fs::read_to_string(out.join("journal.jsonl")).unwrap();
        assert_eq!(journal.lines().count(), 2);
        let mut lines: Vec<String> = journal.lines().map(str::to_owned).collect();
        lines.sort();
        let mut files = vec![lines.join("\n")];
        for name in files_in(&out) {
            if name != "journal.jsonl" {
                files.push(std::fs::read_to_string(out.join(&name)).unwrap());
            }
        }
        artifacts.push(files);
    }
    assert_eq!(artifacts[0], artifacts[1]);
}

#[test]
fn single_edge_smoke_has_mean_ratio_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "n = 2\ne_p_values = [1.0]\nper_class = 1\ndepths = [1]\nbudgets = [10000]\n",
    )
    .unwrap();
    assert!(bench(dir.path(), &["--config", "c.toml", "generate"]).status.success());
    let run = bench(dir.path(), &["--config", "c.toml", "run", "--check"]);
    assert!(run.status.success());
    assert!(stdout(&run).contains("0 mismatches"));
    let o = bench(dir.path(), &["--config", "c.toml", "analyze", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("mean ratio 1.0000"), "{}", stdout(&o));
    let files = files_in(&dir.path().join("out"));
    assert!(files.iter().all(|f| !f.ends_with(".svg")), "{files:?}");
    assert!(files.contains(&"boxplot_p.csv".to_string()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "e_p_values = [0.5, 1.3]\n").unwrap();
    let o = bench(dir.path(), &["--config", "bad.toml", "generate"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("e_p_values"));

    std::fs::write(dir.path().join("c.toml"), TINY).unwrap();
    assert_eq!(bench(dir.path(), &["--config", "c.toml", "run"]).status.code(), Some(4));
    assert_eq!(
        bench(dir.path(), &["--config", "missing.toml", "run"]).status.code(),
        Some(4)
    );

    assert!(bench(dir.path(), &["--config", "c.toml", "generate"]).status.success());
    let empty = bench(dir.path(), &["--config", "c.toml", "analyze"]);
    assert_ne!(empty.status.code(), Some(0));

    std::fs::write(
        dir.path().join("big.toml"),
        "n = 30\ndepths = [1]\nbudgets = [10]\nper_class = 1\ne_p_values = [0.5]\n",
    )
    .unwrap();
    assert!(bench(dir.path(), &["--config", "big.toml", "generate"])
        .status
        .success());
    let run = bench(dir.path(), &["--config", "big.toml", "run"]);
    assert_eq!(run.status.code(), Some(5));
    assert!(stdout(&run).contains("1 failed"), "{}", stdout(&run));
}

#[test]
fn env_overrides_out_dir_and_fresh_restarts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), TINY).unwrap();
    let with_env = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qaoa-bench"))
            .current_dir(dir.path())
            .args(args)
            .env("QAOA_OUT_DIR", "elsewhere")
            .env("RUST_LOG", "warn")
            .output()
            .unwrap()
    };
    assert!(with_env(&["--config", "c.toml", "generate"]).status.success());
    assert!(dir.path().join("elsewhere/manifest.json").exists());
    assert!(with_env(&["--config", "c.toml", "run"]).status.success());
    let again = with_env(&["--config", "c.toml", "run"]);
    assert!(stdout(&again).contains("0 new records, 2 already journaled"));
    let fresh = with_env(&["--config", "c.toml", "run", "--fresh", "--workers", "2"]);
    assert!(
        stdout(&fresh).contains("2 new records, 0 already journaled"),
        "{}",
        stdout(&fresh)
    );
}

#[test]
fn shipped_configs_are_valid() {
    use qaoa_core::cli::RunConfig;
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = RunConfig::load(&dir.join("default.toml")).unwrap();
    default.validate().unwrap();
    let builtin = RunConfig::default();
    assert_eq!(
        (default.benchmark(), default.settings().budgets),
        (builtin.benchmark(), builtin.settings().budgets)
    );
    let full = RunConfig::load(&dir.join("full-budget.toml")).unwrap();
    full.validate().unwrap();
    assert_eq!(full.e_p_values.len() * full.per_class, 90);
}
