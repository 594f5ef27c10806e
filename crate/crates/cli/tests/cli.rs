use std::path::Path;
use std::process::{Command, Output};

use molsynth_core::corpus::synthetic_corpus;

fn molsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_molsynth")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = molsynth(args);
    assert!(out.status.success(), "molsynth {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(dir: &Path, n: usize) -> (std::path::PathBuf, std::path::PathBuf) {
    let corpus = synthetic_corpus(n, 3);
    let smiles = dir.join("mols.smi");
    let captions = dir.join("captions.txt");
    std::fs::write(&smiles, corpus.iter().map(|c| format!("{}\n", c.smiles)).collect::<String>()).unwrap();
    std::fs::write(&captions, corpus.iter().map(|c| format!("{}\n", c.caption)).collect::<String>()).unwrap();
    (smiles, captions)
}

#[test]
fn version_lists_tables() {
    let out = ok(&["--version"]);
    assert!(out.starts_with("molsynth 0.1.0\n"), "{out}");
    assert!(out.contains("table v"), "{out}");
}

#[test]
fn parse_skips_or_rejects_invalid_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.smi");
    std::fs::write(&input, "OCC ethanol\nC1CC\n\nCCO\n").unwrap();
    let out = ok(&["parse", "--in", p(&input)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], lines[1]);
    let strict = molsynth(&["parse", "--in", p(&input), "--strict"]);
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 2"));
}

#[test]
fn props_writes_one_row_per_valid_smiles() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.smi");
    std::fs::write(&input, "CCO\nnot-a-smiles\nc1ccccc1\n").unwrap();
    let out = ok(&["props", "--in", p(&input)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("smiles,BalabanJ,ExactMolWt,MolLogP,TPSA,QED"));
    assert!(lines[1].starts_with("CCO,"));
    assert!(lines[1].contains(",46.0419,"), "{}", lines[1]);
}

#[test]
fn synth_count_is_tasks_times_count_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (smiles, captions) = write_corpus(dir.path(), 150);
    let triplets = dir.path().join("t.csv");
    ok(&["gen-triplets", "--smiles", p(&smiles), "--captions", p(&captions), "--out", p(&triplets)]);
    let a = dir.path().join("a.jsonl");
    ok(&["--seed", "7", "synth", "--triplets", p(&triplets), "--count", "100", "--out", p(&a)]);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 400);
    for task in ["\"MC\"", "\"TBMG\"", "\"MPP\"", "\"MCMG\""] {
        assert_eq!(text.lines().filter(|l| l.contains(&format!("\"task\":{task}"))).count(), 100, "{task}");
    }
    // The echo next to the output replays the run byte for byte.
    let cfg = dir.path().join("a.jsonl.cfg");
    let echo = std::fs::read_to_string(&cfg).unwrap();
    assert!(echo.contains("seed = 7") && echo.contains("count = 100"), "{echo}");
    std::fs::remove_file(&a).unwrap();
    ok(&["--config", p(&cfg), "synth"]);
    assert_eq!(std::fs::read_to_string(&a).unwrap(), text);
}

#[test]
fn command_line_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let (smiles, captions) = write_corpus(dir.path(), 60);
    let triplets = dir.path().join("t.csv");
    ok(&["gen-triplets", "--smiles", p(&smiles), "--captions", p(&captions), "--out", p(&triplets)]);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("triplets = {}\ntasks = mc\ncount = 20\n", triplets.display())).unwrap();
    let out = ok(&["--config", p(&cfg), "synth", "--count", "5"]);
    assert_eq!(out.lines().count(), 5);

    std::fs::write(&cfg, "epochs = 2\n").unwrap();
    let bad = molsynth(&["--config", p(&cfg), "synth"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown key 'epochs'"));
}

#[test]
fn split_writes_three_disjoint_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ids.txt");
    std::fs::write(&input, (0..100).map(|i| format!("id{i}\n")).collect::<String>()).unwrap();
    let out_dir = dir.path().join("parts");
    ok(&["--seed", "4", "split", "--in", p(&input), "--out-dir", p(&out_dir)]);
    let mut all = Vec::new();
    for (name, n) in [("train", 80), ("validation", 10), ("test", 10)] {
        let text = std::fs::read_to_string(out_dir.join(format!("{name}.txt"))).unwrap();
        assert_eq!(text.lines().count(), n, "{name}");
        all.extend(text.lines().map(str::to_string));
    }
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 100);
}

#[test]
fn eval_multiconstraint_and_report_merge() {
    let dir = tempfile::tempdir().unwrap();
    let props = dir.path().join("props.csv");
    let mols = dir.path().join("mols.smi");
    std::fs::write(&mols, "CCO\nc1ccccc1O\nCC(=O)Nc1ccc(O)cc1\n").unwrap();
    ok(&["props", "--in", p(&mols), "--out", p(&props)]);
    let csv_out = dir.path().join("mc.csv");
    ok(&[
        "eval", "--task", "multiconstraint", "--pred", p(&mols), "--constraints", p(&props), "--report", "csv", "--label", "self",
        "--out", p(&csv_out),
    ]);
    let text = std::fs::read_to_string(&csv_out).unwrap();
    assert!(text.contains("self"), "{text}");
    let md = ok(&["report", "--in", p(&csv_out), "--in", p(&csv_out)]);
    assert!(md.contains('|') && md.matches("self").count() >= 2, "{md}");
}

#[test]
fn errors_exit_non_zero() {
    let missing = molsynth(&["props", "--in", "/nonexistent/file.smi"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    let usage = molsynth(&["synth", "--bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    let task = molsynth(&["eval", "--task", "nope", "--pred", "/dev/null"]);
    assert_eq!(task.status.code(), Some(1));
}
