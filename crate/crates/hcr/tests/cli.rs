use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hcr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcr")).args(args).current_dir(cwd).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hcr(&["--help"], dir.path())), 0);
    assert_eq!(code(&hcr(&["no-such-command"], dir.path())), 1);

    fs::write(dir.path().join("bad.json"), r#"{"split": {"train": 0, "test": 1}}"#).unwrap();
    assert_eq!(code(&hcr(&["compare-extractors", "--config", "bad.json"], dir.path())), 1);
    fs::write(dir.path().join("typo.json"), r#"{"sead": 1}"#).unwrap();
    assert_eq!(code(&hcr(&["compare-extractors", "--config", "typo.json"], dir.path())), 1);

    let missing = hcr(&["extract", "--input", "nope.png", "--extractor", "proposed"], dir.path());
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.png"));

    fs::write(
        dir.path().join("blank.pgm"),
        b"P5\n4 4\n255\n\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff",
    )
    .unwrap();
    let blank = hcr(&["extract", "--input", "blank.pgm", "--extractor", "proposed"], dir.path());
    assert_eq!(code(&blank), 2);
}

#[test]
fn generate_preprocess_and_extract() {
    let dir = tempfile::tempdir().unwrap();
    let gen = hcr(&["gen-synthetic", "--alphabet", "A,L", "--samples-per-class", "2", "--out", "glyphs"], dir.path());
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path().join("glyphs"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["A_0001.pgm", "A_0002.pgm", "L_0001.pgm", "L_0002.pgm"]);

    let pre = hcr(
        &["preprocess", "--input", "glyphs/L_0001.pgm", "--out-skeleton", "skel.pgm", "--out-binary", "bin.pgm"],
        dir.path(),
    );
    assert_eq!(code(&pre), 0, "{}", String::from_utf8_lossy(&pre.stderr));
    let skel = hcr::io::load_image(&dir.path().join("skel.pgm")).unwrap();
    let bin = hcr::io::load_image(&dir.path().join("bin.pgm")).unwrap();
    let ink = |img: &hcr_core::image::GrayImage| img.data().iter().filter(|&&v| v == 0).count();
    assert!(ink(&skel) > 0 && ink(&skel) < ink(&bin));

    let csv = hcr(&["extract", "--input", "glyphs/A_0001.pgm", "--extractor", "proposed"], dir.path());
    assert_eq!(code(&csv), 0);
    let values: Vec<f64> =
        String::from_utf8(csv.stdout).unwrap().trim().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 145);

    let json =
        hcr(&["extract", "--input", "glyphs/A_0001.pgm", "--extractor", "gradient", "--out", "g.json"], dir.path());
    assert_eq!(code(&json), 0);
    let fv: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(fv["values"].as_array().unwrap().len(), 72);
}

#[test]
fn train_then_evaluate_a_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"alphabet": ["C", "O", "X"], "split": {"train": 2, "test": 2}}"#)
        .unwrap();
    let train = hcr(&["train", "--config", "cfg.json", "--extractor", "hybrid", "--out", "run"], dir.path());
    assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));
    assert!(dir.path().join("run/model.json").exists());

    let eval = hcr(&["evaluate", "--config", "cfg.json", "--model", "run/model.json", "--out", "run"], dir.path());
    assert_eq!(code(&eval), 0, "{}", String::from_utf8_lossy(&eval.stderr));
    let report = hcr::report::read_report(&dir.path().join("run/report.json")).unwrap();
    assert_eq!(report.results.len(), 1);
    assert_eq!(report.results[0].accuracy, 1.0);

    let show = hcr(&["show", "run/report.json"], dir.path());
    assert_eq!(code(&show), 0);
    assert!(String::from_utf8_lossy(&show.stdout).contains("Zone-based hybrid / MDC"));

    fs::write(dir.path().join("other.json"), r#"{"alphabet": ["C", "O"], "split": {"train": 2, "test": 2}}"#).unwrap();
    let mismatch = hcr(&["evaluate", "--config", "other.json", "--model", "run/model.json", "--out", "x"], dir.path());
    assert_eq!(code(&mismatch), 1);
}

#[test]
fn mlp_training_writes_a_log() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"alphabet": ["I", "O"], "split": {"train": 2, "test": 1}, "mlp": {"hidden": 3, "max_iterations": 4}}"#,
    )
    .unwrap();
    let out = hcr(
        &["train", "--config", "cfg.json", "--extractor", "geometric", "--classifier", "mlp_lm", "--out", "m"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let log = fs::read_to_string(dir.path().join("m/training_log.csv")).unwrap();
    assert!(log.starts_with("iteration,mse,mu,accepted\n"));
    assert!(log.lines().count() >= 2);
}
