use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use gestalt_core::dataset::{read_curve_csv, read_report_csv, write_predictions, Manifest};
use gestalt_core::face::synthetic_face;
use serde_json::Value;

fn gestalt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gestalt")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = gestalt(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code and error category of a failing run.
fn fails(args: &[&str]) -> (i32, String) {
    let out = gestalt(args);
    assert!(!out.status.success(), "{args:?} succeeded");
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    (out.status.code().unwrap(), err["error"].as_str().unwrap().to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_verify_then_detect_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["gen", "--task", "count", "--round", "s1", "--count", "12", "--seed", "3", "--out", s(dir.path())]);
    assert!(out.contains("12 records [6, 6]"), "{out}");
    let set = dir.path().join("count/s1");
    let report = ok(&["verify", "--manifest", s(&set)]);
    assert!(report.contains("agreement 100.00%"), "{report}");

    let m = Manifest::open(&set).unwrap();
    std::fs::write(m.path_of(&m.records[0]), b"not a png").unwrap();
    let dump = dir.path().join("dump");
    assert_eq!(
        fails(&["verify", "--manifest", s(&set), "--dump", s(&dump)]),
        (5, "integrity".into())
    );
    let dumped: Value = serde_json::from_str(&std::fs::read_to_string(dump.join("count-s1/report.json")).unwrap()).unwrap();
    assert_eq!(dumped["unreadable"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_dumps_oracle_disagreements() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--task", "global-sym", "--round", "A1", "--count", "4", "--out", s(dir.path())]);
    let set = dir.path().join("global-sym/A1");
    let mut m = Manifest::open(&set).unwrap();
    // Swap the label of a record; the oracle should object.
    m.records[0].label = m.records[0].label.flipped();
    m.class_counts = [1, 3];
    m.save().unwrap();
    let dump = dir.path().join("dump");
    let (code, cat) = fails(&["verify", "--manifest", s(&set), "--no-regenerate", "--dump", s(&dump)]);
    assert_eq!((code, cat.as_str()), (5, "integrity"));
    let copied = dump.join("global-sym-A1").join(m.records[0].path.replace('/', "_"));
    assert!(copied.is_file(), "{}", copied.display());
}

#[test]
fn bad_names_and_sizes_exit_with_categories() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    assert_eq!(fails(&["gen", "--task", "nope", "--round", "A1", "--count", "2", "--out", out]), (2, "unknown-name".into()));
    assert_eq!(fails(&["gen", "--task", "fate", "--round", "r9", "--count", "2", "--out", out]), (2, "unknown-name".into()));
    assert_eq!(fails(&["gen", "--task", "fate", "--round", "r1", "--count", "0", "--out", out]), (2, "invalid-input".into()));
    assert_eq!(fails(&["curve", "--task", "count", "--sizes", "0", "--work", out]), (2, "invalid-input".into()));
    assert_eq!(fails(&["verify", "--manifest", s(&dir.path().join("missing"))]).1, "io");
}

#[test]
fn curriculum_sets_verify_round_by_round() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["curriculum", "--a1", "8", "--c1", "6", "--seed", "2", "--out", s(dir.path())]);
    assert_eq!(out.lines().count(), 7);
    let g = dir.path().join("global-sym");
    let sets: Vec<String> = ["A1", "A2", "A3", "C1", "D1-A1", "D2-A2", "D3-A3"]
        .iter()
        .map(|r| g.join(r).to_string_lossy().into_owned())
        .collect();
    let mut args = vec!["verify"];
    for set in &sets {
        args.extend(["--manifest", set]);
    }
    let report = ok(&args);
    assert_eq!(report.lines().filter(|l| l.contains("agreement 100.00%")).count(), 7, "{report}");
    assert!(report.contains("global-sym/A3: 32 records"), "{report}");

    let d = dir.path().join("d1");
    ok(&["derive", "--op", "D1", "--source", &sets[0], "--seed", "5", "--count", "4", "--out", s(&d)]);
    assert_eq!(Manifest::open(&d).unwrap().round, "D1(A1)");
    let (_, cat) = fails(&["derive", "--op", "D9", "--source", &sets[0], "--out", s(&d)]);
    assert_eq!(cat, "unknown-name");
}

#[test]
fn eval_scores_predictions_and_rejects_gaps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--task", "types", "--round", "train", "--count", "10", "--out", s(dir.path())]);
    let set = dir.path().join("types/train");
    let m = Manifest::open(&set).unwrap();
    let mut preds: Vec<_> = m.records.iter().map(|r| (r.path.clone(), r.label)).collect();
    // One class-1 record called class 0: a false positive.
    let fp = preds.iter().position(|(_, l)| l.id() == 1).unwrap();
    preds[fp].1 = preds[fp].1.flipped();
    let pred = dir.path().join("pred.csv");
    write_predictions(&pred, &preds).unwrap();
    let csv = dir.path().join("report.csv");
    let out = ok(&["eval", "--pred", s(&pred), "--manifest", s(&set), "--report", s(&csv)]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["tp"].as_u64(), v["fp"].as_u64(), v["tn"].as_u64(), v["fn"].as_u64()), (Some(5), Some(1), Some(4), Some(0)));
    assert_eq!(v["accuracy"].as_f64(), Some(90.0));
    assert_eq!(read_report_csv(&csv).unwrap().tp, 5);

    write_predictions(&pred, &preds[1..]).unwrap();
    assert_eq!(fails(&["eval", "--pred", s(&pred), "--manifest", s(&set)]), (6, "evaluation".into()));
}

#[test]
fn train_predict_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let root = s(dir.path());
    ok(&["gen", "--task", "count", "--round", "s1", "--count", "16", "--seed", "1", "--out", root]);
    let train = dir.path().join("count/s1");
    let val = dir.path().join("val");
    ok(&["gen", "--task", "count", "--round", "s1", "--count", "8", "--seed", "2", "--out", s(&val)]);
    let val = val.join("count/s1");
    let ckpt = dir.path().join("m.gstl");
    let hist = dir.path().join("h.csv");
    let out = ok(&[
        "train", "--train", s(&train), "--val", s(&val), "--out", s(&ckpt), "--history", s(&hist), "--epochs", "2",
        "--batch", "8", "--augment",
    ]);
    assert!(out.contains("selected"), "{out}");
    assert_eq!(std::fs::read_to_string(&hist).unwrap().lines().count(), 3);
    let pred = dir.path().join("p.csv");
    ok(&["predict", "--model", s(&ckpt), "--manifest", s(&val), "--out", s(&pred)]);
    let v: Value = serde_json::from_str(&ok(&["eval", "--pred", s(&pred), "--manifest", s(&val)])).unwrap();
    assert_eq!(v["tp"].as_u64().unwrap() + v["fp"].as_u64().unwrap() + v["tn"].as_u64().unwrap() + v["fn"].as_u64().unwrap(), 8);

    std::fs::write(&ckpt, b"GSTL").unwrap();
    assert_eq!(fails(&["predict", "--model", s(&ckpt), "--manifest", s(&val), "--out", s(&pred)]).1, "format");
}

#[test]
fn curve_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let out = ok(&[
        "curve", "--task", "fate", "--sizes", "4,8", "--epochs", "1", "--batch", "4", "--val-count", "4",
        "--test-count", "6", "--work", s(&dir.path().join("w")), "--out", s(&csv),
    ]);
    assert_eq!(out.lines().count(), 2);
    let curve = read_curve_csv(&csv).unwrap();
    assert_eq!(curve.iter().map(|p| p.size).collect::<Vec<_>>(), [4, 8]);
    assert!(curve.iter().all(|p| p.accuracy.is_some_and(|a| (0.0..=100.0).contains(&a))));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn fuse_builds_a_face_set() {
    let dir = tempfile::tempdir().unwrap();
    for (name, tilt, seed) in [("a", 3.0, 1), ("b", -2.0, 2)] {
        let (img, lm) = synthetic_face(120, 140, tilt, seed).unwrap();
        img.save_png(&dir.path().join(format!("{name}.png"))).unwrap();
        std::fs::write(dir.path().join(format!("{name}.pts")), lm.to_pts()).unwrap();
    }
    let pairs = dir.path().join("pairs.csv");
    std::fs::write(&pairs, "# a then b\na.png,b.png\nb.png,a.png\n").unwrap();
    let out = dir.path().join("faces");
    assert!(ok(&["fuse", "--pairs", s(&pairs), "--out", s(&out)]).contains("2 fused, 2 real"));
    assert_eq!(Manifest::open(&out).unwrap().class_counts, [2, 2]);
    std::fs::write(&pairs, "a.png,b.png,a.pts\n").unwrap();
    assert_eq!(fails(&["fuse", "--pairs", s(&pairs), "--out", s(&out)]).1, "format");
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut text = String::new();
    stream.read_to_string(&mut text).ok()?;
    Some(text)
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_gestalt"))
        .args(["serve", "--port", &port.to_string(), "--data", s(dir.path())])
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    let reply = loop {
        if let Some(r) = http_get(port, "/api/sessions/none/report") {
            break r;
        }
        assert!(start.elapsed() < Duration::from_secs(20), "service did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(reply.starts_with("HTTP/1.1 404"), "{reply}");
    assert!(reply.contains("unknown-session"), "{reply}");
}
