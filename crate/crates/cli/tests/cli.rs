use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hullkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hullkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate_counts(dir: &Path, workers: &str, counts: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "--seed",
        "11",
        "--workers",
        workers,
        "generate",
        "--out",
        dir.to_str().unwrap(),
        "--counts",
        counts,
        "--grid",
        "31,9",
        "--no-meshes",
        "--no-images",
    ];
    args.extend_from_slice(extra);
    hullkit(&args)
}

fn generate(dir: &Path, workers: &str, extra: &[&str]) -> Output {
    generate_counts(dir, workers, "3,2,2", extra)
}

#[test]
fn generate_is_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let oa = generate(&a, "1", &[]);
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert!(stderr(&oa).contains("config: "));
    let ob = generate(&b, "3", &[]);
    assert!(ob.status.success(), "{}", stderr(&ob));
    for f in ["params.csv", "drag.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read_to_string(a.join("params.csv"))
            .unwrap()
            .lines()
            .count(),
        8
    );
}

#[test]
fn interrupted_generate_resumes() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    let part = tmp.path().join("part");
    assert!(generate(&full, "1", &[]).status.success());
    let o = generate(&part, "1", &["--max-hulls", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("completed [3, 0, 0]"));
    let o = hullkit(&["generate", "--out", part.to_str().unwrap(), "--resume"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["params.csv", "drag.csv"] {
        assert_eq!(
            fs::read(full.join(f)).unwrap(),
            fs::read(part.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn check_mesh_and_drag_on_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    assert!(generate(&d, "1", &[]).status.success());
    let params = d.join("params.csv");

    let o = hullkit(&["check", "--params", params.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("hull_id,feasible,violations"));
    assert_eq!(out.lines().filter(|l| l.ends_with(",true,0")).count(), 7);

    let m = tmp.path().join("m");
    let o = hullkit(&[
        "mesh",
        "--params",
        params.to_str().unwrap(),
        "--id",
        "2-1",
        "--grid",
        "20,6",
        "--format",
        "ascii",
        "--out",
        m.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(m.join("2-1.stl"))
        .unwrap()
        .starts_with("solid"));
    for k in 1..=5 {
        assert!(m.join(format!("2-1_view{k}.ppm")).exists());
    }

    let drag = tmp.path().join("drag.csv");
    let o = hullkit(&[
        "drag",
        "--params",
        params.to_str().unwrap(),
        "--grid",
        "31,9",
        "--out",
        drag.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    // Same grid and water as the dataset build, so the rows match exactly.
    assert_eq!(
        fs::read(&drag).unwrap(),
        fs::read(d.join("drag.csv")).unwrap()
    );
}

#[test]
fn wigley_drag_table() {
    let o = hullkit(&["drag", "--wigley", "--grid", "31,9"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("wigley,"));
    assert_eq!(rows[1].split(',').count(), 1 + 8 + 4 * 32);
}

#[test]
fn errors_are_one_line_and_machine_parsable() {
    let o = hullkit(&["check", "--params", "/nonexistent/params.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let last = err.lines().last().unwrap();
    assert!(last.starts_with("error: io: "), "{err}");

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "hull_id,loa\nx,1\n").unwrap();
    let o = hullkit(&["check", "--params", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("error: parse: "));

    let o = hullkit(&["generate", "--out", "x", "--counts", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hullkit(&["optimize", "--out", "x", "--freeze-all-except", "keel"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resume_reports_integrity_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    assert!(generate(&d, "1", &["--max-hulls", "2"]).status.success());
    fs::remove_file(d.join("drag.csv")).unwrap();
    let o = hullkit(&["generate", "--out", d.to_str().unwrap(), "--resume"]);
    assert_eq!(o.status.code(), Some(1));
    let last = stderr(&o).lines().last().unwrap().to_string();
    assert!(
        last.starts_with("error: integrity: ") && last.contains("drag.csv"),
        "{last}"
    );
}

#[test]
fn optimize_train_predict_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    assert!(generate(&d, "1", &[]).status.success());

    let o = hullkit(&[
        "stats",
        "--data",
        d.to_str().unwrap(),
        "--displacement-m3",
        "1000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# nearest-neighbor distance"));
    assert!(out.contains("# minimum total drag per displacement"));

    let model = tmp.path().join("model.bin");
    let o = hullkit(&[
        "train",
        "--data",
        d.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "2",
    ]);
    // Seven hulls are too few to train on.
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("error: training: "));

    let big = tmp.path().join("big");
    assert!(generate_counts(&big, "1", "8,2,2", &[]).status.success());
    let o = hullkit(&[
        "train",
        "--data",
        big.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--epochs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("validation R2"));
    assert_eq!(
        fs::read_to_string(model.with_extension("loss.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );
    let o = hullkit(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--params",
        big.join("params.csv").to_str().unwrap(),
        "--speed-knots",
        "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let header: Vec<&str> = out.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 32 + 2);
    assert_eq!(header[1], "Cw_d25_f015");
    assert_eq!(out.lines().count(), 13);
    fs::write(&model, b"junk").unwrap();
    let o = hullkit(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--params",
        big.join("params.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let opt = tmp.path().join("opt");
    let o = hullkit(&[
        "--seed",
        "2",
        "optimize",
        "--freeze-all-except",
        "bulbs",
        "--population",
        "6",
        "--generations",
        "1",
        "--out",
        opt.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("reduction"));
    let obj = fs::read_to_string(opt.join("objectives.csv")).unwrap();
    assert!(obj.starts_with("hull_id,rank,rt_n,cw"));
    let params = fs::read_to_string(opt.join("params.csv")).unwrap();
    assert_eq!(
        params.lines().nth(1).unwrap().split(',').next(),
        Some("seed")
    );
}
