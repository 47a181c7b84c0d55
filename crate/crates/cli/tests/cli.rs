use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0.5\nf 1 2 3\n";
const TETRAHEDRON: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 2 3 4\nf 1 4 3\n";

fn cgimc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgimc")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = cgimc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn triangle_encodes_to_two_by_two_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let (obj, cgim, back) = (
        dir.path().join("t.obj"),
        dir.path().join("t.cgim"),
        dir.path().join("back.obj"),
    );
    fs::write(&obj, TRIANGLE).unwrap();
    let s = ok_json(&["encode", "--input", p(&obj), "--output", p(&cgim)]);
    assert_eq!((s["r1"].as_u64(), s["r2"].as_u64()), (Some(2), Some(2)));
    assert!(s["containerBytes"].as_u64().unwrap() > 0);
    let d = ok_json(&["decode", "--input", p(&cgim), "--output", p(&back)]);
    assert_eq!(
        (d["vertices"].as_u64(), d["edges"].as_u64(), d["faces"].as_u64()),
        (Some(3), Some(3), Some(1))
    );
    let text = fs::read_to_string(&back).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);

    let d = ok_json(&[
        "decode",
        "--input",
        p(&cgim),
        "--output",
        p(&back),
        "--codec",
        "quantize:2",
        "--lossy",
    ]);
    assert_eq!(d["codec"], "quantize:2");
    assert!(d["vertices"].as_u64().unwrap() >= 1);
    assert_eq!(
        cgimc(&[
            "decode",
            "--input",
            p(&cgim),
            "--output",
            p(&back),
            "--codec",
            "quantize:2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let tet = dir.path().join("tet.obj");
    fs::write(&tet, TETRAHEDRON).unwrap();
    let out = dir.path().join("x.cgim");
    assert_eq!(
        cgimc(&["encode", "--input", p(&tet), "--output", p(&out)])
            .status
            .code(),
        Some(2)
    );
    let v = cgimc(&["validate", "--input", p(&tet)]);
    assert_eq!(v.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(report["valid"], false);

    let missing = dir.path().join("nope.obj");
    assert_eq!(
        cgimc(&["encode", "--input", p(&missing), "--output", p(&out)])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        cgimc(&["encode", "--bits", "12", "--input", p(&tet), "--output", p(&out)])
            .status
            .code(),
        Some(2)
    );

    let tri = dir.path().join("t.obj");
    fs::write(&tri, TRIANGLE).unwrap();
    ok_json(&["encode", "--input", p(&tri), "--output", p(&out)]);
    let payload = out.join("image.ppm");
    let mut bytes = fs::read(&payload).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xFF;
    fs::write(&payload, bytes).unwrap();
    assert_eq!(
        cgimc(&["decode", "--input", p(&out), "--output", p(&dir.path().join("o.obj"))])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn evaluate_writes_one_row_per_codec() {
    let dir = tempfile::tempdir().unwrap();
    let (obj, csv) = (dir.path().join("m.obj"), dir.path().join("rd.csv"));
    ok_json(&[
        "gen-corpus",
        "--kind",
        "delaunay-disk",
        "--size",
        "120",
        "--seed",
        "1",
        "--output",
        p(&obj),
    ]);
    let s = ok_json(&[
        "evaluate",
        "--input",
        p(&obj),
        "--output",
        p(&csv),
        "--codec",
        "quantize:6",
        "--codec",
        "quantize:4",
        "--codec",
        "quantize:2",
        "--codec",
        "identity",
    ]);
    assert_eq!(s["rows"].as_array().unwrap().len(), 4);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[0],
        "codecName,rateParam,fileBytes,psnrDb,hausMax,hausRms,missingEdges,extraEdges"
    );
    assert!(lines[1].starts_with("quantize,6,"));
    assert!(lines[4].starts_with("identity,0,") && lines[4].ends_with(",0,0"));
}

#[test]
fn gen_corpus_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.obj"), dir.path().join("b.obj"));
    for path in [&a, &b] {
        ok_json(&[
            "gen-corpus",
            "--kind",
            "bumpy-disk",
            "--size",
            "200",
            "--seed",
            "4",
            "--output",
            p(path),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let fan = ok_json(&["gen-corpus", "--kind", "fan", "--size", "8", "--output", p(&a)]);
    assert_eq!((fan["vertices"].as_u64(), fan["faces"].as_u64()), (Some(9), Some(7)));
    let grid = ok_json(&["gen-corpus", "--kind", "grid", "--size", "4", "--output", p(&a)]);
    assert_eq!(
        (grid["vertices"].as_u64(), grid["faces"].as_u64()),
        (Some(16), Some(18))
    );
    assert_eq!(
        cgimc(&["gen-corpus", "--kind", "torus", "--size", "4", "--output", p(&a)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (obj, cfg, out) = (
        dir.path().join("m.obj"),
        dir.path().join("c.json"),
        dir.path().join("m.cgim"),
    );
    ok_json(&["gen-corpus", "--kind", "grid", "--size", "5", "--output", p(&obj)]);
    fs::write(
        &cfg,
        format!(r#"{{"input": "{}", "bits": 16, "variant": "baseline"}}"#, p(&obj)),
    )
    .unwrap();
    let s = ok_json(&["encode", "--config", p(&cfg), "--output", p(&out)]);
    assert_eq!(
        (s["bits"].as_u64(), s["variant"].as_str()),
        (Some(16), Some("baseline"))
    );
    let s = ok_json(&[
        "encode",
        "--config",
        p(&cfg),
        "--output",
        p(&out),
        "--bits",
        "8",
        "--variant",
        "modified",
    ]);
    assert_eq!((s["bits"].as_u64(), s["variant"].as_str()), (Some(8), Some("modified")));
    fs::write(&cfg, r#"{"bits": "many"}"#).unwrap();
    assert_eq!(cgimc(&["encode", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn modified_variant_is_no_larger_on_a_disk() {
    let dir = tempfile::tempdir().unwrap();
    let (obj, out) = (dir.path().join("m.obj"), dir.path().join("m.cgim"));
    ok_json(&[
        "gen-corpus",
        "--kind",
        "delaunay-disk",
        "--size",
        "1000",
        "--seed",
        "2",
        "--output",
        p(&obj),
    ]);
    let base = ok_json(&[
        "encode",
        "--input",
        p(&obj),
        "--output",
        p(&out),
        "--variant",
        "baseline",
    ]);
    let modi = ok_json(&[
        "encode",
        "--input",
        p(&obj),
        "--output",
        p(&out),
        "--variant",
        "modified",
    ]);
    assert!(modi["r2"].as_u64() <= base["r2"].as_u64());
}

#[test]
fn encoding_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("m.obj");
    ok_json(&[
        "gen-corpus",
        "--kind",
        "delaunay-disk",
        "--size",
        "300",
        "--output",
        p(&obj),
    ]);
    let (a, b) = (dir.path().join("a.cgim"), dir.path().join("b.cgim"));
    for out in [&a, &b] {
        ok_json(&["encode", "--input", p(&obj), "--output", p(out), "--bits", "16"]);
    }
    for f in ["image.ppm", "header.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn parametrize_writes_texture_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let (obj, out) = (dir.path().join("m.obj"), dir.path().join("uv.obj"));
    ok_json(&["gen-corpus", "--kind", "fan", "--size", "6", "--output", p(&obj)]);
    let s = ok_json(&["parametrize", "--input", p(&obj), "--output", p(&out)]);
    assert_eq!(s["corners"].as_array().unwrap().len(), 4);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("vt ")).count(), 7);
}
