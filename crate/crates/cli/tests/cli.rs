use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aaatrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aaatrig")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = aaatrig(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_samples(path: &Path, n: usize, f: impl Fn(f64) -> f64) {
    let mut s = String::from("re_z,im_z,re_f,im_f\n");
    for k in 0..n {
        let x = 2.0 * PI * k as f64 / n as f64;
        s.push_str(&format!("{x:.17e},0,{:.17e},0\n", f(x)));
    }
    fs::write(path, s).unwrap();
}

/// Data rows of a TSV table as numbers.
fn rows(tsv: &str) -> Vec<Vec<f64>> {
    tsv.lines()
        .skip(1)
        .map(|l| l.split('\t').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fit_constant_gives_order_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.csv");
    write_samples(&input, 8, |_| 2.5);
    let out = dir.path().join("out");
    ok(&["fit", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["support"].as_array().unwrap().len(), 1);
    assert_eq!(model["schema_version"], 1);
    let history = fs::read_to_string(out.join("history.tsv")).unwrap();
    assert!(history.starts_with("m\tmax_err\n1\t"));
}

#[test]
fn fit_eval_and_diff_agree_with_the_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_samples(&input, 60, |x| x.sin().exp());
    let model = dir.path().join("model.json");
    fs::write(&model, ok(&["fit", input.to_str().unwrap()])).unwrap();

    let pts = dir.path().join("p.json");
    fs::write(&pts, r#"{"points": [[0.3, 0.0], [2.0, 0.1], [-1.0, 0.0]]}"#).unwrap();
    for r in rows(&ok(&["eval", model.to_str().unwrap(), pts.to_str().unwrap()])) {
        let z = num_complex::Complex64::new(r[0], r[1]);
        let e = z.sin().exp();
        assert!((r[2] - e.re).abs() < 1e-10 && (r[3] - e.im).abs() < 1e-10, "{r:?}");
    }
    let d = rows(&ok(&["diff", model.to_str().unwrap(), "--order", "1", "--points", pts.to_str().unwrap()]));
    let x: f64 = 0.3;
    assert!((d[0][2] - x.cos() * x.sin().exp()).abs() < 1e-8);
    let on_grid = rows(&ok(&["diff", model.to_str().unwrap()]));
    for r in on_grid {
        assert!((r[2] - r[0].cos() * r[0].sin().exp()).abs() < 1e-7);
    }
}

#[test]
fn period_flag_rescales() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    let mut s = String::from("re_z,im_z,re_f,im_f\n");
    for k in 0..40 {
        let x = k as f64 / 40.0;
        s.push_str(&format!("{x},0,{},0\n", (2.0 * PI * x).cos()));
    }
    fs::write(&input, s).unwrap();
    let model = dir.path().join("model.json");
    fs::write(&model, ok(&["fit", input.to_str().unwrap(), "--period", "1"])).unwrap();
    let pts = dir.path().join("p.csv");
    // off the sample grid, so derivatives are defined
    fs::write(&pts, "re_z,im_z\n0.13,0\n1.27,0\n").unwrap();
    let v = rows(&ok(&["eval", model.to_str().unwrap(), pts.to_str().unwrap()]));
    assert!((v[0][2] - (2.0 * PI * 0.13).cos()).abs() < 1e-12);
    assert!((v[1][2] - (2.0 * PI * 0.27).cos()).abs() < 1e-12);
    let d = rows(&ok(&["diff", model.to_str().unwrap(), "--points", pts.to_str().unwrap()]));
    assert!((d[0][2] + 2.0 * PI * (2.0 * PI * 0.13).sin()).abs() < 1e-9);
}

#[test]
fn poles_of_the_cot_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("cot.json");
    let w = std::f64::consts::FRAC_1_SQRT_2;
    fs::write(
        &model,
        format!(
            r#"{{"schema_version": 1, "parity": "odd", "period": 6.283185307179586, "scale": 1.0,
            "converged": true, "support": [[0, 0], [3.141592653589793, 0]], "fvals": [[1, 0], [-1, 0]],
            "weights": [[{w}, 0], [{w}, 0]], "err_history": []}}"#
        ),
    )
    .unwrap();
    let table = ok(&["poles", model.to_str().unwrap()]);
    assert!(table.starts_with("re_pole\tim_pole\tre_res\tim_res\n"));
    let r = rows(&table);
    assert_eq!(r.len(), 1);
    let expected = [PI / 2.0, 0.0, -2.0, 0.0];
    for (a, b) in r[0].iter().zip(expected) {
        assert!((a - b).abs() < 1e-10, "{:?}", r[0]);
    }
}

#[test]
fn fit_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_samples(&input, 50, |x| 1.0 / (1.2 - x.cos()));
    let first = ok(&["fit", input.to_str().unwrap(), "--with-poles"]);
    let parsed: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert!(parsed["poles"]["poles"].as_array().is_some());
    assert_eq!(first, ok(&["fit", input.to_str().unwrap(), "--with-poles"]));
}

#[test]
fn compare_tables_are_deterministic() {
    let args = ["compare-aaa", "--function", "expsin", "--samples", "200", "--seed", "3"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert!(a.starts_with("# aaatrig\nm\tmax_err\n"));
    assert!(a.contains("# aaa\nm\tmax_err\n"));
    let other = ok(&["compare-aaa", "--function", "expsin", "--samples", "200", "--seed", "4"]);
    assert_ne!(a, other);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fft");
    ok(&["compare-fft", "--function", "expsin", "--samples", "64", "--out", out.to_str().unwrap()]);
    let fft = rows(&fs::read_to_string(out.join("fft.tsv")).unwrap());
    assert_eq!(fft.len(), 33);
    assert!(fft[32][1] < 1e-13 && fft[2][1] > 1e-3);
    let trig = rows(&fs::read_to_string(out.join("aaatrig.tsv")).unwrap());
    assert!(trig.last().unwrap()[1] < 1e-12);
}

#[test]
fn clean_reports_and_writes_model() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_samples(&input, 100, |x| (2.0 + x.cos().powi(4)).ln());
    let out = dir.path().join("c");
    let res = aaatrig(&["clean", input.to_str().unwrap(), "--tol", "0", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("spurious poles"));
    assert!(out.join("model.json").exists() && out.join("spurious.tsv").exists());
}

#[test]
fn lightning_demo_writes_field_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l");
    let res = aaatrig(&["lightning-demo", "--poles-per-corner", "20", "--nx", "8", "--ny", "6", "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let field = fs::read_to_string(out.join("field.tsv")).unwrap();
    assert!(field.starts_with("re_z\tim_z\tre_f\tim_f\n"));
    assert!(rows(&field).len() > 20);
    let model: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["parity"], "odd");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    write_samples(&input, 10, |x| x.cos());
    let p = input.to_str().unwrap();
    assert_eq!(aaatrig(&["fit"]).status.code(), Some(2));
    assert_eq!(aaatrig(&["fit", p, "--tol=-1"]).status.code(), Some(2));
    assert_eq!(aaatrig(&["fit", p, "--finf", "1;2;3"]).status.code(), Some(2));
    assert_eq!(aaatrig(&["fit", p, "--parity", "sideways"]).status.code(), Some(2));
    assert_eq!(aaatrig(&["compare-aaa"]).status.code(), Some(2));

    let dup = dir.path().join("d.csv");
    fs::write(&dup, "re_z,im_z,re_f,im_f\n0,0,1,0\n1,0,1,0\n2,0,1,0\n6.283185307179586,0,1,0\n").unwrap();
    let res = aaatrig(&["fit", dup.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("rows 2 and 5"));

    let ff = aaatrig(&["fit", p, "--finf", "0.5,0;0.5,0"]);
    assert!(ff.status.success(), "{}", String::from_utf8_lossy(&ff.stderr));
}
