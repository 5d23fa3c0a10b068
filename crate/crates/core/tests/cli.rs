use std::path::Path;
use std::process::Command;

fn ego_bounds(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ego-bounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn demo_writes_parseable_svg_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("demo");
    let cfg = write_config(
        tmp.path(),
        "demo.snapshots = 1, 3\ndemo.plot_points = 101\nsearch.points_per_dim = 101\n",
    );
    let o = ego_bounds(&[
        "demo-adversarial",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["demo_lcb.svg", "demo_ei.svg"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let names: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    for entry in std::fs::read_dir(&out).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(
            name == "manifest.json" || names.contains(&name.as_str()),
            "{name} missing from manifest"
        );
    }
    // Defaults are echoed.
    assert_eq!(manifest["config"]["kernel.nu"], "2.5");
    assert_eq!(manifest["config"]["R"], "1");

    let t1 = std::fs::read_to_string(out.join("demo_lcb_t1.csv")).unwrap();
    let mut lines = t1.lines();
    assert_eq!(lines.next(), Some("x,lower,upper,witness"));
    let row0: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(row0[0], -10.0);
    assert!(
        (row0[3] + 1.0).abs() < 1e-6,
        "witness at the boundary is {}",
        row0[3]
    );
}

#[test]
fn json_format_and_seed_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("q");
    let o = ego_bounds(&[
        "quadratic-recovery",
        "--format",
        "json",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("quadratic_recovery.json")).unwrap(),
    )
    .unwrap();
    assert!(rows[0]["error"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn config_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "domain.dim = 2\n");
    let o = ego_bounds(&[
        "demo-adversarial",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    let cfg = write_config(tmp.path(), "check.eps = 0.3\n");
    let o = ego_bounds(&[
        "lower-bound-check",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("y").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
}
