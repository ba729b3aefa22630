use std::path::Path;
use std::process::Command;

use condcop::sim::{CensoringLevel, TauShape};
use condcop::{generate_dataset, CopulaFamily, MarginKind, Observation, RandomStream, Scenario};
use condcop_cli::dataset::{format_dataset, parse_dataset, write_dataset};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condcop"))
}

fn constant_data(n: usize, seed: u64) -> Vec<Observation> {
    let s = Scenario {
        tau_shape: TauShape::Constant,
        family: CopulaFamily::Clayton,
        n,
        censoring: CensoringLevel::Low,
        margin_kind: MarginKind::Weibull,
        seed,
    };
    generate_dataset(&s, &mut RandomStream::new(seed)).unwrap()
}

fn data_file(dir: &Path, n: usize) -> std::path::PathBuf {
    let p = dir.join("data.csv");
    write_dataset(&p, &constant_data(n, 11)).unwrap();
    p
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

proptest! {
    #[test]
    fn dataset_round_trip(rows in prop::collection::vec(
        (1e-6f64..1e6, 1e-6f64..1e6, any::<bool>(), any::<bool>(), -1e3f64..1e3), 1..40)
    ) {
        let data: Vec<Observation> = rows
            .iter()
            .map(|&(y1, y2, d1, d2, x)| Observation::new(y1, y2, d1, d2, x).unwrap())
            .collect();
        let back = parse_dataset(&format_dataset(&data)).unwrap();
        prop_assert_eq!(back, data);
    }
}

#[test]
fn columns_in_any_order_and_comments() {
    let text = "x, d2, d1, y2, y1\n# note\n28, 0, 0, 46.23, 46.23\n30,1,0,2,3\n";
    let d = parse_dataset(text).unwrap();
    assert_eq!(d.len(), 2);
    assert_eq!(d[0], Observation::new(46.23, 46.23, false, false, 28.0).unwrap());
    assert_eq!((d[1].y1, d[1].y2, d[1].d1, d[1].d2), (3.0, 2.0, false, true));
}

#[test]
fn malformed_rows_report_line_numbers() {
    let cases = [
        ("y1,y2,d1,d2,x\n1,1,0,0,1\n1,1,2,0,1\n", "line 3"),
        ("y1,y2,d1,d2,x\n-1,1,0,0,1\n", "line 2"),
        ("y1,y2,d1,d2,x\n1,1,0,0,1\n1,1,0,0,1\n1,abc,0,0,1\n", "line 4"),
        ("y1,y2,d1,d2,x\n1,1,0,0,inf\n", "line 2"),
    ];
    for (text, want) in cases {
        let err = parse_dataset(text).unwrap_err().to_string();
        assert!(err.contains(want), "{err}");
    }
    assert!(parse_dataset("y1,y2,d1,x\n1,1,0,1\n").is_err());
    assert!(parse_dataset("y1,y2,d1,d2,x\n").is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path(), 60);
    let out = dir.path().join("out");

    let st = bin().args(["fit", "--set", "nonsense=1"]).arg("--data").arg(&data).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let st = bin().args(["fit", "--family", "student"]).arg("--data").arg(&data).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y1,y2,d1,d2,x\n1,1,0,0,1\n0,1,0,0,1\n").unwrap();
    let o = bin().arg("fit").arg("--data").arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let st = bin().arg("fit").arg("--data").arg(dir.path().join("missing.csv")).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(3));

    // A bandwidth far below the covariate spacing leaves every point empty.
    let st = bin()
        .args(["fit", "--h-copula", "1e-9"])
        .arg("--data").arg(&data).arg("--out").arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(4));
}

#[test]
fn fit_writes_one_row_per_grid_point_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path(), 150);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# fit settings\ngrid_points = 25\ncopula_grid = log:0.5:3:4\nband_replicates = 8\n").unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let st = bin().arg("fit").arg("--config").arg(&cfg).arg("--data").arg(&data).arg("--out").arg(&out).status().unwrap();
        assert!(st.success());
        let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
        let rows = body(&csv);
        assert_eq!(rows[0], "x,eta,theta,tau,lo,hi");
        assert_eq!(rows.len(), 26);
        for r in &rows[1..] {
            let v: Vec<f64> = r.split(',').map(|c| c.parse().unwrap()).collect();
            assert!(v[3] > -1.0 && v[3] < 1.0);
            assert!(v[4] <= v[5]);
        }
        let svg = std::fs::read_to_string(out.join("curve.svg")).unwrap();
        assert!(svg.contains("<polyline") && svg.contains("<polygon"));
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
        assert_eq!(json["bandwidths"]["criterion_table"].as_array().unwrap().len(), 4);
        assert_eq!(json["provenance"]["config"]["grid_points"], "25");
        outputs.push((csv, svg));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path(), 80);
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "grid_points = 7\nh_copula = 2\n").unwrap();
    let out = dir.path().join("out");
    let st = bin()
        .arg("fit").arg("--config").arg(&cfg)
        .args(["--grid-points", "5", "--set", "family=frank"])
        .arg("--data").arg(&data).arg("--out").arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(body(&csv).len(), 6);
    assert!(csv.contains("# config family=frank"));
    assert!(csv.contains("# config h_copula=2"));
}

#[test]
fn test_json_schema() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(dir.path(), 120);
    let out = dir.path().join("out");
    let o = bin()
        .args(["test", "--replicates", "20", "--h-copula", "1.5", "--seed", "5"])
        .arg("--data").arg(&data).arg("--out").arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("bootstrap GLR") && stdout.contains("linear LR"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("test.json")).unwrap()).unwrap();
    for key in ["lambda_n", "B", "p_value", "bandwidths", "linear_lr", "provenance"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["B"], 20);
    let p = json["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
    let lr = json["linear_lr"]["p_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&lr));
    assert_eq!(json["bandwidths"]["h_copula"], 1.5);
    assert_eq!(json["provenance"]["seed"], 5);
}

#[test]
fn simulate_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let start = std::time::Instant::now();
    let o = bin()
        .args(["simulate", "--m", "2", "--shapes", "constant,convex", "--censoring", "none"])
        .arg("--out").arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(start.elapsed().as_secs() < 60);
    let csv = std::fs::read_to_string(out.join("estimation.csv")).unwrap();
    let rows = body(&csv);
    assert_eq!(
        rows[0],
        "family,margins,n,censoring,shape,M,failed,ibias2_x100,ivar_x100,imse_x100"
    );
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("clayton,weibull,250,0%,constant,2,"));
}
