use std::collections::HashMap;
use std::fs;
use std::process::{Command, Output};

use carvesim::cavity::{coefficients, CavityParams};
use carvesim::sweep::{run_sweep, Axis, SweepParam, SweepSpec};
use carvesim::Mode;
use carvesim_cli::emit::table_from_json;

fn carvesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carvesim"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = carvesim(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Rows of a CSV output as column-name maps, skipping the `#` config lines.
fn csv_rows(text: &str) -> Vec<HashMap<String, String>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .map(String::from)
                .zip(rec.iter().map(String::from))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col]
        .parse()
        .unwrap_or_else(|_| panic!("column {col} = '{}'", row[col]))
}

#[test]
fn ideal_carve_row() {
    let rows = csv_rows(&stdout(&[
        "carve",
        "kappa1_frac=0.5",
        "kappa2_frac=0.5",
        "kappa_sc_frac=0",
        "cooperativity=1e12",
    ]));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    for (d, p) in [("D1", 0.5), ("D2", 0.25), ("D3", 0.25)] {
        assert!((num(r, &format!("p_{d}")) - p).abs() < 1e-9);
        assert!((num(r, &format!("f_{d}")) - 1.0).abs() < 1e-9);
    }
    assert_eq!(r["status"], "ok");
}

#[test]
fn coeffs_rows_match_library() {
    let rows = csv_rows(&stdout(&["coeffs", "cooperativity=20", "atoms=0,1,2"]));
    assert_eq!(rows.len(), 3);
    let p = CavityParams::symmetric(20.0);
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(num(row, "n_atoms") as usize, n);
        let c = coefficients(&p, n).unwrap();
        // 15 significant digits survive the text format.
        assert!((num(row, "r_re") - c.r.re).abs() <= 1e-14);
        assert!((num(row, "t_re") - c.t.re).abs() <= 1e-14);
        assert!((num(row, "loss_prob") - c.loss_prob).abs() <= 1e-14);
    }
    assert!((num(&rows[1], "r_re") - (1.0 / 21.0 - 1.0)).abs() < 1e-14);
    assert!((num(&rows[2], "t_re") - 1.0 / 41.0).abs() < 1e-14);
}

#[test]
fn threshold_sweep_crosses_0999() {
    let text = stdout(&[
        "sweep",
        "kappa1_frac=0.495",
        "kappa2_frac=0.485",
        "kappa_sc_frac=0.02",
        "axis1=cooperativity:10:200:191",
    ]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 191);
    let first = rows.iter().position(|r| num(r, "f_avg") >= 0.999).unwrap();
    assert!(rows[..first].iter().all(|r| num(r, "f_avg") < 0.999));
    let c = num(&rows[first], "cooperativity");
    assert!((30.0..=38.0).contains(&c), "crossing at C = {c}");
}

#[test]
fn heat_map_grid_is_rectangular() {
    let text = stdout(&[
        "sweep",
        "axis1=kappa1:0:0.6:7",
        "axis2=kappa2:0:0.6:7",
        "quantities=f_weighted,detectors",
    ]);
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let width = r.headers().unwrap().len();
    let recs: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 49);
    assert!(recs.iter().all(|rec| rec.len() == width));
    let rows = csv_rows(&text);
    let skipped: Vec<_> = rows.iter().filter(|r| r["status"] == "skipped").collect();
    assert!(!skipped.is_empty());
    for r in &rows {
        let sum = num(r, "kappa1_frac") + num(r, "kappa2_frac") + num(r, "kappa_sc_frac");
        assert!(r["status"] == "skipped" || (sum - 1.0).abs() < 1e-12);
    }
    assert!(skipped.iter().all(|r| r["f_weighted"].is_empty()));
}

#[test]
fn json_mirrors_csv_and_round_trips() {
    let args = [
        "sweep",
        "axis1=cooperativity:1:1000:9:log",
        "quantities=f_avg,p_total,detectors,coefficients",
    ];
    let csv_text = stdout(&[&args[..], &["--format", "csv"]].concat());
    let json_text = stdout(&[&args[..], &["--format", "json"]].concat());
    let table = table_from_json(&json_text).unwrap();

    let spec = SweepSpec::new(CavityParams::symmetric(20.0), Mode::Efficient)
        .axis(Axis {
            log: true,
            ..Axis::linear(SweepParam::Cooperativity, 1.0, 1000.0, 9)
        })
        .quantities(
            &args[2]["quantities=".len()..]
                .split(',')
                .map(|q| q.parse().unwrap())
                .collect::<Vec<_>>(),
        );
    assert_eq!(table, run_sweep(&spec).unwrap());

    let csv = csv_rows(&csv_text);
    assert_eq!(csv.len(), table.len());
    for (c, row) in csv.iter().zip(&table.rows) {
        assert_eq!(c.len(), table.columns.len());
        for (name, cell) in table.columns.iter().zip(row) {
            if let Some(x) = cell.as_f64() {
                assert!(
                    (num(c, name) - x).abs() <= 1e-14 * x.abs().max(1e-300),
                    "{name}"
                );
            }
        }
    }
}

#[test]
fn output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "sweep".to_string(),
            "axis1=kappa1:0:0.5:11".into(),
            "axis2=kappa2:0:0.5:11".into(),
            "quantities=f_avg,f_weighted,chain".into(),
            "-o".into(),
            p.to_str().unwrap().into(),
        ]
    };
    for p in [&a, &b] {
        let v = args(p);
        let out = carvesim(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# headline point\nkappa1_frac = 0.495\nkappa2_frac=0.485  # second mirror\nkappa_sc_frac=0.02\n\ncooperativity=10\nformat=json\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let text = stdout(&[
        "carve",
        "--config",
        path,
        "cooperativity=34",
        "--format",
        "csv",
    ]);
    assert!(text.contains("# cooperativity=34\n"));
    assert!(text.contains("# kappa1_frac=0.495\n"));
    let row = &csv_rows(&text)[0];
    assert!((num(row, "f_avg") - 0.999).abs() < 5e-4);

    // The echoed header alone reproduces the run.
    let echo: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| !l.starts_with("command="))
        .map(|l| format!("{l}\n"))
        .collect();
    let replay = dir.path().join("replay.cfg");
    fs::write(&replay, echo).unwrap();
    assert_eq!(stdout(&["carve", "-c", replay.to_str().unwrap()]), text);
}

#[test]
fn every_command_echoes_its_config() {
    for cmd in ["coeffs", "carve", "standard", "sweep", "scaling", "graph"] {
        let text = stdout(&[cmd]);
        assert!(text.starts_with(&format!("# command={cmd}\n")), "{cmd}");
        for key in [
            "kappa1_frac",
            "kappa2_frac",
            "kappa_sc_frac",
            "cooperativity",
        ] {
            assert!(text.contains(&format!("\n# {key}=")), "{cmd} lacks {key}");
        }
        assert!(!csv_rows(&text).is_empty(), "{cmd}");
    }
}

#[test]
fn scaling_reports_fit() {
    let rows = csv_rows(&stdout(&["scaling", "c_values=50,100,200,400"]));
    assert_eq!(rows.len(), 4);
    assert!((num(&rows[0], "fit_exponent") + 2.0).abs() < 0.05);
    let rows = csv_rows(&stdout(&[
        "scaling",
        "quantity=p_total",
        "c_values=50,100,200,400,800",
    ]));
    assert!((num(&rows[0], "fit_exponent") + 1.0).abs() < 0.05);
}

#[test]
fn graph_beats_standard_reference() {
    let rows = csv_rows(&stdout(&["graph", "cooperativity=50", "n_nodes=11"]));
    assert_eq!(rows.len(), 10);
    let last = rows.last().unwrap();
    assert_eq!(num(last, "n_nodes"), 11.0);
    assert!(num(last, "p_total") / num(last, "p_standard_ideal") >= 100.0);
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let cases: [&[&str]; 10] = [
        &["graph", "n_nodes=1"],
        &["teleport"],
        &["carve", "kappa1_frac=0.6", "kappa2_frac=0.6"],
        &["carve", "cooperativity=-1"],
        &["carve", "axis1=cooperativity:1:2:3"],
        &["carve", "bogus=1"],
        &["sweep", "axis1=cooperativity:1:2:1"],
        &["scaling", "c_values=1e12,2e12,4e12"],
        &["graph", "method=exact", "n_nodes=15"],
        &["carve", "--config", "/nonexistent/run.cfg"],
    ];
    for args in cases {
        let out = carvesim(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(out.stdout.is_empty(), "{args:?} wrote output");
        assert!(!out.stderr.is_empty(), "{args:?} gave no diagnostic");
    }
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = carvesim(&["carve", "-o", target.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains(target.to_str().unwrap()));
}
