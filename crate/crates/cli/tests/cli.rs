use std::path::Path;
use std::process::{Command, Output};

fn gkplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkplab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn hexagonal_json_report() {
    let o = gkplab(&["lattice", "info", "hexagonal", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["N"], 1);
    assert_eq!(v["det"], 1);
    assert_eq!(v["kissing"], 6);
    assert!((v["dual_min_norm_sq"].as_f64().unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-9);
}

#[test]
fn leech_uses_stored_constants() {
    let o = gkplab(&["lattice", "info", "leech", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["enumerable"], false);
    assert_eq!(v["N"], 12);
    assert_eq!(v["kissing"], 196_560);
}

#[test]
fn lattice_errors() {
    let o = gkplab(&["lattice", "info", "nosuch"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"modes": 1, "generator": [[1, 0], [0, 0.5]]}"#).unwrap();
    assert_eq!(code(&gkplab(&["lattice", "info", "--file", bad.to_str().unwrap()])), 3);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&gkplab(&["lattice", "info", "--file", missing.to_str().unwrap()])), 3);

    let good = dir.path().join("sq.json");
    std::fs::write(&good, r#"{"modes": 1, "generator": [[1.4142135623730951, 0], [0, 1.4142135623730951]]}"#).unwrap();
    let o = gkplab(&["lattice", "info", "--file", good.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["det"], 4);
    assert_eq!(v["kissing"], 4);
}

#[test]
fn perf_energy_sweep_is_monotone_and_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["perf", "--channel", "loss", "--gamma", "0.1", "--lattice", "square", "--dl", "2", "--nbar", "2:14:1", "--methods", "finite_exact"];
    for p in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", p.to_str().unwrap()]);
        assert_eq!(code(&gkplab(&full)), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let (header, rows) = read_csv(&a);
    assert_eq!(header.join(","), "channel,strength,lattice,d_L,nbar,method,infidelity,diag_tail,diag_trD");
    assert_eq!(rows.len(), 13);
    let inf = col(&header, "infidelity");
    let vals: Vec<f64> = rows.iter().map(|r| r[inf].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    assert!(rows.iter().all(|r| r[col(&header, "method")] == "finite_exact" && r[col(&header, "d_L")] == "2"));
}

#[test]
fn perf_infinite_energy_bound_is_constant() {
    let o = gkplab(&["perf", "--gamma", "0.1", "--lattice", "square", "--dl", "2", "--nbar", "2:14:1", "--methods", "inf_bound"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 13);
    let vals: Vec<&str> = rows.iter().map(|r| r.split(',').nth(6).unwrap()).collect();
    assert!(vals.iter().all(|v| *v == vals[0]));
    let v: f64 = vals[0].parse().unwrap();
    assert!((7.0e-7..7.6e-7).contains(&v), "{v}");
}

#[test]
fn perf_rows_are_grid_major_and_methods_round_trip() {
    let o = gkplab(&["perf", "--gamma", "0.05,0.1", "--lattice", "square,hexagonal", "--nbar", "4,6"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let methods = ["exact_sqrt", "perturbative", "leading", "finite_exact", "inf_bound", "ad"];
    assert_eq!(rows.len(), 2 * 2 * 2 * methods.len());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 9);
        assert_eq!(r[5], methods[i % methods.len()]);
        let point = i / methods.len();
        assert_eq!(r[1].parse::<f64>().unwrap(), [0.05, 0.1][point / 4]);
        assert_eq!(r[2], ["square2", "hexagonal2"][(point / 2) % 2]);
        assert_eq!(r[4].parse::<f64>().unwrap(), [4.0, 6.0][point % 2]);
    }
    // the exact and closed-form values agree to within a few percent here
    for chunk in rows.chunks(methods.len()) {
        let exact: f64 = chunk[0][6].parse().unwrap();
        let fe: f64 = chunk[3][6].parse().unwrap();
        assert!(((exact - fe) / exact).abs() < 0.05, "{exact} vs {fe}");
    }
}

#[test]
fn perf_validation_and_compute_errors() {
    assert_eq!(code(&gkplab(&["perf", "--gamma", "", "--nbar", "3"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--gamma", "0.1", "--nbar", "5:2:1"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--gamma", "1.5", "--nbar", "3"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--gamma", "0.1", "--nbar", "3", "--methods", "bogus"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--gamma", "0.1", "--nbar", "inf", "--methods", "finite_exact"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--channel", "amp", "--gamma", "0.1", "--nbar", "3"])), 2);
    assert_eq!(code(&gkplab(&["perf", "--gamma", "0.1", "--nbar", "3", "--lattice", "leech", "--methods", "ad"])), 2);

    // too few Monte Carlo samples fails inside the computation
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.csv");
    let o = gkplab(&["perf", "--gamma", "0.1", "--nbar", "3", "--methods", "ad", "--samples", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(!out.exists());

    let o = gkplab(&["perf", "--gamma", "0.1", "--nbar", "3", "--methods", "inf_bound", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn rates_integer_k_row() {
    let o = gkplab(&["rates", "--gamma", "0.1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "channel,strength,method,N,rate_bits_per_mode,lambda_star");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let rate = |m: &str| -> f64 { rows.iter().find(|r| r[2] == m).unwrap()[4].parse().unwrap() };
    assert_eq!(rate("capacity"), rate("multimode_floor"));
    assert!((rate("capacity") - 9f64.log2()).abs() < 1e-12);
    for m in ["selfdual_constructive", "hashing_hex", "ad"] {
        assert!(rate(m) <= rate("capacity") + 1e-9, "{m}");
    }
}

#[test]
fn rates_floor_is_piecewise_constant() {
    let o = gkplab(&["rates", "--gamma", "0.05:0.45:0.05", "--methods", "multimode_floor"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let g: f64 = r[1].parse().unwrap();
        let k = ((1.0 - g) / g + 1e-9).floor();
        let rate: f64 = r[4].parse().unwrap();
        assert!((rate - k.log2().max(0.0)).abs() < 1e-12, "{g}");
    }
}

#[test]
fn rates_amp_mirrors_loss_at_matched_k() {
    // G = (1 - g)/(1 - 2g) gives G/(G - 1) = (1 - g)/g, here K = 19, 9, 4, 3
    let gammas = [0.05, 0.1, 0.2, 0.25];
    let gains: Vec<String> = gammas.iter().map(|g: &f64| format!("{:.17}", (1.0 - g) / (1.0 - 2.0 * g))).collect();
    let methods = "capacity,multimode_floor,selfdual_constructive,hashing_hex,ad";
    let loss = gkplab(&["rates", "--gamma", "0.05,0.1,0.2,0.25", "--methods", methods]);
    let amp = gkplab(&["rates", "--channel", "amp", "--gain", &gains.join(","), "--methods", methods]);
    assert_eq!((code(&loss), code(&amp)), (0, 0));
    let (l, a) = (stdout(&loss), stdout(&amp));
    for (x, y) in l.lines().skip(1).zip(a.lines().skip(1)) {
        let x: Vec<&str> = x.split(',').collect();
        let y: Vec<&str> = y.split(',').collect();
        assert_eq!((x[2], x[3], x[5]), (y[2], y[3], y[5]));
        let (rx, ry): (f64, f64) = (x[4].parse().unwrap(), y[4].parse().unwrap());
        assert!((rx - ry).abs() < 1e-9, "{x:?} vs {y:?}");
    }
}

#[test]
fn rates_finite_modes_and_validation() {
    let o = gkplab(&["rates", "--gamma", "0.1", "--methods", "selfdual_constructive", "--modes", "40"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let r: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(r[3], "40");
    assert_eq!(r[5], "8");
    assert_eq!(code(&gkplab(&["rates", "--gamma", "0.1", "--eps-ceiling", "2"])), 2);
    assert_eq!(code(&gkplab(&["rates", "--gamma", "0.1", "--methods", "scaled_family", "--lattice", "leech"])), 2);
}

#[test]
fn verify_passes_on_a_healthy_build() {
    let o = gkplab(&["verify"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_detects_a_wrong_thermal_factor() {
    let o = gkplab(&["verify", "--inject-fault", "thermal"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("FAIL qec_loss")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS table")));
}

#[test]
fn verify_tolerance_override_is_scoped() {
    let o = gkplab(&["verify", "--inject-fault", "thermal", "--tol", "qec=1e-2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = gkplab(&["verify", "--tol", "bessel=1e-9"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("FAIL bessel")));
    assert!(text.lines().any(|l| l.starts_with("PASS qec_loss")));
    assert_eq!(code(&gkplab(&["verify", "--tol", "nosuch=1"])), 2);
    assert_eq!(code(&gkplab(&["verify", "--tol", "qec=-1"])), 2);
}
