use std::path::{Path, PathBuf};
use std::process::Command;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .display()
        .to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn perfchar(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_perfchar"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn perfchar_to(dir: &Path, args: &[&str]) -> Run {
    let mut all: Vec<&str> = args.to_vec();
    let d = dir.to_str().unwrap();
    all.extend(["--out", d, "--format", "csv"]);
    let r = perfchar(&all);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    r
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn assert_single_error_line(r: &Run, code: i32, kind: &str) {
    assert_eq!(r.code, code, "{}", r.stderr);
    let lines: Vec<&str> = r.stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{:?}", r.stderr);
    assert!(
        lines[0].starts_with(&format!("perfchar: error[{kind}]: ")),
        "{}",
        lines[0]
    );
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let r = perfchar(&[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Usage: perfchar"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_single_error_line(&perfchar(&["frobnicate"]), 2, "usage");
    assert_single_error_line(&perfchar(&["analyze", "energy"]), 2, "usage");
    assert_single_error_line(
        &perfchar(&["bench", "flops", "--mode", "sideways"]),
        2,
        "usage",
    );
}

#[test]
fn help_exits_0() {
    assert_eq!(perfchar(&["--help"]).code, 0);
    assert_eq!(perfchar(&["analyze", "scaling", "--help"]).code, 0);
}

#[test]
fn spec_show_prints_table_peaks() {
    let r = perfchar(&["spec", "show", &fixture("platforms/dibona-tx2.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for needle in ["170.64", "32.00", "16.00", "16777216"] {
        assert!(
            r.stdout.contains(needle),
            "missing {needle} in\n{}",
            r.stdout
        );
    }
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &["spec", "show", &fixture("platforms/marenostrum4.json")],
    );
    let rows = read_csv(&dir.path().join("spec.csv"));
    assert_eq!(rows[0], ["platform", "quantity", "scope", "value", "unit"]);
    let find = |q: &str, scope: &str| {
        rows.iter()
            .find(|r| r[1] == q && r[2] == scope)
            .map(|r| r[3].parse::<f64>().unwrap())
            .unwrap()
    };
    assert_eq!(find("peak_flops_double_vector", "core"), 67.2);
    assert_eq!(find("peak_flops_single_vector", "core"), 134.4);
    assert!((find("peak_bandwidth", "socket") - 153.6).abs() < 1e-12);
}

#[test]
fn validation_failures_exit_1_with_one_line() {
    assert_single_error_line(&perfchar(&["spec", "show", "/no/such/spec.json"]), 1, "io");
    let r = perfchar(&[
        "bench",
        "mem",
        "--elements",
        "1000",
        "--spec",
        &fixture("platforms/sandbox-host.json"),
    ]);
    assert_single_error_line(&r, 1, "sizing-violation");
    let r = perfchar(&[
        "analyze",
        "scaling",
        "--model",
        "mpi-shares",
        "--in",
        &fixture("energy/runs.csv"),
    ]);
    assert_single_error_line(&r, 1, "schema");
    let r = perfchar(&[
        "analyze",
        "energy",
        "--in",
        &fixture("scaling/lbc-weak-runs.csv"),
    ]);
    assert_single_error_line(&r, 1, "not-available");
}

#[test]
fn bench_mem_and_flops_emit_documented_csv() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "bench",
            "mem",
            "--elements",
            "1048576",
            "--threads",
            "1",
            "--reps",
            "3",
            "--pin",
            "none",
        ],
    );
    let rows = read_csv(&dir.path().join("bench-mem.csv"));
    assert_eq!(rows[0], ["threads", "best_gbs"]);
    assert_eq!(rows.len(), 2);
    assert!(rows[1][1].parse::<f64>().unwrap() > 0.0);

    perfchar_to(
        dir.path(),
        &[
            "bench",
            "flops",
            "--mode",
            "scalar,vector",
            "--duration",
            "0.1",
        ],
    );
    let rows = read_csv(&dir.path().join("bench-flops.csv"));
    assert_eq!(rows[0], ["mode", "precision", "gflops"]);
    assert_eq!(rows.len(), 3);
    let g = |i: usize| rows[i][2].parse::<f64>().unwrap();
    assert_eq!(
        (rows[1][0].as_str(), rows[2][0].as_str()),
        ("scalar", "vector")
    );
    assert!(g(2) >= g(1));
}

#[test]
fn roofline_files() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "analyze",
            "roofline",
            "--spec",
            &fixture("platforms/dibona-tx2.json"),
            "--kernels",
            &fixture("roofline/alya-phases.csv"),
            "--gnuplot",
        ],
    );
    let curve = read_csv(&dir.path().join("roofline-curve.csv"));
    assert_eq!(curve[0], ["intensity", "gflops", "label"]);
    let xs: Vec<f64> = curve[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let classes = read_csv(&dir.path().join("roofline-classification.csv"));
    assert_eq!(classes.len(), 6);
    assert!(classes[1..]
        .iter()
        .all(|r| r.last().unwrap() == "memory-bound"));
    assert!(dir.path().join("roofline-curve.gp").exists());
    let meta = std::fs::read_to_string(dir.path().join("analyze-roofline.meta.json")).unwrap();
    assert!(meta.contains("generated_at"));
}

#[test]
fn amdahl_scaling_from_speedups() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "analyze",
            "scaling",
            "--model",
            "amdahl",
            "--in",
            &fixture("scaling/strong-speedups.csv"),
        ],
    );
    let params = read_csv(&dir.path().join("scaling-params.csv"));
    assert_eq!(
        params[0],
        [
            "app", "platform", "compiler", "model", "unit", "n", "a", "sigma_a", "b", "sigma_b",
            "residual"
        ]
    );
    assert_eq!(params.len(), 11);
    let alya = params
        .iter()
        .find(|r| r[..3] == ["alya", "dibona-tx2", "gnu"])
        .unwrap();
    assert!((alya[6].parse::<f64>().unwrap() - 0.960).abs() < 0.01);
    let proj = read_csv(&dir.path().join("projection-alya_dibona-tx2_gnu.csv"));
    assert_eq!(proj[0], ["p", "speedup", "efficiency"]);
    assert_eq!(proj.len(), 12);
    for r in &proj[1..] {
        let v: Vec<f64> = r.iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[2] - v[1] / v[0]).abs() < 1e-12);
    }
}

#[test]
fn gustafson_from_runs_with_sizing() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "analyze",
            "scaling",
            "--model",
            "gustafson",
            "--in",
            &fixture("scaling/lbc-weak-runs.csv"),
            "--group",
            "platform",
            "--cells",
            "256,256,32",
            "--decomposition",
            "2,2,16",
            "--decomposition",
            "2,2,12",
        ],
    );
    let params = read_csv(&dir.path().join("scaling-params.csv"));
    assert_eq!(params.len(), 3);
    for (row, a) in params[1..].iter().zip([0.817, 0.839]) {
        assert!((row[4].parse::<f64>().unwrap() - a).abs() < 0.05, "{row:?}");
    }
    let sizing = read_csv(&dir.path().join("sizing.csv"));
    assert_eq!(sizing[1][..3], ["2x2x16", "512x512x512", "134217728"]);
    assert_eq!(sizing[2][1], "512x512x384");
}

#[test]
fn mpi_shares_report_both_critical_points() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "analyze",
            "scaling",
            "--model",
            "mpi-shares",
            "--in",
            &fixture("scaling/graph500-mpi.csv"),
            "--group",
            "platform",
        ],
    );
    let crit = read_csv(&dir.path().join("critical-units.csv"));
    assert_eq!(
        crit[0],
        ["platform", "definition", "threshold_pct", "units"]
    );
    let units = |def: &str| {
        crit.iter()
            .find(|r| r[0] == "dibona-tx2" && r[1] == def)
            .map(|r| r[3].parse::<f64>().unwrap())
            .unwrap()
    };
    assert!((units("lb-only") - 76.3).abs() < 0.1);
    assert!((units("lb+com") - 60.7).abs() < 0.1);
    let shares = read_csv(&dir.path().join("mpi-shares-dibona-tx2.csv"));
    assert_eq!(shares[0], ["p", "lb_pct", "com_pct", "mpi_pct"]);
    let com: Vec<&str> = shares[1..].iter().map(|r| r[2].as_str()).collect();
    assert!(com.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn energy_edp_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &["analyze", "energy", "--in", &fixture("energy/runs.csv")],
    );
    let got = read_csv(&dir.path().join("energy.csv"));
    let text = std::fs::read_to_string(fixture("energy/reference.csv")).unwrap();
    let reference: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(got.len(), 21);
    for r in &reference {
        let row = got.iter().find(|g| g[..3] == [r[0], r[1], r[2]]).unwrap();
        let edp: f64 = row[6].parse().unwrap();
        let expected: f64 = r[5].parse().unwrap();
        assert!((edp - expected).abs() / expected < 0.005, "{r:?}");
    }
}

#[test]
fn network_reports_planted_link() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "analyze",
            "network",
            "--in",
            &fixture("network/pairwise-8node.csv"),
        ],
    );
    let links = read_csv(&dir.path().join("weak-links.csv"));
    assert_eq!(links.len(), 3);
    assert!(links[1..]
        .iter()
        .all(|r| r[1] == "node03" && r[2] == "node06"));
    let matrix = read_csv(&dir.path().join("matrix-65536.csv"));
    assert_eq!(matrix.len(), 9);
    assert_eq!(matrix[1][1], "");
}

#[test]
fn compare_ranks_groups() {
    let dir = tempfile::tempdir().unwrap();
    perfchar_to(
        dir.path(),
        &[
            "report",
            "compare",
            "--in",
            &fixture("energy/runs.csv"),
            "--metric",
            "edp",
        ],
    );
    let rows = read_csv(&dir.path().join("compare-edp.csv"));
    assert_eq!(rows[0], ["app", "group", "value", "delta_pct", "rank"]);
    let best = rows.iter().find(|r| r[0] == "alya" && r[4] == "1").unwrap();
    assert_eq!(best[1], "dibona-x86/intel");
    assert_eq!(best[3], "0");
}

#[test]
fn compare_needs_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    std::fs::write(
        &path,
        "platform,app,compiler,nodes,ranks_per_node,time_s,energy_j,app_metric,timestamp\n\
         p,a,c,1,1,2.0,,,2019-06-01T00:00:00Z\n",
    )
    .unwrap();
    let r = perfchar(&["report", "compare", "--in", path.to_str().unwrap()]);
    assert_single_error_line(&r, 1, "empty-comparison");
}

#[test]
fn text_format_writes_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let r = perfchar(&[
        "analyze",
        "energy",
        "--in",
        &fixture("energy/runs.csv"),
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "text",
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("31325.1"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
