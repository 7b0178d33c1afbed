use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qbattery_cli::{OutputTable, RunConfig};

const BIN: &str = env!("CARGO_BIN_EXE_qbattery");

fn qbattery(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const MINIMAL: &str =
    "omega0 = 1\nkappa = 1\ngamma = 0.05\nR = 10\ndelta = 0\nt_max = 4*pi\nn_points = 2000\n";

#[test]
fn run_writes_table_to_stdout_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", MINIMAL);
    let out = qbattery(&["run", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let table = OutputTable::parse_csv(&text).unwrap();
    assert_eq!(
        table.columns,
        [
            "t",
            "scaled_t",
            "re_mu",
            "im_mu",
            "re_nu",
            "im_nu",
            "energy_A",
            "energy_B",
            "ergotropy_B",
            "ratio",
            "power"
        ]
    );
    assert_eq!(table.rows.len(), 2000);
    let echo = RunConfig::from_echo(&text).unwrap();
    assert_eq!(echo.params.lambda, 0.005);

    let file = dir.path().join("out.csv");
    let out = qbattery(&["run", &cfg, "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(file).unwrap(), text);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", &format!("{MINIMAL}lambda = 1\n"));
    let out = qbattery(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("over-determined: R vs lambda"));

    let out = qbattery(&["validate", &cfg]);
    assert_eq!(out.status.code(), Some(1));

    let out = qbattery(&["run", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = qbattery(&["reproduce", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let sweep = write_config(
        dir.path(),
        "sweep.cfg",
        &format!("{MINIMAL}sweep.delta = 0, 1\n").replace("delta = 0\n", ""),
    );
    assert_eq!(qbattery(&["run", &sweep]).status.code(), Some(1));
    assert_eq!(qbattery(&["sweep", &sweep]).status.code(), Some(1));
}

#[test]
fn validate_reports_regime() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ok.cfg", MINIMAL);
    let out = qbattery(&["validate", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with("ok: charging run, 1 point(s), R = 10"),
        "{text}"
    );
}

#[test]
fn sweep_partial_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        "kappa = 1\ngamma = 0.05\nR = 1\nt_max = pi\nn_points = 20\nsweep.omega0 = 1, -2, 3\n";
    let cfg = write_config(dir.path(), "sweep.cfg", text);
    let out_dir = dir.path().join("out");
    let out = qbattery(&[
        "sweep",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out_dir.join("point_0000.csv").exists());
    assert!(out_dir.join("point_0002.csv").exists());
    let index = fs::read_to_string(out_dir.join("index.csv")).unwrap();
    assert_eq!(index.lines().filter(|l| l.contains(",failed,")).count(), 1);
}

#[test]
fn sweep_uses_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep_out");
    let text = format!(
        "kappa = 1\ngamma = 1\nt_max = pi\nn_points = 20\nsweep.R = 0.01, 0.1, 1, 10, 100\nout_dir = {}\n",
        out_dir.display()
    );
    let cfg = write_config(dir.path(), "sweep.cfg", &text);
    let out = qbattery(&["sweep", &cfg, "--jobs", "3"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csvs = fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("point_")
        })
        .count();
    assert_eq!(csvs, 5);
}

#[test]
fn reproduce_table_p() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbattery(&[
        "reproduce",
        "table-p",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table =
        OutputTable::parse_csv(&fs::read_to_string(dir.path().join("table-p.csv")).unwrap())
            .unwrap();
    assert_eq!(
        table.columns,
        [
            "R",
            "gamma_over_kappa",
            "tau_ch",
            "abs_nu_sq",
            "ergotropy_fraction"
        ]
    );
    assert_eq!(table.column("R").unwrap(), [0.01, 0.1, 10.0, 100.0]);
}
