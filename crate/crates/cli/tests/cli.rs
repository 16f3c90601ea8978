use std::path::Path;
use std::process::{Command, Output};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");

fn perils(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perils"))
        .args(args)
        .env("PERILS_DATA_DIR", DATA)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = perils(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn table_7_text() {
    let out = stdout(&["table", "7"]);
    let row = |label: &str| {
        out.lines()
            .find(|l| l.starts_with(label))
            .unwrap()
            .split_whitespace()
            .rev()
            .take(5)
            .collect::<Vec<_>>()
    };
    assert_eq!(row("No time of perils"), ["331", "88", "175", "68", "0"]);
    assert_eq!(row("Superforecasters")[0], "326");
    assert_eq!(row("Domain experts")[0], "239");
}

#[test]
fn output_is_deterministic() {
    let args = ["--format", "csv", "table", "A3.8"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t9.csv");
    let args = [
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
        "table",
        "9",
    ];
    assert!(stdout(&args).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&["--format", "csv", "table", "9"]));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "q = 1\n");
    let out = perils(&["--config", &cfg, "evaluate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn invalid_parameter_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "p = 1.2\n");
    assert_eq!(
        perils(&["--config", &cfg, "evaluate"]).status.code(),
        Some(2)
    );
    assert_eq!(perils(&["table", "99"]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    let out = perils(&["--config", missing.to_str().unwrap(), "evaluate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_late_breakeven_has_no_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "late.cfg", "variant = too_late\n");
    let out = perils(&["--config", &cfg, "breakeven"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn breakeven_d_matches_table() {
    let out = stdout(&["--format", "csv", "breakeven"]);
    let rows = csv_rows(&out);
    let d: f64 = rows[0][2].parse().unwrap();
    assert!((d - 0.0015363).abs() < 1e-6, "{d}");
}

#[test]
fn sweep_over_d_is_decreasing() {
    let out = stdout(&[
        "--format", "csv", "sweep", "d", "--from", "0", "--to", "0.5%", "--steps", "11",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 11);
    let totals = column(&rows, 5);
    assert!(totals.windows(2).all(|w| w[1] < w[0]), "{totals:?}");
}

#[test]
fn sweep_endpoints_match_single_runs() {
    let out = stdout(&[
        "--format", "csv", "sweep", "G", "--from", "0.008", "--to", "0.02", "--steps", "2",
    ]);
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, 0), [0.008, 0.02]);
    let dir = tempfile::tempdir().unwrap();
    for (row, g) in rows.iter().zip(["0.008", "0.02"]) {
        let cfg = write(dir.path(), "g.cfg", &format!("G = {g}\n"));
        let single = csv_rows(&stdout(&["--config", &cfg, "--format", "csv", "evaluate"]));
        let total = single.iter().find(|r| r[0] == "total (multiple)").unwrap();
        assert_eq!(row[5], total[1]);
    }
}

#[test]
fn sweep_onset_reproduces_table_9() {
    let out = stdout(&[
        "--preset", "experts", "--format", "csv", "sweep", "t1", "--from", "1", "--to", "15",
        "--steps", "2",
    ]);
    let totals = column(&csv_rows(&out), 5);
    assert_eq!(totals[0].round(), 227.0);
    assert_eq!(totals[1].round(), 239.0);
}

#[test]
fn calibrate_presets() {
    let out = stdout(&["--format", "csv", "calibrate"]);
    let rows = csv_rows(&out);
    let d = rows.iter().find(|r| r[0] == "excess mortality d").unwrap();
    let sf: f64 = d[1].parse().unwrap();
    let de: f64 = d[2].parse().unwrap();
    assert!((sf - 0.000021).abs() < 2e-6, "{sf}");
    assert!((de - 0.000385).abs() < 2e-6, "{de}");
}

#[test]
fn calibrate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = "\
group,custom
pandemic_by_2030,0.5%
pandemic_by_2050,3%
pandemic_by_2100,8%
natural_pandemic_by_2030,1%
natural_pandemic_by_2050,3%
natural_pandemic_by_2100,6%
catastrophe_by_2100,2%
total_catastrophe_by_2100,10%
extinction_by_2100,0.1%
total_extinction_by_2100,1%
bio_extinction_by_2100,0.1%
tai_prob,10%
";
    let file = write(dir.path(), "f.csv", text);
    let out = stdout(&["--format", "csv", "calibrate", "--forecasts", &file]);
    let rows = csv_rows(&out);
    let d = rows.iter().find(|r| r[0] == "excess mortality d").unwrap();
    let v: f64 = d[1].parse().unwrap();
    assert!(v > 0.0 && v < 0.01, "{v}");
}

#[test]
fn fit_survival_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("survival_fit.txt");
    let fitted = stdout(&["fit-survival", "--source", "test"]);
    std::fs::write(&model, &fitted).unwrap();
    let shipped = std::fs::read_to_string(format!("{DATA}/survival_fit.txt")).unwrap();
    let coefficients = |s: &str| {
        s.lines()
            .filter(|l| l.starts_with(['a', 'b', 'c']) && l.contains('='))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(coefficients(&fitted), coefficients(&shipped));

    let out = Command::new(env!("CARGO_BIN_EXE_perils"))
        .args(["--format", "csv", "table", "8"])
        .env("PERILS_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reference = stdout(&["--format", "csv", "table", "8"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), reference);
}

#[test]
fn realistic_breakeven_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.cfg", "variant = realistic\n");
    let rows = csv_rows(&stdout(&["--config", &cfg, "--format", "csv", "breakeven"]));
    let d: f64 = rows[0][2].parse().unwrap();
    assert!((0.0009..=0.0017).contains(&d), "{d}");
}
