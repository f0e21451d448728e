use std::fs;
use std::path::Path;
use std::process::Command;

fn lab(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_interlace-lab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#schema=1"));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn classify_writes_schema_tagged_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["--out", "o", "classify", "besq:3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("o/classify.csv"));
    assert_eq!(rows[0], ["spec", "role", "endpoint", "class"]);
    assert!(rows.contains(&vec!["besq:3".into(), "original".into(), "l".into(), "entrance".into()]));
    assert!(rows.contains(&vec!["besq:3".into(), "conjugate".into(), "l".into(), "exit".into()]));
}

#[test]
fn simulate_reads_its_config_and_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sim.ini"),
        "[simulate]\nfamily = bm\nsystem = two-level\nshape = n,n+1\nn = 1\nT = 0.5\ndt = 0.05\npaths = 4\ninit = lambda:-1,1\noutput = run\ntrajectories = true\n",
    )
    .unwrap();
    let out = lab(dir.path(), &["--config", "sim.ini", "--seed", "9", "--out", "o", "simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let terminal = read_csv(&dir.path().join("o/run.csv"));
    // 4 paths, one Y and two X particles each.
    assert_eq!(terminal.len(), 1 + 4 * 3);
    let traj = read_csv(&dir.path().join("o/run.trajectory.csv"));
    assert_eq!(traj[0], ["path_id", "time", "level", "index", "value"]);
    assert_eq!(traj.len(), 1 + 4 * 11 * 3);

    // Same seed, same file.
    let again = tempfile::tempdir().unwrap();
    fs::copy(dir.path().join("sim.ini"), again.path().join("sim.ini")).unwrap();
    lab(again.path(), &["--config", "sim.ini", "--seed", "9", "--threads", "2", "--out", "o", "simulate"]);
    assert_eq!(fs::read(dir.path().join("o/run.csv")).unwrap(), fs::read(again.path().join("o/run.csv")).unwrap());
}

#[test]
fn campaign_exit_status_reflects_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let good = fixtures.join("duality_catalog.ini");
    let bad = fixtures.join("duality_wrong_sign.ini");
    let ok = lab(dir.path(), &["--config", good.to_str().unwrap(), "--out", "o", "campaign", "duality-catalog"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("o/duality-catalog.summary.json").exists());
    let fail = lab(dir.path(), &["--config", bad.to_str().unwrap(), "--out", "o", "campaign", "duality-catalog"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["classify", "no-such-family"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-family"));
}
