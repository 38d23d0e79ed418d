use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_richards-uq"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("richards-uq-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn listed(out: &std::process::Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.to_string())
        .collect()
}

#[test]
fn solve_with_zero_noise_writes_pressure_and_stats() {
    let dir = scratch("solve");
    let cfg = write_config(&dir, "[soil]\nrandomize = \"none\"\n[solve]\nm = 16\ndt = 0.03125\n");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = listed(&out);
    let csv: Vec<_> = files.iter().filter(|f| f.ends_with(".csv")).collect();
    let json: Vec<_> = files.iter().filter(|f| f.ends_with("-telemetry.json")).collect();
    assert_eq!(csv.len(), 1);
    assert!(csv[0].contains("solve-") && csv[0].ends_with("-pressure.csv"));
    assert_eq!(json.len(), 1);
    let rows = std::fs::read_to_string(csv[0]).unwrap().lines().count();
    assert_eq!(rows, 1 + 16 * 16);
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(json[0]).unwrap()).unwrap();
    assert_eq!(stats["stats"]["failed"], false);
    assert!(files.iter().any(|f| f.ends_with("-manifest.json")));
}

#[test]
fn costmap_single_cell_has_one_row() {
    let dir = scratch("costmap");
    let cfg = write_config(
        &dir,
        "[costmap]\nalphas = [1.0]\nns = [2.0]\nreps = 2\nm = 8\ndt = 0.0625\n",
    );
    let out = bin()
        .args(["costmap", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = listed(&out);
    let csv = files.iter().find(|f| f.ends_with("-costmap.csv")).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,n,mean_cycles,std_cycles,failures,reps");
    assert_eq!(lines.len(), 2);
}

#[test]
fn pcmlmc_rerun_is_byte_identical() {
    let dir = scratch("pcmlmc");
    let cfg = write_config(
        &dir,
        "[estimator]\neps = 0.05\n[pcmlmc]\ncoarsest = 4\nlevels = 2\nwarmup = [6, 3]\n",
    );
    let mut telemetry = Vec::new();
    let mut fields = Vec::new();
    for rep in 0..2 {
        let out = bin()
            .args(["pcmlmc", "--seed", "5", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.join(format!("o{rep}")))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let files = listed(&out);
        let t = files.iter().find(|f| f.ends_with("-telemetry.json")).unwrap();
        let m = files.iter().find(|f| f.ends_with("-mean.csv")).unwrap();
        telemetry.push(std::fs::read(t).unwrap());
        fields.push(std::fs::read(m).unwrap());
    }
    assert_eq!(telemetry[0], telemetry[1]);
    assert_eq!(fields[0], fields[1]);
}

#[test]
fn seed_changes_hash_and_result() {
    let dir = scratch("seed");
    let mut names = Vec::new();
    for seed in ["1", "2"] {
        let out = bin()
            .args(["fields", "--seed", seed, "--out"])
            .arg(dir.join("o"))
            .env("RICHARDS_UQ_THREADS", "1")
            .output()
            .unwrap();
        assert!(out.status.success());
        names.push(listed(&out)[0].clone());
    }
    assert_ne!(names[0], names[1]);
}

#[test]
fn environment_overrides_seed() {
    let dir = scratch("env");
    let run = |env_seed: Option<&str>| {
        let mut c = bin();
        c.args(["fields", "--out"]).arg(dir.join("o"));
        if let Some(s) = env_seed {
            c.env("RICHARDS_UQ_SEED", s);
        }
        listed(&c.output().unwrap())[0].clone()
    };
    assert_eq!(run(Some("1")), run(None));
    assert_ne!(run(Some("9")), run(None));
}

#[test]
fn invalid_config_exits_with_config_code() {
    let dir = scratch("bad");
    let cfg = write_config(&dir, "[soil]\nn = 0.9\n");
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must exceed 1"));

    let cfg = write_config(&dir, "[soil]\ncolour = 3\n");
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_solve_exits_with_solver_code() {
    let dir = scratch("fail");
    let cfg = write_config(
        &dir,
        "[soil]\nrandomize = \"none\"\n[solver]\nmax_picard = 1\n[solve]\nm = 8\ndt = 0.0625\n",
    );
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
