use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_citeheat"));
    cmd.env_remove("CITEHEAT_OUT").env_remove("RUST_LOG");
    cmd
}

/// 12 journals with a stable background and one sharply rising link
/// (J10 citing J03).
fn write_fixture(dir: &Path) -> Vec<String> {
    let rising = [29, 54, 106];
    ["2011", "2012", "2013"]
        .iter()
        .enumerate()
        .map(|(y, label)| {
            let mut text = String::new();
            for i in 0..12 {
                for j in 0..12 {
                    let c = match (i, j) {
                        (10, 3) => rising[y],
                        _ if i == j => 40,
                        _ => 10 + (3 * i + 5 * j) % 7,
                    };
                    text.push_str(&format!("J{i:02}\tJ{j:02}\t{c}\n"));
                }
            }
            let path = dir.join(format!("{label}.tsv"));
            fs::write(&path, text).unwrap();
            format!("{label}={}", path.display())
        })
        .collect()
}

fn run(args: &[&str], years: &[String], out: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for y in years {
        cmd.args(["--year", y]);
    }
    cmd.arg("--out").arg(out).output().unwrap()
}

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn run_writes_all_stages() {
    let dir = tempfile::tempdir().unwrap();
    let years = write_fixture(dir.path());
    let out = dir.path().join("out");
    let o = run(&["run"], &years, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("run: wrote"), "{stdout}");
    let hot = fs::read_to_string(out.join("links/hot_links.csv")).unwrap();
    assert_eq!(hot.lines().count(), 2, "{hot}");
    assert!(hot.lines().nth(1).unwrap().starts_with("J10,J03,"));
    for f in [
        "graph/hot_links.net",
        "graph/communities.clu",
        "export/vosviewer_map.txt",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn staged_commands_match_run() {
    let dir = tempfile::tempdir().unwrap();
    let years = write_fixture(dir.path());
    let full = dir.path().join("full");
    assert!(run(&["run"], &years, &full).status.success());
    let staged = dir.path().join("staged");
    for stage in ["ingest", "flag-journals", "flag-links", "graph", "export"] {
        let o = run(&[stage], &years, &staged);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(snapshot(&full) == snapshot(&staged));
}

#[test]
fn missing_year_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let years = write_fixture(dir.path());
    let o = run(&["run"], &years[..2], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("--year"), "{stderr}");

    let o = bin().args(["run", "--year", "nonsense"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin()
        .args(["run", "--k", "-1", "--out", "x"])
        .args(years.iter().flat_map(|y| ["--year", y]))
        .output();
    assert_eq!(o.unwrap().status.code(), Some(1));
}

#[test]
fn data_and_io_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut years = write_fixture(dir.path());
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "J01\tJ02\tmany\n").unwrap();
    years[1] = format!("2012={}", bad.display());
    let o = run(&["run"], &years, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.tsv"));

    years[1] = format!("2012={}", dir.path().join("absent.tsv").display());
    let o = run(&["run"], &years, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn out_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let years = write_fixture(dir.path());
    let out = dir.path().join("env_out");
    let mut cmd = bin();
    cmd.arg("ingest").env("CITEHEAT_OUT", &out);
    for y in &years {
        cmd.args(["--year", y]);
    }
    let o = cmd.output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("ingest/data_summary.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "year = 2011=2011.tsv\nyear = 2012=2012.tsv\nyear = 2013=2013.tsv\nout = from_config\nunit = bits\n",
    )
    .unwrap();
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(&conf)
        .args(["--unit", "microbits"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let hot = fs::read_to_string(dir.path().join("from_config/links/hot_links.csv")).unwrap();
    assert!(hot.starts_with("citing,cited,score_microbits\n"), "{hot}");

    fs::write(&conf, "out = x\nthreshold = 2\n").unwrap();
    let o = bin().arg("run").arg("--config").arg(&conf).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.conf:2"));
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let years = write_fixture(dir.path());
    let o = run(&["run", "--community", "leiden"], &years, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("louvain"), "{stderr}");
}
