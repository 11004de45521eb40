use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hscar::output::{sha256_file, RunManifest, MANIFEST_NAME};

fn hscar(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hscar")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, err) = hscar(&args);
    if code != 0 {
        eprintln!("{err}");
    }
    code
}

fn manifest(out: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(out.join(MANIFEST_NAME)).unwrap()).unwrap()
}

const SSH4: &str = "version = 1\nmodel = \"ssh\"\ndimers = 4\nj0 = 1.6\nj3 = -0.162\ninitial = [\"C\", \"C'\"]\n";

#[test]
fn manifest_lists_every_output_with_its_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", SSH4);
    let out = tmp.path().join("out");
    assert_eq!(run("spectrum", &cfg, &out, &[]), 0);
    let m = manifest(&out);
    assert_eq!(m.command, "spectrum");
    let mut on_disk: Vec<PathBuf> = fs::read_dir(&out)
        .unwrap()
        .map(|e| PathBuf::from(e.unwrap().file_name()))
        .filter(|f| f != Path::new(MANIFEST_NAME))
        .collect();
    on_disk.sort();
    let mut listed: Vec<PathBuf> = m.outputs.iter().map(|o| o.file.clone()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
    for o in &m.outputs {
        assert_eq!(sha256_file(&out.join(&o.file)).unwrap().0, o.sha256);
    }
    let csv = fs::read_to_string(out.join("spectrum_C.csv")).unwrap();
    assert!(csv.starts_with("energy [J],overlap [1],entropy [nats]\n"));
    assert_eq!(csv.lines().count(), 1 + 70);
}

#[test]
fn reruns_are_byte_identical_and_the_echo_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.toml", &format!("{SSH4}[time]\nt_max = 4.0\npoints = 101\n[dynamics]\nrandom_states = 3\n"));
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(run("dynamics", &cfg, &a, &["--seed", "5"]), 0);
    assert_eq!(run("dynamics", &cfg, &b, &["--seed", "5"]), 0);
    assert_eq!(run("dynamics", &a.join("config.toml"), &c, &[]), 0);
    let (ma, mb, mc) = (manifest(&a), manifest(&b), manifest(&c));
    assert_eq!(ma.config.seed, 5);
    let sums = |m: &RunManifest| m.outputs.iter().map(|o| (o.file.clone(), o.sha256.clone())).collect::<Vec<_>>();
    assert_eq!(sums(&ma), sums(&mb));
    assert_eq!(sums(&ma), sums(&mc));
    assert!(a.join("trace_random_02.csv").exists());
}

#[test]
fn seed_changes_random_draws() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "version = 1\nmodel = \"random-cluster\"\ndimers = 6\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("cluster-gen", &cfg, &a, &["--seed", "1"]), 0);
    assert_eq!(run("cluster-gen", &cfg, &b, &["--seed", "2"]), 0);
    assert_ne!(fs::read(a.join("lattice.json")).unwrap(), fs::read(b.join("lattice.json")).unwrap());
}

#[test]
fn generated_cluster_feeds_a_custom_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "version = 1\nmodel = \"random-cluster\"\ndimers = 4\nseed = 9\n");
    let gen = tmp.path().join("gen");
    assert_eq!(run("cluster-gen", &cfg, &gen, &[]), 0);
    fs::copy(gen.join("lattice.json"), tmp.path().join("lattice.json")).unwrap();
    let custom = write_config(
        tmp.path(),
        "custom.toml",
        "version = 1\nmodel = \"custom\"\nlattice_file = \"lattice.json\"\ninitial_bits = \"10101010\"\n",
    );
    assert_eq!(run("spectrum", &custom, &tmp.path().join("out"), &[]), 0);
    assert!(tmp.path().join("out/spectrum_10101010.csv").exists());
}

#[test]
fn sweeps_write_one_file_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        "version = 1\nmodel = \"comb\"\ndimers = 4\nj0 = 1.5\ninitial = \"C\"\n[sweep]\nparameter = \"j1\"\nvalues = [0.2, 0.4, 0.6, 0.8]\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("spectrum", &cfg, &out, &["--threads", "2"]), 0);
    for v in ["0.2", "0.4", "0.6", "0.8"] {
        assert!(out.join(format!("spectrum_C_j1_{v}.csv")).exists());
    }
    let fit = fs::read_to_string(out.join("lambda_fit.csv")).unwrap();
    assert_eq!(fit.lines().count(), 5);
    assert_eq!(run("hda", &cfg, &tmp.path().join("hda"), &[]), 0);
    assert!(tmp.path().join("hda/hda_C_j1_0.4.csv").exists());
}

#[test]
fn ratio_table_matches_closed_forms() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.toml",
        "version = 1\nmodel = \"ssh\"\ndimers = 2\n[ratio]\ncases = [\"1d:4\", \"2d:2x2\", \"md:3\"]\n",
    );
    let out = tmp.path().join("out");
    assert_eq!(run("ratio", &cfg, &out, &[]), 0);
    let mut rdr = csv::Reader::from_path(out.join("ratio.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(&rows[0][7], "4/3");
    assert_eq!(&rows[0][10], "1");
    assert_eq!(&rows[1][10], "1");
    assert_eq!(&rows[2][8], "4/7");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write_config(tmp.path(), "t.toml", &format!("{SSH4}j4 = 0.1\n"));
    assert_eq!(run("spectrum", &typo, &tmp.path().join("x"), &[]), 2);
    let missing = tmp.path().join("nope.toml");
    assert_eq!(run("spectrum", &missing, &tmp.path().join("x"), &[]), 1);
    assert_eq!(hscar(&["spectrum"]).0, 2);
    let big = write_config(tmp.path(), "b.toml", "version = 1\nmodel = \"ssh\"\ndimers = 2\n[ratio]\ncases = [\"2d:3x3\"]\n");
    assert_eq!(run("ratio", &big, &tmp.path().join("x"), &[]), 3);
    // a tiny eigen cap blocks the spectrum but not the Krylov dynamics
    let capped = write_config(
        tmp.path(),
        "c.toml",
        &format!("{SSH4}[spectrum]\neigen_cap = 10\n[time]\nt_max = 2.0\npoints = 11\n[dynamics]\nrandom_states = 1\n"),
    );
    assert_eq!(run("spectrum", &capped, &tmp.path().join("s"), &[]), 3);
    assert_eq!(run("dynamics", &capped, &tmp.path().join("d"), &[]), 0);
}
