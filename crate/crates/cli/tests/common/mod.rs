#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rdl_core::model::{model_to_json, GaussianChain, ChainOrder, JointPmf3, SourceModel};

pub fn rdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdl"))
        .args(args)
        .output()
        .expect("rdl runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn write_model(dir: &Path, name: &str, m: &SourceModel) -> PathBuf {
    write(dir, name, &model_to_json(m))
}

/// DSBS(0.1) with Z = Y.
pub fn dsbs() -> SourceModel {
    SourceModel::Discrete(JointPmf3::dsbs_z_eq_y(0.1).unwrap())
}

/// σ_Y² = 0.5, σ_N1² = σ_N2² = 0.2 on a `Y − X − Z` chain.
pub fn example_chain() -> GaussianChain {
    GaussianChain::new(ChainOrder::YXZ, 0.5, 0.2, 0.2).unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.02).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_rows(rng: &mut ChaCha8Rng, inputs: usize, out: usize) -> Vec<Vec<f64>> {
    (0..inputs).map(|_| random_pmf(rng, out)).collect()
}

/// Random model with `X − Y − Z`.
pub fn random_xyz(rng: &mut ChaCha8Rng) -> JointPmf3 {
    let nx = rng.gen_range(2..=3);
    let ny = rng.gen_range(2..=3);
    let nz = rng.gen_range(2..=3);
    let pxy = random_pmf(rng, nx * ny);
    JointPmf3::from_xy_and_z_given_y(nx, ny, &pxy, &random_rows(rng, ny, nz)).unwrap()
}

/// Random model with `X − Z − Y`.
pub fn random_xzy(rng: &mut ChaCha8Rng) -> JointPmf3 {
    let nx = rng.gen_range(2..=3);
    let nz = rng.gen_range(2..=3);
    let ny = rng.gen_range(2..=3);
    let pxz = random_pmf(rng, nx * nz);
    JointPmf3::from_xz_and_y_given_z(nx, nz, &pxz, &random_rows(rng, nz, ny)).unwrap()
}

/// Prints one verdict line on stderr (not captured by the test harness) and
/// fails the test on FAIL.
pub fn verdict(name: &str, ok: bool, detail: &str) {
    let line = format!("{} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    assert!(ok, "{name}: {detail}");
}
