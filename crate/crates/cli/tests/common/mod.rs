#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtg_core::RdtedParams;

pub const ORIGINS: [&str; 3] = ["Coppice", "Natural", "Planted"];

/// Coefficients used to simulate the synthetic tree table:
/// `(Intercept, Age, OriginNatural, OriginPlanted, log σ)`.
pub const SYNTH_THETA: [f64; 5] = [-1.5, 0.03, -0.4, 0.5, -1.9];

pub fn dtg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dtg"))
}

pub fn run(args: &[&str]) -> Output {
    dtg().args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// A tree table with `Foliage`, `DBH`, `Age`, `Origin` drawn from the
/// median model at [`SYNTH_THETA`].
pub fn synthetic_trees(n: usize, seed: u64) -> String {
    let [a1, a2, a3, a4, g1] = SYNTH_THETA;
    let sigma = g1.exp();
    let mut text = String::from("Foliage,DBH,Age,Origin\n");
    for i in 0..n {
        let age = 10.0 + ((i * 53) % 120) as f64;
        let origin = ORIGINS[(i * 7 + i / 5) % 3];
        let eta = a1
            + a2 * age
            + if origin == "Natural" { a3 } else { 0.0 }
            + if origin == "Planted" { a4 } else { 0.0 };
        let y = RdtedParams::new(eta.exp(), sigma)
            .unwrap()
            .sample(1, seed.wrapping_mul(7919).wrapping_add(i as u64))
            .unwrap()[0];
        let dbh = 2.0 + 0.2 * age + (i % 7) as f64;
        text.push_str(&format!("{y},{dbh},{age},{origin}\n"));
    }
    text
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `(rows, header)` of a CSV file with a header line.
pub fn read_csv(path: &Path) -> (Vec<Vec<String>>, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (rows, header)
}

pub const KS_CRIT_1PCT: f64 = 1.627;

pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
