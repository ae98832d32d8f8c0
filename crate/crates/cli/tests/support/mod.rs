#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const N_CASES: usize = 88;
pub const N_INDICATORS: usize = 34;

pub struct Table {
    pub ids: Vec<String>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// 88 communities × 34 indicators driven by six latent themes, each column
/// on its own scale.
pub fn synthetic(seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let themes = 6;
    let loading: Vec<f64> = (0..N_INDICATORS).map(|j| 0.65 + 0.25 * ((j * 7 % 11) as f64 / 10.0)).collect();
    let scale: Vec<f64> = (0..N_INDICATORS).map(|j| [1.0, 12.5, 0.04, 850.0, 3.0][j % 5]).collect();
    let offset: Vec<f64> = (0..N_INDICATORS).map(|j| [50.0, 1000.0, 0.5, 17_000.0, 10.0][j % 5]).collect();
    let rows = (0..N_CASES)
        .map(|_| {
            let f: Vec<f64> = (0..themes).map(|_| rng.sample(StandardNormal)).collect();
            (0..N_INDICATORS)
                .map(|j| {
                    let e: f64 = rng.sample(StandardNormal);
                    let x = loading[j] * f[j % themes] + 0.45 * e;
                    offset[j] + scale[j] * x
                })
                .collect()
        })
        .collect();
    Table {
        ids: (1..=N_CASES).map(|i| format!("tract_{i:02}")).collect(),
        names: (1..=N_INDICATORS).map(|j| format!("ind_{j:02}")).collect(),
        rows,
    }
}

pub fn write_table(path: &Path, t: &Table) {
    let mut s = format!("community,{}\n", t.names.join(","));
    for (id, row) in t.ids.iter().zip(&t.rows) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        s.push_str(&format!("{id},{}\n", cells.join(",")));
    }
    std::fs::write(path, s).unwrap();
}

pub fn synthetic_csv(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join("synthetic.csv");
    write_table(&path, &synthetic(seed));
    path
}

/// Mutually orthogonal zero-mean ±1 columns: the correlation matrix is
/// exactly the identity, so no eigenvalue exceeds 1.
pub fn identity_csv(dir: &Path) -> PathBuf {
    let path = dir.join("identity.csv");
    std::fs::write(&path, "id,a,b,c\nw,1,1,1\nx,1,-1,-1\ny,-1,1,-1\nz,-1,-1,1\n").unwrap();
    path
}

pub fn factorank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factorank")).args(args).output().expect("binary runs")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}
