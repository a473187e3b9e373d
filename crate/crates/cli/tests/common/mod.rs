#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use posprod::ComplexMatrix;
use posprod_cli::MatrixFile;

pub fn posprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posprod"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

pub fn write_matrix(dir: &Path, name: &str, m: &ComplexMatrix) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&MatrixFile::from_matrix(m)).unwrap()).unwrap();
    path
}

pub fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}
