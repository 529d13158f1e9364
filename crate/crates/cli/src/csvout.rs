//! CSV emission with a reproducibility header.
//!
//! Every file starts with one comment line carrying the tool version, the
//! command, the seed, and the config hash, so any table can be traced back
//! to the exact run that produced it. Floats are written with Rust's
//! shortest-round-trip formatting, which is byte-stable for equal inputs.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use covertd2d::NetworkConfig;

pub struct CsvTable {
    buf: String,
}

impl CsvTable {
    pub fn new(cmd: &str, seed: u64, cfg: &NetworkConfig, columns: &[&str]) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            "# covertd2d v{} | cmd={} | seed={} | config={}",
            env!("CARGO_PKG_VERSION"),
            cmd,
            seed,
            cfg.hash_hex()
        );
        let _ = writeln!(buf, "{}", columns.join(","));
        CsvTable { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn write(&self, out: Option<&Path>) -> io::Result<()> {
        match out {
            Some(path) => fs::write(path, &self.buf),
            None => io::stdout().write_all(self.buf.as_bytes()),
        }
    }
}

/// Shortest-round-trip float field.
pub fn f(x: f64) -> String {
    format!("{x}")
}
