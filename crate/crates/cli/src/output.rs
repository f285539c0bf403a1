//! CSV and record output. Every table carries `schema_version` and
//! `config_hash` columns so a file can always be traced back to its run.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use fracspde::config::{command_record, config_hash, SCHEMA_VERSION};
use serde::Serialize;

use crate::Failure;

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Re-reads CSV produced by a library writer.
    pub fn parse(bytes: &[u8]) -> Result<Self, Failure> {
        let mut r = csv::Reader::from_reader(bytes);
        let header = r
            .headers()
            .map_err(lib_csv)?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = vec![];
        for rec in r.records() {
            rows.push(rec.map_err(lib_csv)?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }

    pub fn write<W: Write>(&self, out: W, hash: &str) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(out);
        let stamp = |mut v: Vec<String>, a: &str, b: &str| {
            v.push(a.into());
            v.push(b.into());
            v
        };
        w.write_record(stamp(self.header.clone(), "schema_version", "config_hash"))
            .map_err(lib_csv)?;
        for row in &self.rows {
            w.write_record(stamp(row.clone(), SCHEMA_VERSION, hash))
                .map_err(lib_csv)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn emit(&self, path: Option<&Path>, hash: &str) -> Result<(), Failure> {
        match path {
            Some(p) => self.write(fs::File::create(p)?, hash),
            None => self.write(io::stdout().lock(), hash),
        }
    }
}

fn lib_csv(e: csv::Error) -> Failure {
    Failure::Lib(fracspde::Error::Csv(e))
}

/// Shortest round-trip form, switching to exponent notation far from 1.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn hash<T: Serialize>(config: &T) -> Result<String, Failure> {
    Ok(config_hash(config)?)
}

pub fn write_record<T: Serialize, R: Serialize>(
    path: Option<&Path>,
    command: &str,
    config: &T,
    results: Option<&R>,
) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, command_record(command, config, results)?)?;
    }
    Ok(())
}
