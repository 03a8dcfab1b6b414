//! CSV and JSON artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use jellium::edge::TopKSample;
use serde::Serialize;

use crate::error::CliError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the artifacts of one run under a directory.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    written: Vec<String>,
}

impl ArtifactDir {
    pub fn create(root: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let wrap = |e: csv::Error| CliError::Internal(format!("writing {}: {e}", path.display()));
        w.write_record(header).map_err(wrap)?;
        for r in rows {
            w.write_record(&r).map_err(wrap)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `sample_id,k,x`, one row per particle, `k` counted from the right.
    pub fn configurations(&mut self, name: &str, samples: &[Vec<f64>]) -> Result<(), CliError> {
        let rows = samples.iter().enumerate().flat_map(|(id, xs)| {
            xs.iter()
                .enumerate()
                .map(move |(k, &x)| vec![id.to_string(), (k + 1).to_string(), fmt_f64(x)])
        });
        self.csv(name, &["sample_id", "k", "x"], rows)
    }

    /// `sample_id,j,x,depth_m`; `depth_m` is empty for exact draws.
    pub fn topk(&mut self, name: &str, samples: &[TopKSample]) -> Result<(), CliError> {
        let rows = samples.iter().enumerate().flat_map(|(id, s)| {
            let depth = s.depth.map(|d| d.to_string()).unwrap_or_default();
            s.values
                .iter()
                .enumerate()
                .map(move |(j, &x)| vec![id.to_string(), (j + 1).to_string(), fmt_f64(x), depth.clone()])
        });
        self.csv(name, &["sample_id", "j", "x", "depth_m"], rows)
    }

    /// `x,F`.
    pub fn ecdf(&mut self, name: &str, points: &[(f64, f64)]) -> Result<(), CliError> {
        let rows = points.iter().map(|&(x, f)| vec![fmt_f64(x), fmt_f64(f)]);
        self.csv(name, &["x", "F"], rows)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}
