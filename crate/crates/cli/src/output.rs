use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Collects the files written by one command and the manifest describing them.
pub struct Output {
    dir: PathBuf,
    format: Format,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            files: Vec::new(),
        })
    }

    fn create(&mut self, name: String) -> Result<BufWriter<File>> {
        let path = self.dir.join(&name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        self.files.push(name);
        Ok(BufWriter::new(file))
    }

    /// Writes `<stem>.csv` through `csv` or `<stem>.json` from `value`,
    /// depending on the selected format.
    pub fn table<T: Serialize>(
        &mut self,
        stem: &str,
        value: &T,
        csv: impl FnOnce(BufWriter<File>) -> rydberg::Result<()>,
    ) -> Result<()> {
        match self.format {
            Format::Csv => {
                let w = self.create(format!("{stem}.csv"))?;
                csv(w)?;
            }
            Format::Json => self.json(stem, value)?,
        }
        Ok(())
    }

    /// Always writes `<stem>.json`.
    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        let w = self.create(format!("{stem}.json"))?;
        serde_json::to_writer_pretty(w, value)?;
        Ok(())
    }

    /// Writes `manifest.json` with the command, its resolved inputs, the seed,
    /// versions, the output files and the failure count.
    pub fn finish(mut self, command: &str, spec: Value, seed: Option<u64>, workers: usize, failures: usize) -> Result<()> {
        let manifest = json!({
            "command": command,
            "spec": spec,
            "seed": seed,
            "workers": workers,
            "format": self.format,
            "versions": {
                "rydberg": rydberg::experiments::VERSION,
                "rydberg-cli": env!("CARGO_PKG_VERSION"),
            },
            "outputs": self.files.clone(),
            "failures": failures,
        });
        let w = self.create("manifest.json".into())?;
        serde_json::to_writer_pretty(w, &manifest)?;
        Ok(())
    }
}
