//! Output directory, manifest and unit conversion.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;

/// Scale applied to rates before they are written.
pub fn unit_scale(bits: bool) -> f64 {
    if bits {
        1.0 / NATS_PER_BIT
    } else {
        1.0
    }
}

pub fn unit_name(bits: bool) -> &'static str {
    if bits {
        "bits"
    } else {
        "nats"
    }
}

/// Collects the files written by a run.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Writes `manifest.json`: tool version, the resolved configuration and
    /// the list of outputs. No timestamps or paths, so identical runs give
    /// identical manifests.
    pub fn finish<C: Serialize>(mut self, config: &C) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            tool: &'static str,
            version: &'static str,
            config: &'a C,
            outputs: &'a [String],
        }
        let outputs = std::mem::take(&mut self.written);
        self.write_json(
            "manifest.json",
            &Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                config,
                outputs: &outputs,
            },
        )
    }
}

/// Reads back a CSV file as text for printing.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
