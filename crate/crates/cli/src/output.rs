//! Deterministic output layout: `out/<digest>/{curves,reports,fits}` plus a
//! manifest echoing the resolved configuration. Files are written through a
//! temp-and-rename so interrupted runs never leave half files behind.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub struct OutDir {
    root: PathBuf,
    pub digest: String,
    pub format: OutputFormat,
}

impl OutDir {
    pub fn create(base: &Path, canonical_config: &str, format: OutputFormat) -> Result<Self> {
        let mut hasher = Sha256::new();
        hasher.update(canonical_config.as_bytes());
        let digest_bytes = hasher.finalize();
        let digest: String = digest_bytes
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect();
        let root = base.join(&digest);
        for sub in ["curves", "reports", "fits"] {
            fs::create_dir_all(root.join(sub))
                .with_context(|| format!("creating {}", root.join(sub).display()))?;
        }
        let out = OutDir {
            root,
            digest,
            format,
        };
        out.write("manifest.txt", canonical_config)?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Atomic write relative to the run directory.
    pub fn write(&self, rel: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(rel);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("renaming to {}", path.display()))?;
        Ok(path)
    }

    /// Write tabular data in the selected format. `rel` is the path stem
    /// without extension; the config digest is embedded in the file name.
    pub fn write_table(&self, rel: &str, csv: &str) -> Result<PathBuf> {
        let stem = format!("{rel}_{}", self.digest);
        match self.format {
            OutputFormat::Csv => self.write(&format!("{stem}.csv"), csv),
            OutputFormat::Json => {
                let json = csv_to_json(csv)?;
                self.write(&format!("{stem}.json"), &json)
            }
        }
    }
}

/// Mechanical CSV-to-JSON conversion (header row becomes field names).
fn csv_to_json(csv: &str) -> Result<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines
        .next()
        .context("empty table")?
        .split(',')
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut obj = serde_json::Map::new();
        for (key, value) in header.iter().zip(line.split(',')) {
            let v: serde_json::Value = match value.parse::<f64>() {
                Ok(num) if num.is_finite() => serde_json::json!(num),
                _ => serde_json::json!(value),
            };
            obj.insert((*key).to_string(), v);
        }
        rows.push(serde_json::Value::Object(obj));
    }
    let mut s = serde_json::to_string_pretty(&rows)?;
    s.push('\n');
    Ok(s)
}
