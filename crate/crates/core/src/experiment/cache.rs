use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapley::ValueStore;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    mask: String,
    rep: u32,
    value: f64,
}

/// Append-only JSON-lines value log, one `{"mask": "0x..", "rep": n, "value": v}`
/// object per evaluation.
pub struct JsonlStore {
    path: PathBuf,
    values: HashMap<(u64, u32), f64>,
    writer: BufWriter<File>,
}

fn parse_mask(s: &str) -> Option<u64> {
    let hex = s.strip_prefix("0x")?;
    u64::from_str_radix(hex, 16).ok()
}

impl JsonlStore {
    /// Open `path`, loading any existing entries. A later line for the same
    /// key overrides an earlier one.
    pub fn open(path: &Path) -> Result<Self> {
        let mut values = HashMap::new();
        if path.exists() {
            let corrupt = |line: usize, message: String| Error::CacheCorrupt {
                path: path.display().to_string(),
                line,
                message,
            };
            for (i, text) in BufReader::new(File::open(path)?).lines().enumerate() {
                let text = text?;
                if text.trim().is_empty() {
                    continue;
                }
                let line: Line =
                    serde_json::from_str(&text).map_err(|e| corrupt(i + 1, e.to_string()))?;
                let mask = parse_mask(&line.mask)
                    .ok_or_else(|| corrupt(i + 1, format!("bad mask `{}`", line.mask)))?;
                values.insert((mask, line.rep), line.value);
            }
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JsonlStore {
            path: path.to_path_buf(),
            values,
            writer: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl ValueStore for JsonlStore {
    fn get(&self, mask: u64, rep: u32) -> Option<f64> {
        self.values.get(&(mask, rep)).copied()
    }

    fn put_batch(&mut self, entries: &[(u64, u32, f64)]) -> Result<()> {
        for &(mask, rep, value) in entries {
            let line = Line {
                mask: format!("{mask:#x}"),
                rep,
                value,
            };
            serde_json::to_writer(&mut self.writer, &line)?;
            self.writer.write_all(b"\n")?;
            self.values.insert((mask, rep), value);
        }
        self.writer.flush()?;
        Ok(())
    }
}
