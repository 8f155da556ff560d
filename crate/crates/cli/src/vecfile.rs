//! The vector file formats.
//!
//! Sparse: first line `sparse <d>`, then one `<index> <value>` per line,
//! 0-based indices, duplicates allowed (summed). Dense: first line
//! `dense <d>`, then d whitespace-separated decimal reals with arbitrary
//! line breaks. Values are written with round-trip decimal precision.

use anyhow::{anyhow, bail, Result};
use std::fs;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum VectorFile {
    Sparse {
        d: usize,
        entries: Vec<(usize, f64)>,
    },
    Dense {
        d: usize,
        values: Vec<f64>,
    },
}

impl VectorFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| anyhow!("line 1: empty file, expected 'sparse <d>' or 'dense <d>'"))?;
        let mut parts = header.split_whitespace();
        let tag = parts.next().unwrap_or("");
        let d: usize = parts
            .next()
            .ok_or_else(|| anyhow!("line 1: missing dimension in header"))?
            .parse()
            .map_err(|_| anyhow!("line 1: invalid dimension in header '{header}'"))?;
        if parts.next().is_some() {
            bail!("line 1: trailing tokens in header '{header}'");
        }
        if d == 0 {
            bail!("line 1: dimension must be positive");
        }

        match tag {
            "sparse" => {
                let mut entries = Vec::new();
                for (i, line) in lines {
                    let n = i + 1;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let mut tok = line.split_whitespace();
                    let idx: usize = tok
                        .next()
                        .unwrap()
                        .parse()
                        .map_err(|_| anyhow!("line {n}: invalid index in '{line}'"))?;
                    let val: f64 = tok
                        .next()
                        .ok_or_else(|| anyhow!("line {n}: missing value in '{line}'"))?
                        .parse()
                        .map_err(|_| anyhow!("line {n}: invalid value in '{line}'"))?;
                    if tok.next().is_some() {
                        bail!("line {n}: trailing tokens in '{line}'");
                    }
                    if idx >= d {
                        bail!("line {n}: index {idx} out of range for dimension {d}");
                    }
                    entries.push((idx, val));
                }
                Ok(VectorFile::Sparse { d, entries })
            }
            "dense" => {
                let mut values = Vec::with_capacity(d);
                for (i, line) in lines {
                    let n = i + 1;
                    for tok in line.split_whitespace() {
                        if values.len() == d {
                            bail!("line {n}: more than {d} values");
                        }
                        let val: f64 = tok
                            .parse()
                            .map_err(|_| anyhow!("line {n}: invalid value '{tok}'"))?;
                        values.push(val);
                    }
                }
                if values.len() != d {
                    bail!("expected {d} values, got {}", values.len());
                }
                Ok(VectorFile::Dense { d, values })
            }
            _ => bail!("line 1: unknown format tag '{tag}', expected 'sparse' or 'dense'"),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            VectorFile::Sparse { d, .. } | VectorFile::Dense { d, .. } => *d,
        }
    }

    /// The vector as (index, value) pairs; dense zeros are dropped.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        match self {
            VectorFile::Sparse { entries, .. } => entries.clone(),
            VectorFile::Dense { values, .. } => values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect(),
        }
    }

    /// The net dense vector (duplicate sparse indices summed).
    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            VectorFile::Dense { values, .. } => values.clone(),
            VectorFile::Sparse { d, entries } => {
                let mut x = vec![0.0; *d];
                for &(j, v) in entries {
                    x[j] += v;
                }
                x
            }
        }
    }
}

/// Dense-format text for a vector, one value per line.
pub fn format_dense(values: &[f64]) -> String {
    let mut out = format!("dense {}\n", values.len());
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn write_dense(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, format_dense(values))
        .map_err(|e| anyhow!("cannot write {}: {e}", path.display()))
}
