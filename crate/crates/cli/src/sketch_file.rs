//! Serialized sketch files: a `sketch` header, the projection identity
//! as key-value lines, then the k accumulator values one per line.

use anyhow::{anyhow, bail, Result};
use sparse_jl::{HashProjection, Sketch};
use std::fs;
use std::path::Path;

pub fn format(sketch: &Sketch) -> String {
    let p = sketch.projection();
    let mut out = format!(
        "sketch\nseed={}\nk={}\ndim={}\nupdates={}\n",
        p.master_seed(),
        p.k(),
        p.dim(),
        sketch.update_count()
    );
    for v in sketch.accumulator() {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn write(path: &Path, sketch: &Sketch) -> Result<()> {
    fs::write(path, format(sketch)).map_err(|e| anyhow!("cannot write {}: {e}", path.display()))
}

pub fn read(path: &Path) -> Result<Sketch> {
    let text =
        fs::read_to_string(path).map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
    parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn parse(text: &str) -> Result<Sketch> {
    let mut lines = text.lines();
    if lines.next() != Some("sketch") {
        bail!("line 1: expected 'sketch' header");
    }
    let mut field = |name: &str| -> Result<u64> {
        let line = lines
            .next()
            .ok_or_else(|| anyhow!("missing '{name}=' line"))?;
        let value = line
            .strip_prefix(&format!("{name}="))
            .ok_or_else(|| anyhow!("expected '{name}=', got '{line}'"))?;
        value
            .parse()
            .map_err(|_| anyhow!("invalid {name} '{value}'"))
    };
    let seed = field("seed")?;
    let k = field("k")? as usize;
    let dim = field("dim")? as usize;
    let updates = field("updates")?;

    let mut accumulator = Vec::with_capacity(k);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| anyhow!("invalid accumulator value '{line}'"))?;
        accumulator.push(v);
    }
    if accumulator.len() != k {
        bail!("expected {k} accumulator values, got {}", accumulator.len());
    }
    Ok(Sketch::from_parts(
        HashProjection::new(k, dim, seed),
        accumulator,
        updates,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        let mut s = Sketch::new(HashProjection::new(4, 100, 77));
        s.update(3, 1.0 / 3.0).unwrap();
        s.update(99, -2.5e-17).unwrap();
        let text = format(&s);
        let back = parse(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_truncated_files() {
        let s = Sketch::new(HashProjection::new(4, 10, 1));
        let text = format(&s);
        let cut = &text[..text.len() - 2];
        assert!(parse(cut).is_err());
        assert!(parse("not a sketch\n").is_err());
    }
}
