use std::io::{BufRead, BufReader, Read, Write};

use super::{GaussianPath, PathParams};
use crate::error::{Error, Result};
use crate::num::Real;

const MAGIC: &[u8; 8] = b"RVPATH01";

/// Writes `time,value` rows. Values use the shortest representation that
/// parses back to the same float, so a CSV round trip is exact.
pub fn write_csv<T: Real, W: Write>(path: &GaussianPath<T>, mut out: W) -> Result<()> {
    writeln!(out, "time,value")?;
    for (t, v) in path.times.iter().zip(&path.values) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

/// Reads `time,value` rows written by [`write_csv`].
pub fn read_csv<T: Real, R: Read>(input: R) -> Result<(Vec<T>, Vec<T>)> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "time,value" {
                return Err(Error::Format(format!("line 1: unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = |name: &str| -> Result<T> {
            parts
                .next()
                .and_then(|s| s.trim().parse::<T>().ok())
                .ok_or_else(|| Error::Format(format!("line {}: bad {name} in {line:?}", i + 1)))
        };
        times.push(field("time")?);
        values.push(field("value")?);
    }
    Ok((times, values))
}

/// Binary layout: magic, `u32` length of a JSON parameter header, the header,
/// `u64` point count, then little-endian `f64` `(time, value)` pairs.
pub fn write_binary<T: Real, W: Write>(path: &GaussianPath<T>, mut out: W) -> Result<()> {
    let header = serde_json::to_vec(&path.params).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    out.write_all(&(path.values.len() as u64).to_le_bytes())?;
    for (t, v) in path.times.iter().zip(&path.values) {
        out.write_all(&t.to_f64_lossy().to_le_bytes())?;
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(mut input: R) -> Result<GaussianPath<T>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a path file (bad magic)".into()));
    }
    let mut u32b = [0u8; 4];
    input.read_exact(&mut u32b)?;
    let mut header = vec![0u8; u32::from_le_bytes(u32b) as usize];
    input.read_exact(&mut header)?;
    let params: PathParams<T> =
        serde_json::from_slice(&header).map_err(|e| Error::Format(format!("header: {e}")))?;
    let mut u64b = [0u8; 8];
    input.read_exact(&mut u64b)?;
    let n = u64::from_le_bytes(u64b) as usize;
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut f = [0u8; 8];
    for _ in 0..n {
        input.read_exact(&mut f)?;
        times.push(T::lit(f64::from_le_bytes(f)));
        input.read_exact(&mut f)?;
        values.push(T::lit(f64::from_le_bytes(f)));
    }
    Ok(GaussianPath {
        times,
        values,
        params,
    })
}
