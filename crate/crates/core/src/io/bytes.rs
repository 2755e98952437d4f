//! Low-level helpers shared by the artifact file formats: bounded ASCII
//! header lines and little-endian f64 payloads.
//!
//! Every format stores numbers on disk as 64-bit IEEE floats regardless of
//! the in-memory scalar type, so files are portable across precision builds.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::io::{Read, Write};
use std::path::Path;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Reads one newline-terminated ASCII line (at most `max` bytes).
pub fn read_line(r: &mut impl Read, path: &Path, max: usize) -> Result<String> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r.read(&mut byte)?;
        if n == 0 {
            return Err(format_err(path, "unexpected end of file inside header"));
        }
        if byte[0] == b'\n' {
            break;
        }
        line.push(byte[0]);
        if line.len() > max {
            return Err(format_err(path, "header line too long"));
        }
    }
    String::from_utf8(line).map_err(|_| format_err(path, "header is not valid ASCII"))
}

/// Checks that the file starts with `magic` (including the trailing newline).
pub fn expect_magic(r: &mut impl Read, path: &Path, magic: &str) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf)
        .map_err(|_| format_err(path, format!("file too short for `{}` magic", magic.trim_end())))?;
    if buf != magic.as_bytes() {
        return Err(format_err(
            path,
            format!("bad magic: expected `{}`", magic.trim_end()),
        ));
    }
    Ok(())
}

/// Parses `line` into exactly `n` whitespace-separated tokens.
pub fn tokens<'a>(line: &'a str, n: usize, path: &Path) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != n {
        return Err(format_err(
            path,
            format!("header expects {n} fields, found {}", parts.len()),
        ));
    }
    Ok(parts)
}

/// Parses one integer header token.
pub fn parse_usize(tok: &str, what: &str, path: &Path) -> Result<usize> {
    tok.parse()
        .map_err(|_| format_err(path, format!("{what} is not a valid integer: `{tok}`")))
}

/// Parses one floating-point header token.
pub fn parse_f64(tok: &str, what: &str, path: &Path) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| format_err(path, format!("{what} is not a valid number: `{tok}`")))?;
    if !v.is_finite() {
        return Err(format_err(path, format!("{what} must be finite")));
    }
    Ok(v)
}

/// Writes a scalar slice as little-endian f64.
pub fn write_f64s<T: Real>(w: &mut impl Write, values: &[T]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len().min(1 << 16) * 8);
    for chunk in values.chunks(1 << 13) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads `count` little-endian f64 values.
pub fn read_f64s<T: Real>(r: &mut impl Read, count: usize, path: &Path, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; 8 * (1 << 13)];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(1 << 13);
        let bytes = &mut buf[..8 * take];
        r.read_exact(bytes)
            .map_err(|_| format_err(path, format!("truncated while reading {what}")))?;
        for c in bytes.chunks_exact(8) {
            out.push(T::of(f64::from_le_bytes(c.try_into().unwrap())));
        }
        remaining -= take;
    }
    Ok(out)
}

/// Fails if the reader still holds data past the declared payload.
pub fn expect_eof(r: &mut impl Read, path: &Path) -> Result<()> {
    let mut byte = [0u8; 1];
    if r.read(&mut byte)? != 0 {
        return Err(format_err(path, "trailing bytes after declared payload"));
    }
    Ok(())
}
