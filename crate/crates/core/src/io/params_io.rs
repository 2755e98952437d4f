//! Named-tensor parameter files.
//!
//! Layout: magic `ROMP1\n`, an ASCII metadata block (`notes m` followed by
//! m free-form lines, used by model checkpoints for architecture and
//! normalization records), an ASCII manifest (`tensors k` followed by one
//! `name dim dim ...` line per tensor), then the little-endian f64 payloads
//! in manifest order.

use crate::ad::tensor::Tensor;
use crate::error::{Error, Result};
use crate::io::bytes::{
    expect_eof, expect_magic, parse_usize, read_f64s, read_line, write_f64s,
};
use crate::io::{atomic_write, open_artifact};
use std::io::BufReader;
use std::path::Path;

const PARAMS_MAGIC: &str = "ROMP1\n";

/// In-memory form of a parameter file: metadata lines plus named tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsFile {
    /// Free-form single-line ASCII records (no newlines), e.g. architecture.
    pub notes: Vec<String>,
    /// Named tensors, serialized in this order.
    pub tensors: Vec<(String, Tensor)>,
}

impl ParamsFile {
    pub fn new() -> Self {
        Self {
            notes: Vec::new(),
            tensors: Vec::new(),
        }
    }

    /// Finds a tensor by name.
    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    /// Finds the first note starting with `key` followed by a space.
    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes
            .iter()
            .find(|line| line.strip_prefix(key).is_some_and(|r| r.starts_with(' ')))
            .map(|line| line[key.len() + 1..].trim())
    }
}

impl Default for ParamsFile {
    fn default() -> Self {
        Self::new()
    }
}

fn bad(path: &Path, reason: String) -> Error {
    Error::FileFormat {
        path: path.display().to_string(),
        reason,
    }
}

/// Writes a parameter file atomically.
pub fn save_params(path: &Path, file: &ParamsFile) -> Result<()> {
    for line in &file.notes {
        if line.contains('\n') || !line.is_ascii() {
            return Err(bad(path, format!("note is not single-line ASCII: {line:?}")));
        }
    }
    for (name, _) in &file.tensors {
        if name.is_empty() || name.contains(char::is_whitespace) || !name.is_ascii() {
            return Err(bad(path, format!("invalid tensor name: {name:?}")));
        }
    }
    atomic_write(path, |w| {
        use std::io::Write;
        w.write_all(PARAMS_MAGIC.as_bytes())?;
        w.write_all(format!("notes {}\n", file.notes.len()).as_bytes())?;
        for line in &file.notes {
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
        }
        w.write_all(format!("tensors {}\n", file.tensors.len()).as_bytes())?;
        for (name, tensor) in &file.tensors {
            let dims: Vec<String> = tensor.shape().iter().map(|d| d.to_string()).collect();
            w.write_all(format!("{} {}\n", name, dims.join(" ")).as_bytes())?;
        }
        for (_, tensor) in &file.tensors {
            write_f64s(w, tensor.data())?;
        }
        Ok(())
    })
}

/// Reads a parameter file back.
pub fn load_params(path: &Path) -> Result<ParamsFile> {
    let mut r = BufReader::new(open_artifact(path)?);
    expect_magic(&mut r, path, PARAMS_MAGIC)?;

    let notes_header = read_line(&mut r, path, 64)?;
    let n_notes = parse_count(&notes_header, "notes", path)?;
    let mut notes = Vec::with_capacity(n_notes);
    for _ in 0..n_notes {
        notes.push(read_line(&mut r, path, 4096)?);
    }

    let tensors_header = read_line(&mut r, path, 64)?;
    let n_tensors = parse_count(&tensors_header, "tensors", path)?;
    let mut manifest = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let line = read_line(&mut r, path, 4096)?;
        let mut parts = line.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| bad(path, "empty tensor manifest line".into()))?
            .to_string();
        let shape: Vec<usize> = parts
            .map(|tok| parse_usize(tok, "tensor dimension", path))
            .collect::<Result<_>>()?;
        if shape.is_empty() {
            return Err(bad(path, format!("tensor {name} has no dimensions")));
        }
        manifest.push((name, shape));
    }

    let mut tensors = Vec::with_capacity(n_tensors);
    for (name, shape) in manifest {
        let numel: usize = shape.iter().product();
        let data = read_f64s(&mut r, numel, path, "tensor payload")?;
        let tensor = Tensor::new(shape, data)?;
        if !tensor.all_finite() {
            return Err(bad(path, format!("tensor {name} contains non-finite values")));
        }
        tensors.push((name, tensor));
    }
    expect_eof(&mut r, path)?;
    Ok(ParamsFile { notes, tensors })
}

fn parse_count(line: &str, keyword: &str, path: &Path) -> Result<usize> {
    let rest = line
        .strip_prefix(keyword)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| bad(path, format!("expected `{keyword} <count>`, got {line:?}")))?;
    parse_usize(rest.trim(), "section count", path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParamsFile {
        ParamsFile {
            notes: vec!["arch 7 5 3".to_string(), "norm 0.25 1.75".to_string()],
            tensors: vec![
                (
                    "enc.w".to_string(),
                    Tensor::new(vec![2, 3], vec![1.0, -2.5, 0.125, 4.0, 0.0, 9.5]).unwrap(),
                ),
                ("enc.b".to_string(), Tensor::new(vec![2], vec![0.5, -0.5]).unwrap()),
            ],
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        let file = sample();
        save_params(&path, &file).unwrap();
        let back = load_params(&path).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.note("arch"), Some("7 5 3"));
        assert_eq!(back.note("missing"), None);
        assert_eq!(back.tensor("enc.b").unwrap().data(), &[0.5, -0.5]);
    }

    #[test]
    fn header_is_readable_ascii() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        save_params(&path, &sample()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let expected = "ROMP1\nnotes 2\narch 7 5 3\nnorm 0.25 1.75\ntensors 2\nenc.w 2 3\nenc.b 2\n";
        let text = std::str::from_utf8(&bytes[..expected.len()]).unwrap();
        assert_eq!(text, expected);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        save_params(&path, &sample()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        let err = load_params(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        save_params(&path, &sample()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(&[0u8; 3]);
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_params(&path).is_err());
    }

    #[test]
    fn non_finite_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        let file = ParamsFile {
            notes: vec![],
            tensors: vec![(
                "w".to_string(),
                Tensor::new(vec![2], vec![1.0, f64::NAN]).unwrap(),
            )],
        };
        save_params(&path, &file).unwrap();
        assert!(load_params(&path).is_err());
    }

    #[test]
    fn names_with_whitespace_are_rejected_on_save() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.romp");
        let file = ParamsFile {
            notes: vec![],
            tensors: vec![("bad name".to_string(), Tensor::zeros(vec![1]))],
        };
        assert!(save_params(&path, &file).is_err());
    }
}
