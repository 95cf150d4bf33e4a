//! Readers and writers for the classic word2vec text and binary formats.
//!
//! Both start with an ASCII header `"<count> <dim>\n"`. Text entries are
//! `token v1 ... v_dim` lines; binary entries are the token bytes, a space,
//! then `dim` little-endian IEEE-754 single floats, optionally followed by a
//! newline.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::numfmt::sig9;

pub fn load_word_vectors_text(path: &Path) -> Result<EmbeddingTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_word_vectors_text(&text)
}

pub fn load_word_vectors_binary(path: &Path) -> Result<EmbeddingTable> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_word_vectors_binary(&bytes)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let count = parts.next()?.parse().ok()?;
    let dim = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((count, dim))
}

pub fn read_word_vectors_text(text: &str) -> Result<EmbeddingTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let (count, dim) =
        parse_header(header).ok_or_else(|| Error::parse(1, "header must be `<count> <dim>`"))?;
    let mut table = EmbeddingTable::new(dim).map_err(|e| Error::parse(1, e.to_string()))?;

    let mut row = Vec::with_capacity(dim);
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if table.len() == count {
            return Err(Error::parse(
                lineno,
                format!("more entries than the {count} declared in the header"),
            ));
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().expect("non-empty line has a field");
        row.clear();
        for field in fields {
            let value: f32 = field
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-numeric value `{field}`")))?;
            if !value.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value `{field}`")));
            }
            row.push(value);
        }
        if row.len() != dim {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values for `{word}`, found {}", row.len()),
            ));
        }
        table.push(word.to_owned(), &row).map_err(|e| match e {
            Error::DuplicateId(w) => Error::parse(lineno, format!("duplicate token `{w}`")),
            other => Error::parse(lineno, other.to_string()),
        })?;
    }
    if table.len() != count {
        return Err(Error::parse(
            text.lines().count(),
            format!("header declares {count} entries, found {}", table.len()),
        ));
    }
    Ok(table)
}

pub fn read_word_vectors_binary(bytes: &[u8]) -> Result<EmbeddingTable> {
    let fail = |offset: usize, message: String| Error::Format {
        offset: offset as u64,
        message,
    };

    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| fail(0, "missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .ok()
        .and_then(parse_header)
        .ok_or_else(|| fail(0, "header must be `<count> <dim>`".into()))?;
    let (count, dim) = header;
    if dim == 0 {
        return Err(fail(0, "embedding dimension must be positive".into()));
    }

    let mut pos = header_end + 1;
    let mut words = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    let mut data = Vec::with_capacity(count * dim);
    let row_bytes = dim * 4;
    for entry in 0..count {
        while bytes.get(pos) == Some(&b'\n') {
            pos += 1;
        }
        let start = pos;
        let space = bytes[start..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| {
                fail(start, format!("header declares {count} entries, found {entry}"))
            })?;
        let word = std::str::from_utf8(&bytes[start..start + space])
            .map_err(|_| fail(start, "token is not valid UTF-8".into()))?;
        if word.is_empty() {
            return Err(fail(start, "empty token".into()));
        }
        if !seen.insert(word) {
            return Err(fail(start, format!("duplicate token `{word}`")));
        }
        pos = start + space + 1;
        let raw = bytes.get(pos..pos + row_bytes).ok_or_else(|| {
            fail(pos, format!("truncated vector for `{word}`"))
        })?;
        for (i, chunk) in raw.chunks_exact(4).enumerate() {
            let value = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
            if !value.is_finite() {
                return Err(fail(pos + 4 * i, format!("non-finite value for `{word}`")));
            }
            data.push(value);
        }
        pos += row_bytes;
        words.push(word.to_owned());
    }
    if let Some(extra) = bytes[pos..].iter().position(|b| !b.is_ascii_whitespace()) {
        return Err(fail(
            pos + extra,
            format!("data after the {count} entries declared in the header"),
        ));
    }
    Ok(EmbeddingTable::from_parts(dim, words, data))
}

pub fn write_word_vectors_text(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (word, vec) in table.iter() {
        out.push_str(word);
        for &x in vec {
            out.push(' ');
            out.push_str(&sig9(x as f64));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_word_vectors_binary(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(16 + table.len() * (table.dim() * 4 + 16));
    writeln!(out, "{} {}", table.len(), table.dim()).expect("write to Vec");
    for (word, vec) in table.iter() {
        out.extend_from_slice(word.as_bytes());
        out.push(b' ');
        for &x in vec {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
