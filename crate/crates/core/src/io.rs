//! Portable binary field files.
//!
//! A file is one UTF-8 JSON header line followed by the raw little-endian
//! `f64` values in storage order:
//!
//! ```text
//! {"schema":"nehari-sp/1","kind":"field3","n":64,"L":12.0,"name":"u"}\n<payload>
//! ```
//!
//! Radial files use `"kind":"radial"` with `n_r` and `r_max` instead.

use crate::error::{Error, Result};
use crate::field::{Field3, Grid3, RadialField, RadialGrid};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub const SCHEMA: &str = "nehari-sp/1";

#[derive(Debug, Clone, PartialEq)]
pub enum StoredField {
    Grid(Field3),
    Radial(RadialField),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
}

/// Writes a field with an optional provenance hash in the header.
pub fn write_field_to(
    mut w: impl Write,
    field: &StoredField,
    name: &str,
    config_hash: Option<&str>,
) -> Result<()> {
    let (header, values) = match field {
        StoredField::Grid(f) => (
            Header {
                schema: SCHEMA.into(),
                kind: "field3".into(),
                n: Some(f.grid().n()),
                half_width: Some(f.grid().half_width()),
                n_r: None,
                r_max: None,
                name: name.into(),
                config_hash: config_hash.map(Into::into),
            },
            f.values(),
        ),
        StoredField::Radial(f) => (
            Header {
                schema: SCHEMA.into(),
                kind: "radial".into(),
                n: None,
                half_width: None,
                n_r: Some(f.grid().n_r()),
                r_max: Some(f.grid().r_max()),
                name: name.into(),
                config_hash: config_hash.map(Into::into),
            },
            f.values(),
        ),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut payload = Vec::with_capacity(values.len() * 8);
    for v in values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

pub fn write_field(path: impl AsRef<Path>, field: &StoredField, name: &str) -> Result<()> {
    write_field_with_hash(path, field, name, None)
}

pub fn write_field_with_hash(
    path: impl AsRef<Path>,
    field: &StoredField,
    name: &str,
    config_hash: Option<&str>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_field_to(std::io::BufWriter::new(file), field, name, config_hash)
}

/// Reads a field and the name recorded in its header.
pub fn read_field_from(r: impl Read) -> Result<(StoredField, String)> {
    let mut reader = BufReader::new(r);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::MalformedHeader("missing header line".into()));
    }
    line.pop();
    let header: Header = serde_json::from_slice(&line).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.schema != SCHEMA {
        return Err(Error::SchemaMismatch(header.schema));
    }
    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;

    let missing = |what: &str| Error::MalformedHeader(format!("`{}` header requires `{what}`", header.kind));
    let field = match header.kind.as_str() {
        "field3" => {
            let n = header.n.ok_or_else(|| missing("n"))?;
            let l = header.half_width.ok_or_else(|| missing("L"))?;
            let grid = Grid3::with_budget(n, l, usize::MAX)?;
            StoredField::Grid(Field3::new(grid, decode(&payload, grid.len())?)?)
        }
        "radial" => {
            let n_r = header.n_r.ok_or_else(|| missing("n_r"))?;
            let r_max = header.r_max.ok_or_else(|| missing("r_max"))?;
            let grid = RadialGrid::new(n_r, r_max)?;
            StoredField::Radial(RadialField::new(grid, decode(&payload, n_r)?)?)
        }
        other => return Err(Error::MalformedHeader(format!("unknown kind {other:?}"))),
    };
    Ok((field, header.name))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<(StoredField, String)> {
    read_field_from(std::fs::File::open(path)?)
}

fn decode(payload: &[u8], count: usize) -> Result<Vec<f64>> {
    let expected = count * 8;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload { expected, found: payload.len() });
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(field: &StoredField) -> StoredField {
        let mut buf = Vec::new();
        write_field_to(&mut buf, field, "u", Some("abc")).unwrap();
        let (back, name) = read_field_from(buf.as_slice()).unwrap();
        assert_eq!(name, "u");
        back
    }

    #[test]
    fn grid_field_roundtrip_is_bit_exact() {
        let g = Grid3::new(16, 1.7).unwrap();
        let f = Field3::from_fn(g, |p| (p[0] * 1.3 + p[1] * p[2]).sin() / 3.0).unwrap();
        let f = StoredField::Grid(f);
        assert_eq!(roundtrip(&f), f);
    }

    #[test]
    fn radial_field_roundtrip_is_bit_exact() {
        let g = RadialGrid::new(100, 50.0).unwrap();
        let f = StoredField::Radial(RadialField::from_fn(g, |r| (-r).exp() * 0.1f64.sqrt()).unwrap());
        assert_eq!(roundtrip(&f), f);
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(matches!(read_field_from(&b""[..]), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn kind_mismatch_is_caught_by_length() {
        let g = RadialGrid::new(100, 50.0).unwrap();
        let f = StoredField::Radial(RadialField::from_fn(g, |r| r).unwrap());
        let mut buf = Vec::new();
        write_field_to(&mut buf, &f, "u", None).unwrap();
        let text_end = buf.iter().position(|&b| b == b'\n').unwrap();
        let mut forged = br#"{"schema":"nehari-sp/1","kind":"field3","n":16,"L":1.0,"name":"u"}"#.to_vec();
        forged.extend_from_slice(&buf[text_end..]);
        assert!(matches!(read_field_from(forged.as_slice()), Err(Error::TruncatedPayload { .. })));
    }

    #[test]
    fn wrong_schema_is_reported() {
        let text = b"{\"schema\":\"other/2\",\"kind\":\"radial\",\"n_r\":16,\"r_max\":50.0,\"name\":\"u\"}\n";
        assert!(matches!(read_field_from(&text[..]), Err(Error::SchemaMismatch(_))));
    }
}
