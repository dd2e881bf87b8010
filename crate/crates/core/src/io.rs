//! Measure files and sample files.
//!
//! Measure files are TOML:
//!
//! ```toml
//! label = "counterexample"
//! atoms = [
//!   { a = 3, b = 1, c = -1, w = 0.2 },
//!   { a = "1/2", b = -1, c = 0, w = 0.8 },
//! ]
//! ```
//!
//! or `parametric = { family = "log-normal-normal", params = { mu = -0.5, ... } }`.
//! Numbers may be TOML integers or floats, or strings holding a decimal
//! or a fraction `p/q`.
//!
//! Binary sample files are little-endian: the magic `KGTS`, a `u32`
//! version, a `u64` count, the `u64` seed, the 32-byte SHA-256 config
//! digest, then `count` `f64` values.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::engine::{MapFamily, SampleBatch, SimConfig};
use crate::error::{Error, Result};
use crate::measure::{Atom, AtomicMeasure, Driver, ParametricDriver};

pub const MAGIC: [u8; 4] = *b"KGTS";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 32;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Reads a real from a TOML value: integer, float, decimal string or `p/q`.
pub fn parse_number(v: &Value) -> Result<f64> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        Value::String(s) => parse_number_str(s),
        other => Err(parse_err(format!(
            "expected a number, got {}",
            other.type_str()
        ))),
    }
}

pub fn parse_number_str(s: &str) -> Result<f64> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| parse_err(format!("not a number: {s:?}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let q = num(q)?;
            if q == 0.0 {
                return Err(parse_err(format!("zero denominator in {s:?}")));
            }
            Ok(num(p)? / q)
        }
        None => num(s),
    }
}

fn parse_atom(index: usize, v: &Value) -> Result<Atom> {
    let t = v
        .as_table()
        .ok_or_else(|| parse_err(format!("atom {index} must be a table")))?;
    for key in t.keys() {
        if !matches!(key.as_str(), "a" | "b" | "c" | "w") {
            return Err(parse_err(format!("atom {index}: unknown key {key:?}")));
        }
    }
    let field = |k: &str| {
        t.get(k)
            .ok_or_else(|| parse_err(format!("atom {index}: missing {k:?}")))
            .and_then(parse_number)
    };
    Ok(Atom {
        a: field("a")?,
        b: field("b")?,
        c: t.get("c").map(parse_number).transpose()?,
        weight: field("w")?,
    })
}

fn parse_parametric(v: &Value) -> Result<ParametricDriver> {
    let t = v
        .as_table()
        .ok_or_else(|| parse_err("parametric must be a table"))?;
    let family = t
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| parse_err("parametric.family must be a string"))?;
    let mut flat = Table::new();
    flat.insert("family".into(), Value::String(family.into()));
    if let Some(params) = t.get("params") {
        let params = params
            .as_table()
            .ok_or_else(|| parse_err("parametric.params must be a table"))?;
        for (k, v) in params {
            flat.insert(k.clone(), Value::Float(parse_number(v)?));
        }
    }
    let driver: ParametricDriver = Value::Table(flat)
        .try_into()
        .map_err(|e: toml::de::Error| parse_err(format!("parametric: {}", e.message())))?;
    driver.check()?;
    Ok(driver)
}

/// Builds a driver from an already parsed TOML document. Keys other than
/// `label`, `atoms`, `parametric` and `experiment` are rejected.
pub fn driver_from_table(doc: &Table) -> Result<Driver> {
    for key in doc.keys() {
        if !matches!(
            key.as_str(),
            "label" | "atoms" | "parametric" | "experiment"
        ) {
            return Err(parse_err(format!("unknown key {key:?}")));
        }
    }
    let label = match doc.get("label") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| parse_err("label must be a string"))?
            .to_string(),
        None => String::new(),
    };
    match (doc.get("atoms"), doc.get("parametric")) {
        (Some(atoms), None) => {
            let list = atoms
                .as_array()
                .ok_or_else(|| parse_err("atoms must be an array"))?;
            let atoms = list
                .iter()
                .enumerate()
                .map(|(i, v)| parse_atom(i, v))
                .collect::<Result<_>>()?;
            Ok(Driver::Atomic(AtomicMeasure::new(atoms, label)?))
        }
        (None, Some(p)) => Ok(Driver::Parametric {
            label,
            driver: parse_parametric(p)?,
        }),
        (Some(_), Some(_)) => Err(parse_err("give either atoms or parametric, not both")),
        (None, None) => Err(parse_err("measure file needs atoms or parametric")),
    }
}

pub fn parse_toml(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| parse_err(e.message().to_string()))
}

pub fn parse_measure(text: &str) -> Result<Driver> {
    driver_from_table(&parse_toml(text)?)
}

pub fn read_measure(path: &Path) -> Result<Driver> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_measure(&text)
}

#[derive(Serialize)]
struct DigestInput<'a> {
    driver: &'a Driver,
    family: &'a str,
    config: &'a SimConfig,
}

/// SHA-256 of the canonical JSON of driver, family and config.
pub fn config_digest(driver: &Driver, family: &str, config: &SimConfig) -> [u8; 32] {
    let json = serde_json::to_vec(&DigestInput {
        driver,
        family,
        config,
    })
    .expect("serializable");
    Sha256::digest(json).into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a batch's provenance and values together.
pub fn batch_digest(batch: &SampleBatch) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&batch.config).expect("serializable"));
    h.update(batch.family.as_bytes());
    h.update(batch.label.as_bytes());
    for s in &batch.subseeds {
        h.update(s.to_le_bytes());
    }
    for v in &batch.values {
        h.update(v.to_le_bytes());
    }
    h.finalize().into()
}

/// One value per line, printed with round-trip precision.
pub fn write_text<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v:?}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    s.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(format!("line {}: not a number: {l:?}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySamples {
    pub version: u32,
    pub seed: u64,
    pub digest: [u8; 32],
    pub values: Vec<f64>,
}

pub fn write_binary<W: Write>(
    mut w: W,
    seed: u64,
    digest: &[u8; 32],
    values: &[f64],
) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * values.len());
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    buf.extend_from_slice(digest);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<BinarySamples> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < HEADER_LEN || buf[..4] != MAGIC {
        return Err(parse_err("not a sample file (bad magic)"));
    }
    let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(parse_err(format!(
            "unsupported sample file version {version}"
        )));
    }
    let count = u64_at(8) as usize;
    let seed = u64_at(16);
    let digest: [u8; 32] = buf[24..56].try_into().unwrap();
    let body = &buf[HEADER_LEN..];
    if body.len()
        != count
            .checked_mul(8)
            .ok_or_else(|| parse_err("count overflows"))?
    {
        return Err(parse_err(format!(
            "header says {count} values, body holds {} bytes",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(BinarySamples {
        version,
        seed,
        digest,
        values,
    })
}

/// Reads samples from either format, sniffing the magic.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(&MAGIC) {
        Ok(read_binary(bytes.as_slice())?.values)
    } else {
        read_text(bytes.as_slice())
    }
}

/// Parses a family name, accepting the built-in names only.
pub fn parse_family(name: &str) -> Result<MapFamily> {
    name.parse()
}
