//! File formats for spectra, coefficient tables and reports.
//!
//! Spectrum CSV: a `# schema_version: 1` comment line, then the header
//! `index,value,mode,component`. `mode` and `component` may be empty. On
//! input only `value` is required and the comment line is optional.
//! Layouts are described field by field in docs/formats.md.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{SpectralValue, SpectrumSequence};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct CsvRow {
    index: usize,
    value: f64,
    mode: Option<usize>,
    component: Option<usize>,
}

#[derive(Deserialize)]
struct CsvIn {
    value: f64,
    #[serde(default)]
    mode: Option<usize>,
    #[serde(default)]
    component: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    schema_version: u32,
    entries: Vec<SpectralValue>,
}

pub fn write_spectrum_csv<W: Write>(s: &SpectrumSequence, mut out: W) -> Result<()> {
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    for (index, e) in s.entries().iter().enumerate() {
        w.serialize(CsvRow {
            index,
            value: e.value,
            mode: e.mode,
            component: e.component,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(input: R) -> Result<SpectrumSequence> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let mut entries = Vec::new();
    for row in r.deserialize() {
        let row: CsvIn = row?;
        if !row.value.is_finite() {
            return Err(Error::Config(format!("non-finite eigenvalue {} in input", row.value)));
        }
        entries.push(SpectralValue::tagged(row.value, row.mode, row.component));
    }
    Ok(SpectrumSequence::new(entries))
}

pub fn write_spectrum_json<W: Write>(s: &SpectrumSequence, out: W) -> Result<()> {
    write_json(
        &SpectrumJson {
            schema_version: SCHEMA_VERSION,
            entries: s.entries().to_vec(),
        },
        out,
    )
}

pub fn read_spectrum_json<R: Read>(input: R) -> Result<SpectrumSequence> {
    let doc: SpectrumJson = serde_json::from_reader(input)?;
    check_version(doc.schema_version)?;
    if let Some(e) = doc.entries.iter().find(|e| !e.value.is_finite()) {
        return Err(Error::Config(format!("non-finite eigenvalue {} in input", e.value)));
    }
    Ok(SpectrumSequence::new(doc.entries))
}

/// Reads CSV or JSON, chosen by the `.json` extension.
pub fn read_spectrum(path: &Path) -> Result<SpectrumSequence> {
    let file = fs::File::open(path)?;
    if is_json(path) {
        read_spectrum_json(file)
    } else {
        read_spectrum_csv(file)
    }
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn check_version(v: u32) -> Result<()> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Config(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")))
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
