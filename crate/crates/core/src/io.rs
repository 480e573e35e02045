//! Instance files.
//!
//! The canonical form is a JSON object `{"jobs": [{"r": .., "p": .., "q": ..}, ...]}`
//! with jobs in file order. A CSV file with header `r,p,q` is also accepted.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::csv_error;
use crate::model::{Instance, Job};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceFormat {
    Object,
    Csv,
}

/// Parses either format, deciding by the first non-blank character.
pub fn parse_instance(text: &str) -> Result<Instance> {
    if text.trim_start().starts_with('{') {
        parse_object(text)
    } else {
        parse_csv(text)
    }
}

pub fn parse_object(text: &str) -> Result<Instance> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Instance> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "p", "q"] {
        return Err(Error::Parse(format!("expected CSV header r,p,q, found {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let jobs = reader
        .deserialize::<Job>()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(jobs)
}

pub fn emit_instance(instance: &Instance, format: InstanceFormat) -> String {
    match format {
        InstanceFormat::Object => {
            let mut text = serde_json::to_string_pretty(instance).expect("instances always serialize");
            text.push('\n');
            text
        }
        InstanceFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for job in instance.jobs() {
                w.serialize(job).expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
        }
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance, format: InstanceFormat) -> Result<()> {
    fs::write(path, emit_instance(instance, format))?;
    Ok(())
}
