//! Buffered CSV or JSON-lines documents with a manifest header.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// CSV: `#` comment lines, then a header row and data rows.
/// JSON: one object per line, the first holding the manifest.
pub struct Document {
    format: Format,
    lines: Vec<String>,
}

impl Document {
    pub fn new(format: Format, manifest: Value) -> Self {
        let first = match format {
            Format::Csv => format!("# manifest: {manifest}"),
            Format::Json => serde_json::json!({ "manifest": manifest }).to_string(),
        };
        Document {
            format,
            lines: vec![first],
        }
    }

    /// Document with nothing to print.
    pub fn empty(format: Format) -> Self {
        Document {
            format,
            lines: Vec::new(),
        }
    }

    /// Comment line (CSV) or `{"comment": ...}` object (JSON).
    pub fn comment(&mut self, text: String) {
        match self.format {
            Format::Csv => self.lines.push(format!("# {text}")),
            Format::Json => self.object(serde_json::json!({ "comment": text })),
        }
    }

    /// Column names; CSV only.
    pub fn header(&mut self, names: Vec<String>) {
        if self.format == Format::Csv {
            self.lines.push(csv_line(&names));
        }
    }

    /// One record given both ways; a null object is skipped in JSON.
    pub fn row(&mut self, cells: Vec<String>, object: Value) {
        match self.format {
            Format::Csv => self.lines.push(csv_line(&cells)),
            Format::Json if !object.is_null() => self.object(object),
            Format::Json => {}
        }
    }

    pub fn object(&mut self, v: Value) {
        self.lines.push(v.to_string());
    }

    /// Verbatim text, line by line.
    pub fn raw(&mut self, text: String) {
        self.lines.extend(text.lines().map(String::from));
    }

    pub fn emit(&self, path: Option<&Path>) -> anyhow::Result<()> {
        if self.lines.is_empty() {
            return Ok(());
        }
        let mut text = self.lines.join("\n");
        text.push('\n');
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn csv_line(cells: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(cells).expect("in-memory write");
    let mut bytes = w.into_inner().expect("in-memory flush");
    bytes.pop();
    String::from_utf8(bytes).expect("cells are UTF-8")
}
