//! Output plumbing: CSV (RFC 4180 quoting) and JSON-lines emission, with
//! reals printed to 12 significant digits for reproducible golden files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(format!("format must be csv or json, got '{other}'")),
    }
}

/// 12 significant digits, decimal where the exponent allows, otherwise
/// scientific; trailing zeros trimmed. Integral inputs print verbatim.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.11e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..12).contains(&exp) {
        let frac = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", frac, v);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub struct Emitter {
    format: Format,
    out: Box<dyn Write>,
    columns: Vec<String>,
}

impl Emitter {
    pub fn new(format: Format, output: Option<&Path>) -> Result<Self> {
        let out: Box<dyn Write> = match output {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Emitter {
            format,
            out,
            columns: Vec::new(),
        })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn header(&mut self, names: &[&str]) -> Result<()> {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        if self.format == Format::Csv {
            let line: Vec<String> = names.iter().map(|s| csv_quote(s)).collect();
            writeln!(self.out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        match self.format {
            Format::Csv => {
                let line: Vec<String> = fields.iter().map(|s| csv_quote(s)).collect();
                writeln!(self.out, "{}", line.join(","))?;
            }
            Format::Json => {
                let mut obj = serde_json::Map::new();
                for (name, value) in self.columns.iter().zip(fields) {
                    // numbers stay numbers when they parse cleanly,
                    // integers stay integers
                    let v = if let Ok(n) = value.parse::<i64>() {
                        serde_json::Value::Number(n.into())
                    } else {
                        value
                            .parse::<f64>()
                            .ok()
                            .and_then(serde_json::Number::from_f64)
                            .map(serde_json::Value::Number)
                            .unwrap_or_else(|| serde_json::Value::String(value.clone()))
                    };
                    obj.insert(name.clone(), v);
                }
                writeln!(self.out, "{}", serde_json::Value::Object(obj))?;
            }
        }
        Ok(())
    }

    /// One whole document (used for reports and class group dumps).
    pub fn json(&mut self, value: &serde_json::Value) -> Result<()> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(value)?)?;
        Ok(())
    }

    /// Side-channel summary line; kept off the data stream.
    pub fn note(&mut self, msg: &str) -> Result<()> {
        eprintln!("# {msg}");
        Ok(())
    }

    pub fn finish(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
