use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// 17 significant digits, so every f64 round-trips.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    /// Writes the whole table at once; a failed write leaves no file behind.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(self.text.as_bytes())?;
                so.flush()?;
                Ok(())
            }
            Some(p) => std::fs::write(p, &self.text).map_err(|e| {
                let _ = std::fs::remove_file(p);
                CliError::Io(format!("{}: {e}", p.display()))
            }),
        }
    }
}
