//! CSV emission with a provenance comment line.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use eom_bias::harness::{AmplitudeRow, BlackLevelRow};

use crate::error::CliError;

/// Finite black levels below this are written as the floor value.
pub const DB_FLOOR: f64 = -200.0;

pub const AMPLITUDE_HEADER: &[&str] =
    &["F", "std_error", "predicted_std", "bias", "exclusions", "n_trials"];
pub const BLACK_LEVEL_HEADER: &[&str] = &["dv_norm", "F", "p_bl_rel_db"];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Resolved configuration, written after a leading `# `.
    pub provenance: String,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n{}\n", self.provenance, self.header.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits; `nan`, `inf` and `-inf` spelled out.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_db(db: f64) -> String {
    if db.is_finite() && db < DB_FLOOR {
        fmt_value(DB_FLOOR)
    } else {
        fmt_value(db)
    }
}

pub fn amplitude_table(provenance: String, rows: &[AmplitudeRow]) -> Table {
    let rows = rows
        .iter()
        .map(|row| {
            let (std_error, bias, n) = match &row.stats {
                Ok(s) => (s.std_error, s.bias, s.n_trials),
                Err(_) => (f64::NAN, f64::NAN, 0),
            };
            vec![
                fmt_value(row.f),
                fmt_value(std_error),
                fmt_value(row.predicted_std),
                fmt_value(bias),
                row.exclusions().to_string(),
                n.to_string(),
            ]
        })
        .collect();
    Table {
        provenance,
        header: AMPLITUDE_HEADER,
        rows,
    }
}

pub fn black_level_table(provenance: String, rows: &[BlackLevelRow]) -> Table {
    let rows = rows
        .iter()
        .map(|r| vec![fmt_value(r.delta_v_norm), fmt_value(r.f), fmt_db(r.p_bl_rel_db)])
        .collect();
    Table {
        provenance,
        header: BLACK_LEVEL_HEADER,
        rows,
    }
}

/// Writes the table to `output_path`, or to standard output when `None`.
pub fn emit_csv(table: &Table, output_path: Option<&Path>) -> Result<(), CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Usage("refusing to write an empty table".into()));
    }
    let text = table.render();
    match output_path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
