//! Data file writers. Numbers use the shortest decimal form that reads back
//! to the same double.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Format;
use ghostspin_core::interference::IntensityProfile;

/// Plain notation in `[1e-5, 1e16)`, exponent notation elsewhere.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

#[derive(Serialize)]
struct JsonTable<'a> {
    columns: &'a [&'a str],
    rows: &'a [Vec<f64>],
}

/// Writes a numeric table as CSV (header + rows) or JSON `{columns, rows}`.
pub fn write_table(path: &Path, format: Format, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = create(path)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(columns)?;
            for row in rows {
                w.write_record(row.iter().map(|v| format_number(*v)))?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer(&mut out, &JsonTable { columns, rows })?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonProfile<'a, C: Serialize> {
    label: &'a str,
    xs: &'a [f64],
    values: &'a [f64],
    config: &'a C,
}

/// CSV columns `x,value`; JSON `{label, xs, values, config}`.
pub fn write_profile<C: Serialize>(
    path: &Path,
    format: Format,
    profile: &IntensityProfile,
    config: &C,
) -> Result<()> {
    match format {
        Format::Csv => {
            let rows: Vec<Vec<f64>> = profile
                .xs
                .iter()
                .zip(&profile.values)
                .map(|(x, v)| vec![*x, *v])
                .collect();
            write_table(path, format, &["x", "value"], &rows)
        }
        Format::Json => {
            let mut out = create(path)?;
            let doc = JsonProfile {
                label: &profile.label,
                xs: &profile.xs,
                values: &profile.values,
                config,
            };
            serde_json::to_writer(&mut out, &doc)?;
            out.write_all(b"\n")?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            -0.0,
            1.0,
            0.1,
            -2.5e-7,
            1e300,
            5e-324,
            123456.789,
            std::f64::consts::PI,
        ] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            assert!(s.len() < 30);
        }
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(0.25), "0.25");
    }
}
