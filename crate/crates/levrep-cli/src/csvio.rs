//! CSV output with fixed 17-significant-digit formatting so byte-identical
//! reruns diff clean.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// One float cell, 17 significant digits, round-trip exact.
pub fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` plus one line per row; every value formatted via
/// [`cell`]. An empty-string cell stays empty.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<Option<f64>>]) -> Result<()> {
    let mut buf = String::with_capacity(64 * (rows.len() + 1));
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                buf.push(',');
            }
            first = false;
            if let Some(x) = v {
                buf.push_str(&cell(*x));
            }
        }
        buf.push('\n');
    }
    let mut f = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    f.write_all(buf.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 9.754115099857e-1, 1e300, -2.5e-308] {
            assert_eq!(cell(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(
            &p,
            "a,b",
            &[vec![Some(1.0), Some(2.0)], vec![Some(3.0), None]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("a,b"));
        assert!(lines.next().unwrap().starts_with("1.0000000000000000e0,"));
        assert!(lines.next().unwrap().ends_with(','));
    }
}
