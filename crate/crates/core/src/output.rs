//! CSV serialization of BER curves.
//!
//! Metadata comes first as `# `-prefixed lines, followed by the header
//! `snr_db,ber,bit_errors,bits,abep`. Theory-only curves use
//! `snr_db,abep,clamped`. Floats are written with Rust's shortest
//! round-trip formatting, so equal curves give equal bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::BerCurve;

pub const BER_HEADER: &str = "snr_db,ber,bit_errors,bits,abep";
pub const THEORY_HEADER: &str = "snr_db,abep,clamped";

/// Renders a curve as CSV text.
pub fn to_csv(curve: &BerCurve) -> Result<String> {
    let mut out = String::new();
    for line in &curve.metadata {
        writeln!(out, "# {line}").unwrap();
    }
    if !curve.points.is_empty() {
        writeln!(out, "{BER_HEADER}").unwrap();
        for (i, p) in curve.points.iter().enumerate() {
            let abep = curve.abep_at(i).map(|a| a.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{abep}", p.snr_db, p.ber, p.bit_errors, p.bits).unwrap();
        }
    } else if let Some(theory) = curve.theory.as_ref().filter(|t| !t.is_empty()) {
        writeln!(out, "{THEORY_HEADER}").unwrap();
        for t in theory {
            writeln!(out, "{},{},{}", t.snr_db, t.abep, t.clamped as u8).unwrap();
        }
    } else {
        return Err(Error::EmptyCurve);
    }
    Ok(out)
}

pub fn write_csv(curve: &BerCurve, destination: &Path) -> Result<()> {
    let text = to_csv(curve)?;
    std::fs::write(destination, text).map_err(|source| Error::Io {
        path: destination.to_path_buf(),
        source,
    })
}
