//! The JSON envelope shared by every subcommand.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub input_digest: String,
    pub payload: T,
    pub warnings: Vec<String>,
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Compact JSON whose floats carry 17 significant digits, enough to
/// recover every double exactly. serde_json hands non-finite floats to
/// `write_null`; no report field is nullable, so a null is refused.
struct ExactFloats;

impl ExactFloats {
    fn write_float<W: ?Sized + io::Write>(writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

impl Formatter for ExactFloats {
    fn write_null<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "non-finite number in report",
        ))
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        Self::write_float(writer, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        Self::write_float(writer, value as f64)
    }
}

/// Serializes the whole report into memory, so a failure never leaves
/// partial output behind.
pub fn to_json<T: Serialize>(report: &Report<'_, T>) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats);
    report.serialize(&mut ser).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let r = Report {
            schema: SCHEMA,
            command: "t",
            input_digest: digest(b""),
            payload: vec![0.1, 1.0 / 3.0, -2.5e-300, 0.0],
            warnings: vec![],
        };
        let text = to_json(&r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back: Vec<f64> = serde_json::from_value(v["payload"].clone()).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0, -2.5e-300, 0.0]);
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = Report {
            schema: SCHEMA,
            command: "t",
            input_digest: String::new(),
            payload: f64::NAN,
            warnings: vec![],
        };
        assert!(to_json(&r).is_err());
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            digest(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
