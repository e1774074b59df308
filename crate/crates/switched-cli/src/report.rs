//! Report plumbing: content digests, the machine-readable report wrapper,
//! and human number formatting.
//!
//! Reports are deterministic: the same input bytes and flags produce the
//! same output bytes. JSON mode carries full precision and no timing;
//! human mode rounds to six significant digits and prints elapsed time to
//! stderr only.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Machine-readable envelope around a command's payload.
#[derive(Serialize)]
pub struct RunReport<P: Serialize> {
    pub format_version: u32,
    pub command: String,
    /// SHA-256 of the input document bytes.
    pub digest: String,
    pub parameters: serde_json::Value,
    pub payload: P,
    pub warnings: Vec<String>,
}

impl<P: Serialize> RunReport<P> {
    pub fn new(
        command: &str,
        digest: String,
        parameters: serde_json::Value,
        payload: P,
        warnings: Vec<String>,
    ) -> Self {
        Self {
            format_version: crate::document::FORMAT_VERSION,
            command: command.to_string(),
            digest,
            parameters,
            payload,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report payloads serialize")
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex(&hasher.finalize())
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Six significant digits for human output.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        format!("{:.*}", (5 - magnitude).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// Full-precision CSV number: 17 significant digits round-trip exactly.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn human_numbers_carry_six_significant_digits() {
        assert_eq!(fmt_num(0.6065306597126334), "0.606531");
        assert_eq!(fmt_num(-0.5), "-0.500000");
        assert_eq!(fmt_num(123.4567890), "123.457");
        assert_eq!(fmt_num(1.0e-7), "1.00000e-7");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, std::f64::consts::PI, -4.5e-300, 6.02e23] {
            let s = fmt_full(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
