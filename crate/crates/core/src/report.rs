//! Check records shared by every verification routine.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    #[serde(with = "extended_float")]
    pub lhs: f64,
    #[serde(with = "extended_float")]
    pub rhs: f64,
    #[serde(with = "extended_float")]
    pub ratio: f64,
    #[serde(with = "extended_float")]
    pub slack: f64,
    pub pass: bool,
    pub digest: String,
    #[serde(default)]
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    /// Builds a report whose verdict is exactly `lhs <= slack * rhs`.
    pub fn new(check: impl Into<String>, lhs: f64, rhs: f64, slack: f64, digest: String) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        VerificationReport {
            check: check.into(),
            lhs,
            rhs,
            ratio,
            slack,
            pass: lhs <= slack * rhs,
            digest,
            skipped: false,
            note: None,
        }
    }

    /// A check that does not apply to its inputs; recorded as passing.
    pub fn skipped(check: impl Into<String>, reason: impl Into<String>, digest: String) -> Self {
        VerificationReport {
            check: check.into(),
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            slack: 0.0,
            pass: true,
            digest,
            skipped: true,
            note: Some(reason.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Keeps whichever report has the larger ratio (the first on ties).
    pub fn worst(a: Option<VerificationReport>, b: VerificationReport) -> VerificationReport {
        match a {
            Some(a) if a.ratio >= b.ratio || (a.ratio.is_nan() && !b.ratio.is_nan()) => a,
            _ => b,
        }
    }
}

/// A cellwise inequality `lhs ≤ slack·rhs` with its per-cell data; the
/// report describes the worst cell.
#[derive(Clone, Debug)]
pub struct PointwiseCheck {
    pub report: VerificationReport,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl PointwiseCheck {
    pub fn new(check: impl Into<String>, lhs: Vec<f64>, rhs: Vec<f64>, slack: f64, digest: String) -> Self {
        let mut worst: Option<(usize, VerificationReport)> = None;
        let check = check.into();
        for (i, (&l, &r)) in lhs.iter().zip(&rhs).enumerate() {
            let rep = VerificationReport::new(check.clone(), l, r, slack, String::new());
            let better = match &worst {
                None => true,
                Some((_, w)) => rep.ratio > w.ratio || (!rep.pass && w.pass),
            };
            if better {
                worst = Some((i, rep));
            }
        }
        let report = match worst {
            Some((i, mut rep)) => {
                rep.digest = digest;
                rep.with_note(format!("worst cell {i}"))
            }
            None => VerificationReport::new(check, 0.0, 0.0, slack, digest).with_note("no cells"),
        };
        PointwiseCheck { report, lhs, rhs }
    }
}

/// Hex prefix of a SHA-256 over the bit patterns of the inputs.
pub fn digest(parts: &[&[f64]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        for v in p.iter() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Floats that may be infinite: finite values are JSON numbers, others the
/// strings `"inf"`, `"-inf"`, `"nan"`.
pub mod extended_float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_and_ratio() {
        let r = VerificationReport::new("x", 2.0, 1.0, 2.0, String::new());
        assert!(r.pass);
        assert_eq!(r.ratio, 2.0);
        let r = VerificationReport::new("x", 0.0, 0.0, 1.0, String::new());
        assert!(r.pass && r.ratio == 0.0);
        let r = VerificationReport::new("x", 1.0, 0.0, 1.0, String::new());
        assert!(!r.pass && r.ratio.is_infinite());
        let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.ratio, f64::INFINITY);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&[&[1.0, 2.0]]), digest(&[&[1.0, 2.0]]));
        assert_ne!(digest(&[&[1.0, 2.0]]), digest(&[&[2.0, 1.0]]));
    }
}
