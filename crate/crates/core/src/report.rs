//! The verification report and its JSON form.

use serde::{Deserialize, Serialize};

use crate::config::SuiteConfig;
use crate::error::Result;
use crate::profile::ResidualStats;

pub const REPORT_VERSION: u32 = 1;

/// Sizes of the grids the checks ran on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub profile_nodes: usize,
    pub psi_nodes: usize,
    pub exact_soliton: bool,
    #[serde(with = "float")]
    pub profile_r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub config: SuiteConfig,
    pub provenance: Provenance,
    pub checks: Vec<ResidualStats>,
    pub pass: bool,
    /// Set when a solver or quadrature error cut the run short.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

impl VerificationReport {
    pub fn new(config: SuiteConfig) -> Self {
        Self {
            version: REPORT_VERSION,
            config,
            provenance: Provenance::default(),
            checks: Vec::new(),
            pass: false,
            aborted: None,
        }
    }

    pub fn push(&mut self, stats: ResidualStats) {
        self.checks.push(stats);
    }

    /// Recomputes the overall flag from the checks.
    pub fn finish(&mut self) {
        self.pass = self.aborted.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualStats> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, id: &str, detail: &str) -> Option<&ResidualStats> {
        self.checks.iter().find(|c| c.id == id && c.detail == detail)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One line per check; long details are shortened (the JSON keeps them whole).
    pub fn summary_table(&self) -> String {
        const NAME_WIDTH: usize = 44;
        let label = |c: &ResidualStats| {
            let full = if c.detail.is_empty() { c.id.clone() } else { format!("{} [{}]", c.id, c.detail) };
            if full.chars().count() > NAME_WIDTH {
                let cut: String = full.chars().take(NAME_WIDTH - 3).collect();
                format!("{cut}...")
            } else {
                full
            }
        };
        let w = NAME_WIDTH;
        let mut out = format!("{:<w$}  {:>12}  {:>12}  {:>7}  result\n", "check", "max_abs", "threshold", "n");
        for c in &self.checks {
            out += &format!(
                "{:<w$}  {:>12.4e}  {:>12.4e}  {:>7}  {}\n",
                label(c),
                c.max_abs,
                c.threshold,
                c.n_samples,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        if let Some(a) = &self.aborted {
            out += &format!("aborted: {a}\n");
        }
        out += &format!("overall: {}\n", if self.pass { "pass" } else { "FAIL" });
        out
    }
}

/// Serde adapter writing non-finite values as the strings `"nan"`, `"inf"`, `"-inf"`.
pub mod float {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

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

    struct FloatVisitor;

    impl<'de> Visitor<'de> for FloatVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"nan\", \"inf\", \"-inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_values_survive_json() {
        let mut r = VerificationReport::new(SuiteConfig::default());
        r.push(ResidualStats::from_samples("A", &[f64::NAN], 1.0));
        r.push(ResidualStats::single("B", f64::INFINITY, 0.0, 1, 1.0));
        r.push(ResidualStats::single("C", 1.25e-300, 3.0, 2, 1e-6).with_detail("x"));
        r.finish();
        let back = VerificationReport::from_json(&r.to_json().unwrap()).unwrap();
        assert!(back.checks[0].max_abs.is_nan());
        assert_eq!(back.checks[1].max_abs, f64::INFINITY);
        assert_eq!(back.checks[2], r.checks[2]);
        assert!(!back.pass);
    }

    #[test]
    fn empty_report_does_not_pass() {
        let mut r = VerificationReport::new(SuiteConfig::default());
        r.finish();
        assert!(!r.pass);
    }
}
