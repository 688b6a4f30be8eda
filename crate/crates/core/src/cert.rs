//! Certificate files: JSON with every real written to 17 significant digits,
//! so that parsing a file reproduces the exact doubles it was written from.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gmm::{verify_mixture_shattering, MixtureShatterWitness};
use crate::numerics::cholesky_pd_check;
use crate::points::PointSet;
use crate::realizability::{LabeledPointSet, Realizability};
use crate::shattering::{verify_shattering, RefutationCertificate, ShatterMode, ShatterWitness};
use crate::Tolerances;

pub const SCHEMA: &str = "ellipsoid-vc/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub points: PointSet,
    pub labels: u64,
    pub result: Realizability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Certificate {
    ShatterWitness(ShatterWitness),
    Refutation(RefutationCertificate),
    MixtureWitness(MixtureShatterWitness),
    OracleResult(OracleResult),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::ShatterWitness(_) => "shatter-witness",
            Certificate::Refutation(_) => "refutation",
            Certificate::MixtureWitness(_) => "mixture-witness",
            Certificate::OracleResult(_) => "oracle-result",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    #[serde(flatten)]
    pub certificate: Certificate,
}

/// Outcome of re-checking a certificate file.
#[derive(Debug, Clone, PartialEq)]
pub enum Verification {
    Passed(String),
    Failed(String),
}

impl CertificateFile {
    pub fn new(certificate: Certificate, seed: Option<u64>, tolerances: Tolerances) -> Self {
        CertificateFile { schema: SCHEMA.to_string(), seed, tolerances, certificate }
    }

    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(write_json(&value))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed certificate: {e}")))?;
        if file.schema != SCHEMA {
            return Err(Error::InvalidInput(format!("unsupported schema {:?}", file.schema)));
        }
        Ok(file)
    }

    /// Pointwise re-check under the embedded tolerances. Nothing is
    /// re-solved: witnesses are evaluated, Radon arguments recomputed and
    /// mixtures re-assembled from their parts.
    pub fn verify(&self) -> Result<Verification> {
        let tol = &self.tolerances;
        Ok(match &self.certificate {
            Certificate::ShatterWitness(w) => match w.verify(tol) {
                Ok(()) => {
                    let report = verify_shattering(&w.points, ShatterMode::Witness(w))?;
                    if report.shattered {
                        Verification::Passed(format!("{} subsets of {} points cut out", report.total, w.points.len()))
                    } else {
                        Verification::Failed(format!("{} subsets not cut out", report.failures.len()))
                    }
                }
                Err(e) => Verification::Failed(e.to_string()),
            },
            Certificate::Refutation(r) => match r.verify(tol) {
                Ok(()) => Verification::Passed(format!("labeling {} is not cut out by any ellipsoid", bits(r.labeling, r.points.len()))),
                Err(e) => Verification::Failed(e.to_string()),
            },
            Certificate::MixtureWitness(w) => {
                let report = verify_mixture_shattering(w, tol);
                if report.shattered {
                    Verification::Passed(format!("{} subsets of {} points cut out", report.total, report.points))
                } else {
                    Verification::Failed(format!(
                        "{} checks failed; first: {}",
                        report.failures.len(),
                        report.failures[0].reason
                    ))
                }
            }
            Certificate::OracleResult(o) => verify_oracle_result(o, tol)?,
        })
    }
}

fn verify_oracle_result(o: &OracleResult, tol: &Tolerances) -> Result<Verification> {
    let l = LabeledPointSet::new(o.points.clone(), o.labels)?;
    Ok(match &o.result {
        Realizability::Realizable(c) => {
            let mut margin = f64::INFINITY;
            for (i, p) in l.points().iter().enumerate() {
                let v = c.quadric.eval(p)?;
                margin = margin.min(if l.is_in(i) { -v } else { v });
            }
            let Some(e) = &c.ellipsoid else {
                return Ok(Verification::Failed("realizable result carries no ellipsoid".into()));
            };
            if !(margin > 0.0) {
                Verification::Failed(format!("quadric clearance {margin:e} is not positive"))
            } else if cholesky_pd_check(e.matrix(), tol.pd).is_none() {
                Verification::Failed("ellipsoid matrix is not positive definite".into())
            } else if e.cut_mask(l.points().iter()) != o.labels {
                Verification::Failed("ellipsoid cuts out a different subset".into())
            } else {
                Verification::Passed(format!("realizable with clearance {margin:e}"))
            }
        }
        Realizability::Infeasible(r) => {
            if r.lp_margin <= tol.feasibility {
                Verification::Passed(format!("recorded infeasible with margin {:e}", r.lp_margin))
            } else {
                Verification::Failed(format!("recorded margin {:e} exceeds the feasibility threshold", r.lp_margin))
            }
        }
    })
}

/// `labels` as a 0/1 string, point 0 first.
pub fn bits(labels: u64, n: usize) -> String {
    (0..n).map(|i| if labels >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// Parses a 0/1 string with point 0 first.
pub fn parse_bits(s: &str, n: usize) -> Result<u64> {
    let s = s.trim();
    if s.len() != n || n > 63 {
        return Err(Error::InvalidInput(format!("label string must have one 0/1 character per point ({n}), got {:?}", s)));
    }
    s.chars().enumerate().try_fold(0u64, |m, (i, c)| match c {
        '0' => Ok(m),
        '1' => Ok(m | 1 << i),
        _ => Err(Error::InvalidInput(format!("label string contains {c:?}"))),
    })
}

/// Pretty-printed JSON with two-space indentation; arrays of scalars stay on
/// one line, floats use 17 significant digits and integers stay integers.
pub fn write_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(|v| !v.is_array() && !v.is_object()) {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, v) in items.iter().enumerate() {
                    push_indent(out, indent + 1);
                    write_value(out, v, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                push_indent(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                push_indent(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, v, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(u) = n.as_u64() {
        write!(out, "{u}").unwrap();
    } else if let Some(i) = n.as_i64() {
        write!(out, "{i}").unwrap();
    } else {
        write!(out, "{:.16e}", n.as_f64().expect("JSON numbers are finite")).unwrap();
    }
}

fn push_indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}
