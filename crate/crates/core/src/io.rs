//! Serialization: exact rationals as reduced `p/q` strings, JSON for
//! functions, CSV for metrics and reports.
//!
//! Formats are fixed byte for byte. Rationals never degrade to floats;
//! floats are printed with 17 significant digits so re-parsing recovers the
//! exact bit pattern.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::Value;
use thiserror::Error;

use crate::embedding::TreeMetric;
use crate::hyperbolic::{ConvergenceReport, PolarPoint};
use crate::logdomain::SignedLog;
use crate::tree::{DiscreteFunction, PlFunction};
use crate::verification::{CompletionRecord, StageRecord};
use crate::Rational;

/// Parse failure, prefixed with the position it happened at.
#[derive(Debug, Error, PartialEq)]
#[error("{at}: {message}")]
pub struct ParseError {
    pub at: String,
    pub message: String,
}

impl ParseError {
    fn new(at: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            at: at.into(),
            message: message.into(),
        }
    }
}

/// Strict `p` or `p/q` literal: decimal integers, optional sign, nonzero
/// denominator. The result is reduced.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty rational literal".into());
    }
    let (numer, denom) = t.split_once('/').unwrap_or((t, "1"));
    let n: BigInt = numer
        .parse()
        .map_err(|_| format!("'{numer}' is not an integer"))?;
    let d: BigInt = denom
        .parse()
        .map_err(|_| format!("'{denom}' is not an integer"))?;
    if d.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(Rational::new(n, d))
}

/// Reduced `p/q`, integer shorthand `p` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn pl_to_json(f: &PlFunction) -> String {
    let mut out = String::from("{\"breakpoints\":[");
    for (i, k) in f.breakpoints().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{{\"t\":\"{}\",\"v\":\"{}\"}}", k.time, k.value).unwrap();
    }
    out.push_str("]}");
    out
}

pub fn discrete_to_json(g: &DiscreteFunction) -> String {
    let mut out = format!("{{\"rho\":\"{}\",\"support\":[", g.rho());
    for (i, k) in g.support().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{{\"t\":\"{}\",\"v\":\"{}\"}}", k.time, k.value).unwrap();
    }
    out.push_str("]}");
    out
}

fn as_object<'a>(v: &'a Value, at: &str) -> Result<&'a serde_json::Map<String, Value>, ParseError> {
    v.as_object()
        .ok_or_else(|| ParseError::new(at, "expected an object"))
}

fn rational_field(
    obj: &serde_json::Map<String, Value>,
    key: &str,
    at: &str,
) -> Result<Rational, ParseError> {
    let raw = obj
        .get(key)
        .ok_or_else(|| ParseError::new(at, format!("missing key '{key}'")))?;
    let s = raw.as_str().ok_or_else(|| {
        ParseError::new(format!("{at}.{key}"), "rationals are strings like \"3/4\"")
    })?;
    parse_rational(s).map_err(|m| ParseError::new(format!("{at}.{key}"), m))
}

fn knot_pairs(v: &Value, at: &str) -> Result<Vec<(Rational, Rational)>, ParseError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ParseError::new(at, "expected an array"))?;
    let mut pairs = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        let here = format!("{at}[{i}]");
        let obj = as_object(item, &here)?;
        pairs.push((
            rational_field(obj, "t", &here)?,
            rational_field(obj, "v", &here)?,
        ));
    }
    Ok(pairs)
}

pub fn pl_from_json(text: &str) -> Result<PlFunction, ParseError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| ParseError::new("json", e.to_string()))?;
    let obj = as_object(&v, "json")?;
    let bps = obj
        .get("breakpoints")
        .ok_or_else(|| ParseError::new("json", "missing key 'breakpoints'"))?;
    let pairs = knot_pairs(bps, "breakpoints")?;
    PlFunction::from_pairs(pairs).map_err(|e| ParseError::new("breakpoints", e.to_string()))
}

pub fn discrete_from_json(text: &str) -> Result<DiscreteFunction, ParseError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| ParseError::new("json", e.to_string()))?;
    let obj = as_object(&v, "json")?;
    let rho = rational_field(obj, "rho", "json")?;
    let sup = obj
        .get("support")
        .ok_or_else(|| ParseError::new("json", "missing key 'support'"))?;
    let pairs = knot_pairs(sup, "support")?;
    DiscreteFunction::new(
        rho,
        pairs
            .into_iter()
            .map(|(t, v)| crate::tree::Knot::new(t, v))
            .collect(),
    )
    .map_err(|e| ParseError::new("support", e.to_string()))
}

/// Square matrix of rationals, one row per line, comma separated. A first
/// line whose cells are not all rationals is treated as a header and
/// skipped.
pub fn tree_metric_from_csv(text: &str) -> Result<TreeMetric, ParseError> {
    let mut lines: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        lines.push((i + 1, line.split(',').map(str::trim).collect()));
    }
    if !lines.is_empty() && lines[0].1.iter().any(|c| parse_rational(c).is_err()) {
        lines.remove(0);
    }
    if lines.is_empty() {
        return Err(ParseError::new("matrix", "no rows"));
    }
    let mut rows = Vec::with_capacity(lines.len());
    for (ln, cells) in lines {
        let mut row = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            row.push(
                parse_rational(cell)
                    .map_err(|m| ParseError::new(format!("line {ln}, column {}", col + 1), m))?,
            );
        }
        rows.push(row);
    }
    TreeMetric::from_rows(rows).map_err(|e| ParseError::new("matrix", e.to_string()))
}

pub fn tree_metric_to_csv(m: &TreeMetric) -> String {
    let n = m.len();
    let mut out = String::new();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", m.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn float_cell(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `eps,d_X,eps_dX,d_D,error`, one row per epsilon.
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("eps,d_X,eps_dX,d_D,error\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            float_cell(r.eps),
            float_cell(r.d_x),
            float_cell(r.eps_d_x),
            float_cell(r.d_d),
            float_cell(r.error)
        )
        .unwrap();
    }
    out
}

/// Header `stage,eps,pair,d_S,d_D_discretized,eps_dX,err_vs_D,err_vs_S,bound`;
/// exact quantities stay rational, measured ones are floats.
pub fn stage_csv(records: &[StageRecord]) -> String {
    let mut out = String::from("stage,eps,pair,d_S,d_D_discretized,eps_dX,err_vs_D,err_vs_S,bound\n");
    for rec in records {
        for p in &rec.pairs {
            writeln!(
                out,
                "{},{},{}-{},{},{},{},{},{},{}",
                rec.stage,
                float_cell(rec.epsilon),
                p.k1,
                p.k2,
                p.d_s,
                p.d_d,
                float_cell(p.eps_d_x),
                float_cell(p.err_vs_d),
                float_cell(p.err_vs_s),
                rec.bound
            )
            .unwrap();
        }
    }
    out
}

/// Header `round,depth,eps,pair,limit_distance,eps_dX,error,bound`.
pub fn completion_csv(records: &[CompletionRecord]) -> String {
    let mut out = String::from("round,depth,eps,pair,limit_distance,eps_dX,error,bound\n");
    for rec in records {
        for p in &rec.pairs {
            writeln!(
                out,
                "{},{},{},{}-{},{},{},{},{}",
                rec.stage,
                rec.depth,
                float_cell(rec.epsilon),
                p.k1,
                p.k2,
                p.limit_distance,
                float_cell(p.eps_d_x),
                float_cell(p.error),
                rec.bound
            )
            .unwrap();
        }
    }
    out
}

pub fn brush_report_json(max_error: &Rational, n: usize, schedule: &[Rational]) -> String {
    let mut out = format!("{{\"max_error\":\"{max_error}\",\"n\":{n},\"schedule\":[");
    for (i, s) in schedule.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "\"{s}\"").unwrap();
    }
    out.push_str("]}");
    out
}

/// Polar coordinate literal: `rho,phi` with floats, or
/// `rho,logphi:<sign>,<value>` carrying the angle as sign and log magnitude.
pub fn parse_polar(text: &str) -> Result<PolarPoint, ParseError> {
    let t = text.trim();
    let bad = |m: String| ParseError::new("coordinate", m);
    if let Some((head, rest)) = t.split_once(",logphi:") {
        let rho: f64 = head
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{head}' is not a number")))?;
        let (sign_s, val_s) = rest
            .split_once(',')
            .ok_or_else(|| bad("logphi needs '<sign>,<value>'".into()))?;
        let sign: i8 = sign_s
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{sign_s}' is not a sign")))?;
        let value: f64 = val_s
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{val_s}' is not a number")))?;
        PolarPoint::from_log_angle(rho, SignedLog::from_parts(sign, value))
            .map_err(|e| bad(e.to_string()))
    } else {
        let (r_s, p_s) = t
            .split_once(',')
            .ok_or_else(|| bad("expected 'rho,phi' or 'rho,logphi:<sign>,<value>'".into()))?;
        let rho: f64 = r_s
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{r_s}' is not a number")))?;
        let phi: f64 = p_s
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{p_s}' is not a number")))?;
        PolarPoint::new(rho, phi).map_err(|e| bad(e.to_string()))
    }
}
