//! Check reports: rows with status, residual and anchor, plus JSON and
//! aligned-text emitters.

use std::fmt::Write as _;

use serde_json::Value;
use thiserror::Error;

use crate::expr::Bindings;
use crate::geometry::numeric::Residual;

/// Engine version recorded in report metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
    Info,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
            Status::Info => "info",
        }
    }

    pub fn from_name(s: &str) -> Option<Status> {
        match s {
            "pass" => Some(Status::Pass),
            "fail" => Some(Status::Fail),
            "not_applicable" => Some(Status::NotApplicable),
            "info" => Some(Status::Info),
            _ => None,
        }
    }
}

/// Every anchor a row may carry.
pub const ANCHORS: &[&str] = &[
    "ENGINE", "E1.3", "E1.4", "D.taxonomy", "D.proper", "E2.1", "E2.2", "D.eigen", "D.Phi", "D.paracontact",
    "D.normal", "E2.3", "E2.4", "E2.5", "E2.6", "E2.7", "E2.8", "E2.9", "E2.10", "E2.11", "E2.12", "E2.13", "E3.2",
    "E3.3", "E3.4", "E4.1", "E4.9", "E4.15", "E6.1", "E6.2", "E6.3", "E6.4", "E6.5", "E6.6", "E6.7", "E6.8", "E6.9",
    "E7.3", "E7.4", "E8.14", "E9.1", "E9.2", "E9.3", "E9.4", "E9.5", "E9.6", "E9.7", "Ea.1", "Eb.1", "Eb.5", "Eb.7",
    "Eb.9", "T3.1", "T3.2", "T5.1", "C5.1", "T5.2", "T7.1", "T7.2", "C7.1", "L2.1", "L4.1", "L6.1a", "L6.1b", "EX1",
    "EX2",
];

/// A registered anchor id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Anchor(&'static str);

impl Anchor {
    /// Looks up a registered anchor.
    pub fn new(id: &str) -> Option<Anchor> {
        ANCHORS.iter().find(|a| **a == id).map(|a| Anchor(a))
    }

    /// Like [`Anchor::new`] but panics on unregistered ids; for literals.
    pub fn of(id: &str) -> Anchor {
        Anchor::new(id).unwrap_or_else(|| panic!("unregistered anchor `{id}`"))
    }

    pub fn id(self) -> &'static str {
        self.0
    }
}

impl std::fmt::Display for Anchor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0)
    }
}

impl PartialEq<&str> for Anchor {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub anchor: Anchor,
    pub detail: String,
}

impl Row {
    pub fn new(id: impl Into<String>, status: Status, anchor: &str, description: impl Into<String>) -> Row {
        Row {
            id: id.into(),
            description: description.into(),
            status,
            max_residual: f64::NAN,
            worst_point: Vec::new(),
            anchor: Anchor::of(anchor),
            detail: String::new(),
        }
    }

    /// Pass when the residual is below `tol`, fail otherwise.
    pub fn from_residual(id: impl Into<String>, anchor: &str, description: impl Into<String>, r: &Residual, tol: f64) -> Row {
        let status = if r.below(tol) { Status::Pass } else { Status::Fail };
        Row::new(id, status, anchor, description).with_residual(r)
    }

    pub fn with_residual(mut self, r: &Residual) -> Row {
        self.max_residual = r.max_rel;
        self.worst_point = r.worst_point.clone();
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Row {
        self.detail = detail.into();
        self
    }

    pub fn with_status(mut self, status: Status) -> Row {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub bindings: Bindings,
    pub version: String,
}

impl Meta {
    pub fn new(seed: u64, points: usize, tol: f64, bindings: Bindings) -> Meta {
        Meta { seed, points, tol, bindings, version: VERSION.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub meta: Meta,
    pub rows: Vec<Row>,
}

#[derive(Debug, Error)]
pub enum ReportParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed report: {0}")]
    Shape(String),
}

impl CheckReport {
    pub fn new(meta: Meta) -> CheckReport {
        CheckReport { meta, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Row>) {
        self.rows.extend(rows);
    }

    pub fn row(&self, id: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// JSON with fixed field order; floats carry 17 significant digits and
    /// non-finite values are written as `null`.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\"meta\":{");
        let _ = write!(s, "\"seed\":{},\"points\":{},\"tol\":{},\"bindings\":{{", self.meta.seed, self.meta.points, num(self.meta.tol));
        for (i, (k, v)) in self.meta.bindings.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}:{}", string(k), num(*v));
        }
        let _ = write!(s, "}},\"version\":{}}},\"rows\":[", string(&self.meta.version));
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(
                s,
                "{{\"id\":{},\"description\":{},\"status\":{},\"max_residual\":{},\"worst_point\":[",
                string(&r.id),
                string(&r.description),
                string(r.status.name()),
                num(r.max_residual)
            );
            for (j, x) in r.worst_point.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&num(*x));
            }
            let _ = write!(s, "],\"anchor\":{},\"detail\":{}}}", string(r.anchor.id()), string(&r.detail));
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<CheckReport, ReportParseError> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |m: &str| ReportParseError::Shape(m.to_string());
        let meta = v.get("meta").ok_or_else(|| bad("missing meta"))?;
        let float = |x: &Value| if x.is_null() { Some(f64::NAN) } else { x.as_f64() };
        let mut bindings = Bindings::new();
        for (k, x) in meta.get("bindings").and_then(Value::as_object).ok_or_else(|| bad("bindings"))? {
            bindings.insert(k.clone(), float(x).ok_or_else(|| bad("binding value"))?);
        }
        let meta = Meta {
            seed: meta.get("seed").and_then(Value::as_u64).ok_or_else(|| bad("seed"))?,
            points: meta.get("points").and_then(Value::as_u64).ok_or_else(|| bad("points"))? as usize,
            tol: meta.get("tol").and_then(float).ok_or_else(|| bad("tol"))?,
            bindings,
            version: meta.get("version").and_then(Value::as_str).ok_or_else(|| bad("version"))?.to_string(),
        };
        let mut rows = Vec::new();
        for r in v.get("rows").and_then(Value::as_array).ok_or_else(|| bad("rows"))? {
            let text = |k: &str| r.get(k).and_then(Value::as_str).map(str::to_string).ok_or_else(|| bad(k));
            let anchor = text("anchor")?;
            rows.push(Row {
                id: text("id")?,
                description: text("description")?,
                status: Status::from_name(&text("status")?).ok_or_else(|| bad("status"))?,
                max_residual: r.get("max_residual").and_then(float).ok_or_else(|| bad("max_residual"))?,
                worst_point: r
                    .get("worst_point")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("worst_point"))?
                    .iter()
                    .map(|x| float(x).ok_or_else(|| bad("worst_point entry")))
                    .collect::<Result<_, _>>()?,
                anchor: Anchor::new(&anchor).ok_or_else(|| bad(&format!("unregistered anchor `{anchor}`")))?,
                detail: text("detail")?,
            });
        }
        Ok(CheckReport { meta, rows })
    }

    /// One row per line with aligned columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let bindings: Vec<String> = self.meta.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            out,
            "# seed={} points={} tol={:e} bindings=[{}] version={}",
            self.meta.seed,
            self.meta.points,
            self.meta.tol,
            bindings.join(", "),
            self.meta.version
        );
        let residuals: Vec<String> = self
            .rows
            .iter()
            .map(|r| if r.max_residual.is_finite() { format!("{:.3e}", r.max_residual) } else { "-".into() })
            .collect();
        let w_status = self.rows.iter().map(|r| r.status.name().len()).max().unwrap_or(0);
        let w_id = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
        let w_res = residuals.iter().map(String::len).max().unwrap_or(0);
        let w_anchor = self.rows.iter().map(|r| r.anchor.id().len()).max().unwrap_or(0);
        for (r, res) in self.rows.iter().zip(&residuals) {
            let mut line = format!(
                "{:<w_status$}  {:<w_id$}  {:>w_res$}  {:<w_anchor$}  {}",
                r.status.name(),
                r.id,
                res,
                r.anchor.id(),
                r.description
            );
            if !r.detail.is_empty() {
                line.push_str(" | ");
                line.push_str(&r.detail);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "# {} pass, {} fail, {} not_applicable, {} info",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::NotApplicable),
            self.count(Status::Info)
        );
        out
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta::new(42, 16, 1e-9, Bindings::new())
    }

    #[test]
    fn empty_report_json() {
        let r = CheckReport::new(meta());
        let j = r.to_json();
        assert!(j.starts_with("{\"meta\":{\"seed\":42,\"points\":16,"));
        assert!(j.ends_with("\"rows\":[]}"));
        assert_eq!(CheckReport::from_json(&j).unwrap(), r);
    }

    #[test]
    fn round_trip_with_rows() {
        let mut r = CheckReport::new(Meta::new(7, 4, 1e-9, [("alpha".to_string(), 3.0)].into()));
        let mut res = Residual::new();
        res.record(1.0, 1.0 + 1e-12, &[0.1, 0.2, 1.0 / 3.0]);
        r.push(Row::from_residual("a.b", "E2.9", "nabla zeta", &res, 1e-9));
        r.push(Row::new("c", Status::Info, "EX1", "note \"quoted\"").with_detail("x"));
        let back = CheckReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back.rows[0].worst_point, r.rows[0].worst_point);
        assert_eq!(back.rows[0].max_residual, r.rows[0].max_residual);
        assert!(back.rows[1].max_residual.is_nan());
        assert_eq!(back.to_json(), r.to_json());
        assert_eq!(back.rows[0].status, Status::Pass);
    }

    #[test]
    fn info_rows_do_not_fail() {
        let mut r = CheckReport::new(meta());
        r.push(Row::new("x", Status::Info, "ENGINE", "info"));
        r.push(Row::new("y", Status::NotApplicable, "ENGINE", "na"));
        assert!(!r.has_failures());
        r.push(Row::new("z", Status::Fail, "ENGINE", "bad"));
        assert!(r.has_failures());
    }

    #[test]
    fn unregistered_anchor_rejected() {
        assert!(Anchor::new("free text").is_none());
        let j = CheckReport::new(meta()).to_json().replace(
            "\"rows\":[]",
            "\"rows\":[{\"id\":\"a\",\"description\":\"\",\"status\":\"pass\",\"max_residual\":0,\"worst_point\":[],\"anchor\":\"nope\",\"detail\":\"\"}]",
        );
        assert!(CheckReport::from_json(&j).is_err());
    }
}
