//! Loader for the TOML-subset instance file format.
//!
//! Sections: `[instance]`, `[chart]`, `[parameters]`, `[frame]`, `[metric]`,
//! `[structure]`, `[soliton]`, `[solitons.<name>]`, `[check]` and
//! `[[claims]]`. Expressions are strings in the expression grammar;
//! integers and decimals are accepted where a constant is expected.

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use thiserror::Error;
use toml::{Table, Value};

use crate::expr::{parse_expr, Bindings, Domain, Rational, SampleOptions, ScalarExpr};
use crate::geometry::{
    metric_from_frame, Chart, EvalContext, Frame, FrameSpec, GeometryError, MetricField, TensorField, VectorField,
};
use crate::paracontact::{InstanceError, ParacontactInstance, Structure, StructureKind};
use crate::report::Anchor;
use crate::soliton::{Potential, SolitonKind, SolitonSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadErrorKind {
    Io,
    Syntax,
    Missing,
    Type,
    UnresolvedSymbol,
    Dimension,
    Parity,
    Ambiguous,
    Singular,
    Invalid,
}

#[derive(Debug, Clone, Error)]
#[error("[{section}]{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
pub struct LoadError {
    pub section: String,
    pub line: Option<usize>,
    pub kind: LoadErrorKind,
    pub message: String,
}

/// A value printed in a reference source, re-checked by the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum ClaimKind {
    /// `∇_{e_a} e_b`, value in frame components.
    Nabla(usize, usize),
    /// `[e_a, e_b]`, value in frame components.
    Bracket(usize, usize),
    /// `R(e_a, e_b) e_c`, value in frame components.
    Riemann(usize, usize, usize),
    /// `S(e_a, e_b)`, scalar value.
    Ricci(usize, usize),
    /// Scalar curvature.
    Scalar,
}

#[derive(Debug, Clone)]
pub struct Claim {
    pub id: String,
    pub anchor: &'static str,
    pub description: String,
    pub kind: ClaimKind,
    pub value: Vec<ScalarExpr>,
}

/// Optional sampling defaults carried by the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckDefaults {
    pub points: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl CheckDefaults {
    pub fn apply(&self, mut opts: SampleOptions) -> SampleOptions {
        if let Some(p) = self.points {
            opts.points = p;
        }
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(s) = self.seed {
            opts.seed = s;
        }
        opts
    }
}

#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub instance: ParacontactInstance,
    /// Soliton specs by name; `[soliton]` is stored as `default` and comes first.
    pub solitons: IndexMap<String, SolitonSpec>,
    pub parameters: Vec<String>,
    /// Parameter values from the file merged with the caller's overrides.
    pub bindings: Bindings,
    pub check: CheckDefaults,
    pub claims: Vec<Claim>,
}

impl InstanceFile {
    pub fn soliton(&self, name: Option<&str>) -> Option<&SolitonSpec> {
        match name {
            Some(n) => self.solitons.get(n),
            None => self.solitons.values().next(),
        }
    }
}

pub fn load_instance(path: &Path, overrides: &Bindings) -> Result<InstanceFile, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError {
        section: "file".into(),
        line: None,
        kind: LoadErrorKind::Io,
        message: format!("{}: {e}", path.display()),
    })?;
    load_instance_str(&text, overrides)
}

const SECTIONS: [&str; 10] =
    ["instance", "chart", "parameters", "frame", "metric", "structure", "soliton", "solitons", "check", "claims"];

pub fn load_instance_str(text: &str, overrides: &Bindings) -> Result<InstanceFile, LoadError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| LoadError {
        section: "file".into(),
        line: e.span().map(|s| line_at(text, s.start)),
        kind: LoadErrorKind::Syntax,
        message: e.message().to_string(),
    })?;
    let mut l = Loader { text, coords: Vec::new(), params: Vec::new() };
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(l.err(key, None, LoadErrorKind::Invalid, format!("unknown section `{key}`")));
        }
    }

    let meta = l.table_opt(&root, "instance")?;
    let (id, class, notes) = l.instance_meta(meta)?;

    let chart_t = l.table(&root, "chart")?;
    let chart = l.chart(chart_t)?;
    let (params, mut bindings) = l.parameters(l.table_opt(&root, "parameters")?)?;
    l.params = params.clone();
    for (k, v) in overrides {
        if !l.params.contains(k) {
            return Err(l.err("parameters", None, LoadErrorKind::UnresolvedSymbol, format!("binding for undeclared parameter `{k}`")));
        }
        bindings.insert(k.clone(), *v);
    }
    let ctx = EvalContext::new(SampleOptions::default(), bindings.clone());

    let metric_t = l.table(&root, "metric")?;
    let frame_t = l.table_opt(&root, "frame")?;
    let (frame, metric) = l.frame_and_metric(frame_t, metric_t, &chart, &ctx)?;

    let structure = match l.table_opt(&root, "structure")? {
        Some(t) => {
            if chart.paracontact_n().is_none() {
                return Err(l.err(
                    "structure",
                    None,
                    LoadErrorKind::Parity,
                    format!("a structure block needs an odd dimension of at least 3, chart has {}", chart.dim()),
                ));
            }
            Some(l.structure(t, frame.as_ref(), &chart, &ctx)?)
        }
        None => None,
    };

    let (phi_zeta, check) = (structure.as_ref().map(|s| s.zeta.clone()), l.check(l.table_opt(&root, "check")?)?);
    let mut solitons = IndexMap::new();
    if let Some(t) = l.table_opt(&root, "soliton")? {
        solitons.insert("default".to_string(), l.soliton("soliton", "default", t, frame.as_ref(), phi_zeta.as_ref())?);
    }
    if let Some(t) = l.table_opt(&root, "solitons")? {
        for (name, v) in t {
            let section = format!("solitons.{name}");
            let st = v.as_table().ok_or_else(|| l.err(&section, None, LoadErrorKind::Type, "expected a table".into()))?;
            solitons.insert(name.clone(), l.soliton(&section, name, st, frame.as_ref(), phi_zeta.as_ref())?);
        }
    }
    let claims = match root.get("claims") {
        Some(v) => l.claims(v, frame.as_ref())?,
        None => Vec::new(),
    };

    let instance = ParacontactInstance::new(id, chart, metric, frame, structure)
        .map_err(|e| {
            let kind = match e {
                InstanceError::Parity(_) => LoadErrorKind::Parity,
                InstanceError::Shape { .. } => LoadErrorKind::Dimension,
            };
            l.err("structure", None, kind, e.to_string())
        })?
        .with_declared_class(class)
        .with_notes(notes);
    Ok(InstanceFile { instance, solitons, parameters: params, bindings, check, claims })
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Loader<'a> {
    text: &'a str,
    coords: Vec<String>,
    params: Vec<String>,
}

impl Loader<'_> {
    /// Line of `key` inside `[section]`, or of the section header.
    fn locate(&self, section: &str, key: Option<&str>) -> Option<usize> {
        let mut current = String::new();
        let mut header = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if line.starts_with('[') {
                current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                if current == section && header.is_none() {
                    header = Some(i + 1);
                    if key.is_none() {
                        return header;
                    }
                }
                continue;
            }
            if let Some(k) = key {
                let inline_parent = section.rsplit_once('.').map(|(p, _)| p);
                let here = current == section || (inline_parent == Some(current.as_str()) && line.starts_with(section.rsplit('.').next().unwrap_or("")));
                if here {
                    let rest = line.strip_prefix(k).map(str::trim_start);
                    if rest.is_some_and(|r| r.starts_with('=')) {
                        return Some(i + 1);
                    }
                }
            }
        }
        header
    }

    fn err(&self, section: &str, key: Option<&str>, kind: LoadErrorKind, message: String) -> LoadError {
        let message = match key {
            Some(k) => format!("`{k}`: {message}"),
            None => message,
        };
        LoadError { section: section.to_string(), line: self.locate(section, key), kind, message }
    }

    fn table<'t>(&self, root: &'t Table, name: &str) -> Result<&'t Table, LoadError> {
        self.table_opt(root, name)?.ok_or_else(|| self.err(name, None, LoadErrorKind::Missing, "section is required".into()))
    }

    fn table_opt<'t>(&self, root: &'t Table, name: &str) -> Result<Option<&'t Table>, LoadError> {
        match root.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.err(name, None, LoadErrorKind::Type, "expected a table".into())),
        }
    }

    fn allow(&self, section: &str, t: &Table, keys: &[&str]) -> Result<(), LoadError> {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(self.err(section, Some(k), LoadErrorKind::Invalid, "unknown key".into()));
            }
        }
        Ok(())
    }

    fn string<'t>(&self, section: &str, key: &str, v: &'t Value) -> Result<&'t str, LoadError> {
        v.as_str().ok_or_else(|| self.err(section, Some(key), LoadErrorKind::Type, "expected a string".into()))
    }

    fn array<'t>(&self, section: &str, key: &str, v: &'t Value) -> Result<&'t Vec<Value>, LoadError> {
        v.as_array().ok_or_else(|| self.err(section, Some(key), LoadErrorKind::Type, "expected an array".into()))
    }

    fn strings(&self, section: &str, key: &str, v: &Value) -> Result<Vec<String>, LoadError> {
        self.array(section, key, v)?.iter().map(|x| self.string(section, key, x).map(str::to_string)).collect()
    }

    fn parse(&self, section: &str, key: &str, src: &str, extra: &[String]) -> Result<ScalarExpr, LoadError> {
        let coords: Vec<&str> = self.coords.iter().map(String::as_str).collect();
        let params: Vec<&str> = self.params.iter().chain(extra).map(String::as_str).collect();
        parse_expr(src, &coords, &params).map_err(|e| {
            let kind = match e {
                crate::expr::ParseError::UnknownSymbol { .. } => LoadErrorKind::UnresolvedSymbol,
                _ => LoadErrorKind::Syntax,
            };
            self.err(section, Some(key), kind, format!("{e} in `{src}`"))
        })
    }

    fn expr(&self, section: &str, key: &str, v: &Value) -> Result<ScalarExpr, LoadError> {
        self.expr_with(section, key, v, &[])
    }

    fn expr_with(&self, section: &str, key: &str, v: &Value, extra: &[String]) -> Result<ScalarExpr, LoadError> {
        match v {
            Value::String(s) => self.parse(section, key, s, extra),
            Value::Integer(i) => Ok(ScalarExpr::int(*i)),
            Value::Float(f) if f.is_finite() => self.parse(section, key, &format!("{f}"), extra),
            _ => Err(self.err(section, Some(key), LoadErrorKind::Type, "expected an expression string or a number".into())),
        }
    }

    fn exprs(&self, section: &str, key: &str, v: &Value, len: usize) -> Result<Vec<ScalarExpr>, LoadError> {
        let a = self.array(section, key, v)?;
        if a.len() != len {
            return Err(self.err(section, Some(key), LoadErrorKind::Dimension, format!("expected {len} entries, got {}", a.len())));
        }
        a.iter().map(|x| self.expr(section, key, x)).collect()
    }

    fn matrix(&self, section: &str, key: &str, v: &Value, n: usize) -> Result<Vec<Vec<ScalarExpr>>, LoadError> {
        let rows = self.array(section, key, v)?;
        if rows.len() != n {
            return Err(self.err(section, Some(key), LoadErrorKind::Dimension, format!("expected {n} rows, got {}", rows.len())));
        }
        rows.iter().map(|r| self.exprs(section, key, r, n)).collect()
    }

    fn constant(&self, section: &str, key: &str, v: &Value) -> Result<Rational, LoadError> {
        let e = self.expr(section, key, v)?;
        e.as_const().cloned().ok_or_else(|| self.err(section, Some(key), LoadErrorKind::Type, format!("`{e}` is not a constant")))
    }

    fn instance_meta(&self, t: Option<&Table>) -> Result<(String, Option<StructureKind>, Vec<String>), LoadError> {
        let Some(t) = t else { return Ok(("instance".into(), None, Vec::new())) };
        self.allow("instance", t, &["id", "class", "notes"])?;
        let id = match t.get("id") {
            Some(v) => self.string("instance", "id", v)?.to_string(),
            None => "instance".into(),
        };
        let class = match t.get("class") {
            Some(v) => {
                let s = self.string("instance", "class", v)?;
                Some(StructureKind::from_name(s).ok_or_else(|| self.err("instance", Some("class"), LoadErrorKind::Invalid, format!("unknown class `{s}`")))?)
            }
            None => None,
        };
        let notes = match t.get("notes") {
            Some(v) => self.strings("instance", "notes", v)?,
            None => Vec::new(),
        };
        Ok((id, class, notes))
    }

    fn chart(&mut self, t: &Table) -> Result<Chart, LoadError> {
        const S: &str = "chart";
        self.allow(S, t, &["dim", "coords", "domain", "excluded"])?;
        let coords = self.strings(S, "coords", t.get("coords").ok_or_else(|| self.err(S, Some("coords"), LoadErrorKind::Missing, "required".into()))?)?;
        if let Some(d) = t.get("dim") {
            let d = d.as_integer().ok_or_else(|| self.err(S, Some("dim"), LoadErrorKind::Type, "expected an integer".into()))?;
            if d as usize != coords.len() {
                return Err(self.err(S, Some("dim"), LoadErrorKind::Dimension, format!("dim = {d} but {} coordinates", coords.len())));
            }
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(self.err(S, Some("coords"), LoadErrorKind::Invalid, format!("duplicate coordinate `{c}`")));
            }
        }
        self.coords = coords.clone();
        let domain_t = match t.get("domain") {
            Some(Value::Table(d)) => d,
            Some(_) => return Err(self.err(S, Some("domain"), LoadErrorKind::Type, "expected a table".into())),
            None => return Err(self.err(S, Some("domain"), LoadErrorKind::Missing, "required".into())),
        };
        let mut intervals = Vec::new();
        for c in &coords {
            let v = domain_t.get(c).ok_or_else(|| self.err(S, Some("domain"), LoadErrorKind::Missing, format!("no interval for `{c}`")))?;
            let pair = self.array(S, "domain", v)?;
            if pair.len() != 2 {
                return Err(self.err(S, Some("domain"), LoadErrorKind::Type, format!("interval for `{c}` must be [lo, hi]")));
            }
            intervals.push((self.constant(S, "domain", &pair[0])?, self.constant(S, "domain", &pair[1])?));
        }
        if let Some(k) = domain_t.keys().find(|k| !coords.contains(k)) {
            return Err(self.err(S, Some("domain"), LoadErrorKind::UnresolvedSymbol, format!("interval for unknown coordinate `{k}`")));
        }
        let excluded = match t.get("excluded") {
            Some(v) => self.array(S, "excluded", v)?.iter().map(|x| self.expr(S, "excluded", x)).collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let domain = Domain::new(coords, intervals).map_err(|e| self.err(S, Some("domain"), LoadErrorKind::Invalid, e.to_string()))?;
        Chart::new(domain.with_exclusions(excluded)).map_err(|e| self.err(S, None, LoadErrorKind::Dimension, e.to_string()))
    }

    /// Keys are parameter names; a number is a default value, `"free"`
    /// means the value must be bound by the caller.
    fn parameters(&self, t: Option<&Table>) -> Result<(Vec<String>, Bindings), LoadError> {
        let mut names = Vec::new();
        let mut b = Bindings::new();
        let Some(t) = t else { return Ok((names, b)) };
        for (k, v) in t {
            if self.coords.contains(k) {
                return Err(self.err("parameters", Some(k), LoadErrorKind::Invalid, "parameter shadows a coordinate".into()));
            }
            match v {
                Value::Integer(i) => {
                    b.insert(k.clone(), *i as f64);
                }
                Value::Float(f) => {
                    b.insert(k.clone(), *f);
                }
                Value::String(s) if s == "free" => {}
                _ => return Err(self.err("parameters", Some(k), LoadErrorKind::Type, "expected a number or \"free\"".into())),
            }
            names.push(k.clone());
        }
        Ok((names, b))
    }

    fn frame_and_metric(
        &self,
        frame_t: Option<&Table>,
        metric_t: &Table,
        chart: &Chart,
        ctx: &EvalContext,
    ) -> Result<(Option<Frame>, MetricField), LoadError> {
        let n = chart.dim();
        self.allow("metric", metric_t, &["frame_metric", "g"])?;
        let (fm, g) = (metric_t.get("frame_metric"), metric_t.get("g"));
        let geo = |section: &str, e: GeometryError| {
            let kind = match e {
                GeometryError::SingularMetric { .. } | GeometryError::SingularFrame { .. } => LoadErrorKind::Singular,
                GeometryError::ShapeMismatch { .. } | GeometryError::BadDimension(_) => LoadErrorKind::Dimension,
                _ => LoadErrorKind::Invalid,
            };
            self.err(section, None, kind, e.to_string())
        };
        let frame_vectors = match frame_t {
            Some(ft) => {
                if ft.len() != n {
                    return Err(self.err("frame", None, LoadErrorKind::Dimension, format!("expected {n} vectors, got {}", ft.len())));
                }
                let mut names = Vec::new();
                let mut vectors = Vec::new();
                for (name, v) in ft {
                    if self.coords.contains(name) || self.params.contains(name) {
                        return Err(self.err("frame", Some(name), LoadErrorKind::Invalid, "frame name shadows a coordinate or parameter".into()));
                    }
                    names.push(name.clone());
                    vectors.push(VectorField::new(self.exprs("frame", name, v, n)?));
                }
                Some((names, vectors))
            }
            None => None,
        };
        match (fm, g) {
            (Some(_), Some(_)) => Err(self.err("metric", None, LoadErrorKind::Ambiguous, "give either frame_metric or g, not both".into())),
            (None, None) => Err(self.err("metric", None, LoadErrorKind::Missing, "one of frame_metric or g is required".into())),
            (Some(fm), None) => {
                let Some((names, vectors)) = frame_vectors else {
                    return Err(self.err("metric", Some("frame_metric"), LoadErrorKind::Missing, "frame_metric needs a [frame] section".into()));
                };
                let rows = self.array("metric", "frame_metric", fm)?;
                if rows.len() != n {
                    return Err(self.err("metric", Some("frame_metric"), LoadErrorKind::Dimension, format!("expected {n} rows")));
                }
                let mut gram = Vec::new();
                for r in rows {
                    let r = self.array("metric", "frame_metric", r)?;
                    if r.len() != n {
                        return Err(self.err("metric", Some("frame_metric"), LoadErrorKind::Dimension, format!("expected {n} columns")));
                    }
                    gram.push(r.iter().map(|x| self.constant("metric", "frame_metric", x)).collect::<Result<Vec<_>, _>>()?);
                }
                let frame = Frame::new(FrameSpec { names, vectors, gram }, chart, ctx).map_err(|e| geo("frame", e))?;
                let metric = metric_from_frame(&frame, chart, ctx).map_err(|e| geo("metric", e))?;
                Ok((Some(frame), metric))
            }
            (None, Some(g)) => {
                let comps = self.matrix("metric", "g", g, n)?;
                let metric = MetricField::new(chart, comps, ctx).map_err(|e| geo("metric", e))?;
                let frame = match frame_vectors {
                    Some((names, vectors)) => {
                        let mut gram = vec![vec![Rational::from_integer(0.into()); n]; n];
                        for a in 0..n {
                            for b in 0..n {
                                let ip = metric.inner(&vectors[a], &vectors[b]);
                                gram[a][b] = ip.as_const().cloned().ok_or_else(|| {
                                    self.err("frame", None, LoadErrorKind::Invalid, format!("g({}, {}) = `{ip}` is not constant", names[a], names[b]))
                                })?;
                            }
                        }
                        Some(Frame::new(FrameSpec { names, vectors, gram }, chart, ctx).map_err(|e| geo("frame", e))?)
                    }
                    None => None,
                };
                Ok((frame, metric))
            }
        }
    }

    fn frame_vector(&self, section: &str, key: &str, v: &Value, frame: Option<&Frame>) -> Result<VectorField, LoadError> {
        let n = self.coords.len();
        match v {
            Value::String(name) => {
                let f = frame.ok_or_else(|| self.err(section, Some(key), LoadErrorKind::UnresolvedSymbol, format!("`{name}` needs a [frame] section")))?;
                let a = f.index_of(name).ok_or_else(|| self.err(section, Some(key), LoadErrorKind::UnresolvedSymbol, format!("unknown frame vector `{name}`")))?;
                Ok(f.vector(a).clone())
            }
            _ => Ok(VectorField::new(self.exprs(section, key, v, n)?)),
        }
    }

    fn structure(&self, t: &Table, frame: Option<&Frame>, chart: &Chart, ctx: &EvalContext) -> Result<Structure, LoadError> {
        const S: &str = "structure";
        self.allow(S, t, &["zeta", "eta", "phi"])?;
        let n = self.coords.len();
        let get = |k: &str| t.get(k).ok_or_else(|| self.err(S, Some(k), LoadErrorKind::Missing, "required".into()));
        let zeta_v = get("zeta")?;
        let zeta = self.frame_vector(S, "zeta", zeta_v, frame)?;
        let eta = match get("eta")? {
            Value::String(s) if s == "dual" => {
                let (Some(f), Value::String(name)) = (frame, zeta_v) else {
                    return Err(self.err(S, Some("eta"), LoadErrorKind::Invalid, "\"dual\" needs zeta given as a frame name".into()));
                };
                let a = f.index_of(name).expect("checked above");
                TensorField::one_form(f.coframe()[a].clone())
            }
            v => TensorField::one_form(self.exprs(S, "eta", v, n)?),
        };
        let phi = match get("phi")? {
            Value::Table(action) => {
                let f = frame.ok_or_else(|| self.err(S, Some("phi"), LoadErrorKind::Missing, "a frame-action table needs a [frame] section".into()))?;
                let names = f.names().to_vec();
                let section = "structure.phi";
                let mut images = vec![None; n];
                for (k, v) in action {
                    let a = f.index_of(k).ok_or_else(|| self.err(section, Some(k), LoadErrorKind::UnresolvedSymbol, format!("unknown frame vector `{k}`")))?;
                    let e = self.expr_with(section, k, v, &names)?;
                    images[a] = Some(self.linear_in(section, k, &e, &names, chart, ctx)?);
                }
                let images: Vec<Vec<ScalarExpr>> = images
                    .into_iter()
                    .enumerate()
                    .map(|(a, c)| c.ok_or_else(|| self.err(section, None, LoadErrorKind::Missing, format!("no image given for `{}`", names[a]))))
                    .collect::<Result<_, _>>()?;
                Structure::phi_from_frame(f, &images)
            }
            v => TensorField::from_matrix([crate::geometry::Slot::Up, crate::geometry::Slot::Down], &self.matrix(S, "phi", v, n)?),
        };
        Ok(Structure::new(phi, zeta, eta))
    }

    /// Splits an expression linear in the frame names into coefficients.
    fn linear_in(&self, section: &str, key: &str, e: &ScalarExpr, names: &[String], chart: &Chart, ctx: &EvalContext) -> Result<Vec<ScalarExpr>, LoadError> {
        let at = |vals: &[ScalarExpr]| {
            let m: HashMap<String, ScalarExpr> = names.iter().cloned().zip(vals.iter().cloned()).collect();
            e.substitute_params(&m)
        };
        let n = names.len();
        let zero = vec![ScalarExpr::zero(); n];
        let base = at(&zero);
        let coeffs: Vec<ScalarExpr> = (0..n)
            .map(|a| {
                let mut v = zero.clone();
                v[a] = ScalarExpr::one();
                at(&v) - &base
            })
            .collect();
        let probe: Vec<ScalarExpr> = (0..n).map(|a| ScalarExpr::int(2 + 3 * a as i64)).collect();
        let recon = ScalarExpr::sum(coeffs.iter().zip(&probe).map(|(c, p)| c * p));
        let diff = at(&probe) - recon;
        let nonlinear = || self.err(section, Some(key), LoadErrorKind::Invalid, format!("`{e}` is not linear in the frame vectors"));
        if !base.is_zero() && !check_zero(&base, chart, ctx) {
            return Err(nonlinear());
        }
        if !diff.is_zero() && !check_zero(&diff, chart, ctx) {
            return Err(nonlinear());
        }
        Ok(coeffs)
    }

    fn check(&self, t: Option<&Table>) -> Result<CheckDefaults, LoadError> {
        let Some(t) = t else { return Ok(CheckDefaults::default()) };
        self.allow("check", t, &["points", "tol", "seed"])?;
        let int = |k: &str| -> Result<Option<i64>, LoadError> {
            t.get(k).map(|v| v.as_integer().filter(|i| *i >= 0).ok_or_else(|| self.err("check", Some(k), LoadErrorKind::Type, "expected a non-negative integer".into()))).transpose()
        };
        let tol = t
            .get("tol")
            .map(|v| match v {
                Value::Float(f) if *f > 0.0 => Ok(*f),
                _ => Err(self.err("check", Some("tol"), LoadErrorKind::Type, "expected a positive float".into())),
            })
            .transpose()?;
        Ok(CheckDefaults { points: int("points")?.map(|p| p as usize), tol, seed: int("seed")?.map(|s| s as u64) })
    }

    fn soliton(&self, section: &str, name: &str, t: &Table, frame: Option<&Frame>, zeta: Option<&VectorField>) -> Result<SolitonSpec, LoadError> {
        self.allow(section, t, &["kind", "f", "V", "h", "lambda", "alpha", "beta", "role"])?;
        let req = |k: &str| t.get(k).ok_or_else(|| self.err(section, Some(k), LoadErrorKind::Missing, "required".into()));
        let kind_s = self.string(section, "kind", req("kind")?)?;
        let kind = SolitonKind::from_name(kind_s).ok_or_else(|| self.err(section, Some("kind"), LoadErrorKind::Invalid, format!("unknown kind `{kind_s}` (ARYS or AGRYS)")))?;
        let potential = match kind {
            SolitonKind::Agrys => {
                if t.contains_key("V") {
                    return Err(self.err(section, Some("V"), LoadErrorKind::Invalid, "AGRYS takes a potential function f".into()));
                }
                Potential::Scalar(self.expr(section, "f", req("f")?)?)
            }
            SolitonKind::Arys => {
                if t.contains_key("f") {
                    return Err(self.err(section, Some("f"), LoadErrorKind::Invalid, "ARYS takes a vector field V".into()));
                }
                let v = req("V")?;
                Potential::Vector(match v {
                    Value::String(s) if s == "zeta" => zeta
                        .cloned()
                        .ok_or_else(|| self.err(section, Some("V"), LoadErrorKind::UnresolvedSymbol, "`zeta` needs a [structure] section".into()))?,
                    _ => self.frame_vector(section, "V", v, frame)?,
                })
            }
        };
        let h = match t.get("h") {
            Some(v) => self.expr(section, "h", v)?,
            None => ScalarExpr::one(),
        };
        let lambda = t.get("lambda").map(|v| self.expr(section, "lambda", v)).transpose()?;
        let alpha = self.expr(section, "alpha", req("alpha")?)?;
        let beta = self.expr(section, "beta", req("beta")?)?;
        let claimed = match t.get("role") {
            None => false,
            Some(v) => match self.string(section, "role", v)? {
                "claim" => true,
                "check" => false,
                other => return Err(self.err(section, Some("role"), LoadErrorKind::Invalid, format!("unknown role `{other}` (claim or check)"))),
            },
        };
        Ok(SolitonSpec { name: name.to_string(), kind, potential, h, lambda, alpha, beta, claimed })
    }

    fn claims(&self, v: &Value, frame: Option<&Frame>) -> Result<Vec<Claim>, LoadError> {
        const S: &str = "claims";
        let list = self.array(S, "claims", v)?;
        let mut out = Vec::new();
        for item in list {
            let t = item.as_table().ok_or_else(|| self.err(S, None, LoadErrorKind::Type, "expected [[claims]] tables".into()))?;
            self.allow(S, t, &["id", "anchor", "description", "what", "args", "value"])?;
            let req = |k: &str| t.get(k).ok_or_else(|| self.err(S, Some(k), LoadErrorKind::Missing, "required".into()));
            let id = self.string(S, "id", req("id")?)?.to_string();
            let anchor_s = self.string(S, "anchor", req("anchor")?)?;
            let anchor = Anchor::new(anchor_s).ok_or_else(|| self.err(S, Some("anchor"), LoadErrorKind::Invalid, format!("unregistered anchor `{anchor_s}`")))?.id();
            let description = match t.get("description") {
                Some(v) => self.string(S, "description", v)?.to_string(),
                None => String::new(),
            };
            let what = self.string(S, "what", req("what")?)?;
            let args = match t.get("args") {
                Some(v) => self.strings(S, "args", v)?,
                None => Vec::new(),
            };
            let idx: Vec<usize> = args
                .iter()
                .map(|a| {
                    frame
                        .and_then(|f| f.index_of(a))
                        .ok_or_else(|| self.err(S, Some("args"), LoadErrorKind::UnresolvedSymbol, format!("unknown frame vector `{a}`")))
                })
                .collect::<Result<_, _>>()?;
            let arity = |k: usize| {
                if idx.len() == k {
                    Ok(())
                } else {
                    Err(self.err(S, Some("args"), LoadErrorKind::Dimension, format!("`{what}` takes {k} arguments")))
                }
            };
            let n = self.coords.len();
            let (kind, len) = match what {
                "nabla" => (arity(2).map(|_| ClaimKind::Nabla(idx[0], idx[1]))?, n),
                "bracket" => (arity(2).map(|_| ClaimKind::Bracket(idx[0], idx[1]))?, n),
                "riemann" => (arity(3).map(|_| ClaimKind::Riemann(idx[0], idx[1], idx[2]))?, n),
                "ricci" => (arity(2).map(|_| ClaimKind::Ricci(idx[0], idx[1]))?, 1),
                "scalar" => (arity(0).map(|_| ClaimKind::Scalar)?, 1),
                other => return Err(self.err(S, Some("what"), LoadErrorKind::Invalid, format!("unknown claim kind `{other}`"))),
            };
            let value = match req("value")? {
                Value::Array(_) => self.exprs(S, "value", req("value")?, len)?,
                v if len == 1 => vec![self.expr(S, "value", v)?],
                _ => return Err(self.err(S, Some("value"), LoadErrorKind::Type, format!("expected {len} frame components"))),
            };
            out.push(Claim { id, anchor, description, kind, value });
        }
        Ok(out)
    }
}

fn check_zero(e: &ScalarExpr, chart: &Chart, ctx: &EvalContext) -> bool {
    let Ok(points) = chart.sample(&ctx.opts) else { return false };
    points.iter().take(4).all(|p| e.evaluate(chart.coords(), p, &ctx.bindings).is_ok_and(|v| v.abs() < 1e-12))
}
