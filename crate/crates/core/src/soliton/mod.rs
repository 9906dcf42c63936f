//! h-almost Ricci-Yamabe solitons: residual tensors, λ solving, taxonomy,
//! and the Einstein and constant-curvature classifiers.

mod relations;

use thiserror::Error;

use crate::check::CheckConfig;
use crate::expr::ScalarExpr;
use crate::geometry::numeric::{compare_sampled, Probe, Residual};
use crate::geometry::{
    gradient, hessian, lie_derivative_metric, Chart, CurvatureBundle, GeometryError, MetricField, Slot, TensorField,
    VectorField,
};
use crate::paracontact::algebra::{eta_eta, kron};
use crate::paracontact::ParacontactInstance;

pub use relations::{check_relation, RELATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonKind {
    /// `(h/2)£_V g + αS + (λ − βr/2)g = 0`.
    Arys,
    /// `h∇²f + (λ − βr/2)g + αS = 0`.
    Agrys,
}

impl SolitonKind {
    pub fn name(self) -> &'static str {
        match self {
            SolitonKind::Arys => "ARYS",
            SolitonKind::Agrys => "AGRYS",
        }
    }

    pub fn from_name(s: &str) -> Option<SolitonKind> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ARYS" => Some(SolitonKind::Arys),
            "AGRYS" => Some(SolitonKind::Agrys),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Potential {
    Vector(VectorField),
    Scalar(ScalarExpr),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolitonError {
    #[error("{kind} soliton needs a {expected} potential")]
    KindMismatch { kind: &'static str, expected: &'static str },
    #[error("soliton has no lambda; solve for it first")]
    MissingLambda,
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("potential has {got} components, chart has {dim}")]
    Shape { got: usize, dim: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone)]
pub struct SolitonSpec {
    pub name: String,
    pub kind: SolitonKind,
    pub potential: Potential,
    pub h: ScalarExpr,
    /// `None` means λ is to be solved for.
    pub lambda: Option<ScalarExpr>,
    pub alpha: ScalarExpr,
    pub beta: ScalarExpr,
    /// Whether the data is asserted (by the instance author) to be a soliton.
    pub claimed: bool,
}

impl SolitonSpec {
    pub fn arys(v: VectorField, h: ScalarExpr, lambda: Option<ScalarExpr>, alpha: ScalarExpr, beta: ScalarExpr) -> SolitonSpec {
        SolitonSpec { name: "default".into(), kind: SolitonKind::Arys, potential: Potential::Vector(v), h, lambda, alpha, beta, claimed: false }
    }

    pub fn agrys(f: ScalarExpr, h: ScalarExpr, lambda: Option<ScalarExpr>, alpha: ScalarExpr, beta: ScalarExpr) -> SolitonSpec {
        SolitonSpec { name: "default".into(), kind: SolitonKind::Agrys, potential: Potential::Scalar(f), h, lambda, alpha, beta, claimed: false }
    }

    pub fn with_lambda(&self, lambda: ScalarExpr) -> SolitonSpec {
        SolitonSpec { lambda: Some(lambda), ..self.clone() }
    }

    pub fn validate(&self, dim: usize) -> Result<(), SolitonError> {
        match (&self.kind, &self.potential) {
            (SolitonKind::Arys, Potential::Vector(v)) if v.dim() != dim => Err(SolitonError::Shape { got: v.dim(), dim }),
            (SolitonKind::Arys, Potential::Vector(_)) | (SolitonKind::Agrys, Potential::Scalar(_)) => Ok(()),
            (SolitonKind::Arys, _) => Err(SolitonError::KindMismatch { kind: "ARYS", expected: "vector" }),
            (SolitonKind::Agrys, _) => Err(SolitonError::KindMismatch { kind: "AGRYS", expected: "scalar" }),
        }
    }

    /// The scalar potential `f`, if any.
    pub fn f(&self) -> Option<&ScalarExpr> {
        match &self.potential {
            Potential::Scalar(f) => Some(f),
            Potential::Vector(_) => None,
        }
    }

    /// `V`, or `Df` for a gradient soliton.
    pub fn vector_potential(&self, inst: &ParacontactInstance) -> VectorField {
        match &self.potential {
            Potential::Vector(v) => v.clone(),
            Potential::Scalar(f) => gradient(f, &inst.metric, inst.coords()),
        }
    }
}

/// The soliton tensor with λ set to zero.
pub fn lambda_free_part(inst: &ParacontactInstance, spec: &SolitonSpec) -> Result<TensorField, SolitonError> {
    spec.validate(inst.dim())?;
    let b = inst.curvature();
    let g = inst.metric.tensor();
    let potential_term = match &spec.potential {
        Potential::Vector(v) => lie_derivative_metric(v, &b.connection, &inst.metric).scale(&(ScalarExpr::ratio(1, 2) * &spec.h)),
        Potential::Scalar(f) => hessian(f, &b.connection).scale(&spec.h),
    };
    let trace_term = g.scale(&-(ScalarExpr::ratio(1, 2) * &spec.beta * &b.scalar));
    Ok(potential_term.add(&b.ricci.scale(&spec.alpha)).add(&trace_term))
}

/// The full soliton tensor for a given λ.
pub fn soliton_residual(inst: &ParacontactInstance, spec: &SolitonSpec, lambda: &ScalarExpr) -> Result<TensorField, SolitonError> {
    Ok(lambda_free_part(inst, spec)?.add(&inst.metric.tensor().scale(lambda)))
}

fn residual_of_kind(inst: &ParacontactInstance, spec: &SolitonSpec, kind: SolitonKind) -> Result<TensorField, SolitonError> {
    if spec.kind != kind {
        return Err(SolitonError::KindMismatch {
            kind: kind.name(),
            expected: if kind == SolitonKind::Arys { "vector" } else { "scalar" },
        });
    }
    let lambda = spec.lambda.as_ref().ok_or(SolitonError::MissingLambda)?;
    soliton_residual(inst, spec, lambda)
}

/// `(h/2)£_V g + αS + (λ − βr/2)g`.
pub fn arys_residual(inst: &ParacontactInstance, spec: &SolitonSpec) -> Result<TensorField, SolitonError> {
    residual_of_kind(inst, spec, SolitonKind::Arys)
}

/// `h∇²f + (λ − βr/2)g + αS`.
pub fn agrys_residual(inst: &ParacontactInstance, spec: &SolitonSpec) -> Result<TensorField, SolitonError> {
    residual_of_kind(inst, spec, SolitonKind::Agrys)
}

/// Residual of `t` against `against` on the chart's sample points.
pub fn tensor_residual(t: &TensorField, against: &TensorField, chart: &Chart, cfg: &CheckConfig) -> Result<Residual, GeometryError> {
    crate::geometry::numeric::compare_tensors(t, against, chart, &cfg.eval)
}

/// Residual of the soliton equation `A + λg = 0`, measured as `A` against
/// `−λg` so that the tolerance is relative to the size of the terms.
pub fn soliton_equation_residual(inst: &ParacontactInstance, spec: &SolitonSpec, cfg: &CheckConfig) -> Result<Residual, SolitonError> {
    let lambda = spec.lambda.as_ref().ok_or(SolitonError::MissingLambda)?;
    let a = lambda_free_part(inst, spec)?;
    let rhs = inst.metric.tensor().scale(&-lambda);
    Ok(tensor_residual(&a, &rhs, &inst.chart, cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaStatus {
    Solved,
    Inconsistent,
    Degenerate,
}

impl LambdaStatus {
    pub fn name(self) -> &'static str {
        match self {
            LambdaStatus::Solved => "SOLVED",
            LambdaStatus::Inconsistent => "INCONSISTENT",
            LambdaStatus::Degenerate => "DEGENERATE",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaSolution {
    pub status: LambdaStatus,
    /// The trace estimate `λ = −tr_g(A)/dim`; meaningful when solved.
    pub lambda: ScalarExpr,
    /// λ at each sample point.
    pub values: Vec<f64>,
    /// Residual of `A + λg` after substitution.
    pub residual: Residual,
    /// Largest relative gap between the trace and least-squares estimates.
    pub estimator_gap: f64,
    pub constant: bool,
    pub note: String,
}

/// Fits λ so that the soliton tensor vanishes, if the λ-free part is
/// proportional to `g`.
pub fn solve_lambda(inst: &ParacontactInstance, spec: &SolitonSpec, cfg: &CheckConfig) -> Result<LambdaSolution, SolitonError> {
    let tol = cfg.tol();
    let a = lambda_free_part(inst, spec)?;
    let g = &inst.metric;
    let n = inst.dim();
    let inv = g.inverse();
    let trace = ScalarExpr::sum((0..n).flat_map(|i| {
        let a = &a;
        (0..n).filter(move |&j| !inv[i][j].is_zero()).map(move |j| &inv[i][j] * a.get(&[i, j]))
    }));
    let lambda = -(trace * ScalarExpr::ratio(1, n as i64));
    let mut probe = Probe::new();
    let ha = probe.add_tensor(&a);
    let hfit = probe.add_tensor(&g.tensor().scale(&-&lambda));
    let hg = probe.add_tensor(g.tensor());
    let hl = probe.add_one(&lambda);
    let hh = probe.add_one(&spec.h);
    let samples = probe.run_on(&inst.chart, &cfg.eval)?;
    let residual = compare_sampled(&samples, ha, hfit, &[Slot::Down, Slot::Down], n, cfg.eval.opts.seed);
    let mut values = Vec::with_capacity(samples.len());
    let mut gap = 0f64;
    let mut small_h = 0;
    for p in 0..samples.len() {
        let (av, gv) = (samples.get(p, ha), samples.get(p, hg));
        let dot: f64 = av.iter().zip(gv).map(|(x, y)| x * y).sum();
        let norm: f64 = gv.iter().map(|y| y * y).sum();
        let ls = -dot / norm;
        let tr = samples.scalar(p, hl);
        gap = gap.max((ls - tr).abs() / 1f64.max(ls.abs()).max(tr.abs()));
        values.push(tr);
        if samples.scalar(p, hh).abs() < tol {
            small_h += 1;
        }
    }
    if gap.is_nan() {
        gap = f64::INFINITY;
    }
    let constant = is_constant(&values, tol);
    let proportional = residual.below(tol) && gap < tol;
    let (status, note) = if small_h > 0 && small_h < samples.len() {
        (LambdaStatus::Degenerate, format!("|h| < tol at {small_h} of {} samples", samples.len()))
    } else if !proportional {
        (
            LambdaStatus::Inconsistent,
            format!("lambda-free part is not proportional to g (residual {:.3e}, estimator gap {:.3e})", residual.max_rel, gap),
        )
    } else if small_h == samples.len() {
        (LambdaStatus::Solved, "h vanishes identically; the potential does not enter".to_string())
    } else {
        (LambdaStatus::Solved, String::new())
    };
    Ok(LambdaSolution { status, lambda, values, residual, estimator_gap: gap, constant, note })
}

/// True when all values agree within `tol` relative to `max(1, |v|)`.
pub fn is_constant(values: &[f64], tol: f64) -> bool {
    let Some(first) = values.first() else { return true };
    values.iter().all(|v| (v - first).abs() / 1f64.max(v.abs()).max(first.abs()) < tol)
}

/// Flags of the α, β taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Taxonomy {
    /// `α = 1, β = 0`.
    pub ricci: bool,
    /// `α = 0, β = 1`.
    pub yamabe: bool,
    /// `α = 1, β = −1`.
    pub einstein: bool,
    /// `α ∉ {0, 1}`.
    pub proper: bool,
}

impl Taxonomy {
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.ricci {
            parts.push("Ricci-type");
        }
        if self.yamabe {
            parts.push("Yamabe-type");
        }
        if self.einstein {
            parts.push("Einstein-type");
        }
        parts.push(if self.proper { "proper" } else { "not proper" });
        parts.join(", ")
    }
}

const PARAM_EPS: f64 = 1e-12;

pub fn soliton_taxonomy(alpha: f64, beta: f64) -> Taxonomy {
    let is = |x: f64, v: f64| (x - v).abs() < PARAM_EPS;
    Taxonomy {
        ricci: is(alpha, 1.0) && is(beta, 0.0),
        yamabe: is(alpha, 0.0) && is(beta, 1.0),
        einstein: is(alpha, 1.0) && is(beta, -1.0),
        proper: !is(alpha, 0.0) && !is(alpha, 1.0),
    }
}

/// Evaluates a parameter expression such as α at the first sample point.
pub fn parameter_value(e: &ScalarExpr, chart: &Chart, cfg: &CheckConfig) -> Result<f64, GeometryError> {
    let points = chart.sample(&cfg.eval.opts)?;
    Ok(e.evaluate(chart.coords(), &points[0], &cfg.eval.bindings)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EinsteinKind {
    Einstein,
    EtaEinstein,
    Neither,
}

impl EinsteinKind {
    pub fn name(self) -> &'static str {
        match self {
            EinsteinKind::Einstein => "Einstein",
            EinsteinKind::EtaEinstein => "eta-Einstein",
            EinsteinKind::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EinsteinVerdict {
    pub kind: EinsteinKind,
    /// Coefficient of `g` in `S = a g + b η⊗η`.
    pub a: ScalarExpr,
    /// Coefficient of `η⊗η`, absent when no η was supplied.
    pub b: Option<ScalarExpr>,
    pub a_value: f64,
    pub b_value: f64,
    pub a_constant: bool,
    pub b_zero: bool,
    pub residual: Residual,
}

/// Fits `S = a g + b η⊗η` (or `S = a g` without η) pointwise.
pub fn einstein_classify(
    s: &TensorField,
    g: &MetricField,
    eta: Option<&TensorField>,
    chart: &Chart,
    cfg: &CheckConfig,
) -> Result<EinsteinVerdict, GeometryError> {
    let tol = cfg.tol();
    let n = g.dim();
    let inv = g.inverse();
    let t1 = ScalarExpr::sum((0..n).flat_map(|i| (0..n).filter(move |&j| !inv[i][j].is_zero()).map(move |j| &inv[i][j] * s.get(&[i, j]))));
    let (a, b, fit) = match eta {
        Some(eta) => {
            let sharp = g.raise(eta);
            let e = eta.evaluate_on(&[&sharp]);
            let t2 = s.evaluate_on(&[&sharp, &sharp]);
            let a = (&t1 * &e - &t2) * (&e * ScalarExpr::int(n as i64 - 1)).recip();
            let b = (&t2 - &a * &e) * e.powi(2).recip();
            let fit = g.tensor().scale(&a).add(&eta_eta(eta).scale(&b));
            (a, Some(b), fit)
        }
        None => {
            let a = t1 * ScalarExpr::ratio(1, n as i64);
            let fit = g.tensor().scale(&a);
            (a, None, fit)
        }
    };
    let mut probe = Probe::new();
    let hs = probe.add_tensor(s);
    let hf = probe.add_tensor(&fit);
    let ha = probe.add_one(&a);
    let hb = probe.add_one(b.as_ref().unwrap_or(&ScalarExpr::zero()));
    let samples = probe.run_on(chart, &cfg.eval)?;
    let residual = compare_sampled(&samples, hs, hf, &[Slot::Down, Slot::Down], n, cfg.eval.opts.seed);
    let av: Vec<f64> = (0..samples.len()).map(|p| samples.scalar(p, ha)).collect();
    let bv: Vec<f64> = (0..samples.len()).map(|p| samples.scalar(p, hb)).collect();
    let a_constant = is_constant(&av, tol);
    let b_zero = bv.iter().zip(&av).all(|(b, a)| b.abs() / 1f64.max(a.abs()) < tol);
    let kind = if !residual.below(tol) {
        EinsteinKind::Neither
    } else if b_zero && a_constant {
        EinsteinKind::Einstein
    } else {
        EinsteinKind::EtaEinstein
    };
    Ok(EinsteinVerdict { kind, a, b, a_value: av[0], b_value: bv[0], a_constant, b_zero, residual })
}

#[derive(Debug, Clone)]
pub struct SectionalVerdict {
    pub holds: bool,
    /// `c = r / (dim (dim − 1))`.
    pub c: ScalarExpr,
    pub c_value: f64,
    pub c_constant: bool,
    pub residual: Residual,
}

/// Tests `R(X,Y)Z = c[g(Y,Z)X − g(X,Z)Y]` with constant `c`.
pub fn sectional_constancy(bundle: &CurvatureBundle, g: &MetricField, chart: &Chart, cfg: &CheckConfig) -> Result<SectionalVerdict, GeometryError> {
    let n = g.dim();
    let c = &bundle.scalar * ScalarExpr::ratio(1, (n * (n - 1)) as i64);
    let model = TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], n, |x| {
        let (l, i, j, k) = (x[0], x[1], x[2], x[3]);
        &c * (g.component(j, k) * kron(l, i) - g.component(i, k) * kron(l, j))
    });
    let mut probe = Probe::new();
    let hr = probe.add_tensor(&bundle.riemann);
    let hm = probe.add_tensor(&model);
    let hc = probe.add_one(&c);
    let samples = probe.run_on(chart, &cfg.eval)?;
    let residual = compare_sampled(&samples, hr, hm, bundle.riemann.slots(), n, cfg.eval.opts.seed);
    let cv: Vec<f64> = (0..samples.len()).map(|p| samples.scalar(p, hc)).collect();
    let c_constant = is_constant(&cv, cfg.tol());
    Ok(SectionalVerdict { holds: residual.below(cfg.tol()) && c_constant, c, c_value: cv[0], c_constant, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSign {
    Expanding,
    Steady,
    Shrinking,
    Indefinite,
}

impl LambdaSign {
    pub fn name(self) -> &'static str {
        match self {
            LambdaSign::Expanding => "expanding",
            LambdaSign::Steady => "steady",
            LambdaSign::Shrinking => "shrinking",
            LambdaSign::Indefinite => "indefinite",
        }
    }
}

/// Expanding iff λ > 0 everywhere (λ = 2n counts as expanding).
pub fn lambda_sign(lambda: &ScalarExpr, chart: &Chart, cfg: &CheckConfig) -> Result<LambdaSign, GeometryError> {
    let tol = cfg.tol();
    let mut probe = Probe::new();
    let h = probe.add_one(lambda);
    let s = probe.run_on(chart, &cfg.eval)?;
    let v: Vec<f64> = (0..s.len()).map(|p| s.scalar(p, h)).collect();
    Ok(if v.iter().all(|x| x.abs() < tol) {
        LambdaSign::Steady
    } else if v.iter().all(|x| *x >= tol) {
        LambdaSign::Expanding
    } else if v.iter().all(|x| *x <= -tol) {
        LambdaSign::Shrinking
    } else {
        LambdaSign::Indefinite
    })
}

/// Outcome of testing whether a soliton spec actually solves its equation.
#[derive(Debug, Clone)]
pub struct SolitonFit {
    pub holds: bool,
    /// The given λ, or the solved one when `holds`.
    pub lambda: Option<ScalarExpr>,
    pub residual: Residual,
    pub solution: Option<LambdaSolution>,
    pub detail: String,
}

impl SolitonFit {
    /// The spec with the fitted λ filled in.
    pub fn resolved(&self, spec: &SolitonSpec) -> Option<SolitonSpec> {
        self.lambda.as_ref().map(|l| spec.with_lambda(l.clone()))
    }
}

/// Checks the soliton equation with the given λ, or solves for λ first.
pub fn fit_soliton(inst: &ParacontactInstance, spec: &SolitonSpec, cfg: &CheckConfig) -> Result<SolitonFit, SolitonError> {
    match &spec.lambda {
        Some(l) => {
            let residual = soliton_equation_residual(inst, spec, cfg)?;
            let holds = residual.below(cfg.tol());
            let detail = if holds { "soliton equation holds".to_string() } else { format!("soliton equation fails (residual {:.3e})", residual.max_rel) };
            Ok(SolitonFit { holds, lambda: Some(l.clone()), residual, solution: None, detail })
        }
        None => {
            let sol = solve_lambda(inst, spec, cfg)?;
            let holds = sol.status == LambdaStatus::Solved;
            let mut detail = format!("solve_lambda: {}", sol.status.name());
            if holds {
                detail.push_str(&format!(", lambda = {:.6} at first sample{}", sol.values[0], if sol.constant { " (constant)" } else { "" }));
            }
            if !sol.note.is_empty() {
                detail.push_str(&format!("; {}", sol.note));
            }
            Ok(SolitonFit { holds, lambda: holds.then(|| sol.lambda.clone()), residual: sol.residual.clone(), solution: Some(sol), detail })
        }
    }
}
