use super::algebra::{delta, eta_zeta};
use super::axioms::{fundamental_two_form, nijenhuis_normality, verify_almost_paracontact};
use super::{ParacontactInstance, StructureKind};
use crate::check::{Batch, CheckConfig};
use crate::geometry::numeric::{Probe, Residual};
use crate::geometry::{exterior_derivative, wedge, DerivativeConvention, Slot, TensorField, WedgeConvention};
use crate::report::{Row, Status};

/// A class flag decided by the residual of its defining identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Flag {
    pub holds: bool,
    pub residual: f64,
    pub worst_point: Vec<f64>,
}

impl Flag {
    fn from_residual(r: &Residual, tol: f64) -> Flag {
        Flag { holds: r.below(tol), residual: r.max_rel, worst_point: r.worst_point.clone() }
    }

    fn unknown() -> Flag {
        Flag { holds: false, residual: f64::NAN, worst_point: Vec::new() }
    }

    fn gated(self, gate: bool) -> Flag {
        Flag { holds: self.holds && gate, ..self }
    }
}

/// Pointwise fit of `dΦ = 2γ η∧Φ` together with `dη = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaFit {
    pub holds: bool,
    /// γ at the first sample where `η∧Φ` is nonzero.
    pub value: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub constant: bool,
    /// Residual of `dΦ − 2γ η∧Φ` using the pointwise γ.
    pub residual: f64,
    pub d_eta_residual: f64,
}

#[derive(Debug, Clone)]
pub struct StructureClass {
    pub almost_paracontact: Flag,
    /// `dη = Φ` under the configured exterior-derivative convention.
    pub paracontact_metric: Flag,
    pub normal: Flag,
    pub gamma: GammaFit,
    pub para_kenmotsu: Flag,
    pub para_sasakian: Flag,
    pub para_cosymplectic: Flag,
    /// Informational rows describing every flag.
    pub rows: Vec<Row>,
}

impl StructureClass {
    pub fn flag(&self, kind: StructureKind) -> &Flag {
        match kind {
            StructureKind::Kenmotsu => &self.para_kenmotsu,
            StructureKind::Sasakian => &self.para_sasakian,
            StructureKind::Cosymplectic => &self.para_cosymplectic,
        }
    }

    pub fn has(&self, kind: StructureKind) -> bool {
        self.flag(kind).holds
    }

    /// Detected classes, comma separated, or `none`.
    pub fn label(&self) -> String {
        let found: Vec<&str> = StructureKind::ALL.into_iter().filter(|k| self.has(*k)).map(|k| k.label()).collect();
        if found.is_empty() {
            "none".into()
        } else {
            found.join(", ")
        }
    }
}

/// The expected `∇ζ` of each class as a (1,1) tensor.
fn expected_nabla_zeta(inst: &ParacontactInstance, kind: StructureKind) -> Option<TensorField> {
    let s = inst.structure()?;
    let n = inst.dim();
    Some(match kind {
        StructureKind::Kenmotsu => delta(n).sub(&eta_zeta(&s.eta, &s.zeta)),
        StructureKind::Sasakian => s.phi.scale(&crate::expr::ScalarExpr::int(-1)),
        StructureKind::Cosymplectic => TensorField::zeros(vec![Slot::Up, Slot::Down], n),
    })
}

fn defining_identity(kind: StructureKind) -> &'static str {
    match kind {
        StructureKind::Kenmotsu => "nabla_X zeta = X - eta(X) zeta",
        StructureKind::Sasakian => "nabla_X zeta = -phi X",
        StructureKind::Cosymplectic => "nabla_X zeta = 0",
    }
}

/// Residual of the class's `∇ζ` identity along each frame direction,
/// measured on frame components. Empty without a frame or structure.
pub fn zeta_derivative_by_direction(inst: &ParacontactInstance, kind: StructureKind, cfg: &CheckConfig) -> Vec<Row> {
    let (Some(frame), Some(nz), Some(expected)) = (&inst.frame, inst.nabla_zeta(), expected_nabla_zeta(inst, kind)) else {
        return Vec::new();
    };
    let mut batch = Batch::new();
    for (a, name) in frame.names().iter().enumerate() {
        let e = frame.vector(a);
        let got = crate::geometry::apply_11(nz, e);
        let want = crate::geometry::apply_11(&expected, e);
        let lhs = TensorField::vector(&crate::geometry::VectorField::new(frame.components_of(&got)));
        let rhs = TensorField::vector(&crate::geometry::VectorField::new(frame.components_of(&want)));
        batch.push(
            format!("{}.nabla_zeta.{name}", kind.name()),
            kind.zeta_anchor(),
            format!("{} along {name} (frame components)", defining_identity(kind)),
            &lhs,
            &rhs,
        );
    }
    batch.rows(&inst.chart, cfg)
}

fn info_row(id: &str, anchor: &str, desc: String, flag: &Flag) -> Row {
    let mut row = Row::new(id, Status::Info, anchor, desc).with_detail(if flag.holds { "holds" } else { "does not hold" });
    row.max_residual = flag.residual;
    row.worst_point = flag.worst_point.clone();
    row
}

/// Decides every class flag; all rows are informational.
pub fn classify_structure(inst: &ParacontactInstance, cfg: &CheckConfig) -> StructureClass {
    let tol = cfg.tol();
    let Some(s) = inst.structure() else {
        let rows = vec![Row::new("classify", Status::NotApplicable, "E2.3", "structure classification")
            .with_detail("instance has no structure block")];
        let gamma = GammaFit { holds: false, value: None, min: f64::NAN, max: f64::NAN, constant: false, residual: f64::NAN, d_eta_residual: f64::NAN };
        return StructureClass {
            almost_paracontact: Flag::unknown(),
            paracontact_metric: Flag::unknown(),
            normal: Flag::unknown(),
            gamma,
            para_kenmotsu: Flag::unknown(),
            para_sasakian: Flag::unknown(),
            para_cosymplectic: Flag::unknown(),
            rows,
        };
    };
    let axioms = verify_almost_paracontact(inst, cfg);
    let mut ax_res = Residual::new();
    for r in &axioms.rows {
        if r.max_residual.is_finite() {
            ax_res.record_raw(r.max_residual, r.max_residual, &r.worst_point);
        }
    }
    let axioms_pass = axioms.rows.iter().all(|r| r.status == Status::Pass);
    let almost_paracontact = Flag { holds: axioms_pass, residual: ax_res.max_rel, worst_point: ax_res.worst_point.clone() };

    let (_, normal_report) = nijenhuis_normality(inst, cfg);
    let normal = normal_report
        .row("normality.n1")
        .map(|r| Flag { holds: r.status == Status::Pass, residual: r.max_residual, worst_point: r.worst_point.clone() })
        .unwrap_or_else(Flag::unknown);

    let coords = inst.coords();
    let big_phi = fundamental_two_form(s, &inst.metric);
    let d_eta_cfg = exterior_derivative(&s.eta, coords, cfg.deta).expect("1-form");
    let d_eta_plain = exterior_derivative(&s.eta, coords, DerivativeConvention::Plain).expect("1-form");
    let zero2 = TensorField::zeros(vec![Slot::Down, Slot::Down], inst.dim());

    let mut batch = Batch::new();
    batch.push("paracontact_metric", "D.paracontact", "", &d_eta_cfg, &big_phi);
    batch.push("d_eta", "E2.3", "", &d_eta_plain, &zero2);
    let nz = inst.nabla_zeta().expect("structure present");
    for kind in StructureKind::ALL {
        batch.push(kind.name(), kind.zeta_anchor(), "", nz, &expected_nabla_zeta(inst, kind).expect("structure present"));
    }
    let gamma_probe = gamma_parts(inst, &big_phi);
    let results = batch.run(&inst.chart, &cfg.eval);

    let mut rows = Vec::new();
    let (paracontact_metric, d_eta_res, flags) = match &results {
        Ok(out) => {
            let f = |i: usize| Flag::from_residual(&out.rows[i].3, tol);
            (f(0), out.rows[1].3.max_rel, [f(2), f(3), f(4)])
        }
        Err(e) => {
            rows.push(Row::new("classify.error", Status::NotApplicable, "E2.3", "structure classification").with_detail(e.to_string()));
            (Flag::unknown(), f64::NAN, [Flag::unknown(), Flag::unknown(), Flag::unknown()])
        }
    };
    let gamma = fit_gamma(inst, gamma_probe, d_eta_res, cfg);
    let [k, sa, c] = flags;
    let gate = almost_paracontact.holds;
    let class = StructureClass {
        almost_paracontact,
        paracontact_metric,
        normal,
        gamma,
        para_kenmotsu: k.gated(gate),
        para_sasakian: sa.gated(gate),
        para_cosymplectic: c.gated(gate),
        rows: Vec::new(),
    };

    rows.push(info_row("classify.almost_paracontact", "E2.1", "almost paracontact metric axioms".into(), &class.almost_paracontact));
    rows.push(info_row(
        "classify.paracontact_metric",
        "D.paracontact",
        format!("d eta = Phi ({} convention)", cfg.deta.name()),
        &class.paracontact_metric,
    ));
    rows.push(info_row("classify.normal", "D.normal", "normality tensor N^(1) vanishes".into(), &class.normal));
    let g = &class.gamma;
    let mut grow = Row::new("classify.gamma", Status::Info, "E2.3", "d eta = 0 and d Phi = 2 gamma eta ^ Phi").with_detail(match g.value {
        Some(v) => format!(
            "gamma = {:.12} ({}; range [{:.6}, {:.6}]); d eta residual {:.3e}; {}",
            v + 0.0,
            if g.constant { "constant" } else { "not constant" },
            g.min + 0.0,
            g.max + 0.0,
            g.d_eta_residual,
            if g.holds { "almost gamma-paracosymplectic" } else { "not almost gamma-paracosymplectic" }
        ),
        None => "eta ^ Phi vanishes at every sample; gamma undetermined".into(),
    });
    grow.max_residual = g.residual;
    rows.push(grow);
    for kind in StructureKind::ALL {
        let mut r = info_row(&format!("classify.{}", kind.name()), kind.zeta_anchor(), format!("{}: {}", kind.label(), defining_identity(kind)), class.flag(kind));
        if !gate {
            r.detail.push_str(" (axioms fail, flag cleared)");
        }
        rows.push(r);
    }
    for kind in [StructureKind::Kenmotsu, StructureKind::Cosymplectic] {
        if class.has(kind) {
            let want = if kind == StructureKind::Kenmotsu { 1.0 } else { 0.0 };
            let ok = class.gamma.holds && class.gamma.constant && class.gamma.value.is_some_and(|v| (v - want).abs() < 1e-6);
            rows.push(
                Row::new(format!("classify.{}.gamma", kind.name()), Status::Info, "E2.3", format!("{} implies gamma = {want}", kind.label()))
                    .with_detail(if ok { "consistent" } else { "inconsistent with the gamma fit" }),
            );
        }
    }
    rows.push(Row::new("classify.class", Status::Info, "E2.3", "detected class").with_detail(class.label()));
    if let Some(declared) = inst.declared_class {
        let fl = class.flag(declared);
        let detail = if fl.holds {
            format!("declared {} confirmed", declared.label())
        } else {
            format!(
                "declared {} but {} fails (max residual {:.3e}); known discrepancy",
                declared.label(),
                defining_identity(declared),
                fl.residual
            )
        };
        rows.push(Row::new("classify.declared", Status::Info, declared.zeta_anchor(), "declared class against detection").with_detail(detail));
        if !fl.holds {
            for r in zeta_derivative_by_direction(inst, declared, cfg) {
                let status = r.status;
                rows.push(Row { id: format!("classify.declared.{}", r.id), status: Status::Info, detail: format!("check {}", status.name()), ..r });
            }
        }
    }
    StructureClass { rows, ..class }
}

struct GammaProbe {
    probe: Probe,
    d_phi: crate::geometry::numeric::Handle,
    eta_phi: crate::geometry::numeric::Handle,
}

/// `dΦ` (plain) and `η∧Φ` (determinant); with this pairing a
/// para-Kenmotsu structure has γ = 1.
fn gamma_parts(inst: &ParacontactInstance, big_phi: &TensorField) -> Option<GammaProbe> {
    let s = inst.structure()?;
    if inst.dim() < 3 {
        return None;
    }
    let d_phi = exterior_derivative(big_phi, inst.coords(), DerivativeConvention::Plain).ok()?;
    let eta_phi = wedge(&s.eta, big_phi, WedgeConvention::Determinant).ok()?;
    let mut probe = Probe::new();
    let d_phi = probe.add_tensor(&d_phi);
    let eta_phi = probe.add_tensor(&eta_phi);
    Some(GammaProbe { probe, d_phi, eta_phi })
}

fn fit_gamma(inst: &ParacontactInstance, parts: Option<GammaProbe>, d_eta_residual: f64, cfg: &CheckConfig) -> GammaFit {
    let mut fit = GammaFit {
        holds: false,
        value: None,
        min: f64::NAN,
        max: f64::NAN,
        constant: false,
        residual: f64::NAN,
        d_eta_residual,
    };
    let Some(parts) = parts else { return fit };
    let Ok(samples) = parts.probe.run_on(&inst.chart, &cfg.eval) else { return fit };
    let mut res = Residual::new();
    let mut gammas = Vec::new();
    for p in 0..samples.len() {
        let (dp, w) = (samples.get(p, parts.d_phi), samples.get(p, parts.eta_phi));
        let (c, wc) = w.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(c, v)| (c, *v)).unwrap();
        if wc.abs() < 1e-6 {
            continue;
        }
        let gamma = dp[c] / (2.0 * wc);
        gammas.push(gamma);
        for (a, b) in dp.iter().zip(w) {
            res.record(*a, 2.0 * gamma * b, samples.point(p));
        }
    }
    if gammas.is_empty() {
        return fit;
    }
    let (min, max) = gammas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| (lo.min(*g), hi.max(*g)));
    fit.value = Some(gammas[0]);
    fit.min = min;
    fit.max = max;
    fit.constant = (max - min) / 1f64.max(max.abs()).max(min.abs()) < cfg.tol();
    fit.residual = res.max_rel;
    fit.holds = d_eta_residual < cfg.tol() && res.below(cfg.tol());
    fit
}
