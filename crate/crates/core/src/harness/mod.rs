//! Theorem checks, built-in instances and the full verification run.

mod theorems;

use rayon::prelude::*;
use thiserror::Error;

use crate::check::{Batch, CheckConfig};
use crate::expr::{Bindings, ScalarExpr};
use crate::geometry::{covariant_derivative_vector, lie_bracket, Slot, TensorField};
use crate::instance::{load_instance_str, Claim, ClaimKind, InstanceFile, LoadError};
use crate::paracontact::{
    classify_structure, identity_suite_with, nijenhuis_normality, verify_almost_paracontact, ParacontactInstance,
    StructureClass, StructureKind,
};
use crate::report::{CheckReport, Row, Status};
use crate::soliton::{
    check_relation, einstein_classify, fit_soliton, lambda_sign, parameter_value, sectional_constancy, soliton_taxonomy,
    SolitonSpec, RELATIONS,
};

pub use theorems::{run_theorem_with, statement, Condition, TheoremCheck, Verdict, CONCLUSION_TOL_FACTOR, THEOREMS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("unknown built-in instance `{0}`")]
    UnknownInstance(String),
    #[error(transparent)]
    Load(#[from] LoadError),
}

pub const BUILTINS: [&str; 6] =
    ["example1_printed", "example1_corrected", "example2_printed", "para_sasakian_model", "para_cosymplectic_flat", "hyperbolic3"];

/// Source text of a built-in instance file.
pub fn builtin_source(id: &str) -> Option<&'static str> {
    Some(match id {
        "example1_printed" => include_str!("../../../../fixtures/example1_printed.pct"),
        "example1_corrected" => include_str!("../../../../fixtures/example1_corrected.pct"),
        "example2_printed" => include_str!("../../../../fixtures/example2_printed.pct"),
        "para_sasakian_model" => include_str!("../../../../fixtures/para_sasakian_model.pct"),
        "para_cosymplectic_flat" => include_str!("../../../../fixtures/para_cosymplectic_flat.pct"),
        "hyperbolic3" => include_str!("../../../../fixtures/hyperbolic3.pct"),
        _ => return None,
    })
}

pub fn builtin_instance(id: &str, overrides: &Bindings) -> Result<InstanceFile, HarnessError> {
    let src = builtin_source(id).ok_or_else(|| HarnessError::UnknownInstance(id.to_string()))?;
    Ok(load_instance_str(src, overrides)?)
}

/// Runs one theorem check, classifying the instance first.
pub fn run_theorem(id: &str, inst: &ParacontactInstance, spec: Option<&SolitonSpec>, cfg: &CheckConfig) -> Result<TheoremCheck, HarnessError> {
    let class = classify_structure(inst, cfg);
    run_theorem_with(id, inst, spec, &class, cfg)
}

fn agreement(r: &Row) -> String {
    if r.status == Status::Pass {
        "printed value agrees with the engine".into()
    } else {
        format!("printed value differs from the engine (residual {:.3e})", r.max_residual)
    }
}

/// Re-checks printed values; every row is informational.
pub fn claim_rows(inst: &ParacontactInstance, claims: &[Claim], cfg: &CheckConfig) -> Vec<Row> {
    if claims.is_empty() {
        return Vec::new();
    }
    let Some(frame) = &inst.frame else {
        return claims.iter().map(|c| Row::new(format!("claim.{}", c.id), Status::NotApplicable, c.anchor, c.description.clone()).with_detail("no frame")).collect();
    };
    let n = inst.dim();
    let b = inst.curvature();
    let e = |a: usize| frame.vector(a);
    let mut batch = Batch::new();
    for c in claims {
        let (lhs, rhs, desc) = match c.kind {
            ClaimKind::Nabla(a, bb) => {
                let v = covariant_derivative_vector(&b.connection, e(a), e(bb));
                (frame.components_of(&v), c.value.clone(), format!("nabla_{} {}", frame.names()[a], frame.names()[bb]))
            }
            ClaimKind::Bracket(a, bb) => {
                let v = lie_bracket(e(a), e(bb), inst.coords());
                (frame.components_of(&v), c.value.clone(), format!("[{}, {}]", frame.names()[a], frame.names()[bb]))
            }
            ClaimKind::Riemann(a, bb, cc) => {
                let v = b.apply_riemann(e(a), e(bb), e(cc));
                (frame.components_of(&v), c.value.clone(), format!("R({}, {}){}", frame.names()[a], frame.names()[bb], frame.names()[cc]))
            }
            ClaimKind::Ricci(a, bb) => (vec![b.ricci.evaluate_on(&[e(a), e(bb)])], c.value.clone(), format!("S({}, {})", frame.names()[a], frame.names()[bb])),
            ClaimKind::Scalar => (vec![b.scalar.clone()], c.value.clone(), "r".to_string()),
        };
        let slots = if lhs.len() == 1 { vec![] } else { vec![Slot::Up] };
        let to_t = |v: Vec<ScalarExpr>| if v.len() == 1 { TensorField::scalar(v[0].clone(), n) } else { TensorField::from_components(slots.clone(), n, v) };
        let desc = if c.description.is_empty() { format!("printed {desc}") } else { c.description.clone() };
        batch.push(format!("claim.{}", c.id), c.anchor, desc, &to_t(lhs), &to_t(rhs));
    }
    batch
        .rows(&inst.chart, cfg)
        .into_iter()
        .map(|r| {
            if r.status == Status::NotApplicable {
                return r;
            }
            let d = agreement(&r);
            r.with_status(Status::Info).with_detail(d)
        })
        .collect()
}

/// Curvature summary rows: scalar curvature, Einstein type, sectional constancy.
pub fn curvature_rows(inst: &ParacontactInstance, cfg: &CheckConfig) -> Vec<Row> {
    let b = inst.curvature();
    let n = inst.dim();
    let mut rows = Vec::new();
    let mut batch = Batch::new();
    let r = &b.riemann;
    batch.push("curvature.antisymmetry", "ENGINE", "R(X,Y) = -R(Y,X)", r, &r.permute(&[0, 2, 1, 3]).scale(&ScalarExpr::int(-1)));
    let bianchi = r.add(&r.permute(&[0, 2, 3, 1])).add(&r.permute(&[0, 3, 1, 2]));
    batch.push("curvature.bianchi", "ENGINE", "first Bianchi identity", &bianchi, &TensorField::zeros(r.slots().to_vec(), n));
    batch.push("curvature.ricci_symmetric", "ENGINE", "S is symmetric", &b.ricci, &b.ricci.permute(&[1, 0]));
    rows.extend(batch.rows(&inst.chart, cfg));

    let mut probe = crate::geometry::numeric::Probe::new();
    let hr = probe.add_one(&b.scalar);
    match probe.run_on(&inst.chart, &cfg.eval) {
        Ok(s) => {
            let v: Vec<f64> = (0..s.len()).map(|p| s.scalar(p, hr)).collect();
            let constant = crate::soliton::is_constant(&v, cfg.tol());
            rows.push(Row::new("curvature.scalar", Status::Info, "ENGINE", "scalar curvature r").with_detail(format!(
                "r = {:.9} at first sample, {}",
                v[0],
                if constant { "constant" } else { "not constant" }
            )));
        }
        Err(e) => rows.push(Row::new("curvature.scalar", Status::NotApplicable, "ENGINE", "scalar curvature r").with_detail(e.to_string())),
    }
    let eta = inst.structure().map(|s| &s.eta);
    match einstein_classify(&b.ricci, &inst.metric, eta, &inst.chart, cfg) {
        Ok(v) => {
            let detail = match (&v.b, v.kind) {
                (_, crate::soliton::EinsteinKind::Neither) => format!("neither (fit residual {:.3e})", v.residual.max_rel),
                (Some(_), k) => format!("{}: a = {:.9}, b = {:.9} at first sample", k.name(), v.a_value, v.b_value),
                (None, k) => format!("{}: a = {:.9}", k.name(), v.a_value),
            };
            rows.push(Row::new("curvature.einstein", Status::Info, "ENGINE", "S = a g + b eta (x) eta").with_residual(&v.residual).with_detail(detail));
        }
        Err(e) => rows.push(Row::new("curvature.einstein", Status::NotApplicable, "ENGINE", "S = a g + b eta (x) eta").with_detail(e.to_string())),
    }
    match sectional_constancy(b, &inst.metric, &inst.chart, cfg) {
        Ok(v) => rows.push(
            Row::new("curvature.sectional", Status::Info, "ENGINE", "R(X,Y)Z = c[g(Y,Z)X - g(X,Z)Y]")
                .with_residual(&v.residual)
                .with_detail(if v.holds { format!("constant sectional curvature c = {:.9}", v.c_value) } else { "not of constant sectional curvature".into() }),
        ),
        Err(e) => rows.push(Row::new("curvature.sectional", Status::NotApplicable, "ENGINE", "sectional constancy").with_detail(e.to_string())),
    }
    rows
}

/// Residual, λ, taxonomy and relation rows for one soliton spec.
pub fn soliton_rows(inst: &ParacontactInstance, spec: &SolitonSpec, cfg: &CheckConfig) -> Vec<Row> {
    let p = format!("soliton.{}", spec.name);
    let anchor = match spec.kind {
        crate::soliton::SolitonKind::Arys => "E1.3",
        crate::soliton::SolitonKind::Agrys => "E1.4",
    };
    let mut rows = Vec::new();
    match (parameter_value(&spec.alpha, &inst.chart, cfg), parameter_value(&spec.beta, &inst.chart, cfg)) {
        (Ok(a), Ok(b)) => rows.push(
            Row::new(format!("{p}.taxonomy"), Status::Info, "D.taxonomy", "alpha, beta taxonomy").with_detail(format!("alpha = {a}, beta = {b}: {}", soliton_taxonomy(a, b).describe())),
        ),
        (Err(e), _) | (_, Err(e)) => {
            rows.push(Row::new(format!("{p}.taxonomy"), Status::NotApplicable, "D.taxonomy", "alpha, beta taxonomy").with_detail(e.to_string()));
            return rows;
        }
    }
    let fit = match fit_soliton(inst, spec, cfg) {
        Ok(f) => f,
        Err(e) => {
            rows.push(Row::new(format!("{p}.residual"), Status::NotApplicable, anchor, format!("{} equation", spec.kind.name())).with_detail(e.to_string()));
            return rows;
        }
    };
    let desc = format!("{} equation{}", spec.kind.name(), if spec.lambda.is_some() { "" } else { " with solved lambda" });
    let mut row = Row::new(format!("{p}.residual"), if fit.holds { Status::Pass } else { Status::Fail }, anchor, desc).with_residual(&fit.residual).with_detail(fit.detail.clone());
    if spec.lambda.is_none() {
        // an unsolvable λ is a finding about the data, not an engine failure
        row.status = Status::Info;
    } else if !fit.holds && spec.claimed {
        row.status = Status::Info;
        row.detail = format!("known discrepancy: printed soliton data does not satisfy the equation; {}", fit.detail);
    }
    rows.push(row);
    let Some(resolved) = fit.resolved(spec) else { return rows };
    let lambda = resolved.lambda.clone().expect("resolved");
    if let Ok(sign) = lambda_sign(&lambda, &inst.chart, cfg) {
        rows.push(Row::new(format!("{p}.lambda_sign"), Status::Info, "D.taxonomy", "expanding / steady / shrinking").with_detail(sign.name()));
    }
    if fit.holds {
        for rel in RELATIONS {
            if let Ok(r) = check_relation(rel, inst, &resolved, cfg) {
                if r.status == Status::NotApplicable {
                    continue;
                }
                let holds = r.status == Status::Pass;
                rows.push(Row { id: format!("{p}.{}", r.id), ..r }.with_status(Status::Info).with_detail(if holds { "holds" } else { "does not hold on this instance" }));
            }
        }
    }
    rows
}

/// Structure, classification, identity suites, curvature, claims, soliton
/// rows and every theorem check.
pub fn run_all(inst: &ParacontactInstance, solitons: &[&SolitonSpec], claims: &[Claim], cfg: &CheckConfig) -> CheckReport {
    let mut report = cfg.report(Vec::new());
    let class = inst.structure().map(|_| classify_structure(inst, cfg));
    if let Some(class) = &class {
        let mut rows = verify_almost_paracontact(inst, cfg).rows;
        rows.extend(nijenhuis_normality(inst, cfg).1.rows);
        if let Some(d) = inst.declared_class {
            for r in rows.iter_mut().filter(|r| r.status == Status::Fail) {
                r.status = Status::Info;
                r.detail = format!("known discrepancy: declared {} requires this; check fail", d.label());
            }
        }
        report.extend(rows);
        report.extend(class.rows.clone());
        let mut kinds: Vec<StructureKind> = StructureKind::ALL.into_iter().filter(|k| class.has(*k)).collect();
        if let Some(d) = inst.declared_class {
            if !kinds.contains(&d) {
                kinds.push(d);
            }
        }
        for k in kinds {
            report.extend(identity_suite_with(inst, k, class, cfg).rows);
        }
    } else {
        report.push(Row::new("structure", Status::NotApplicable, "E2.1", "almost paracontact axioms").with_detail("instance has no structure block"));
    }
    report.extend(curvature_rows(inst, cfg));
    report.extend(claim_rows(inst, claims, cfg));
    if solitons.is_empty() {
        report.push(Row::new("soliton", Status::NotApplicable, "E1.3", "soliton equation").with_detail("no soliton spec"));
    }
    for spec in solitons {
        report.extend(soliton_rows(inst, spec, cfg));
    }
    if let Some(class) = &class {
        let mut jobs: Vec<(&str, Option<&SolitonSpec>, Option<&str>)> = Vec::new();
        for id in THEOREMS {
            if id.starts_with('L') || solitons.is_empty() {
                jobs.push((id, None, None));
            } else {
                // the first spec keeps the plain row id, later ones are tagged
                for (i, s) in solitons.iter().enumerate() {
                    jobs.push((id, Some(*s), (i > 0).then_some(s.name.as_str())));
                }
            }
        }
        let results: Vec<Vec<Row>> = jobs
            .par_iter()
            .map(|(id, spec, tag)| run_theorem_with(id, inst, *spec, class, cfg).expect("registered theorem").rows(*tag))
            .collect();
        for r in results {
            report.extend(r);
        }
    }
    report
}

/// [`run_all`] on a loaded file with every soliton spec it declares.
pub fn run_file(file: &InstanceFile, cfg: &CheckConfig) -> CheckReport {
    let specs: Vec<&SolitonSpec> = file.solitons.values().collect();
    run_all(&file.instance, &specs, &file.claims, cfg)
}

/// Whether the class flags agree with the declared class.
pub fn declared_matches(class: &StructureClass, inst: &ParacontactInstance) -> Option<bool> {
    inst.declared_class.map(|k| class.has(k))
}
