use super::{SolitonError, SolitonSpec};
use crate::check::{Batch, CheckConfig};
use crate::expr::ScalarExpr;
use crate::geometry::{differential, gradient, TensorField};
use crate::paracontact::ParacontactInstance;
use crate::report::{Row, Status};

/// Named scalar and 1-form consequences of the soliton equation.
pub const RELATIONS: [&str; 7] = ["E3.4", "E7.4", "E4.15", "E4.9", "Eb.5", "Eb.7", "Eb.9"];

/// Checks one named relation on the instance; λ must be set on `spec`.
pub fn check_relation(name: &str, inst: &ParacontactInstance, spec: &SolitonSpec, cfg: &CheckConfig) -> Result<Row, SolitonError> {
    let anchor = RELATIONS.iter().copied().find(|r| *r == name).ok_or_else(|| SolitonError::UnknownRelation(name.to_string()))?;
    spec.validate(inst.dim())?;
    let id = format!("relation.{name}");
    let na = |why: &str| Row::new(id.clone(), Status::NotApplicable, anchor, relation_text(name)).with_detail(why);
    let Some(lambda) = spec.lambda.as_ref() else {
        return Ok(na("lambda unavailable"));
    };
    let coords = inst.coords();
    let dim = inst.dim();
    let b = inst.curvature();
    let r = &b.scalar;
    let (alpha, beta, h) = (&spec.alpha, &spec.beta, &spec.h);
    let half = ScalarExpr::ratio(1, 2);
    let mut batch = Batch::new();
    match name {
        "E3.4" | "E7.4" => {
            let Some(n) = inst.n() else {
                return Ok(na("requires dimension 2n+1"));
            };
            let two_n = ScalarExpr::int(2 * n as i64);
            let (lhs, rhs) = if name == "E3.4" {
                (&half * beta * r, lambda - &two_n * alpha)
            } else {
                (beta * r, ScalarExpr::int(2) * lambda - ScalarExpr::int(2) * &two_n * alpha)
            };
            batch.push_scalar(id.clone(), anchor, relation_text(name), &lhs, &rhs, dim);
        }
        "E4.15" => {
            let Some(f) = spec.f() else {
                return Ok(na("requires a gradient potential"));
            };
            let df = gradient(f, &inst.metric, coords);
            let dl = gradient(lambda, &inst.metric, coords);
            batch.push(id.clone(), anchor, relation_text(name), &TensorField::vector(&df.scale(h)), &TensorField::vector(&dl.scale(&-ScalarExpr::one())));
        }
        "E4.9" | "Eb.5" => {
            let Some(f) = spec.f() else {
                return Ok(na("requires a gradient potential"));
            };
            let df = gradient(f, &inst.metric, coords);
            let lhs = TensorField::one_form(
                (0..dim).map(|i| h * ScalarExpr::sum((0..dim).map(|j| b.ricci.get(&[i, j]) * df.component(j)))).collect(),
            );
            let rhs = differential(r, coords).scale(&(&half * alpha - beta)).add(&differential(lambda, coords).scale(&ScalarExpr::int(2)));
            batch.push(id.clone(), anchor, relation_text(name), &lhs, &rhs);
        }
        "Eb.7" => {
            let Some(s) = inst.structure() else {
                return Ok(na("instance has no structure block"));
            };
            batch.push_scalar(id.clone(), anchor, relation_text(name), &s.zeta.apply(lambda, coords), &ScalarExpr::zero(), dim);
        }
        "Eb.9" => {
            let lhs = differential(lambda, coords);
            let rhs = differential(r, coords).scale(&(&half * beta));
            batch.push(id.clone(), anchor, relation_text(name), &lhs, &rhs);
        }
        _ => unreachable!(),
    }
    Ok(batch.rows(&inst.chart, cfg).remove(0))
}

fn relation_text(name: &str) -> &'static str {
    match name {
        "E3.4" => "beta r / 2 = lambda - 2n alpha",
        "E7.4" => "beta r = 2 lambda - 4n alpha",
        "E4.15" => "h Df = -D lambda",
        "E4.9" | "Eb.5" => "h S(Z, Df) = (alpha/2 - beta) Z r + 2 Z lambda",
        "Eb.7" => "zeta lambda = 0",
        "Eb.9" => "Z lambda = (beta / 2) Z r",
        _ => "",
    }
}
