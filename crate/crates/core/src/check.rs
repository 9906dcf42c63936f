//! Check configuration and batched evaluation of tensor identities.

use crate::expr::{Bindings, SampleOptions, ScalarExpr};
use crate::geometry::numeric::{compare_sampled, Handle, Probe, Residual, Samples};
use crate::geometry::{Chart, DerivativeConvention, EvalContext, GeometryError, Slot, TensorField};
use crate::report::{CheckReport, Meta, Row, Status};

/// Sampling context plus the exterior-derivative convention.
#[derive(Debug, Clone, Default)]
pub struct CheckConfig {
    pub eval: EvalContext,
    pub deta: DerivativeConvention,
}

impl CheckConfig {
    pub fn new(opts: SampleOptions, bindings: Bindings, deta: DerivativeConvention) -> CheckConfig {
        CheckConfig { eval: EvalContext::new(opts, bindings), deta }
    }

    pub fn tol(&self) -> f64 {
        self.eval.opts.tol
    }

    pub fn with_bindings(&self, bindings: Bindings) -> CheckConfig {
        CheckConfig { eval: EvalContext::new(self.eval.opts, bindings), deta: self.deta }
    }

    pub fn meta(&self) -> Meta {
        Meta::new(self.eval.opts.seed, self.eval.opts.points, self.eval.opts.tol, self.eval.bindings.clone())
    }

    pub fn report(&self, rows: Vec<Row>) -> CheckReport {
        let mut r = CheckReport::new(self.meta());
        r.extend(rows);
        r
    }
}

struct Item {
    id: String,
    anchor: &'static str,
    description: String,
    lhs: Handle,
    rhs: Handle,
    slots: Vec<Slot>,
}

/// Identities `lhs = rhs` queued for one shared evaluation.
#[derive(Default)]
pub struct Batch {
    probe: Probe,
    items: Vec<Item>,
}

/// Residuals of a batch, in insertion order.
pub struct BatchResult {
    pub rows: Vec<(String, &'static str, String, Residual)>,
    pub samples: Samples,
}

impl Batch {
    pub fn new() -> Batch {
        Batch::default()
    }

    pub fn push(&mut self, id: impl Into<String>, anchor: &'static str, description: impl Into<String>, lhs: &TensorField, rhs: &TensorField) {
        assert_eq!(lhs.slots(), rhs.slots(), "identity sides must share a signature");
        let l = self.probe.add_tensor(lhs);
        let r = self.probe.add_tensor(rhs);
        self.items.push(Item {
            id: id.into(),
            anchor,
            description: description.into(),
            lhs: l,
            rhs: r,
            slots: lhs.slots().to_vec(),
        });
    }

    pub fn push_scalar(&mut self, id: impl Into<String>, anchor: &'static str, description: impl Into<String>, lhs: &ScalarExpr, rhs: &ScalarExpr, dim: usize) {
        self.push(id, anchor, description, &TensorField::scalar(lhs.clone(), dim), &TensorField::scalar(rhs.clone(), dim));
    }

    /// Registers extra expressions to be evaluated alongside the identities.
    pub fn probe_mut(&mut self) -> &mut Probe {
        &mut self.probe
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn run(self, chart: &Chart, ctx: &EvalContext) -> Result<BatchResult, GeometryError> {
        let samples = self.probe.run_on(chart, ctx)?;
        let rows = self
            .items
            .into_iter()
            .map(|it| {
                let res = compare_sampled(&samples, it.lhs, it.rhs, &it.slots, chart.dim(), ctx.opts.seed);
                (it.id, it.anchor, it.description, res)
            })
            .collect();
        Ok(BatchResult { rows, samples })
    }

    /// Runs and converts every identity into a pass/fail row; an evaluation
    /// error turns every row into `not_applicable`.
    pub fn rows(self, chart: &Chart, cfg: &CheckConfig) -> Vec<Row> {
        let names: Vec<(String, &'static str, String)> =
            self.items.iter().map(|i| (i.id.clone(), i.anchor, i.description.clone())).collect();
        match self.run(chart, &cfg.eval) {
            Ok(out) => out
                .rows
                .into_iter()
                .map(|(id, anchor, desc, res)| Row::from_residual(id, anchor, desc, &res, cfg.tol()))
                .collect(),
            Err(e) => names
                .into_iter()
                .map(|(id, anchor, desc)| Row::new(id, Status::NotApplicable, anchor, desc).with_detail(e.to_string()))
                .collect(),
        }
    }
}
