use thiserror::Error;

use crate::expr::{Bindings, Domain, DomainError, EvalError, SampleOptions};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("chart must have between 1 and {MAX_DIM} coordinates, got {0}")]
    BadDimension(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("singular metric: |det g| = {det:.3e} at {point:?}")]
    SingularMetric { det: f64, point: Vec<f64> },
    #[error("singular frame: |det| = {det:.3e} at {point:?}")]
    SingularFrame { det: f64, point: Vec<f64> },
    #[error("metric is not symmetric (residual {0:.3e})")]
    Asymmetric(f64),
    #[error("inverse metric check failed (residual {0:.3e})")]
    BadInverse(f64),
    #[error("expected {expected} components, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("exterior derivative of degree {0} is not supported")]
    UnsupportedDegree(usize),
    #[error("wedge product of degrees {0} and {1} exceeds the chart dimension")]
    DegreeOverflow(usize, usize),
    #[error("frame metric must be a symmetric constant matrix")]
    BadFrameMetric,
}

/// A coordinate chart: ordered coordinate names over a sampling domain.
#[derive(Debug, Clone)]
pub struct Chart {
    domain: Domain,
}

impl Chart {
    pub fn new(domain: Domain) -> Result<Chart, GeometryError> {
        if domain.dim() == 0 || domain.dim() > MAX_DIM {
            return Err(GeometryError::BadDimension(domain.dim()));
        }
        Ok(Chart { domain })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn coords(&self) -> &[String] {
        self.domain.coords()
    }

    pub fn coord_refs(&self) -> Vec<&str> {
        self.coords().iter().map(String::as_str).collect()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `n` for a chart of dimension `2n + 1`, if the dimension is odd.
    pub fn paracontact_n(&self) -> Option<usize> {
        (self.dim() % 2 == 1 && self.dim() >= 3).then(|| (self.dim() - 1) / 2)
    }

    pub fn sample(&self, opts: &SampleOptions) -> Result<Vec<Vec<f64>>, DomainError> {
        self.domain.sample(opts.points.max(1), opts.seed)
    }
}

/// Sampling options plus parameter bindings, shared by every check.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub opts: SampleOptions,
    pub bindings: Bindings,
}

impl EvalContext {
    pub fn new(opts: SampleOptions, bindings: Bindings) -> EvalContext {
        EvalContext { opts, bindings }
    }
}
