use nalgebra::DMatrix;

use super::chart::{Chart, EvalContext, GeometryError};
use super::numeric::{Probe, Residual};
use super::tensor::{matrix, Slot, TensorField, VectorField};
use crate::expr::{Rational, ScalarExpr};

/// Minimum |det| accepted at any sample point for metrics and frames.
pub const DET_MARGIN: f64 = 1e-6;
/// Tolerance for the `g⁻¹ g = I` validation.
pub const INVERSE_TOL: f64 = 1e-9;

/// Counts of positive and negative eigenvalues of the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.positive, self.negative)
    }
}

/// A nondegenerate symmetric (0,2) tensor with its exact inverse.
#[derive(Debug, Clone)]
pub struct MetricField {
    g: TensorField,
    inv: matrix::Matrix,
    det: ScalarExpr,
    signature: Signature,
}

impl MetricField {
    /// Validates and wraps a symmetric component matrix.
    pub fn new(chart: &Chart, comps: matrix::Matrix, ctx: &EvalContext) -> Result<MetricField, GeometryError> {
        let n = chart.dim();
        if comps.len() != n || comps.iter().any(|r| r.len() != n) {
            return Err(GeometryError::ShapeMismatch { expected: n * n, got: comps.iter().map(Vec::len).sum() });
        }
        let (inv, det) = matrix::inverse(&comps);
        let g = TensorField::from_matrix([Slot::Down, Slot::Down], &comps);
        let gt = g.permute(&[1, 0]);
        let id = matrix::identity(n);
        let prod = matrix::mul(&inv, &comps);

        let mut probe = Probe::new();
        let hg = probe.add_tensor(&g);
        let hgt = probe.add_tensor(&gt);
        let flat_prod: Vec<ScalarExpr> = prod.into_iter().flatten().collect();
        let hprod = probe.add(&flat_prod);
        let flat_id: Vec<ScalarExpr> = id.into_iter().flatten().collect();
        let hid = probe.add(&flat_id);
        let points = chart.sample(&ctx.opts)?;
        // Evaluate the determinant alone first so a singular metric is
        // reported as such rather than as a division error inside g⁻¹.
        let mut det_probe = Probe::new();
        let hd = det_probe.add_one(&det);
        let det_samples = det_probe.run(chart.coords(), &points, &ctx.bindings)?;
        for p in 0..det_samples.len() {
            let d = det_samples.scalar(p, hd);
            if !(d.abs() >= DET_MARGIN) {
                return Err(GeometryError::SingularMetric { det: d.abs(), point: det_samples.point(p).to_vec() });
            }
        }
        let s = probe.run(chart.coords(), &points, &ctx.bindings)?;
        let mut sym = Residual::new();
        let mut inv_res = Residual::new();
        let mut signature: Option<Signature> = None;
        for p in 0..s.len() {
            sym.record_slices(s.get(p, hg), s.get(p, hgt), s.point(p));
            inv_res.record_slices(s.get(p, hprod), s.get(p, hid), s.point(p));
            let m = DMatrix::from_row_slice(n, n, s.get(p, hg));
            let sig = signature_of(&m);
            if signature.is_none() {
                signature = Some(sig);
            }
        }
        if !sym.below(INVERSE_TOL) {
            return Err(GeometryError::Asymmetric(sym.max_rel));
        }
        if !inv_res.below(INVERSE_TOL) {
            return Err(GeometryError::BadInverse(inv_res.max_rel));
        }
        Ok(MetricField { g, inv, det, signature: signature.expect("at least one sample") })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn tensor(&self) -> &TensorField {
        &self.g
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        self.g.get(&[i, j])
    }

    pub fn inverse(&self) -> &matrix::Matrix {
        &self.inv
    }

    /// The inverse metric as a (2,0) tensor.
    pub fn inverse_tensor(&self) -> TensorField {
        TensorField::from_matrix([Slot::Up, Slot::Up], &self.inv)
    }

    pub fn det(&self) -> &ScalarExpr {
        &self.det
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// `g(X, Y)`.
    pub fn inner(&self, x: &VectorField, y: &VectorField) -> ScalarExpr {
        self.g.evaluate_on(&[x, y])
    }

    /// The 1-form `g(X, ·)`.
    pub fn lower(&self, x: &VectorField) -> TensorField {
        let n = self.dim();
        TensorField::one_form(
            (0..n).map(|j| ScalarExpr::sum((0..n).map(|i| x.component(i) * self.component(i, j)))).collect(),
        )
    }

    /// The vector field metrically dual to a 1-form.
    pub fn raise(&self, form: &TensorField) -> VectorField {
        let n = self.dim();
        VectorField::new(
            (0..n).map(|k| ScalarExpr::sum((0..n).map(|l| &self.inv[k][l] * form.get(&[l])))).collect(),
        )
    }
}

fn signature_of(m: &DMatrix<f64>) -> Signature {
    let eig = m.clone().symmetric_eigen();
    let positive = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
    Signature { positive, negative: m.nrows() - positive }
}

/// Named vector fields with a constant matrix of pairwise inner products.
#[derive(Debug, Clone)]
pub struct FrameSpec {
    pub names: Vec<String>,
    pub vectors: Vec<VectorField>,
    pub gram: Vec<Vec<Rational>>,
}

/// A validated frame with its coframe (the inverse of the frame matrix).
#[derive(Debug, Clone)]
pub struct Frame {
    spec: FrameSpec,
    coframe: matrix::Matrix,
}

impl Frame {
    pub fn new(spec: FrameSpec, chart: &Chart, ctx: &EvalContext) -> Result<Frame, GeometryError> {
        let n = chart.dim();
        if spec.vectors.len() != n || spec.names.len() != n || spec.vectors.iter().any(|v| v.dim() != n) {
            return Err(GeometryError::ShapeMismatch { expected: n, got: spec.vectors.len() });
        }
        if spec.gram.len() != n
            || spec.gram.iter().any(|r| r.len() != n)
            || (0..n).any(|a| (0..n).any(|b| spec.gram[a][b] != spec.gram[b][a]))
        {
            return Err(GeometryError::BadFrameMetric);
        }
        // frame matrix E[i][a] = i-th component of the a-th vector
        let e: matrix::Matrix =
            (0..n).map(|i| (0..n).map(|a| spec.vectors[a].component(i).clone()).collect()).collect();
        let (coframe, det) = matrix::inverse(&e);
        let mut probe = Probe::new();
        let hd = probe.add_one(&det);
        let s = probe.run_on(chart, ctx)?;
        for p in 0..s.len() {
            let d = s.scalar(p, hd);
            if !(d.abs() >= DET_MARGIN) {
                return Err(GeometryError::SingularFrame { det: d.abs(), point: s.point(p).to_vec() });
            }
        }
        Ok(Frame { spec, coframe })
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn names(&self) -> &[String] {
        &self.spec.names
    }

    pub fn vector(&self, a: usize) -> &VectorField {
        &self.spec.vectors[a]
    }

    pub fn vectors(&self) -> &[VectorField] {
        &self.spec.vectors
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.spec.names.iter().position(|n| n == name)
    }

    /// `coframe[a][i]`: the a-th dual 1-form in coordinates.
    pub fn coframe(&self) -> &matrix::Matrix {
        &self.coframe
    }

    /// Frame components `X = Σ c_a e_a`.
    pub fn components_of(&self, x: &VectorField) -> Vec<ScalarExpr> {
        self.coframe
            .iter()
            .map(|row| ScalarExpr::sum(row.iter().zip(x.components()).map(|(t, c)| t * c)))
            .collect()
    }

    /// The coordinate field `Σ c_a e_a`.
    pub fn combine(&self, coeffs: &[ScalarExpr]) -> VectorField {
        let n = self.spec.vectors.len();
        VectorField::new(
            (0..n)
                .map(|i| ScalarExpr::sum(coeffs.iter().zip(&self.spec.vectors).map(|(c, v)| c * v.component(i))))
                .collect(),
        )
    }
}

/// Coordinate components `g_ij = Σ_ab G_ab θ^a_i θ^b_j` of the metric that
/// makes the frame have the prescribed inner products.
pub fn metric_from_frame(frame: &Frame, chart: &Chart, ctx: &EvalContext) -> Result<MetricField, GeometryError> {
    let n = chart.dim();
    let th = frame.coframe();
    let gram: Vec<Vec<ScalarExpr>> =
        frame.spec().gram.iter().map(|r| r.iter().map(|x| ScalarExpr::constant(x.clone())).collect()).collect();
    let comps: matrix::Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    ScalarExpr::sum((0..n).flat_map(|a| {
                        let gram = &gram;
                        (0..n).filter(move |&b| !gram[a][b].is_zero()).map(move |b| &gram[a][b] * &th[a][i] * &th[b][j])
                    }))
                })
                .collect()
        })
        .collect();
    MetricField::new(chart, comps, ctx)
}
