//! Charts, tensor fields, metrics, exterior calculus and curvature.

mod calculus;
mod chart;
mod curvature;
mod metric;
pub mod numeric;
mod tensor;

pub use calculus::{exterior_derivative, lie_bracket, wedge, DerivativeConvention, WedgeConvention};
pub use chart::{Chart, EvalContext, GeometryError, MAX_DIM};
pub use curvature::{
    apply_11, christoffel, covariant_derivative_vector, differential, divergence_02, gradient, hessian,
    lie_derivative_metric, nabla_02, nabla_11, nabla_vector, partials, ricci, ricci_operator, riemann,
    scalar_curvature, Connection, CurvatureBundle,
};
pub use metric::{metric_from_frame, Frame, FrameSpec, MetricField, Signature, DET_MARGIN, INVERSE_TOL};
pub use tensor::{matrix, Slot, TensorField, VectorField};
