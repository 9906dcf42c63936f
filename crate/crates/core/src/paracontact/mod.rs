//! Almost paracontact metric structures: axioms, the fundamental 2-form,
//! normality, class detection and the per-class identity suites.

mod axioms;
mod classify;
mod identities;

use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::ScalarExpr;
use crate::geometry::{
    nabla_11, nabla_vector, Chart, CurvatureBundle, Frame, MetricField, Slot, TensorField, VectorField,
};

pub use axioms::{
    eigen_structure, fundamental_two_form, nijenhuis_normality, nijenhuis_tensors, verify_almost_paracontact,
    EigenCounts, Normality, EIGEN_CLUSTER_TOL,
};
pub use classify::{classify_structure, zeta_derivative_by_direction, Flag, GammaFit, StructureClass};
pub use identities::{decomposition_3d, identity_suite, identity_suite_with};

/// The three structure classes with an identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Kenmotsu,
    Sasakian,
    Cosymplectic,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [StructureKind::Kenmotsu, StructureKind::Sasakian, StructureKind::Cosymplectic];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Kenmotsu => "kenmotsu",
            StructureKind::Sasakian => "sasakian",
            StructureKind::Cosymplectic => "cosymplectic",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StructureKind::Kenmotsu => "para-Kenmotsu",
            StructureKind::Sasakian => "para-Sasakian",
            StructureKind::Cosymplectic => "para-cosymplectic",
        }
    }

    /// Anchor of the ∇ζ identity that characterises the class.
    pub fn zeta_anchor(self) -> &'static str {
        match self {
            StructureKind::Kenmotsu => "E2.9",
            StructureKind::Sasakian => "E6.3",
            StructureKind::Cosymplectic => "E9.3",
        }
    }

    /// Accepts the short name or the label.
    pub fn from_name(s: &str) -> Option<StructureKind> {
        let s = s.trim().to_ascii_lowercase();
        StructureKind::ALL.into_iter().find(|k| s == k.name() || s == k.label().to_ascii_lowercase())
    }
}

/// The tensors `(φ, ζ, η)` in coordinates.
#[derive(Debug, Clone)]
pub struct Structure {
    /// (1,1) tensor, `phi[k, j] = φ^k_j`.
    pub phi: TensorField,
    pub zeta: VectorField,
    /// 1-form.
    pub eta: TensorField,
}

impl Structure {
    pub fn new(phi: TensorField, zeta: VectorField, eta: TensorField) -> Structure {
        Structure { phi, zeta, eta }
    }

    /// `φ` from its action on a frame: `images[a]` holds the frame
    /// coefficients of `φ e_a`.
    pub fn phi_from_frame(frame: &Frame, images: &[Vec<ScalarExpr>]) -> TensorField {
        let n = frame.vectors().len();
        let th = frame.coframe();
        let fields: Vec<VectorField> = images.iter().map(|c| frame.combine(c)).collect();
        TensorField::from_fn(vec![Slot::Up, Slot::Down], n, |idx| {
            let (k, j) = (idx[0], idx[1]);
            ScalarExpr::sum((0..n).map(|a| fields[a].component(k) * &th[a][j]))
        })
    }

    /// `φX`.
    pub fn apply_phi(&self, x: &VectorField) -> VectorField {
        crate::geometry::apply_11(&self.phi, x)
    }

    pub fn eta_of(&self, x: &VectorField) -> ScalarExpr {
        self.eta.evaluate_on(&[x])
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("a paracontact structure needs an odd dimension of at least 3, got {0}")]
    Parity(usize),
    #[error("{what} has the wrong shape for dimension {dim}")]
    Shape { what: &'static str, dim: usize },
}

#[derive(Debug, Clone)]
struct Derived {
    nabla_zeta: TensorField,
    nabla_phi: TensorField,
}

/// A chart with a metric, optional frame and optional structure tensors.
#[derive(Debug, Clone)]
pub struct ParacontactInstance {
    pub id: String,
    pub chart: Chart,
    pub metric: MetricField,
    pub frame: Option<Frame>,
    pub declared_class: Option<StructureKind>,
    pub notes: Vec<String>,
    structure: Option<Structure>,
    curvature: OnceLock<CurvatureBundle>,
    derived: OnceLock<Option<Derived>>,
}

impl ParacontactInstance {
    pub fn new(
        id: impl Into<String>,
        chart: Chart,
        metric: MetricField,
        frame: Option<Frame>,
        structure: Option<Structure>,
    ) -> Result<ParacontactInstance, InstanceError> {
        let n = chart.dim();
        if metric.dim() != n {
            return Err(InstanceError::Shape { what: "metric", dim: n });
        }
        if let Some(s) = &structure {
            if chart.paracontact_n().is_none() {
                return Err(InstanceError::Parity(n));
            }
            if s.phi.slots() != [Slot::Up, Slot::Down] || s.phi.dim() != n {
                return Err(InstanceError::Shape { what: "phi", dim: n });
            }
            if s.zeta.dim() != n {
                return Err(InstanceError::Shape { what: "zeta", dim: n });
            }
            if s.eta.slots() != [Slot::Down] || s.eta.dim() != n {
                return Err(InstanceError::Shape { what: "eta", dim: n });
            }
        }
        Ok(ParacontactInstance {
            id: id.into(),
            chart,
            metric,
            frame,
            declared_class: None,
            notes: Vec::new(),
            structure,
            curvature: OnceLock::new(),
            derived: OnceLock::new(),
        })
    }

    pub fn with_declared_class(mut self, class: Option<StructureKind>) -> ParacontactInstance {
        self.declared_class = class;
        self
    }

    pub fn with_notes(mut self, notes: Vec<String>) -> ParacontactInstance {
        self.notes = notes;
        self
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn coords(&self) -> &[String] {
        self.chart.coords()
    }

    /// `n` with `dim = 2n + 1`.
    pub fn n(&self) -> Option<usize> {
        self.chart.paracontact_n()
    }

    pub fn structure(&self) -> Option<&Structure> {
        self.structure.as_ref()
    }

    /// Connection and curvature, computed once.
    pub fn curvature(&self) -> &CurvatureBundle {
        self.curvature.get_or_init(|| CurvatureBundle::new(&self.metric, self.chart.coords()))
    }

    fn derived(&self) -> Option<&Derived> {
        self.derived
            .get_or_init(|| {
                let s = self.structure.as_ref()?;
                let conn = &self.curvature().connection;
                Some(Derived { nabla_zeta: nabla_vector(conn, &s.zeta), nabla_phi: nabla_11(conn, &s.phi) })
            })
            .as_ref()
    }

    /// `∇ζ` as a (1,1) tensor, `[k, i] = (∇_{∂_i} ζ)^k`.
    pub fn nabla_zeta(&self) -> Option<&TensorField> {
        self.derived().map(|d| &d.nabla_zeta)
    }

    /// `∇φ`, `[k, i, j] = ((∇_{∂_i} φ) ∂_j)^k`.
    pub fn nabla_phi(&self) -> Option<&TensorField> {
        self.derived().map(|d| &d.nabla_phi)
    }
}

pub(crate) mod algebra {
    //! Small coordinate-tensor builders shared by the checks.

    use crate::expr::ScalarExpr;
    use crate::geometry::{MetricField, Slot, TensorField, VectorField};

    pub fn delta(n: usize) -> TensorField {
        TensorField::from_fn(vec![Slot::Up, Slot::Down], n, |i| if i[0] == i[1] { ScalarExpr::one() } else { ScalarExpr::zero() })
    }

    pub fn kron(a: usize, b: usize) -> ScalarExpr {
        if a == b {
            ScalarExpr::one()
        } else {
            ScalarExpr::zero()
        }
    }

    /// `(η ⊗ ζ)[k, j] = ζ^k η_j`.
    pub fn eta_zeta(eta: &TensorField, zeta: &VectorField) -> TensorField {
        TensorField::from_fn(vec![Slot::Up, Slot::Down], eta.dim(), |i| zeta.component(i[0]) * eta.get(&[i[1]]))
    }

    pub fn eta_eta(eta: &TensorField) -> TensorField {
        TensorField::from_fn(vec![Slot::Down, Slot::Down], eta.dim(), |i| eta.get(&[i[0]]) * eta.get(&[i[1]]))
    }

    /// `(AB)^k_j = A^k_m B^m_j`.
    pub fn compose(a: &TensorField, b: &TensorField) -> TensorField {
        let n = a.dim();
        TensorField::from_fn(vec![Slot::Up, Slot::Down], n, |i| {
            ScalarExpr::sum((0..n).map(|m| a.get(&[i[0], m]) * b.get(&[m, i[1]])))
        })
    }

    /// `g(A·, B·)[i, j] = g_kl A^k_i B^l_j`.
    pub fn metric_pullback(g: &MetricField, a: &TensorField, b: &TensorField) -> TensorField {
        let n = g.dim();
        TensorField::from_fn(vec![Slot::Down, Slot::Down], n, |i| {
            ScalarExpr::sum((0..n).flat_map(|k| {
                (0..n).map(move |l| ScalarExpr::product([g.component(k, l).clone(), a.get(&[k, i[0]]).clone(), b.get(&[l, i[1]]).clone()]))
            }))
        })
    }

    /// `g_ik A^k_j`.
    pub fn lower_11(g: &MetricField, a: &TensorField) -> TensorField {
        let n = g.dim();
        TensorField::from_fn(vec![Slot::Down, Slot::Down], n, |i| {
            ScalarExpr::sum((0..n).map(|k| g.component(i[0], k) * a.get(&[k, i[1]])))
        })
    }

    /// Contracts slot `slot` (a `Down` slot) of `t` with the vector `v`.
    pub fn insert(t: &TensorField, slot: usize, v: &VectorField) -> TensorField {
        let n = t.dim();
        let mut slots = t.slots().to_vec();
        assert_eq!(slots[slot], Slot::Down);
        slots.remove(slot);
        let mut full = vec![0usize; t.rank()];
        TensorField::from_fn(slots, n, |idx| {
            ScalarExpr::sum((0..n).filter(|&m| !v.component(m).is_zero()).map(|m| {
                let mut r = 0;
                for (s, f) in full.iter_mut().enumerate() {
                    if s == slot {
                        *f = m;
                    } else {
                        *f = idx[r];
                        r += 1;
                    }
                }
                t.get(&full) * v.component(m)
            }))
        })
    }

    /// Contracts the leading `Up` slot of `t` with the 1-form `w`.
    pub fn contract_up(w: &TensorField, t: &TensorField) -> TensorField {
        let n = t.dim();
        assert_eq!(t.slots()[0], Slot::Up);
        let slots = t.slots()[1..].to_vec();
        let mut full = vec![0usize; t.rank()];
        TensorField::from_fn(slots, n, |idx| {
            full[1..].copy_from_slice(idx);
            ScalarExpr::sum((0..n).filter(|&l| !w.get(&[l]).is_zero()).map(|l| {
                full[0] = l;
                w.get(&[l]) * t.get(&full)
            }))
        })
    }
}
