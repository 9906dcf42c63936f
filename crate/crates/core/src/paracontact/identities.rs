use super::algebra::{contract_up, delta, eta_eta, eta_zeta, insert, kron};
use super::classify::{classify_structure, StructureClass};
use super::{ParacontactInstance, StructureKind};
use crate::check::{Batch, CheckConfig};
use crate::expr::ScalarExpr;
use crate::geometry::{partials, Slot, TensorField, VectorField};
use crate::report::{CheckReport, Row, Status};

struct Entry {
    anchor: &'static str,
    description: &'static str,
    dim3_only: bool,
    sides: Option<(TensorField, TensorField)>,
}

/// One row per identity of the class, gated on the class flag.
pub fn identity_suite(inst: &ParacontactInstance, kind: StructureKind, cfg: &CheckConfig) -> CheckReport {
    let class = classify_structure(inst, cfg);
    identity_suite_with(inst, kind, &class, cfg)
}

/// [`identity_suite`] with a precomputed classification.
pub fn identity_suite_with(inst: &ParacontactInstance, kind: StructureKind, class: &StructureClass, cfg: &CheckConfig) -> CheckReport {
    let entries = entries(inst, kind, class.has(kind));
    let id = |e: &Entry| format!("{}.{}", kind.name(), e.anchor);
    let mut rows = Vec::new();
    if !class.has(kind) {
        let flag = class.flag(kind);
        for e in &entries {
            rows.push(
                Row::new(id(e), Status::NotApplicable, e.anchor, e.description)
                    .with_detail(format!("{} flag false (residual {:.3e})", kind.label(), flag.residual)),
            );
        }
        return cfg.report(rows);
    }
    let mut batch = Batch::new();
    for e in &entries {
        if let Some((l, r)) = &e.sides {
            batch.push(id(e), e.anchor, e.description, l, r);
        }
    }
    let mut evaluated = batch.rows(&inst.chart, cfg).into_iter();
    for e in &entries {
        if e.sides.is_some() {
            rows.push(evaluated.next().expect("one row per identity"));
        } else {
            let why = if e.dim3_only { "requires dimension 3" } else { "not evaluated" };
            rows.push(Row::new(id(e), Status::NotApplicable, e.anchor, e.description).with_detail(why));
        }
    }
    cfg.report(rows)
}

fn entries(inst: &ParacontactInstance, kind: StructureKind, build: bool) -> Vec<Entry> {
    let dim3 = inst.dim() == 3;
    let make = build && inst.structure().is_some();
    let t = if make { Some(Terms::new(inst)) } else { None };
    let mut out = Vec::new();
    let mut add = |anchor, description, dim3_only: bool, f: &dyn Fn(&Terms) -> (TensorField, TensorField)| {
        let sides = t.as_ref().filter(|_| dim3 || !dim3_only).map(f);
        out.push(Entry { anchor, description, dim3_only, sides });
    };
    match kind {
        StructureKind::Kenmotsu => {
            add("E2.4", "R(X,Y)zeta = eta(X)Y - eta(Y)X", false, &|t| (t.r_zeta_last(), t.eta_delta_antisym()));
            add("E2.5", "R(X,zeta)Y = g(X,Y)zeta - eta(Y)X", false, &|t| (t.r_zeta_mid(), t.g_zeta_minus_eta_delta(1)));
            add("E2.6", "R(zeta,X)Y = -g(X,Y)zeta + eta(Y)X", false, &|t| (t.r_zeta_first(), t.g_zeta_minus_eta_delta(-1)));
            add("E2.7", "eta(R(X,Y)Z) = -g(Y,Z)eta(X) + g(X,Z)eta(Y)", false, &|t| (t.eta_r(), t.eta_r_expected()));
            add("E2.8", "(nabla_X phi)Y = g(phi X,Y)zeta - eta(Y)phi X", false, &|t| (t.nabla_phi.clone(), t.kenmotsu_nabla_phi()));
            add("E2.9", "nabla_X zeta = X - eta(X)zeta", false, &|t| (t.nabla_zeta.clone(), t.delta.sub(&t.ez)));
            add("E2.10", "S(X,zeta) = -2n eta(X)", false, &|t| (t.s_zeta(), t.eta.scale(&ScalarExpr::int(-2 * t.n as i64))));
            add("E2.11", "zeta r = -2(r + 6)", true, &|t| (t.scalar(t.zeta_r()), t.scalar(ScalarExpr::int(-2) * (&t.r + ScalarExpr::int(6)))));
            add("E2.12", "QX = (r/2+1)X - (r/2+3)eta(X)zeta", true, &|t| (t.q.clone(), t.q_eta_einstein()));
            add("E2.13", "S = (r/2+1)g - (r/2+3)eta(x)eta", true, &|t| (t.s.clone(), t.s_eta_einstein()));
        }
        StructureKind::Sasakian => {
            add("E6.1", "R(X,Y)zeta = eta(X)Y - eta(Y)X", false, &|t| (t.r_zeta_last(), t.eta_delta_antisym()));
            add("E6.2", "(nabla_X phi)Y = -g(X,Y)zeta + eta(Y)X", false, &|t| (t.nabla_phi.clone(), t.sasakian_nabla_phi()));
            add("E6.3", "nabla_X zeta = -phi X", false, &|t| (t.nabla_zeta.clone(), t.phi.scale(&ScalarExpr::int(-1))));
            add("E6.4", "R(zeta,X)Y = -g(X,Y)zeta + eta(Y)X", false, &|t| (t.r_zeta_first(), t.g_zeta_minus_eta_delta(-1)));
            add("E6.5", "S(X,zeta) = -2n eta(X)", false, &|t| (t.s_zeta(), t.eta.scale(&ScalarExpr::int(-2 * t.n as i64))));
            add("E6.6", "three-dimensional curvature decomposition", true, &|t| (t.riemann.clone(), t.decomposition_3d()));
            add("E6.7", "QX = (r/2+1)X - (r/2+3)eta(X)zeta", true, &|t| (t.q.clone(), t.q_eta_einstein()));
            add("E6.8", "S = (r/2+1)g - (r/2+3)eta(x)eta", true, &|t| (t.s.clone(), t.s_eta_einstein()));
            add("E6.9", "zeta r = 0", true, &|t| (t.scalar(t.zeta_r()), t.scalar(ScalarExpr::zero())));
        }
        StructureKind::Cosymplectic => {
            add("E9.1", "R(X,Y)zeta = 0", false, &|t| (t.r_zeta_last(), TensorField::zeros(vec![Slot::Up, Slot::Down, Slot::Down], t.dim)));
            add("E9.2", "(nabla_X phi)Y = 0", false, &|t| (t.nabla_phi.clone(), TensorField::zeros(vec![Slot::Up, Slot::Down, Slot::Down], t.dim)));
            add("E9.3", "nabla_X zeta = 0", false, &|t| (t.nabla_zeta.clone(), TensorField::zeros(vec![Slot::Up, Slot::Down], t.dim)));
            add("E9.4", "S(X,zeta) = 0", false, &|t| (t.s_zeta(), TensorField::zeros(vec![Slot::Down], t.dim)));
            add("E9.5", "QX = (r/2)(X - eta(X)zeta)", true, &|t| (t.q.clone(), t.delta.sub(&t.ez).scale(&t.half_r())));
            add("E9.6", "S = (r/2)(g - eta(x)eta)", true, &|t| (t.s.clone(), t.g.sub(&eta_eta(&t.eta)).scale(&t.half_r())));
            add("E9.7", "zeta r = 0", true, &|t| (t.scalar(t.zeta_r()), t.scalar(ScalarExpr::zero())));
        }
    }
    out
}

/// Coordinate tensors the identities are assembled from.
pub(crate) struct Terms {
    pub dim: usize,
    pub n: usize,
    pub g: TensorField,
    pub delta: TensorField,
    pub eta: TensorField,
    pub zeta: VectorField,
    pub phi: TensorField,
    pub ez: TensorField,
    pub riemann: TensorField,
    pub s: TensorField,
    pub q: TensorField,
    pub r: ScalarExpr,
    pub nabla_zeta: TensorField,
    pub nabla_phi: TensorField,
    pub coords: Vec<String>,
}

impl Terms {
    pub fn new(inst: &ParacontactInstance) -> Terms {
        let s = inst.structure().expect("structure present");
        let b = inst.curvature();
        Terms {
            dim: inst.dim(),
            n: inst.n().unwrap_or(0),
            g: inst.metric.tensor().clone(),
            delta: delta(inst.dim()),
            eta: s.eta.clone(),
            zeta: s.zeta.clone(),
            phi: s.phi.clone(),
            ez: eta_zeta(&s.eta, &s.zeta),
            riemann: b.riemann.clone(),
            s: b.ricci.clone(),
            q: b.ricci_operator.clone(),
            r: b.scalar.clone(),
            nabla_zeta: inst.nabla_zeta().expect("structure present").clone(),
            nabla_phi: inst.nabla_phi().expect("structure present").clone(),
            coords: inst.coords().to_vec(),
        }
    }

    fn g(&self, i: usize, j: usize) -> &ScalarExpr {
        self.g.get(&[i, j])
    }

    fn e(&self, i: usize) -> &ScalarExpr {
        self.eta.get(&[i])
    }

    fn scalar(&self, v: ScalarExpr) -> TensorField {
        TensorField::scalar(v, self.dim)
    }

    fn half_r(&self) -> ScalarExpr {
        ScalarExpr::ratio(1, 2) * &self.r
    }

    /// `[l, i, j] = R(∂_i, ∂_j)ζ`.
    fn r_zeta_last(&self) -> TensorField {
        insert(&self.riemann, 3, &self.zeta)
    }

    /// `[l, i, k] = R(∂_i, ζ)∂_k`.
    fn r_zeta_mid(&self) -> TensorField {
        insert(&self.riemann, 2, &self.zeta)
    }

    /// `[l, j, k] = R(ζ, ∂_j)∂_k`.
    fn r_zeta_first(&self) -> TensorField {
        insert(&self.riemann, 1, &self.zeta)
    }

    /// `η_i δ^l_j − η_j δ^l_i`.
    fn eta_delta_antisym(&self) -> TensorField {
        TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], self.dim, |x| {
            let (l, i, j) = (x[0], x[1], x[2]);
            self.e(i) * kron(l, j) - self.e(j) * kron(l, i)
        })
    }

    /// `sign·(g_ik ζ^l − η_k δ^l_i)` over `[l, i, k]`.
    fn g_zeta_minus_eta_delta(&self, sign: i64) -> TensorField {
        TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], self.dim, |x| {
            let (l, i, k) = (x[0], x[1], x[2]);
            ScalarExpr::int(sign) * (self.g(i, k) * self.zeta.component(l) - self.e(k) * kron(l, i))
        })
    }

    /// `[i, j, k] = η(R(∂_i, ∂_j)∂_k)`.
    fn eta_r(&self) -> TensorField {
        contract_up(&self.eta, &self.riemann)
    }

    fn eta_r_expected(&self) -> TensorField {
        TensorField::from_fn(vec![Slot::Down; 3], self.dim, |x| {
            let (i, j, k) = (x[0], x[1], x[2]);
            -(self.g(j, k) * self.e(i)) + self.g(i, k) * self.e(j)
        })
    }

    /// `g(φ∂_i, ∂_j) ζ^k − η_j φ^k_i` over `[k, i, j]`.
    fn kenmotsu_nabla_phi(&self) -> TensorField {
        let n = self.dim;
        TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], n, |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            let g_phi = ScalarExpr::sum((0..n).map(|m| self.g(m, j) * self.phi.get(&[m, i])));
            g_phi * self.zeta.component(k) - self.e(j) * self.phi.get(&[k, i])
        })
    }

    /// `−g_ij ζ^k + η_j δ^k_i`.
    fn sasakian_nabla_phi(&self) -> TensorField {
        TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], self.dim, |x| {
            let (k, i, j) = (x[0], x[1], x[2]);
            -(self.g(i, j) * self.zeta.component(k)) + self.e(j) * kron(k, i)
        })
    }

    /// `S(∂_i, ζ)`.
    fn s_zeta(&self) -> TensorField {
        insert(&self.s, 1, &self.zeta)
    }

    fn zeta_r(&self) -> ScalarExpr {
        self.zeta.apply_grad(&partials(&self.r, &self.coords))
    }

    fn coefficients(&self) -> (ScalarExpr, ScalarExpr) {
        let a = self.half_r() + ScalarExpr::one();
        let b = self.half_r() + ScalarExpr::int(3);
        (a, b)
    }

    fn q_eta_einstein(&self) -> TensorField {
        let (a, b) = self.coefficients();
        self.delta.scale(&a).sub(&self.ez.scale(&b))
    }

    fn s_eta_einstein(&self) -> TensorField {
        let (a, b) = self.coefficients();
        self.g.scale(&a).sub(&eta_eta(&self.eta).scale(&b))
    }

    fn decomposition_3d(&self) -> TensorField {
        decomposition_3d(&self.g, &self.s, &self.q, &self.r)
    }
}

/// `g(Y,Z)QX − g(X,Z)QY + S(Y,Z)X − S(X,Z)Y − (r/2)(g(Y,Z)X − g(X,Z)Y)` as
/// `[l, i, j, k]` with `X = ∂_i, Y = ∂_j, Z = ∂_k`.
pub fn decomposition_3d(g: &TensorField, s: &TensorField, q: &TensorField, r: &ScalarExpr) -> TensorField {
    let half_r = ScalarExpr::ratio(1, 2) * r;
    TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], g.dim(), |x| {
        let (l, i, j, k) = (x[0], x[1], x[2], x[3]);
        ScalarExpr::sum([
            g.get(&[j, k]) * q.get(&[l, i]),
            -(g.get(&[i, k]) * q.get(&[l, j])),
            s.get(&[j, k]) * kron(l, i),
            -(s.get(&[i, k]) * kron(l, j)),
            -(&half_r * (g.get(&[j, k]) * kron(l, i) - g.get(&[i, k]) * kron(l, j))),
        ])
    })
}
