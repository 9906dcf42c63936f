use nalgebra::DMatrix;

use super::algebra::{compose, delta, eta_eta, eta_zeta, lower_11, metric_pullback};
use super::{ParacontactInstance, Structure};
use crate::check::{Batch, CheckConfig};
use crate::expr::{DiffCache, ScalarExpr};
use crate::geometry::numeric::Residual;
use crate::geometry::{MetricField, Slot, TensorField};
use crate::report::{CheckReport, Row, Status};

/// Eigenvalues within this distance of `1`, `-1` or `0` count as that value.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-6;

/// `Φ(X, Y) = g(X, φY)`, i.e. `Φ_ij = g_ik φ^k_j`.
pub fn fundamental_two_form(s: &Structure, g: &MetricField) -> TensorField {
    lower_11(g, &s.phi)
}

pub(crate) fn na_report(cfg: &CheckConfig, id: &str, anchor: &str, what: &str) -> CheckReport {
    cfg.report(vec![Row::new(id, Status::NotApplicable, anchor, what).with_detail("instance has no structure block")])
}

/// Axioms of an almost paracontact metric structure, the antisymmetry of
/// `Φ` and the eigenvalue structure of `φ`.
pub fn verify_almost_paracontact(inst: &ParacontactInstance, cfg: &CheckConfig) -> CheckReport {
    let Some(s) = inst.structure() else {
        return na_report(cfg, "structure", "E2.1", "almost paracontact axioms");
    };
    let n = inst.dim();
    let g = &inst.metric;
    let id = delta(n);
    let ez = eta_zeta(&s.eta, &s.zeta);
    let phi2 = compose(&s.phi, &s.phi);
    let eta_of_zeta = s.eta_of(&s.zeta);
    let phi_zeta = TensorField::vector(&s.apply_phi(&s.zeta));
    let eta_phi = TensorField::one_form((0..n).map(|j| ScalarExpr::sum((0..n).map(|k| s.eta.get(&[k]) * s.phi.get(&[k, j])))).collect());
    let compat = metric_pullback(g, &s.phi, &s.phi);
    let compat_rhs = eta_eta(&s.eta).sub(g.tensor());
    let big_phi = fundamental_two_form(s, g);

    let mut batch = Batch::new();
    batch.push("structure.phi_squared", "E2.1", "phi^2 = I - eta (x) zeta", &phi2, &id.sub(&ez));
    batch.push_scalar("structure.eta_zeta", "E2.1", "eta(zeta) = 1", &eta_of_zeta, &ScalarExpr::one(), n);
    batch.push("structure.phi_zeta", "E2.1", "phi zeta = 0", &phi_zeta, &TensorField::zeros(vec![Slot::Up], n));
    batch.push("structure.eta_phi", "E2.1", "eta o phi = 0", &eta_phi, &TensorField::zeros(vec![Slot::Down], n));
    batch.push("structure.compatibility", "E2.2", "g(phi X, phi Y) = -g(X, Y) + eta(X) eta(Y)", &compat, &compat_rhs);
    batch.push("structure.phi_form", "D.Phi", "Phi(X, Y) = g(X, phi Y) is antisymmetric", &big_phi, &big_phi.permute(&[1, 0]).scale(&ScalarExpr::int(-1)));
    let hphi = batch.probe_mut().add_tensor(&s.phi);

    let mut rows = Vec::new();
    match batch.run(&inst.chart, &cfg.eval) {
        Ok(out) => {
            for (id, anchor, desc, res) in &out.rows {
                rows.push(Row::from_residual(id.clone(), anchor, desc.clone(), res, cfg.tol()));
            }
            let pn = inst.n().unwrap_or(0);
            let mut eig_res = Residual::new();
            let mut counts_ok = true;
            let mut rank_ok = true;
            let mut last = EigenCounts::default();
            for p in 0..out.samples.len() {
                let c = eigen_structure(out.samples.get(p, hphi), n);
                eig_res.record_raw(c.max_distance, c.max_distance, out.samples.point(p));
                if !(c.plus == pn && c.minus == pn && c.zero == 1) {
                    counts_ok = false;
                }
                if c.rank != 2 * pn {
                    rank_ok = false;
                }
                last = c;
            }
            eig_res.samples = out.samples.len();
            let eig_ok = counts_ok && eig_res.below(EIGEN_CLUSTER_TOL);
            rows.push(
                Row::new(
                    "structure.eigen",
                    if eig_ok { Status::Pass } else { Status::Fail },
                    "D.eigen",
                    format!("phi has {pn} eigenvalues +1, {pn} eigenvalues -1 and a simple 0"),
                )
                .with_residual(&eig_res)
                .with_detail(format!("last sample: +1 x{}, -1 x{}, 0 x{}, other x{}", last.plus, last.minus, last.zero, last.other)),
            );
            rows.push(
                Row::new(
                    "structure.rank",
                    if rank_ok { Status::Pass } else { Status::Fail },
                    "D.eigen",
                    format!("rank of phi is {}", 2 * pn),
                )
                .with_detail(format!("last sample rank {}", last.rank)),
            );
        }
        Err(e) => {
            for id in ["structure.phi_squared", "structure.eta_zeta", "structure.phi_zeta", "structure.eta_phi", "structure.compatibility", "structure.phi_form", "structure.eigen"] {
                rows.push(Row::new(id, Status::NotApplicable, "E2.1", "almost paracontact axioms").with_detail(e.to_string()));
            }
        }
    }
    cfg.report(rows)
}

/// Eigenvalue counts of a numeric φ matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EigenCounts {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
    pub other: usize,
    pub rank: usize,
    /// Largest distance of an eigenvalue from its nearest cluster centre.
    pub max_distance: f64,
}

/// Counts eigenvalues of the row-major `n × n` matrix near `1`, `-1`, `0`.
pub fn eigen_structure(values: &[f64], n: usize) -> EigenCounts {
    let m = DMatrix::from_row_slice(n, n, values);
    let mut c = EigenCounts::default();
    for z in m.complex_eigenvalues().iter() {
        let dist = [1.0, -1.0, 0.0].map(|t: f64| ((z.re - t).powi(2) + z.im.powi(2)).sqrt());
        let (best, d) = dist.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, d)| (i, *d)).unwrap();
        c.max_distance = c.max_distance.max(d);
        if d < EIGEN_CLUSTER_TOL {
            match best {
                0 => c.plus += 1,
                1 => c.minus += 1,
                _ => c.zero += 1,
            }
        } else {
            c.other += 1;
        }
    }
    let scale = m.iter().fold(1f64, |a, v| a.max(v.abs()));
    c.rank = m.svd(false, false).singular_values.iter().filter(|s| **s > EIGEN_CLUSTER_TOL * scale).count();
    c
}

/// The Nijenhuis tensor of φ and the normality tensor, both stored as
/// `[k, i, j] = N(∂_i, ∂_j)^k`.
#[derive(Debug, Clone)]
pub struct Normality {
    pub nijenhuis: TensorField,
    /// `N^(1) = N_φ − 2 dη ⊗ ζ` with the halved exterior derivative.
    pub normality: TensorField,
}

/// `N_φ(X,Y) = φ²[X,Y] + [φX,φY] − φ[φX,Y] − φ[X,φY]` on coordinate fields.
pub fn nijenhuis_tensors(s: &Structure, coords: &[String]) -> Normality {
    let n = coords.len();
    // dphi[m][k*n + j] = ∂_m φ^k_j
    let dphi: Vec<Vec<ScalarExpr>> = coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            s.phi.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    let deta: Vec<Vec<ScalarExpr>> = coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            s.eta.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    let phi = |k: usize, j: usize| s.phi.get(&[k, j]);
    let d = |m: usize, k: usize, j: usize| &dphi[m][k * n + j];
    let nijenhuis = TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], n, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut terms = Vec::new();
        for m in 0..n {
            // [φ∂_i, φ∂_j]^k
            if !phi(m, i).is_zero() {
                terms.push(phi(m, i) * d(m, k, j));
            }
            if !phi(m, j).is_zero() {
                terms.push(-(phi(m, j) * d(m, k, i)));
            }
            // −φ[φ∂_i, ∂_j] − φ[∂_i, φ∂_j]
            if !phi(k, m).is_zero() {
                terms.push(phi(k, m) * (d(j, m, i) - d(i, m, j)));
            }
        }
        ScalarExpr::sum(terms)
    });
    let normality = TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], n, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        nijenhuis.get(idx) - (&deta[i][j] - &deta[j][i]) * s.zeta.component(k)
    });
    Normality { nijenhuis, normality }
}

/// Residuals of `N_φ` (informational) and of the normality tensor.
pub fn nijenhuis_normality(inst: &ParacontactInstance, cfg: &CheckConfig) -> (Option<Normality>, CheckReport) {
    let Some(s) = inst.structure() else {
        return (None, na_report(cfg, "normality", "D.normal", "normality tensor vanishes"));
    };
    let nt = nijenhuis_tensors(s, inst.coords());
    let zero = TensorField::zeros(vec![Slot::Up, Slot::Down, Slot::Down], inst.dim());
    let mut batch = Batch::new();
    batch.push("normality.nijenhuis", "D.normal", "Nijenhuis tensor of phi", &nt.nijenhuis, &zero);
    batch.push("normality.n1", "D.normal", "N_phi - 2 d eta (x) zeta = 0", &nt.normality, &zero);
    let mut rows = batch.rows(&inst.chart, cfg);
    if rows[0].status != Status::NotApplicable {
        rows[0].status = Status::Info;
        rows[0].detail = "reported for reference; normality is decided by N^(1)".into();
    }
    (Some(nt), cfg.report(rows))
}
