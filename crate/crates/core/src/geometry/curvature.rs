//! Levi-Civita connection, curvature and the derived operators.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, stored as
//! `R[l, i, j, k]` with `R(∂_i, ∂_j)∂_k = R[l, i, j, k] ∂_l`;
//! `S(Y, Z) = tr(X ↦ R(X, Y)Z)`, `g(QX, Y) = S(X, Y)`, `r = tr_g S`.

use super::metric::MetricField;
use super::tensor::{Slot, TensorField, VectorField};
use crate::expr::{DiffCache, ScalarExpr};

/// Christoffel symbols `Γ[k, i, j] = Γ^k_{ij}`.
#[derive(Debug, Clone)]
pub struct Connection {
    gamma: TensorField,
    coords: Vec<String>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &ScalarExpr {
        self.gamma.get(&[k, i, j])
    }

    pub fn symbols(&self) -> &TensorField {
        &self.gamma
    }
}

/// `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
pub fn christoffel(g: &MetricField, coords: &[String]) -> Connection {
    let n = g.dim();
    let dg: Vec<Vec<Vec<ScalarExpr>>> = coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            (0..n).map(|i| (0..n).map(|j| cache.diff(g.component(i, j))).collect()).collect()
        })
        .collect();
    let half = ScalarExpr::ratio(1, 2);
    let lowered: Vec<Vec<Vec<ScalarExpr>>> = (0..n)
        .map(|l| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| &half * (&dg[i][j][l] + &dg[j][i][l] - &dg[l][i][j]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let inv = g.inverse();
    let mut gamma = TensorField::zeros(vec![Slot::Up, Slot::Down, Slot::Down], n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let v = ScalarExpr::sum(
                    (0..n).filter(|&l| !inv[k][l].is_zero()).map(|l| &inv[k][l] * &lowered[l][i][j]),
                );
                gamma.set(&[k, i, j], v.clone());
                gamma.set(&[k, j, i], v);
            }
        }
    }
    Connection { gamma, coords: coords.to_vec() }
}

/// `∇Y` as a (1,1) tensor: `[k, i] = ∂_i Y^k + Γ^k_{ij} Y^j`.
pub fn nabla_vector(conn: &Connection, y: &VectorField) -> TensorField {
    let n = conn.dim();
    let partial: Vec<Vec<ScalarExpr>> = conn
        .coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            y.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    TensorField::from_fn(vec![Slot::Up, Slot::Down], n, |idx| {
        let (k, i) = (idx[0], idx[1]);
        let mut terms = vec![partial[i][k].clone()];
        terms.extend((0..n).filter(|&j| !y.component(j).is_zero()).map(|j| conn.gamma(k, i, j) * y.component(j)));
        ScalarExpr::sum(terms)
    })
}

/// `(∇_X Y)^k = X^i (∂_i Y^k + Γ^k_{ij} Y^j)`.
pub fn covariant_derivative_vector(conn: &Connection, x: &VectorField, y: &VectorField) -> VectorField {
    apply_11(&nabla_vector(conn, y), x)
}

/// `A(X)` for a (1,1) tensor `A`.
pub fn apply_11(a: &TensorField, x: &VectorField) -> VectorField {
    let n = a.dim();
    VectorField::new(
        (0..n)
            .map(|k| {
                ScalarExpr::sum((0..n).filter(|&i| !x.component(i).is_zero()).map(|i| a.get(&[k, i]) * x.component(i)))
            })
            .collect(),
    )
}

/// `∇A` for a (1,1) tensor: `[k, i, j] = ((∇_{∂_i} A) ∂_j)^k`.
pub fn nabla_11(conn: &Connection, a: &TensorField) -> TensorField {
    let n = conn.dim();
    let partial: Vec<Vec<ScalarExpr>> = conn
        .coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            a.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    TensorField::from_fn(vec![Slot::Up, Slot::Down, Slot::Down], n, |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut terms = vec![partial[i][k * n + j].clone()];
        for m in 0..n {
            terms.push(conn.gamma(k, i, m) * a.get(&[m, j]));
            terms.push(-(a.get(&[k, m]) * conn.gamma(m, i, j)));
        }
        ScalarExpr::sum(terms)
    })
}

/// `∇T` for a (0,2) tensor: `[i, j, k] = (∇_{∂_i} T)(∂_j, ∂_k)`.
pub fn nabla_02(conn: &Connection, t: &TensorField) -> TensorField {
    let n = conn.dim();
    let partial: Vec<Vec<ScalarExpr>> = conn
        .coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            t.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    TensorField::from_fn(vec![Slot::Down; 3], n, |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let mut terms = vec![partial[i][j * n + k].clone()];
        for m in 0..n {
            terms.push(-(conn.gamma(m, i, j) * t.get(&[m, k])));
            terms.push(-(conn.gamma(m, i, k) * t.get(&[j, m])));
        }
        ScalarExpr::sum(terms)
    })
}

/// Connection, Riemann tensor, Ricci tensor, Ricci operator and scalar
/// curvature of a metric.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub connection: Connection,
    pub riemann: TensorField,
    pub ricci: TensorField,
    pub ricci_operator: TensorField,
    pub scalar: ScalarExpr,
}

impl CurvatureBundle {
    pub fn new(g: &MetricField, coords: &[String]) -> CurvatureBundle {
        let connection = christoffel(g, coords);
        let riemann = riemann(&connection);
        let ricci = ricci(&riemann);
        let ricci_operator = ricci_operator(&ricci, g);
        let scalar = scalar_curvature(&ricci, g);
        CurvatureBundle { connection, riemann, ricci, ricci_operator, scalar }
    }

    /// `R(X, Y)Z` for coordinate-expressed fields.
    pub fn apply_riemann(&self, x: &VectorField, y: &VectorField, z: &VectorField) -> VectorField {
        let n = self.riemann.dim();
        VectorField::new(
            (0..n)
                .map(|l| {
                    let mut terms = Vec::new();
                    for i in 0..n {
                        if x.component(i).is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            if y.component(j).is_zero() {
                                continue;
                            }
                            for k in 0..n {
                                let r = self.riemann.get(&[l, i, j, k]);
                                if r.is_zero() || z.component(k).is_zero() {
                                    continue;
                                }
                                terms.push(ScalarExpr::product([
                                    r.clone(),
                                    x.component(i).clone(),
                                    y.component(j).clone(),
                                    z.component(k).clone(),
                                ]));
                            }
                        }
                    }
                    ScalarExpr::sum(terms)
                })
                .collect(),
        )
    }
}

/// `R^l_{ijk} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} − Γ^l_{jm} Γ^m_{ik}`.
pub fn riemann(conn: &Connection) -> TensorField {
    let n = conn.dim();
    let dgamma: Vec<Vec<ScalarExpr>> = conn
        .coords
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            conn.gamma.components().iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    let g = |k: usize, i: usize, j: usize| conn.gamma(k, i, j);
    let mut r = TensorField::zeros(vec![Slot::Up, Slot::Down, Slot::Down, Slot::Down], n);
    for l in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let mut terms = vec![dgamma[i][(l * n + j) * n + k].clone(), -dgamma[j][(l * n + i) * n + k].clone()];
                    for m in 0..n {
                        if !g(l, i, m).is_zero() && !g(m, j, k).is_zero() {
                            terms.push(g(l, i, m) * g(m, j, k));
                        }
                        if !g(l, j, m).is_zero() && !g(m, i, k).is_zero() {
                            terms.push(-(g(l, j, m) * g(m, i, k)));
                        }
                    }
                    let v = ScalarExpr::sum(terms);
                    r.set(&[l, j, i, k], -&v);
                    r.set(&[l, i, j, k], v);
                }
            }
        }
    }
    r
}

/// `S_{jk} = R^i_{ijk}`.
pub fn ricci(riemann: &TensorField) -> TensorField {
    let n = riemann.dim();
    TensorField::from_fn(vec![Slot::Down, Slot::Down], n, |idx| {
        ScalarExpr::sum((0..n).map(|i| riemann.get(&[i, i, idx[0], idx[1]]).clone()))
    })
}

/// `Q^k_j = g^{ki} S_{ij}`.
pub fn ricci_operator(ricci: &TensorField, g: &MetricField) -> TensorField {
    let n = g.dim();
    let inv = g.inverse();
    TensorField::from_fn(vec![Slot::Up, Slot::Down], n, |idx| {
        let (k, j) = (idx[0], idx[1]);
        ScalarExpr::sum((0..n).filter(|&i| !inv[k][i].is_zero()).map(|i| &inv[k][i] * ricci.get(&[i, j])))
    })
}

/// `r = g^{ij} S_{ij}`.
pub fn scalar_curvature(ricci: &TensorField, g: &MetricField) -> ScalarExpr {
    let n = g.dim();
    let inv = g.inverse();
    ScalarExpr::sum(
        (0..n).flat_map(|i| (0..n).filter(move |&j| !inv[i][j].is_zero()).map(move |j| &inv[i][j] * ricci.get(&[i, j]))),
    )
}

/// Partial derivatives `∂_i f`.
pub fn partials(f: &ScalarExpr, coords: &[String]) -> Vec<ScalarExpr> {
    coords.iter().map(|c| DiffCache::new(c).diff(f)).collect()
}

/// The 1-form `df`.
pub fn differential(f: &ScalarExpr, coords: &[String]) -> TensorField {
    TensorField::one_form(partials(f, coords))
}

/// `Df` with `g(Df, X) = X(f)`.
pub fn gradient(f: &ScalarExpr, g: &MetricField, coords: &[String]) -> VectorField {
    g.raise(&differential(f, coords))
}

/// `∇²f(X, Y) = X(Yf) − (∇_X Y)f`.
pub fn hessian(f: &ScalarExpr, conn: &Connection) -> TensorField {
    let n = conn.dim();
    let df = partials(f, conn.coords());
    let ddf: Vec<Vec<ScalarExpr>> = conn
        .coords()
        .iter()
        .map(|c| {
            let mut cache = DiffCache::new(c);
            df.iter().map(|e| cache.diff(e)).collect()
        })
        .collect();
    TensorField::from_fn(vec![Slot::Down, Slot::Down], n, |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut terms = vec![ddf[i][j].clone()];
        terms.extend((0..n).filter(|&k| !df[k].is_zero()).map(|k| -(conn.gamma(k, i, j) * &df[k])));
        ScalarExpr::sum(terms)
    })
}

/// `(£_V g)(X, Y) = g(∇_X V, Y) + g(X, ∇_Y V)`.
pub fn lie_derivative_metric(v: &VectorField, conn: &Connection, g: &MetricField) -> TensorField {
    let n = g.dim();
    let nv = nabla_vector(conn, v);
    TensorField::from_fn(vec![Slot::Down, Slot::Down], n, |idx| {
        let (i, j) = (idx[0], idx[1]);
        ScalarExpr::sum((0..n).flat_map(|k| {
            [g.component(k, j) * nv.get(&[k, i]), g.component(i, k) * nv.get(&[k, j])]
        }))
    })
}

/// `(div T)_k = g^{ij} (∇_i T)_{jk}` for a (0,2) tensor.
pub fn divergence_02(t: &TensorField, conn: &Connection, g: &MetricField) -> TensorField {
    let n = g.dim();
    let nt = nabla_02(conn, t);
    let inv = g.inverse();
    TensorField::from_fn(vec![Slot::Down], n, |idx| {
        let k = idx[0];
        ScalarExpr::sum(
            (0..n).flat_map(|i| {
                let nt = &nt;
                (0..n).filter(move |&j| !inv[i][j].is_zero()).map(move |j| &inv[i][j] * nt.get(&[i, j, k]))
            }),
        )
    })
}
