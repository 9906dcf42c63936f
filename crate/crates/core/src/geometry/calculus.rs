//! Lie brackets and exterior calculus on coordinate components.

use super::chart::GeometryError;
use super::tensor::{Slot, TensorField, VectorField};
use crate::expr::{DiffCache, ScalarExpr};

/// Normalisation of the exterior derivative.
///
/// `Half` divides the antisymmetrised derivative of a k-form by `k + 1`, so
/// `dη(X, Y) = ½(Xη(Y) − Yη(X) − η([X, Y]))`. `Plain` omits the factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeConvention {
    #[default]
    Half,
    Plain,
}

impl DerivativeConvention {
    pub fn name(self) -> &'static str {
        match self {
            DerivativeConvention::Half => "half",
            DerivativeConvention::Plain => "plain",
        }
    }

    pub fn from_name(s: &str) -> Option<DerivativeConvention> {
        match s {
            "half" => Some(DerivativeConvention::Half),
            "plain" => Some(DerivativeConvention::Plain),
            _ => None,
        }
    }
}

/// Normalisation of the wedge product.
///
/// `Determinant` gives `(dx∧dy)(∂x, ∂y) = 1`; `Alternation` applies the
/// full `1/(p+q)!` antisymmetriser and gives `½`. `Determinant` pairs with
/// [`DerivativeConvention::Plain`] and `Alternation` with `Half` in the
/// sense that `d(f dg) = df ∧ dg` holds for each pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WedgeConvention {
    #[default]
    Determinant,
    Alternation,
}

/// `[X, Y]^k = X^i ∂_i Y^k − Y^i ∂_i X^k`.
pub fn lie_bracket(x: &VectorField, y: &VectorField, coords: &[String]) -> VectorField {
    let n = coords.len();
    let mut xy = vec![Vec::with_capacity(n); n];
    let mut yx = vec![Vec::with_capacity(n); n];
    for (i, c) in coords.iter().enumerate() {
        let mut cache = DiffCache::new(c);
        for k in 0..n {
            if !x.component(i).is_zero() {
                xy[k].push(x.component(i) * cache.diff(y.component(k)));
            }
            if !y.component(i).is_zero() {
                yx[k].push(y.component(i) * cache.diff(x.component(k)));
            }
        }
    }
    VectorField::new(
        (0..n)
            .map(|k| ScalarExpr::sum(xy[k].drain(..)) - ScalarExpr::sum(yx[k].drain(..)))
            .collect(),
    )
}

fn form_degree(w: &TensorField) -> usize {
    assert!(w.slots().iter().all(|s| *s == Slot::Down), "forms have covariant slots only");
    w.rank()
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Exterior derivative of a 0-, 1- or 2-form.
pub fn exterior_derivative(
    w: &TensorField,
    coords: &[String],
    conv: DerivativeConvention,
) -> Result<TensorField, GeometryError> {
    let k = form_degree(w);
    if k > 2 {
        return Err(GeometryError::UnsupportedDegree(k));
    }
    let n = coords.len();
    let mut caches: Vec<DiffCache> = coords.iter().map(|c| DiffCache::new(c)).collect();
    // partial[m][flat] = ∂_m of component `flat`
    let partial: Vec<Vec<ScalarExpr>> =
        caches.iter_mut().map(|c| w.components().iter().map(|e| c.diff(e)).collect()).collect();
    let scale = match conv {
        DerivativeConvention::Half => ScalarExpr::ratio(1, k as i64 + 1),
        DerivativeConvention::Plain => ScalarExpr::one(),
    };
    let mut rest = vec![0usize; k];
    let out = TensorField::from_fn(vec![Slot::Down; k + 1], n, |idx| {
        // Σ_j (-1)^j ∂_{i_j} ω(i_0, .., î_j, .., i_k)
        let terms: Vec<ScalarExpr> = (0..=k)
            .map(|j| {
                let mut r = 0;
                for (s, &i) in idx.iter().enumerate() {
                    if s != j {
                        rest[r] = i;
                        r += 1;
                    }
                }
                let flat = rest.iter().fold(0, |acc, &i| acc * n + i);
                let t = partial[idx[j]][flat].clone();
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .collect();
        &scale * ScalarExpr::sum(terms)
    });
    Ok(out)
}

/// Wedge product of a 1-form with a 1- or 2-form.
pub fn wedge(a: &TensorField, b: &TensorField, conv: WedgeConvention) -> Result<TensorField, GeometryError> {
    let (p, q) = (form_degree(a), form_degree(b));
    let n = a.dim();
    if p != 1 || !(1..=2).contains(&q) || p + q > n {
        return Err(GeometryError::DegreeOverflow(p, q));
    }
    let scale = match conv {
        WedgeConvention::Determinant => ScalarExpr::one(),
        WedgeConvention::Alternation => ScalarExpr::ratio(factorial(p) * factorial(q), factorial(p + q)),
    };
    let out = TensorField::from_fn(vec![Slot::Down; p + q], n, |idx| {
        let terms: Vec<ScalarExpr> = if q == 1 {
            vec![a.get(&[idx[0]]) * b.get(&[idx[1]]), -(a.get(&[idx[1]]) * b.get(&[idx[0]]))]
        } else {
            // cyclic sum over the three slots
            let (x, y, z) = (idx[0], idx[1], idx[2]);
            vec![a.get(&[x]) * b.get(&[y, z]), a.get(&[y]) * b.get(&[z, x]), a.get(&[z]) * b.get(&[x, y])]
        };
        &scale * ScalarExpr::sum(terms)
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn coordinate_fields_commute() {
        let b = lie_bracket(&VectorField::coordinate(0, 3), &VectorField::coordinate(1, 3), &xyz());
        assert!(b.is_structurally_zero());
    }

    #[test]
    fn d_of_x_dy_under_both_conventions() {
        let x = ScalarExpr::coord("x");
        let w = TensorField::one_form(vec![ScalarExpr::zero(), x, ScalarExpr::zero()]);
        let half = exterior_derivative(&w, &xyz(), DerivativeConvention::Half).unwrap();
        assert_eq!(*half.get(&[0, 1]), ScalarExpr::ratio(1, 2));
        assert_eq!(*half.get(&[1, 0]), ScalarExpr::ratio(-1, 2));
        let plain = exterior_derivative(&w, &xyz(), DerivativeConvention::Plain).unwrap();
        assert_eq!(*plain.get(&[0, 1]), ScalarExpr::one());
        assert!(plain.get(&[0, 2]).is_zero());
    }

    #[test]
    fn wedge_normalisations() {
        let dx = TensorField::one_form(vec![ScalarExpr::one(), ScalarExpr::zero(), ScalarExpr::zero()]);
        let dy = TensorField::one_form(vec![ScalarExpr::zero(), ScalarExpr::one(), ScalarExpr::zero()]);
        let det = wedge(&dx, &dy, WedgeConvention::Determinant).unwrap();
        assert_eq!(*det.get(&[0, 1]), ScalarExpr::one());
        let alt = wedge(&dx, &dy, WedgeConvention::Alternation).unwrap();
        assert_eq!(*alt.get(&[0, 1]), ScalarExpr::ratio(1, 2));
        let dxdx = wedge(&dx, &dx, WedgeConvention::Determinant).unwrap();
        assert!(dxdx.components().iter().all(ScalarExpr::is_zero));
    }

    #[test]
    fn degree_limits() {
        let dx = TensorField::one_form(vec![ScalarExpr::one(), ScalarExpr::zero()]);
        let two = wedge(&dx, &dx, WedgeConvention::Determinant).unwrap();
        assert_eq!(wedge(&dx, &two, WedgeConvention::Determinant).unwrap_err(), GeometryError::DegreeOverflow(1, 2));
        let c = ["x", "y"].iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let three = TensorField::zeros(vec![Slot::Down; 3], 2);
        assert_eq!(
            exterior_derivative(&three, &c, DerivativeConvention::Half).unwrap_err(),
            GeometryError::UnsupportedDegree(3)
        );
    }
}
