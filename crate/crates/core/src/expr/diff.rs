use std::collections::HashMap;

use num_traits::One;

use super::{rational, Func, Node, Rational, ScalarExpr};

/// Memoised partial derivatives with respect to one symbol.
///
/// Curvature expressions share most of their subtrees, so differentiating a
/// whole tensor through one cache is linear in the size of the shared DAG.
pub struct DiffCache {
    var: String,
    memo: HashMap<usize, (ScalarExpr, ScalarExpr)>,
}

impl DiffCache {
    pub fn new(var: &str) -> Self {
        DiffCache { var: var.to_string(), memo: HashMap::new() }
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn diff(&mut self, e: &ScalarExpr) -> ScalarExpr {
        if let Some((_, d)) = self.memo.get(&e.ptr_key()) {
            return d.clone();
        }
        let d = match e.node() {
            Node::Const(_) => ScalarExpr::zero(),
            Node::Symbol(name, _) => {
                if **name == *self.var {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            Node::Add(ts) => {
                let parts: Vec<_> = ts.iter().map(|t| self.diff(t)).collect();
                ScalarExpr::sum(parts)
            }
            Node::Mul(fs) => {
                let derivs: Vec<_> = fs.iter().map(|f| self.diff(f)).collect();
                let mut terms = Vec::new();
                for (i, di) in derivs.iter().enumerate() {
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<ScalarExpr> = Vec::with_capacity(fs.len());
                    factors.push(di.clone());
                    factors.extend(fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, f)| f.clone()));
                    terms.push(ScalarExpr::product(factors));
                }
                ScalarExpr::sum(terms)
            }
            Node::Pow(b, k) => {
                let db = self.diff(b);
                if db.is_zero() {
                    ScalarExpr::zero()
                } else {
                    ScalarExpr::product([
                        ScalarExpr::constant(k.clone()),
                        ScalarExpr::pow(b, k - Rational::one()),
                        db,
                    ])
                }
            }
            Node::Func(f, a) => {
                let da = self.diff(a);
                if da.is_zero() {
                    ScalarExpr::zero()
                } else {
                    let outer = match f {
                        Func::Exp => e.clone(),
                        Func::Log => a.recip(),
                        Func::Sin => a.cos(),
                        Func::Cos => -a.sin(),
                        Func::Sinh => ScalarExpr::func(Func::Cosh, a),
                        Func::Cosh => ScalarExpr::func(Func::Sinh, a),
                        Func::Sqrt => ScalarExpr::product([ScalarExpr::constant(rational(1, 2)), e.recip()]),
                    };
                    outer * da
                }
            }
        };
        self.memo.insert(e.ptr_key(), (e.clone(), d.clone()));
        d
    }
}

/// Exact partial derivative of `e` with respect to the symbol `var`.
pub fn differentiate(e: &ScalarExpr, var: &str) -> ScalarExpr {
    DiffCache::new(var).diff(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_exp() {
        let z = ScalarExpr::coord("z");
        assert_eq!(differentiate(&z.exp(), "z"), z.exp());
        assert_eq!(differentiate(&(-&z).exp(), "z"), -(-&z).exp());
    }

    #[test]
    fn product_rule() {
        let x = ScalarExpr::coord("x");
        let y = ScalarExpr::coord("y");
        let e = x.powi(2) * y.sin();
        assert_eq!(differentiate(&e, "x"), ScalarExpr::int(2) * &x * y.sin());
    }

    #[test]
    fn parameters_are_constants_for_coordinates() {
        let a = ScalarExpr::param("alpha");
        let x = ScalarExpr::coord("x");
        assert_eq!(differentiate(&(&a * &x), "x"), a);
    }
}
