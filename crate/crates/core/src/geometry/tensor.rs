use crate::expr::{DiffCache, ScalarExpr};

/// Position of a tensor index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Contravariant (vector) index.
    Up,
    /// Covariant (form) index.
    Down,
}

/// A vector field given by its coordinate components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(Vec<ScalarExpr>);

impl VectorField {
    pub fn new(components: Vec<ScalarExpr>) -> VectorField {
        VectorField(components)
    }

    pub fn zero(dim: usize) -> VectorField {
        VectorField(vec![ScalarExpr::zero(); dim])
    }

    /// The coordinate field `∂_i`.
    pub fn coordinate(i: usize, dim: usize) -> VectorField {
        VectorField((0..dim).map(|k| if k == i { ScalarExpr::one() } else { ScalarExpr::zero() }).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.0
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        &self.0[i]
    }

    /// The directional derivative `X(f)`, given the partials of `f`.
    pub fn apply_grad(&self, partials: &[ScalarExpr]) -> ScalarExpr {
        ScalarExpr::sum(self.0.iter().zip(partials).map(|(a, b)| a * b))
    }

    /// The directional derivative `X(f)`.
    pub fn apply(&self, f: &ScalarExpr, coords: &[String]) -> ScalarExpr {
        let partials: Vec<_> = coords.iter().map(|c| DiffCache::new(c).diff(f)).collect();
        self.apply_grad(&partials)
    }

    pub fn scale(&self, s: &ScalarExpr) -> VectorField {
        VectorField(self.0.iter().map(|c| s * c).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.0.iter().all(ScalarExpr::is_zero)
    }
}

/// A tensor field with a variance signature and dense row-major components.
///
/// Index `(i_0, .., i_{k-1})` addresses the component whose slot `s` carries
/// coordinate index `i_s`. Forms use only `Down` slots; a (1,1) tensor `A`
/// with slots `[Up, Down]` has `A(∂_j) = A[k, j] ∂_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    slots: Vec<Slot>,
    dim: usize,
    comps: Vec<ScalarExpr>,
}

impl TensorField {
    pub fn zeros(slots: Vec<Slot>, dim: usize) -> TensorField {
        let n = dim.pow(slots.len() as u32);
        TensorField { slots, dim, comps: vec![ScalarExpr::zero(); n] }
    }

    pub fn from_fn(slots: Vec<Slot>, dim: usize, mut f: impl FnMut(&[usize]) -> ScalarExpr) -> TensorField {
        let rank = slots.len();
        let n = dim.pow(rank as u32);
        let mut comps = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        for flat in 0..n {
            unflatten(flat, dim, &mut idx);
            comps.push(f(&idx));
        }
        TensorField { slots, dim, comps }
    }

    pub fn from_components(slots: Vec<Slot>, dim: usize, comps: Vec<ScalarExpr>) -> TensorField {
        assert_eq!(comps.len(), dim.pow(slots.len() as u32), "component count does not match shape");
        TensorField { slots, dim, comps }
    }

    /// A scalar as a rank-0 tensor.
    pub fn scalar(value: ScalarExpr, dim: usize) -> TensorField {
        TensorField { slots: Vec::new(), dim, comps: vec![value] }
    }

    pub fn one_form(comps: Vec<ScalarExpr>) -> TensorField {
        let dim = comps.len();
        TensorField { slots: vec![Slot::Down], dim, comps }
    }

    /// A vector field as a rank-1 contravariant tensor.
    pub fn vector(v: &VectorField) -> TensorField {
        TensorField { slots: vec![Slot::Up], dim: v.dim(), comps: v.components().to_vec() }
    }

    /// Builds a two-slot tensor from a row-major matrix `m[a][b]`.
    pub fn from_matrix(slots: [Slot; 2], m: &[Vec<ScalarExpr>]) -> TensorField {
        let dim = m.len();
        TensorField::from_fn(slots.to_vec(), dim, |i| m[i[0]][i[1]].clone())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.comps
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &ScalarExpr {
        &self.comps[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: ScalarExpr) {
        let k = self.flat_index(idx);
        self.comps[k] = value;
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> TensorField {
        TensorField { slots: self.slots.clone(), dim: self.dim, comps: self.comps.iter().map(f).collect() }
    }

    pub fn scale(&self, s: &ScalarExpr) -> TensorField {
        self.map(|c| s * c)
    }

    pub fn add(&self, other: &TensorField) -> TensorField {
        assert_eq!(self.slots, other.slots, "variance mismatch");
        TensorField {
            slots: self.slots.clone(),
            dim: self.dim,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &TensorField) -> TensorField {
        self.add(&other.scale(&ScalarExpr::int(-1)))
    }

    /// Sum of several tensors with identical signature.
    pub fn sum<'a>(slots: Vec<Slot>, dim: usize, terms: impl IntoIterator<Item = &'a TensorField>) -> TensorField {
        let terms: Vec<&TensorField> = terms.into_iter().collect();
        let n = dim.pow(slots.len() as u32);
        let comps = (0..n).map(|k| ScalarExpr::sum(terms.iter().map(|t| t.comps[k].clone()))).collect();
        TensorField { slots, dim, comps }
    }

    /// The outer product `self ⊗ other`.
    pub fn tensor(&self, other: &TensorField) -> TensorField {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let comps = self
            .comps
            .iter()
            .flat_map(|a| other.comps.iter().map(move |b| a * b))
            .collect();
        TensorField { slots, dim: self.dim, comps }
    }

    /// Reorders slots: output slot `s` is input slot `perm[s]`.
    pub fn permute(&self, perm: &[usize]) -> TensorField {
        let slots: Vec<Slot> = perm.iter().map(|&p| self.slots[p]).collect();
        let mut src = vec![0usize; self.rank()];
        TensorField::from_fn(slots, self.dim, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src).clone()
        })
    }

    /// Row-major matrix of a two-slot tensor.
    pub fn as_matrix(&self) -> Vec<Vec<ScalarExpr>> {
        assert_eq!(self.rank(), 2, "as_matrix needs a two-slot tensor");
        (0..self.dim).map(|a| (0..self.dim).map(|b| self.get(&[a, b]).clone()).collect()).collect()
    }

    /// Value on coordinate-expressed vector arguments, one per `Down` slot;
    /// `Up` slots stay free. Only used for the all-`Down` case here.
    pub fn evaluate_on(&self, args: &[&VectorField]) -> ScalarExpr {
        assert!(self.slots.iter().all(|s| *s == Slot::Down) && args.len() == self.rank());
        let mut idx = vec![0usize; self.rank()];
        ScalarExpr::sum((0..self.comps.len()).map(|flat| {
            unflatten(flat, self.dim, &mut idx);
            let mut factors = vec![self.comps[flat].clone()];
            factors.extend(idx.iter().zip(args).map(|(&i, v)| v.component(i).clone()));
            ScalarExpr::product(factors)
        }))
    }
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// Symbolic square matrix helpers over expressions.
pub mod matrix {
    use crate::expr::ScalarExpr;

    pub type Matrix = Vec<Vec<ScalarExpr>>;

    pub fn identity(n: usize) -> Matrix {
        (0..n).map(|i| (0..n).map(|j| if i == j { ScalarExpr::one() } else { ScalarExpr::zero() }).collect()).collect()
    }

    fn minor(m: &[Vec<ScalarExpr>], row: usize, col: usize) -> Matrix {
        m.iter()
            .enumerate()
            .filter(|(i, _)| *i != row)
            .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
            .collect()
    }

    /// Determinant by cofactor expansion along the first row, skipping zeros.
    pub fn det(m: &[Vec<ScalarExpr>]) -> ScalarExpr {
        match m.len() {
            0 => ScalarExpr::one(),
            1 => m[0][0].clone(),
            2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
            n => ScalarExpr::sum((0..n).filter(|&j| !m[0][j].is_zero()).map(|j| {
                let c = &m[0][j] * det(&minor(m, 0, j));
                if j % 2 == 0 {
                    c
                } else {
                    -c
                }
            })),
        }
    }

    /// Classical adjugate: `adj[i][j] = (-1)^(i+j) det(minor(m, j, i))`.
    pub fn adjugate(m: &[Vec<ScalarExpr>]) -> Matrix {
        let n = m.len();
        if n == 1 {
            return vec![vec![ScalarExpr::one()]];
        }
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let d = det(&minor(m, j, i));
                        if (i + j) % 2 == 0 {
                            d
                        } else {
                            -d
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Exact inverse as adjugate over determinant; also returns the determinant.
    pub fn inverse(m: &[Vec<ScalarExpr>]) -> (Matrix, ScalarExpr) {
        let d = det(m);
        let inv_d = d.recip();
        let adj = adjugate(m);
        let inv = adj.into_iter().map(|row| row.into_iter().map(|x| &x * &inv_d).collect()).collect();
        (inv, d)
    }

    pub fn mul(a: &[Vec<ScalarExpr>], b: &[Vec<ScalarExpr>]) -> Matrix {
        let n = a.len();
        let m = b[0].len();
        (0..n)
            .map(|i| (0..m).map(|j| ScalarExpr::sum((0..b.len()).map(|k| &a[i][k] * &b[k][j]))).collect())
            .collect()
    }

    pub fn transpose(a: &[Vec<ScalarExpr>]) -> Matrix {
        let n = a.len();
        let m = a[0].len();
        (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::matrix;
    use super::*;

    #[test]
    fn det_and_inverse_of_diagonal_exponential() {
        let z = ScalarExpr::coord("z");
        let e = z.exp();
        let m = vec![
            vec![e.clone(), ScalarExpr::zero(), ScalarExpr::zero()],
            vec![ScalarExpr::zero(), -&e, ScalarExpr::zero()],
            vec![ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::one()],
        ];
        let (inv, d) = matrix::inverse(&m);
        assert_eq!(d, -(ScalarExpr::int(2) * &z).exp());
        assert_eq!(inv[0][0], (-&z).exp());
        assert_eq!(inv[1][1], -(-&z).exp());
        assert!(inv[0][1].is_zero());
    }

    #[test]
    fn permute_swaps_slots() {
        let x = ScalarExpr::coord("x");
        let t = TensorField::from_fn(vec![Slot::Up, Slot::Down], 2, |i| {
            if i == [0, 1] {
                x.clone()
            } else {
                ScalarExpr::zero()
            }
        });
        let p = t.permute(&[1, 0]);
        assert_eq!(p.slots(), &[Slot::Down, Slot::Up]);
        assert_eq!(*p.get(&[1, 0]), x);
        assert!(p.get(&[0, 1]).is_zero());
    }

    #[test]
    fn outer_product_shape() {
        let a = TensorField::one_form(vec![ScalarExpr::int(1), ScalarExpr::int(2)]);
        let b = TensorField::one_form(vec![ScalarExpr::int(3), ScalarExpr::int(5)]);
        let t = a.tensor(&b);
        assert_eq!(t.rank(), 2);
        assert_eq!(*t.get(&[1, 0]), ScalarExpr::int(6));
    }
}
