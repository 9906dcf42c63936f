use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::{Func, Node, ScalarExpr, SymbolRole};

/// Parameter values, ordered by name.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("point has {got} coordinates, expected {expected}")]
    PointSize { expected: usize, got: usize },
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Coord(usize),
    Add(Vec<usize>),
    Mul(Vec<usize>),
    PowI(usize, i32),
    PowR { base: usize, exp: f64, odd_denominator: bool, numer_odd: bool },
    Func(Func, usize),
}

/// A set of expressions lowered to a flat instruction tape.
///
/// Shared and structurally equal subtrees are evaluated once per point.
/// Parameters are substituted at compile time.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    dim: usize,
}

struct Builder<'a> {
    coords: &'a [String],
    bindings: &'a Bindings,
    ops: Vec<Op>,
    by_ptr: HashMap<usize, usize>,
    by_structure: HashMap<u64, Vec<(ScalarExpr, usize)>>,
}

impl Builder<'_> {
    fn lower(&mut self, e: &ScalarExpr) -> Result<usize, EvalError> {
        if let Some(&slot) = self.by_ptr.get(&e.ptr_key()) {
            return Ok(slot);
        }
        if let Some(bucket) = self.by_structure.get(&e.structural_hash()) {
            if let Some((_, slot)) = bucket.iter().find(|(x, _)| x == e) {
                let slot = *slot;
                self.by_ptr.insert(e.ptr_key(), slot);
                return Ok(slot);
            }
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(c.to_f64().unwrap_or(f64::NAN)),
            Node::Symbol(name, SymbolRole::Coordinate) => {
                let i = self
                    .coords
                    .iter()
                    .position(|c| c.as_str() == &**name)
                    .ok_or_else(|| EvalError::UnknownCoordinate(name.to_string()))?;
                Op::Coord(i)
            }
            Node::Symbol(name, SymbolRole::Parameter) => {
                let v = self.bindings.get(&**name).ok_or_else(|| EvalError::Unbound(name.to_string()))?;
                Op::Const(*v)
            }
            Node::Add(ts) => Op::Add(ts.iter().map(|t| self.lower(t)).collect::<Result<_, _>>()?),
            Node::Mul(ts) => Op::Mul(ts.iter().map(|t| self.lower(t)).collect::<Result<_, _>>()?),
            Node::Pow(b, k) => {
                let base = self.lower(b)?;
                match (k.denom() == &1.into(), k.to_i32()) {
                    (true, Some(n)) => Op::PowI(base, n),
                    _ => {
                        let denom_odd = k.denom() % 2u32 == 1.into();
                        let numer_odd = k.numer().abs() % 2u32 == 1.into();
                        Op::PowR { base, exp: k.to_f64().unwrap_or(f64::NAN), odd_denominator: denom_odd, numer_odd }
                    }
                }
            }
            Node::Func(f, a) => Op::Func(*f, self.lower(a)?),
        };
        let slot = self.ops.len();
        self.ops.push(op);
        self.by_ptr.insert(e.ptr_key(), slot);
        self.by_structure.entry(e.structural_hash()).or_default().push((e.clone(), slot));
        Ok(slot)
    }
}

impl Compiled {
    pub fn new(exprs: &[ScalarExpr], coords: &[String], bindings: &Bindings) -> Result<Compiled, EvalError> {
        let mut b = Builder {
            coords,
            bindings,
            ops: Vec::new(),
            by_ptr: HashMap::new(),
            by_structure: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| b.lower(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(Compiled { ops: b.ops, outputs, dim: coords.len() })
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn tape_len(&self) -> usize {
        self.ops.len()
    }

    /// Evaluates every output at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::PointSize { expected: self.dim, got: point.len() });
        }
        let mut vals = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Coord(i) => point[*i],
                Op::Add(ts) => ts.iter().map(|&t| vals[t]).sum(),
                Op::Mul(ts) => ts.iter().map(|&t| vals[t]).product(),
                Op::PowI(b, n) => {
                    let x: f64 = vals[*b];
                    if x == 0.0 && *n < 0 {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    x.powi(*n)
                }
                Op::PowR { base, exp, odd_denominator, numer_odd } => {
                    let x: f64 = vals[*base];
                    if x == 0.0 && *exp < 0.0 {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    if x < 0.0 {
                        if !odd_denominator {
                            return Err(EvalError::Domain(format!("rational power {exp} of negative value {x}")));
                        }
                        let m = (-x).powf(*exp);
                        if *numer_odd {
                            -m
                        } else {
                            m
                        }
                    } else {
                        x.powf(*exp)
                    }
                }
                Op::Func(f, a) => {
                    let x: f64 = vals[*a];
                    match f {
                        Func::Exp => x.exp(),
                        Func::Log => {
                            if x <= 0.0 {
                                return Err(EvalError::Domain(format!("log of non-positive value {x}")));
                            }
                            x.ln()
                        }
                        Func::Sin => x.sin(),
                        Func::Cos => x.cos(),
                        Func::Sinh => x.sinh(),
                        Func::Cosh => x.cosh(),
                        Func::Sqrt => {
                            if x < 0.0 {
                                return Err(EvalError::Domain(format!("sqrt of negative value {x}")));
                            }
                            x.sqrt()
                        }
                    }
                }
            };
            vals.push(v);
        }
        let out: Vec<f64> = self.outputs.iter().map(|&i| vals[i]).collect();
        if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
            return Err(EvalError::Domain(format!("non-finite value {bad}")));
        }
        Ok(out)
    }
}

impl ScalarExpr {
    /// Evaluates at a point given as coordinate values in `coords` order.
    pub fn evaluate(&self, coords: &[String], point: &[f64], params: &Bindings) -> Result<f64, EvalError> {
        Ok(Compiled::new(std::slice::from_ref(self), coords, params)?.eval(point)?[0])
    }
}
