//! Immutable symbolic scalar expressions over named coordinates.
//!
//! Expressions are shared trees (`Arc` nodes) with exact rational constants.
//! Every constructor applies a light normalisation: constant folding,
//! flattening of sums and products, merging of like terms and equal bases,
//! and folding of `exp` factors. This keeps curvature expressions small but
//! is not a canonical form; semantic equality is decided by
//! [`numeric_equal`], which samples both sides over a [`Domain`].

mod diff;
mod eval;
mod parse;
mod sample;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use diff::{differentiate, DiffCache};
pub use eval::{Bindings, Compiled, EvalError};
pub use parse::{parse_expr, ParseError};
pub use sample::{numeric_equal, Domain, DomainError, EqualityVerdict, SampleOptions};

/// Exact rational used for constants and exponents.
pub type Rational = BigRational;

/// Builds a rational from a numerator and denominator.
pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The closed set of unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Whether a symbol is read from the evaluation point or from the bindings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolRole {
    Coordinate,
    Parameter,
}

/// One node of an expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Rational),
    Symbol(Arc<str>, SymbolRole),
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Pow(ScalarExpr, Rational),
    Func(Func, ScalarExpr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// A symbolic scalar function of chart coordinates and named parameters.
///
/// Cloning is cheap (reference counted); expressions are `Send + Sync`.
#[derive(Clone)]
pub struct ScalarExpr(Arc<Inner>);

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

// FNV-style mixing; fixed so ordering (and printed output) is identical on every platform.
fn mix(h: u64, v: u64) -> u64 {
    let mut x = h ^ v.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn hash_bigint(h: u64, n: &BigInt) -> u64 {
    let (sign, digits) = n.to_u64_digits();
    let mut h = mix(h, sign as u64);
    for d in digits {
        h = mix(h, d);
    }
    h
}

fn hash_rational(h: u64, r: &Rational) -> u64 {
    hash_bigint(hash_bigint(h, r.numer()), r.denom())
}

fn hash_str(h: u64, s: &str) -> u64 {
    s.bytes().fold(mix(h, s.len() as u64), |acc, b| mix(acc, b as u64))
}

fn node_hash(node: &Node) -> u64 {
    match node {
        Node::Const(c) => hash_rational(1, c),
        Node::Symbol(name, role) => hash_str(mix(2, *role as u64), name),
        Node::Add(terms) => terms.iter().fold(3, |h, t| mix(h, t.0.hash)),
        Node::Mul(fs) => fs.iter().fold(4, |h, t| mix(h, t.0.hash)),
        Node::Pow(b, e) => hash_rational(mix(5, b.0.hash), e),
        Node::Func(f, a) => mix(mix(6, *f as u64), a.0.hash),
    }
}

fn rank(node: &Node) -> u8 {
    match node {
        Node::Const(_) => 0,
        Node::Symbol(..) => 1,
        Node::Pow(..) => 2,
        Node::Func(..) => 3,
        Node::Mul(_) => 4,
        Node::Add(_) => 5,
    }
}

fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Integer powers of constants are folded only below this exponent magnitude.
const MAX_FOLD_EXPONENT: i64 = 64;

impl ScalarExpr {
    fn raw(node: Node) -> ScalarExpr {
        let hash = node_hash(&node);
        ScalarExpr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub(crate) fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub(crate) fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: Rational) -> ScalarExpr {
        ScalarExpr::raw(Node::Const(c))
    }

    pub fn int(n: i64) -> ScalarExpr {
        ScalarExpr::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> ScalarExpr {
        ScalarExpr::constant(rational(n, d))
    }

    pub fn zero() -> ScalarExpr {
        ScalarExpr::int(0)
    }

    pub fn one() -> ScalarExpr {
        ScalarExpr::int(1)
    }

    pub fn coord(name: &str) -> ScalarExpr {
        ScalarExpr::raw(Node::Symbol(Arc::from(name), SymbolRole::Coordinate))
    }

    pub fn param(name: &str) -> ScalarExpr {
        ScalarExpr::raw(Node::Symbol(Arc::from(name), SymbolRole::Parameter))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Number of distinct nodes reachable from this expression.
    pub fn dag_size(&self) -> usize {
        fn walk(e: &ScalarExpr, seen: &mut HashMap<usize, ()>) {
            if seen.insert(e.ptr_key(), ()).is_some() {
                return;
            }
            match e.node() {
                Node::Const(_) | Node::Symbol(..) => {}
                Node::Add(ts) | Node::Mul(ts) => ts.iter().for_each(|t| walk(t, seen)),
                Node::Pow(b, _) | Node::Func(_, b) => walk(b, seen),
            }
        }
        let mut seen = HashMap::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Names of all symbols with the given role, sorted.
    pub fn symbols(&self, role: SymbolRole) -> Vec<String> {
        fn walk(e: &ScalarExpr, role: SymbolRole, seen: &mut HashMap<usize, ()>, out: &mut Vec<String>) {
            if seen.insert(e.ptr_key(), ()).is_some() {
                return;
            }
            match e.node() {
                Node::Const(_) => {}
                Node::Symbol(n, r) => {
                    if *r == role && !out.iter().any(|o| o.as_str() == &**n) {
                        out.push(n.to_string());
                    }
                }
                Node::Add(ts) | Node::Mul(ts) => ts.iter().for_each(|t| walk(t, role, seen, out)),
                Node::Pow(b, _) | Node::Func(_, b) => walk(b, role, seen, out),
            }
        }
        let mut out = Vec::new();
        walk(self, role, &mut HashMap::new(), &mut out);
        out.sort();
        out
    }

    /// Sum of terms with flattening, constant folding and like-term merging.
    pub fn sum<I: IntoIterator<Item = ScalarExpr>>(terms: I) -> ScalarExpr {
        let mut constant = Rational::zero();
        // (base, coefficient), keyed by structural hash.
        let mut groups: Vec<(ScalarExpr, Rational)> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();

        let mut push = |t: &ScalarExpr, constant: &mut Rational| {
            let (coef, base) = split_coefficient(t);
            match base {
                None => *constant += coef,
                Some(base) => {
                    let slot = index.entry(base.structural_hash()).or_default();
                    if let Some(&i) = slot.iter().find(|&&i| groups[i].0 == base) {
                        groups[i].1 += coef;
                    } else {
                        slot.push(groups.len());
                        groups.push((base, coef));
                    }
                }
            }
        };

        for t in terms {
            match t.node() {
                Node::Add(inner) => {
                    for s in inner {
                        push(s, &mut constant);
                    }
                }
                _ => push(&t, &mut constant),
            }
        }

        let mut out: Vec<ScalarExpr> = groups
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(b, c)| scale(c, b))
            .collect();
        if !constant.is_zero() {
            out.push(ScalarExpr::constant(constant));
        }
        match out.len() {
            0 => ScalarExpr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort_by_key(|t| (rank(t.node()), t.structural_hash()));
                ScalarExpr::raw(Node::Add(out))
            }
        }
    }

    /// Product of factors with flattening, constant folding, merging of equal
    /// bases (`b^p * b^q -> b^(p+q)`) and combination of `exp` factors.
    pub fn product<I: IntoIterator<Item = ScalarExpr>>(factors: I) -> ScalarExpr {
        let mut coef = Rational::one();
        let mut groups: Vec<(ScalarExpr, Rational)> = Vec::new();
        let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
        let mut exp_args: Vec<ScalarExpr> = Vec::new();

        fn absorb(
            f: &ScalarExpr,
            coef: &mut Rational,
            groups: &mut Vec<(ScalarExpr, Rational)>,
            index: &mut HashMap<u64, Vec<usize>>,
            exp_args: &mut Vec<ScalarExpr>,
        ) {
            match f.node() {
                Node::Const(c) => *coef *= c,
                Node::Mul(inner) => {
                    for g in inner {
                        absorb(g, coef, groups, index, exp_args);
                    }
                }
                Node::Func(Func::Exp, a) => exp_args.push(a.clone()),
                _ => {
                    let (base, e) = match f.node() {
                        Node::Pow(b, e) => (b.clone(), e.clone()),
                        _ => (f.clone(), Rational::one()),
                    };
                    let slot = index.entry(base.structural_hash()).or_default();
                    if let Some(&i) = slot.iter().find(|&&i| groups[i].0 == base) {
                        groups[i].1 += e;
                    } else {
                        slot.push(groups.len());
                        groups.push((base, e));
                    }
                }
            }
        }

        for f in factors {
            absorb(&f, &mut coef, &mut groups, &mut index, &mut exp_args);
            if coef.is_zero() {
                return ScalarExpr::zero();
            }
        }

        let mut out: Vec<ScalarExpr> = Vec::new();
        for (base, e) in groups {
            if e.is_zero() {
                continue;
            }
            let p = ScalarExpr::pow(&base, e);
            match p.node() {
                Node::Const(c) => coef *= c,
                Node::Mul(inner) => {
                    // integer powers of products distribute; re-absorb their pieces
                    for g in inner {
                        match g.node() {
                            Node::Const(c) => coef *= c,
                            _ => out.push(g.clone()),
                        }
                    }
                }
                Node::Func(Func::Exp, a) => exp_args.push(a.clone()),
                _ => out.push(p),
            }
        }
        if coef.is_zero() {
            return ScalarExpr::zero();
        }
        if !exp_args.is_empty() {
            let arg = ScalarExpr::sum(exp_args);
            if !arg.is_zero() {
                out.push(ScalarExpr::raw(Node::Func(Func::Exp, arg)));
            }
        }
        if out.is_empty() {
            return ScalarExpr::constant(coef);
        }
        out.sort_by_key(|t| (rank(t.node()), t.structural_hash()));
        if coef.is_one() && out.len() == 1 {
            return out.pop().unwrap();
        }
        if out.len() == 1 {
            // c * (a + b) -> c*a + c*b so that sums see their like terms
            if let Node::Add(terms) = out[0].node() {
                return ScalarExpr::sum(terms.iter().map(|t| {
                    let (k, base) = split_coefficient(t);
                    match base {
                        Some(b) => scale(&k * &coef, b),
                        None => ScalarExpr::constant(&k * &coef),
                    }
                }));
            }
        }
        if !coef.is_one() {
            out.insert(0, ScalarExpr::constant(coef));
        }
        ScalarExpr::raw(Node::Mul(out))
    }

    /// `base^exponent` for a rational exponent.
    pub fn pow(base: &ScalarExpr, exponent: Rational) -> ScalarExpr {
        if exponent.is_zero() {
            return ScalarExpr::one();
        }
        if exponent.is_one() {
            return base.clone();
        }
        match base.node() {
            Node::Const(c) => {
                if is_integer(&exponent) {
                    let k = exponent.to_integer();
                    if let Some(k) = k.to_i64() {
                        if k.abs() <= MAX_FOLD_EXPONENT && !(c.is_zero() && k < 0) {
                            return ScalarExpr::constant(rational_powi(c, k));
                        }
                    }
                } else if c.is_zero() && exponent.is_positive() {
                    return ScalarExpr::zero();
                } else if c.is_one() {
                    return ScalarExpr::one();
                } else if let Some(root) = exact_root(c, &exponent) {
                    return ScalarExpr::constant(root);
                }
                ScalarExpr::raw(Node::Pow(base.clone(), exponent))
            }
            Node::Pow(b, e) if is_integer(&exponent) => ScalarExpr::pow(b, e * exponent),
            Node::Mul(fs) if is_integer(&exponent) => {
                ScalarExpr::product(fs.iter().map(|f| ScalarExpr::pow(f, exponent.clone())))
            }
            Node::Func(Func::Exp, a) => {
                ScalarExpr::func(Func::Exp, &ScalarExpr::product([ScalarExpr::constant(exponent), a.clone()]))
            }
            _ => ScalarExpr::raw(Node::Pow(base.clone(), exponent)),
        }
    }

    pub fn powi(&self, k: i64) -> ScalarExpr {
        ScalarExpr::pow(self, Rational::from_integer(BigInt::from(k)))
    }

    pub fn recip(&self) -> ScalarExpr {
        self.powi(-1)
    }

    pub fn func(f: Func, arg: &ScalarExpr) -> ScalarExpr {
        if let Some(c) = arg.as_const() {
            if c.is_zero() {
                match f {
                    Func::Exp | Func::Cos | Func::Cosh => return ScalarExpr::one(),
                    Func::Sin | Func::Sinh | Func::Sqrt => return ScalarExpr::zero(),
                    Func::Log => {}
                }
            }
            if f == Func::Log && c.is_one() {
                return ScalarExpr::zero();
            }
            if f == Func::Sqrt {
                if let Some(root) = exact_root(c, &rational(1, 2)) {
                    return ScalarExpr::constant(root);
                }
            }
        }
        match (f, arg.node()) {
            (Func::Log, Node::Func(Func::Exp, inner)) => inner.clone(),
            _ => ScalarExpr::raw(Node::Func(f, arg.clone())),
        }
    }

    pub fn exp(&self) -> ScalarExpr {
        ScalarExpr::func(Func::Exp, self)
    }

    pub fn ln(&self) -> ScalarExpr {
        ScalarExpr::func(Func::Log, self)
    }

    pub fn sin(&self) -> ScalarExpr {
        ScalarExpr::func(Func::Sin, self)
    }

    pub fn cos(&self) -> ScalarExpr {
        ScalarExpr::func(Func::Cos, self)
    }

    pub fn sqrt(&self) -> ScalarExpr {
        ScalarExpr::func(Func::Sqrt, self)
    }

    /// Substitutes parameters by expressions (typically constants).
    pub fn substitute_params(&self, values: &HashMap<String, ScalarExpr>) -> ScalarExpr {
        fn walk(
            e: &ScalarExpr,
            values: &HashMap<String, ScalarExpr>,
            memo: &mut HashMap<usize, ScalarExpr>,
        ) -> ScalarExpr {
            if let Some(r) = memo.get(&e.ptr_key()) {
                return r.clone();
            }
            let out = match e.node() {
                Node::Const(_) => e.clone(),
                Node::Symbol(name, SymbolRole::Parameter) => {
                    values.get(&**name).cloned().unwrap_or_else(|| e.clone())
                }
                Node::Symbol(..) => e.clone(),
                Node::Add(ts) => ScalarExpr::sum(ts.iter().map(|t| walk(t, values, memo))),
                Node::Mul(ts) => ScalarExpr::product(ts.iter().map(|t| walk(t, values, memo))),
                Node::Pow(b, k) => ScalarExpr::pow(&walk(b, values, memo), k.clone()),
                Node::Func(f, a) => ScalarExpr::func(*f, &walk(a, values, memo)),
            };
            memo.insert(e.ptr_key(), out.clone());
            out
        }
        walk(self, values, &mut HashMap::new())
    }
}

fn rational_powi(c: &Rational, k: i64) -> Rational {
    let mut acc = Rational::one();
    let base = if k < 0 { c.recip() } else { c.clone() };
    for _ in 0..k.unsigned_abs() {
        acc *= &base;
    }
    acc
}

/// Exact value of `c^e` when numerator and denominator are perfect powers.
fn exact_root(c: &Rational, e: &Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let q = e.denom().to_u32()?;
    let p = e.numer().to_i64()?;
    if q > 16 || p.abs() > MAX_FOLD_EXPONENT {
        return None;
    }
    let num = c.numer().nth_root(q);
    let den = c.denom().nth_root(q);
    if num.pow(q) != *c.numer() || den.pow(q) != *c.denom() {
        return None;
    }
    let root = Rational::new(num, den);
    if root.is_zero() && p < 0 {
        return None;
    }
    Some(rational_powi(&root, p))
}

fn split_coefficient(t: &ScalarExpr) -> (Rational, Option<ScalarExpr>) {
    match t.node() {
        Node::Const(c) => (c.clone(), None),
        Node::Mul(fs) => match fs[0].node() {
            Node::Const(c) => {
                let rest = &fs[1..];
                let base = if rest.len() == 1 {
                    rest[0].clone()
                } else {
                    ScalarExpr::raw(Node::Mul(rest.to_vec()))
                };
                (c.clone(), Some(base))
            }
            _ => (Rational::one(), Some(t.clone())),
        },
        _ => (Rational::one(), Some(t.clone())),
    }
}

fn scale(c: Rational, base: ScalarExpr) -> ScalarExpr {
    if c.is_one() {
        return base;
    }
    let mut fs = vec![ScalarExpr::constant(c)];
    match base.node() {
        Node::Mul(inner) => fs.extend(inner.iter().cloned()),
        _ => fs.push(base),
    }
    ScalarExpr::raw(Node::Mul(fs))
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl From<Rational> for ScalarExpr {
    fn from(r: Rational) -> Self {
        ScalarExpr::constant(r)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl std::ops::$tr<&ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                let f: fn(&ScalarExpr, &ScalarExpr) -> ScalarExpr = $body;
                f(self, rhs)
            }
        }
        impl std::ops::$tr<ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                std::ops::$tr::$method(&self, &rhs)
            }
        }
        impl std::ops::$tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: &ScalarExpr) -> ScalarExpr {
                std::ops::$tr::$method(&self, rhs)
            }
        }
        impl std::ops::$tr<ScalarExpr> for &ScalarExpr {
            type Output = ScalarExpr;
            fn $method(self, rhs: ScalarExpr) -> ScalarExpr {
                std::ops::$tr::$method(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| ScalarExpr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| ScalarExpr::sum([a.clone(), -b]));
binop!(Mul, mul, |a, b| ScalarExpr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| ScalarExpr::product([a.clone(), b.recip()]));

impl std::ops::Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::product([ScalarExpr::int(-1), self.clone()])
    }
}

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_integer(r) && !r.is_negative() {
        write!(f, "{}", r.numer())
    } else if is_integer(r) {
        write!(f, "({})", r.numer())
    } else {
        write!(f, "({}/{})", r.numer(), r.denom())
    }
}

impl fmt::Display for ScalarExpr {
    /// Prints in the parser's grammar; `parse_expr(e.to_string())` is
    /// numerically equal to `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => fmt_rational(c, f),
            Node::Symbol(name, _) => write!(f, "{name}"),
            Node::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    let (coef, base) = split_coefficient(t);
                    let negative = coef.is_negative();
                    if i > 0 {
                        f.write_str(if negative { " - " } else { " + " })?;
                    } else if negative {
                        f.write_str("-")?;
                    }
                    let magnitude = coef.abs();
                    match base {
                        None => fmt_rational(&magnitude, f)?,
                        Some(b) if magnitude.is_one() => fmt_factor(&b, f)?,
                        Some(b) => {
                            fmt_rational(&magnitude, f)?;
                            f.write_str("*")?;
                            fmt_factor(&b, f)?;
                        }
                    }
                }
                Ok(())
            }
            Node::Mul(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    fmt_atom(x, f)?;
                }
                Ok(())
            }
            Node::Pow(b, e) => {
                fmt_atom(b, f)?;
                f.write_str("^")?;
                fmt_rational(e, f)
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

// A term printed after a +/- sign: products print bare, sums need parentheses.
fn fmt_factor(e: &ScalarExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Add(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

fn fmt_atom(e: &ScalarExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e.node() {
        Node::Symbol(..) | Node::Func(..) | Node::Const(_) => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}
