use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Bindings, Compiled, EvalError, Rational, ScalarExpr};

/// Minimum |value| every excluded expression must keep at a sample point.
pub const EXCLUSION_MARGIN: f64 = 1e-3;

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];
const MAX_DRAWS_PER_POINT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("coordinate `{0}` has an empty interval")]
    EmptyInterval(String),
    #[error("{coords} coordinates but {intervals} intervals")]
    Mismatch { coords: usize, intervals: usize },
    #[error("dimension {0} exceeds the supported maximum of 6")]
    TooLarge(usize),
    #[error("no admissible sample points (exclusions remove the whole domain)")]
    NoAdmissiblePoints,
    #[error("excluded expression cannot be evaluated: {0}")]
    Exclusion(EvalError),
}

/// A box of closed coordinate intervals minus neighbourhoods of the zero sets
/// of `excluded` expressions.
#[derive(Debug, Clone)]
pub struct Domain {
    coords: Vec<String>,
    intervals: Vec<(Rational, Rational)>,
    excluded: Vec<ScalarExpr>,
}

impl Domain {
    pub fn new(coords: Vec<String>, intervals: Vec<(Rational, Rational)>) -> Result<Domain, DomainError> {
        if coords.len() != intervals.len() {
            return Err(DomainError::Mismatch { coords: coords.len(), intervals: intervals.len() });
        }
        if coords.len() > HALTON_BASES.len() {
            return Err(DomainError::TooLarge(coords.len()));
        }
        for (c, (lo, hi)) in coords.iter().zip(&intervals) {
            if lo > hi {
                return Err(DomainError::EmptyInterval(c.clone()));
            }
        }
        Ok(Domain { coords, intervals, excluded: Vec::new() })
    }

    /// The cube `[lo, hi]^n` over the given coordinates.
    pub fn cube(coords: &[&str], lo: Rational, hi: Rational) -> Domain {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let intervals = vec![(lo, hi); coords.len()];
        Domain::new(coords, intervals).expect("valid cube")
    }

    pub fn with_exclusions(mut self, excluded: Vec<ScalarExpr>) -> Domain {
        self.excluded = excluded;
        self
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn intervals(&self) -> &[(Rational, Rational)] {
        &self.intervals
    }

    pub fn excluded(&self) -> &[ScalarExpr] {
        &self.excluded
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(&self.intervals).all(|(x, (lo, hi))| {
                *x >= lo.to_f64().unwrap_or(f64::NAN) && *x <= hi.to_f64().unwrap_or(f64::NAN)
            })
    }

    /// `n` deterministic quasi-uniform points: a Halton sequence with a
    /// seeded random shift, skipping points too close to an exclusion.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, DomainError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
        let bounds: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .map(|(lo, hi)| (lo.to_f64().unwrap_or(0.0), hi.to_f64().unwrap_or(0.0)))
            .collect();
        let guard = if self.excluded.is_empty() {
            None
        } else {
            Some(Compiled::new(&self.excluded, &self.coords, &Bindings::new()).map_err(DomainError::Exclusion)?)
        };

        let mut out = Vec::with_capacity(n);
        let mut index: u64 = 1;
        let mut draws = 0usize;
        while out.len() < n {
            if draws > MAX_DRAWS_PER_POINT * n.max(1) {
                return Err(DomainError::NoAdmissiblePoints);
            }
            draws += 1;
            let p: Vec<f64> = (0..self.dim())
                .map(|k| {
                    let u = (radical_inverse(index, HALTON_BASES[k]) + shift[k]).fract();
                    let (lo, hi) = bounds[k];
                    lo + (hi - lo) * u
                })
                .collect();
            index += 1;
            if let Some(guard) = &guard {
                match guard.eval(&p) {
                    Ok(vals) if vals.iter().all(|v| v.abs() >= EXCLUSION_MARGIN) => {}
                    _ => continue,
                }
            }
            out.push(p);
        }
        Ok(out)
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Sample count, tolerance and seed used by every sampled check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { points: 16, tol: 1e-9, seed: 42 }
    }
}

/// Outcome of comparing two expressions at sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityVerdict {
    pub equal: bool,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub worst_point: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Set when an evaluation error made the comparison meaningless.
    pub not_applicable: Option<String>,
}

/// Decides `a == b` by sampling: equal iff `max |a-b| / max(1, |a|, |b|) < tol`.
pub fn numeric_equal(
    a: &ScalarExpr,
    b: &ScalarExpr,
    dom: &Domain,
    opts: &SampleOptions,
    params: &Bindings,
) -> EqualityVerdict {
    let na = |reason: String| EqualityVerdict {
        equal: false,
        max_abs_residual: f64::NAN,
        max_rel_residual: f64::NAN,
        worst_point: Vec::new(),
        samples: 0,
        seed: opts.seed,
        not_applicable: Some(reason),
    };
    let points = match dom.sample(opts.points.max(1), opts.seed) {
        Ok(p) => p,
        Err(e) => return na(e.to_string()),
    };
    let tape = match Compiled::new(&[a.clone(), b.clone()], dom.coords(), params) {
        Ok(t) => t,
        Err(e) => return na(e.to_string()),
    };
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut worst = points[0].clone();
    for p in &points {
        let v = match tape.eval(p) {
            Ok(v) => v,
            Err(e) => return na(e.to_string()),
        };
        let diff = (v[0] - v[1]).abs();
        let rel = diff / 1f64.max(v[0].abs()).max(v[1].abs());
        max_abs = max_abs.max(diff);
        if rel > max_rel {
            max_rel = rel;
            worst = p.clone();
        }
    }
    EqualityVerdict {
        equal: max_rel < opts.tol,
        max_abs_residual: max_abs,
        max_rel_residual: max_rel,
        worst_point: worst,
        samples: points.len(),
        seed: opts.seed,
        not_applicable: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rational;

    fn dom() -> Domain {
        Domain::cube(&["x", "y", "z"], rational(-1, 1), rational(1, 1))
    }

    #[test]
    fn exp_product_equals_one() {
        let z = ScalarExpr::coord("z");
        let a = crate::expr::parse_expr("exp(z)*exp(-z)", &["x", "y", "z"], &[]).unwrap();
        let v = numeric_equal(&a, &ScalarExpr::one(), &dom(), &SampleOptions::default(), &Bindings::new());
        assert!(v.equal && v.max_abs_residual < 1e-15);
        let r = numeric_equal(&z, &z, &dom(), &SampleOptions::default(), &Bindings::new());
        assert!(r.equal);
        assert_eq!(r.max_abs_residual, 0.0);
    }

    #[test]
    fn small_offset_is_detected() {
        let z = ScalarExpr::coord("z");
        let shifted = &z + ScalarExpr::ratio(1, 1000);
        let opts = SampleOptions { tol: 1e-9, ..Default::default() };
        let v = numeric_equal(&z, &shifted, &dom(), &opts, &Bindings::new());
        assert!(!v.equal);
        assert!((v.max_abs_residual - 1e-3).abs() < 1e-12);
        assert!(dom().contains(&v.worst_point));
    }

    #[test]
    fn domain_errors_are_not_applicable() {
        let z = ScalarExpr::coord("z");
        let v = numeric_equal(&z.ln(), &z, &dom(), &SampleOptions::default(), &Bindings::new());
        assert!(v.not_applicable.is_some());
        assert!(!v.equal);
    }

    #[test]
    fn exclusions_keep_margin() {
        let z = ScalarExpr::coord("z");
        let d = Domain::cube(&["x", "y", "z"], rational(-1, 100), rational(1, 100)).with_exclusions(vec![z.clone()]);
        for p in d.sample(64, 7).unwrap() {
            assert!(p[2].abs() >= EXCLUSION_MARGIN);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(dom().sample(16, 42).unwrap(), dom().sample(16, 42).unwrap());
        assert_ne!(dom().sample(16, 42).unwrap(), dom().sample(16, 43).unwrap());
    }

    #[test]
    fn empty_interval_rejected() {
        let e = Domain::new(vec!["x".into()], vec![(rational(1, 1), rational(0, 1))]);
        assert_eq!(e.unwrap_err(), DomainError::EmptyInterval("x".into()));
    }
}
