//! Pointwise evaluation of many expressions through one compiled tape, and
//! residual bookkeeping for sampled identity checks.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::chart::{Chart, EvalContext, GeometryError};
use super::tensor::{unflatten, Slot, TensorField};
use crate::expr::{Bindings, Compiled, ScalarExpr};

/// Handle to a block of expressions registered in a [`Probe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Handle(usize);

/// Collects expressions, compiles them together and evaluates at points.
#[derive(Debug, Default, Clone)]
pub struct Probe {
    exprs: Vec<ScalarExpr>,
    ranges: Vec<Range<usize>>,
}

impl Probe {
    pub fn new() -> Probe {
        Probe::default()
    }

    pub fn add(&mut self, exprs: &[ScalarExpr]) -> Handle {
        let start = self.exprs.len();
        self.exprs.extend_from_slice(exprs);
        self.ranges.push(start..self.exprs.len());
        Handle(self.ranges.len() - 1)
    }

    pub fn add_one(&mut self, e: &ScalarExpr) -> Handle {
        self.add(std::slice::from_ref(e))
    }

    pub fn add_tensor(&mut self, t: &TensorField) -> Handle {
        self.add(t.components())
    }

    /// Evaluates every block at every point (in parallel over points).
    pub fn run(&self, coords: &[String], points: &[Vec<f64>], bindings: &Bindings) -> Result<Samples, GeometryError> {
        let tape = Compiled::new(&self.exprs, coords, bindings)?;
        let values = points.par_iter().map(|p| tape.eval(p)).collect::<Result<Vec<_>, _>>()?;
        Ok(Samples { ranges: self.ranges.clone(), points: points.to_vec(), values })
    }

    /// Samples the chart with the context options and evaluates.
    pub fn run_on(&self, chart: &Chart, ctx: &EvalContext) -> Result<Samples, GeometryError> {
        let points = chart.sample(&ctx.opts)?;
        self.run(chart.coords(), &points, &ctx.bindings)
    }
}

/// Evaluated blocks, one value vector per sample point.
#[derive(Debug, Clone)]
pub struct Samples {
    ranges: Vec<Range<usize>>,
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, p: usize) -> &[f64] {
        &self.points[p]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, p: usize, h: Handle) -> &[f64] {
        &self.values[p][self.ranges[h.0].clone()]
    }

    pub fn scalar(&self, p: usize, h: Handle) -> f64 {
        self.get(p, h)[0]
    }
}

/// Running maximum of residuals with the witness point.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    pub max_rel: f64,
    pub worst_point: Vec<f64>,
    pub samples: usize,
}

impl Default for Residual {
    fn default() -> Self {
        Residual { max_abs: 0.0, max_rel: 0.0, worst_point: Vec::new(), samples: 0 }
    }
}

impl Residual {
    pub fn new() -> Residual {
        Residual::default()
    }

    /// Records `|l - r| / max(1, |l|, |r|)`.
    pub fn record(&mut self, l: f64, r: f64, point: &[f64]) {
        let diff = (l - r).abs();
        let rel = diff / 1f64.max(l.abs()).max(r.abs());
        self.record_raw(diff, rel, point);
    }

    pub fn record_slices(&mut self, l: &[f64], r: &[f64], point: &[f64]) {
        for (a, b) in l.iter().zip(r) {
            self.record(*a, *b, point);
        }
    }

    /// Records a precomputed residual pair.
    pub fn record_raw(&mut self, abs: f64, rel: f64, point: &[f64]) {
        if self.worst_point.is_empty() {
            self.worst_point = point.to_vec();
        }
        self.max_abs = self.max_abs.max(abs);
        if rel > self.max_rel || rel.is_nan() {
            self.max_rel = if rel.is_nan() { f64::INFINITY } else { rel };
            self.worst_point = point.to_vec();
        }
    }

    pub fn merge(&mut self, other: &Residual) {
        if other.worst_point.is_empty() {
            return;
        }
        self.record_raw(other.max_abs, other.max_rel, &other.worst_point);
        self.samples = self.samples.max(other.samples);
    }

    pub fn below(&self, tol: f64) -> bool {
        self.max_rel < tol
    }
}

/// Coordinate basis vectors followed by `extra` seeded random vectors with
/// entries uniform in `[-1, 1]`.
pub fn test_vectors(dim: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|k| if i == k { 1.0 } else { 0.0 }).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..extra {
        out.push((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect());
    }
    out
}

/// Number of random arguments mixed into identity checks.
pub const RANDOM_ARGUMENTS: usize = 8;

/// Contracts every `Down` slot of a tensor's values with the given vectors
/// (in slot order) and returns the remaining `Up` components row-major.
pub fn contract(values: &[f64], slots: &[Slot], dim: usize, args: &[&[f64]]) -> Vec<f64> {
    let ups = slots.iter().filter(|s| **s == Slot::Up).count();
    let mut out = vec![0.0; dim.pow(ups as u32)];
    let mut idx = vec![0usize; slots.len()];
    for (flat, v) in values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        unflatten(flat, dim, &mut idx);
        let mut w = *v;
        let mut a = 0;
        let mut o = 0usize;
        for (s, &i) in slots.iter().zip(&idx) {
            match s {
                Slot::Down => {
                    w *= args[a][i];
                    a += 1;
                }
                Slot::Up => o = o * dim + i,
            }
        }
        out[o] += w;
    }
    out
}

/// Every tuple of `k` arguments drawn from `vectors`.
pub fn argument_tuples(vectors: &[Vec<f64>], k: usize) -> Vec<Vec<&[f64]>> {
    let mut tuples: Vec<Vec<&[f64]>> = vec![Vec::new()];
    for _ in 0..k {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                vectors.iter().map(move |v| {
                    let mut t = t.clone();
                    t.push(v.as_slice());
                    t
                })
            })
            .collect();
    }
    tuples
}

/// Compares two tensors of equal signature on the coordinate basis and
/// random arguments at every sample point.
pub fn compare_tensors(
    lhs: &TensorField,
    rhs: &TensorField,
    chart: &Chart,
    ctx: &EvalContext,
) -> Result<Residual, GeometryError> {
    assert_eq!(lhs.slots(), rhs.slots(), "compared tensors must share a signature");
    let mut probe = Probe::new();
    let hl = probe.add_tensor(lhs);
    let hr = probe.add_tensor(rhs);
    let samples = probe.run_on(chart, ctx)?;
    Ok(compare_sampled(&samples, hl, hr, lhs.slots(), chart.dim(), ctx.opts.seed))
}

/// The comparison step of [`compare_tensors`] on already evaluated samples.
pub fn compare_sampled(samples: &Samples, hl: Handle, hr: Handle, slots: &[Slot], dim: usize, seed: u64) -> Residual {
    let downs = slots.iter().filter(|s| **s == Slot::Down).count();
    let vectors = test_vectors(dim, RANDOM_ARGUMENTS, seed);
    let tuples = argument_tuples(&vectors, downs);
    let mut res = Residual::new();
    res.samples = samples.len();
    for p in 0..samples.len() {
        let (l, r) = (samples.get(p, hl), samples.get(p, hr));
        for t in &tuples {
            let cl = contract(l, slots, dim, t);
            let cr = contract(r, slots, dim, t);
            res.record_slices(&cl, &cr, samples.point(p));
        }
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_of_matrix() {
        // A = [[1,2],[3,4]] as (1,1): A(v) = A v
        let vals = [1.0, 2.0, 3.0, 4.0];
        let out = contract(&vals, &[Slot::Up, Slot::Down], 2, &[&[1.0, 1.0]]);
        assert_eq!(out, vec![3.0, 7.0]);
        let q = contract(&vals, &[Slot::Down, Slot::Down], 2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(q, vec![2.0]);
    }

    #[test]
    fn tuples_cover_all_combinations() {
        let v = test_vectors(3, 2, 1);
        assert_eq!(v.len(), 5);
        assert_eq!(argument_tuples(&v, 2).len(), 25);
        assert_eq!(argument_tuples(&v, 0).len(), 1);
    }
}
