//! Permutations of neurons, interval partitions, splitting vectors and the
//! pairwise linear-dependence rule for neurons `σ(w·x)`.
//!
//! All indices are zero-based. A [`Partition`] with cuts `t_0 < ... < t_r`
//! splits the slots `0..t_r` into the intervals `t_{j}..t_{j+1}`; the last
//! slot of each interval holds its representative.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::activation::{Activation, Parity};
use crate::error::{invalid, Result};
use crate::linalg;
use crate::model::{dot, ParamPoint};

/// Max-norm tolerance for deciding that two input weights coincide.
pub const WEIGHT_TOL: f64 = 1e-9;

/// A bijection of `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return invalid(format!("{map:?} is not a permutation"));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(m: usize) -> Self {
        Self { map: (0..m).collect() }
    }

    /// The transposition of `i` and `j`.
    pub fn swap(m: usize, i: usize, j: usize) -> Self {
        let mut map: Vec<usize> = (0..m).collect();
        map.swap(i, j);
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &v)| k == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v] = k;
        }
        Self { map: inv }
    }

    /// The permutation whose action equals acting by `other` first and then
    /// by `self`: `act(&p.compose(&q), θ) == act(&p, &act(&q, θ))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { map: self.map.iter().map(|&k| other.map[k]).collect() }
    }

    /// Reorders any slice the way [`act`] reorders neurons.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.map.iter().map(|&k| items[k].clone()).collect()
    }
}

/// Permutation action on parameter points: neuron `k` of the result is
/// neuron `π(k)` of `theta`.
pub fn act(pi: &Permutation, theta: &ParamPoint) -> Result<ParamPoint> {
    if pi.len() != theta.width() {
        return invalid(format!("permutation of {} elements acting on width {}", pi.len(), theta.width()));
    }
    if theta.width() == 0 {
        return Ok(theta.clone());
    }
    ParamPoint::new(pi.apply(theta.a()), pi.apply(theta.w()))
}

/// Cut sequence `0 = t_0 < t_1 < ... < t_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    cuts: Vec<usize>,
}

impl Partition {
    pub fn new(cuts: Vec<usize>) -> Result<Self> {
        if cuts.first() != Some(&0) {
            return invalid(format!("partition {cuts:?} must start at 0"));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("partition {cuts:?} is not strictly increasing"));
        }
        Ok(Self { cuts })
    }

    /// Builds the partition whose intervals have the given lengths.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        let mut cuts = vec![0];
        for &len in lengths {
            cuts.push(cuts.last().unwrap() + len);
        }
        Self::new(cuts)
    }

    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    /// Number of intervals `r`.
    pub fn num_intervals(&self) -> usize {
        self.cuts.len() - 1
    }

    /// `t_r`, the number of slots covered.
    pub fn total(&self) -> usize {
        *self.cuts.last().unwrap()
    }

    pub fn interval(&self, j: usize) -> Range<usize> {
        self.cuts[j]..self.cuts[j + 1]
    }

    pub fn interval_len(&self, j: usize) -> usize {
        self.cuts[j + 1] - self.cuts[j]
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.cuts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Slot of the representative of interval `j` (its last slot).
    pub fn representative(&self, j: usize) -> usize {
        self.cuts[j + 1] - 1
    }

    /// Index of the interval containing `slot`, if any.
    pub fn interval_of(&self, slot: usize) -> Option<usize> {
        (0..self.num_intervals()).find(|&j| self.interval(j).contains(&slot))
    }
}

/// Splitting coefficients `Δ(P)`; the entries of each interval sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    values: Vec<f64>,
}

impl DeltaVector {
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(values: Vec<f64>, partition: &Partition) -> Result<Self> {
        if values.len() != partition.total() {
            return invalid(format!(
                "splitting vector has {} entries, partition covers {}",
                values.len(),
                partition.total()
            ));
        }
        for j in 0..partition.num_intervals() {
            let s: f64 = values[partition.interval(j)].iter().sum();
            if (s - 1.0).abs() > Self::SUM_TOL {
                return invalid(format!("interval {j} of the splitting vector sums to {s}, not 1"));
            }
        }
        Ok(Self { values })
    }

    /// Equal split `1/len` inside every interval.
    pub fn uniform(partition: &Partition) -> Self {
        let mut values = Vec::with_capacity(partition.total());
        for len in partition.lengths() {
            values.extend(std::iter::repeat_n(1.0 / len as f64, len));
        }
        Self { values }
    }

    /// All mass on the representative slot of every interval.
    pub fn concentrated(partition: &Partition) -> Self {
        let mut values = vec![0.0; partition.total()];
        for j in 0..partition.num_intervals() {
            values[partition.representative(j)] = 1.0;
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Index map `I: {0..l} → {0..r}` choosing which reduced input weight each
/// zero-output neuron copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap {
    map: Vec<usize>,
}

impl IndexMap {
    pub fn new(map: Vec<usize>, r: usize) -> Result<Self> {
        if let Some(bad) = map.iter().find(|&&i| i >= r) {
            return invalid(format!("index map value {bad} out of range for r = {r}"));
        }
        Ok(Self { map })
    }

    /// Every trailing neuron copies reduced neuron `target`.
    pub fn constant(l: usize, target: usize) -> Self {
        Self { map: vec![target; l] }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, j: usize) -> usize {
        self.map[j]
    }
}

fn max_abs_diff(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - sign * y).abs()).fold(0.0, f64::max)
}

pub(crate) fn is_zero_weight(w: &[f64]) -> bool {
    w.iter().all(|v| v.abs() <= WEIGHT_TOL)
}

/// Whether `σ(w·x)` is the zero function.
pub fn is_zero_neuron(w: &[f64], act: &Activation) -> bool {
    act.zero_at_zero() && is_zero_weight(w)
}

/// Coefficient `c` with `σ(w·x) = c·σ(rep·x)` for all `x`, when the two
/// neurons are dependent; `0` for a zero neuron.
pub fn fold_coefficient(w: &[f64], rep: &[f64], act: &Activation) -> Option<f64> {
    if is_zero_neuron(w, act) {
        return Some(0.0);
    }
    if max_abs_diff(w, rep, 1.0) <= WEIGHT_TOL {
        return Some(1.0);
    }
    match act.reflection_sign() {
        Some(c) if max_abs_diff(w, rep, -1.0) <= WEIGHT_TOL => Some(c),
        _ => None,
    }
}

/// Whether the neurons `σ(w1·x)` and `σ(w2·x)` are linearly dependent.
///
/// Without parity the neurons are dependent exactly when the weights agree;
/// with odd or even `σ` also when they are opposite. When `σ(0) = 0` a zero
/// weight gives the zero function, which is dependent with anything.
pub fn pairwise_dependent(w1: &[f64], w2: &[f64], act: &Activation) -> bool {
    if act.zero_at_zero() && (is_zero_weight(w1) || is_zero_weight(w2)) {
        return true;
    }
    if max_abs_diff(w1, w2, 1.0) <= WEIGHT_TOL {
        return true;
    }
    act.parity() != Parity::None && max_abs_diff(w1, w2, -1.0) <= WEIGHT_TOL
}

/// Whether `{σ(w_k·x)}` is a linearly independent family of functions,
/// decided by checking every pair.
///
/// A lone zero neuron is the zero function and therefore dependent.
pub fn independent_family(ws: &[Vec<f64>], act: &Activation) -> bool {
    if ws.iter().any(|w| is_zero_neuron(w, act)) {
        return false;
    }
    for (i, wi) in ws.iter().enumerate() {
        for wj in &ws[i + 1..] {
            if pairwise_dependent(wi, wj, act) {
                return false;
            }
        }
    }
    true
}

/// Deterministic probe inputs in `[-radius, radius]^d` (Halton sequence).
pub fn probe_points(d: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    fn radical_inverse(mut i: u32, base: u32) -> f64 {
        let (mut f, mut out) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            out += f * (i % base) as f64;
            i /= base;
        }
        out
    }
    (1..=count as u32)
        .map(|i| {
            (0..d)
                .map(|t| radius * (2.0 * radical_inverse(i, PRIMES[t % PRIMES.len()]) - 1.0))
                .collect()
        })
        .collect()
}

/// Numerical rank of the sampled neurons `σ(w_k·x)` over `points`: singular
/// values of the `points × family` matrix above `rel_tol · σ_max`.
pub fn feature_rank(ws: &[Vec<f64>], act: &Activation, points: &[Vec<f64>], rel_tol: f64) -> usize {
    let f = DMatrix::from_fn(points.len(), ws.len(), |i, k| act.eval(dot(&ws[k], &points[i])));
    linalg::numeric_rank(&f, rel_tol)
}

/// All partitions of `mprime` slots into `r` non-empty intervals, in
/// lexicographic order of cuts.
pub fn enumerate_partitions(mprime: usize, r: usize) -> Result<Vec<Partition>> {
    if r == 0 {
        return if mprime == 0 {
            Ok(vec![Partition { cuts: vec![0] }])
        } else {
            invalid("r = 0 intervals cannot cover a positive number of slots")
        };
    }
    if r > mprime {
        return invalid(format!("cannot split {mprime} slots into {r} non-empty intervals"));
    }
    let mut out = Vec::new();
    let mut inner = Vec::with_capacity(r - 1);
    fn rec(start: usize, left: usize, mprime: usize, inner: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if left == 0 {
            let mut cuts = Vec::with_capacity(inner.len() + 2);
            cuts.push(0);
            cuts.extend_from_slice(inner);
            cuts.push(mprime);
            out.push(Partition { cuts });
            return;
        }
        for c in start..=(mprime - left) {
            inner.push(c);
            rec(c + 1, left - 1, mprime, inner, out);
            inner.pop();
        }
    }
    rec(1, r - 1, mprime, &mut inner, &mut out);
    Ok(out)
}

/// All ways to hand the slots `0..Σ sizes` to consecutive blocks of the
/// given sizes, ignoring the order inside each block. Each assignment is
/// returned as the permutation `π` with `π(k)` = the original slot placed at
/// position `k`, slots inside a block in increasing order.
pub fn block_assignments(sizes: &[usize]) -> Vec<Permutation> {
    let m: usize = sizes.iter().sum();
    let mut out = Vec::new();
    let mut used = vec![false; m];
    let mut current = Vec::with_capacity(m);
    fn rec(
        sizes: &[usize],
        block: usize,
        start: usize,
        filled: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        out: &mut Vec<Permutation>,
    ) {
        if block == sizes.len() {
            out.push(Permutation { map: current.clone() });
            return;
        }
        if filled == sizes[block] {
            rec(sizes, block + 1, 0, 0, used, current, out);
            return;
        }
        for s in start..used.len() {
            if !used[s] {
                used[s] = true;
                current.push(s);
                rec(sizes, block, s + 1, filled + 1, used, current, out);
                current.pop();
                used[s] = false;
            }
        }
    }
    rec(sizes, 0, 0, 0, &mut used, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn identity_and_swap_actions() {
        let theta = ParamPoint::new(vec![1.0, 2.0], vec![vec![0.5, 0.0], vec![-1.0, 3.0]]).unwrap();
        assert_eq!(act(&Permutation::identity(2), &theta).unwrap(), theta);
        let swapped = act(&Permutation::swap(2, 0, 1), &theta).unwrap();
        assert_eq!(swapped.a(), &[2.0, 1.0]);
        assert_eq!(swapped.w(), &[vec![-1.0, 3.0], vec![0.5, 0.0]]);
        assert!(act(&Permutation::identity(3), &theta).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.inverse().compose(&p).is_identity());
    }

    #[test]
    fn dependence_reference_cases() {
        let exp = Activation::exp();
        assert!(pairwise_dependent(&[1.0, 2.0], &[1.0, 2.0], &exp));
        assert!(!pairwise_dependent(&[1.0, 0.0], &[0.0, 1.0], &exp));
        assert!(!pairwise_dependent(&[1.0, 0.0], &[-1.0, 0.0], &exp));
        let tanh = Activation::tanh();
        assert!(pairwise_dependent(&[1.0, 0.0], &[-1.0, 0.0], &tanh));
        assert!(pairwise_dependent(&[0.0, 0.0], &[0.3, 0.7], &tanh));
        let expm1 = Activation::expm1();
        assert!(pairwise_dependent(&[0.0, 0.0], &[0.3, 0.7], &expm1));
        assert!(!pairwise_dependent(&[0.3, 0.7], &[-0.3, -0.7], &expm1));
        // the tolerance is absolute in the max-norm
        assert!(pairwise_dependent(&[1.0, 2.0], &[1.0 + 5e-10, 2.0], &exp));
        assert!(!pairwise_dependent(&[1.0, 2.0], &[1.0 + 5e-9, 2.0], &exp));
    }

    #[test]
    fn family_reference_cases() {
        let exp = Activation::exp();
        assert!(independent_family(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], &exp));
        assert!(!independent_family(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]], &exp));
        assert!(independent_family(&[vec![0.0, 0.0]], &exp));
        assert!(!independent_family(&[vec![0.0, 0.0]], &Activation::sin()));
    }

    #[test]
    fn partitions_small_cases() {
        let p = enumerate_partitions(3, 2).unwrap();
        assert_eq!(p.iter().map(|p| p.cuts().to_vec()).collect::<Vec<_>>(), vec![vec![0, 1, 3], vec![0, 2, 3]]);
        assert_eq!(enumerate_partitions(5, 1).unwrap()[0].cuts(), &[0, 5]);
        assert!(enumerate_partitions(2, 3).is_err());
        for m in 1..=8 {
            for r in 1..=m {
                assert_eq!(enumerate_partitions(m, r).unwrap().len(), binom(m - 1, r - 1));
            }
        }
        assert_eq!(enumerate_partitions(6, 3).unwrap().len(), 10);
    }

    #[test]
    fn partition_validation_and_accessors() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![0, 2, 2]).is_err());
        let p = Partition::from_lengths(&[2, 1, 3]).unwrap();
        assert_eq!(p.cuts(), &[0, 2, 3, 6]);
        assert_eq!(p.representative(2), 5);
        assert_eq!(p.interval_of(4), Some(2));
        assert_eq!(p.interval_of(6), None);
    }

    #[test]
    fn delta_vector_checks_interval_sums() {
        let p = Partition::new(vec![0, 2, 3]).unwrap();
        assert!(DeltaVector::new(vec![0.25, 0.75, 1.0], &p).is_ok());
        assert!(DeltaVector::new(vec![0.25, 0.5, 1.0], &p).is_err());
        assert!(DeltaVector::new(vec![1.0, 1.0], &p).is_err());
        assert_eq!(DeltaVector::uniform(&p).values(), &[0.5, 0.5, 1.0]);
        assert_eq!(DeltaVector::concentrated(&p).values(), &[0.0, 1.0, 1.0]);
        assert!(IndexMap::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn block_assignments_count_is_multinomial() {
        // 5! / (2! 1! 2!) = 30
        let perms = block_assignments(&[2, 1, 2]);
        assert_eq!(perms.len(), 30);
        let mut sorted = perms.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 30);
        assert!(perms[0].is_identity());
    }
}
