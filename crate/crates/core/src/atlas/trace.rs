use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Region, ZeroMap};
use crate::activation::Activation;
use crate::linalg;
use crate::model::{ParamPoint, SampleSet};

/// Largest `|τ|` accepted for a traced point.
pub const TRACE_TOL: f64 = 1e-8;

const DEDUP_DIST: f64 = 1e-6;

/// Numerical dimension of the zero set, or `Unknown` when no traced point
/// gives usable rank information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatedDim {
    Known(usize),
    Unknown,
}

impl EstimatedDim {
    pub fn known(self) -> Option<usize> {
        match self {
            EstimatedDim::Known(k) => Some(k),
            EstimatedDim::Unknown => None,
        }
    }
}

/// Sampled points of `M_{θ'}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldTrace {
    pub points: Vec<Vec<f64>>,
    /// `|τ(w)|` for each point.
    pub residuals: Vec<f64>,
    pub est_dim: EstimatedDim,
    /// All residuals of `θ'` vanish, so every `w` is a zero.
    pub entire_space: bool,
    /// Local dimension estimate at each point (`None` where undecided).
    pub local_dims: Vec<Option<usize>>,
}

impl ManifoldTrace {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && !self.entire_space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

/// Samples the zero set of `τ` inside `region`.
///
/// Axis-parallel lines through a grid are scanned. Sign changes of `τ` are
/// bisected; where `τ` keeps its sign but the directional derivative changes
/// sign the extremum is located, which catches zeros where `τ` only touches
/// zero. Each candidate is then polished by Newton projection and kept if
/// `|τ| ≤ TRACE_TOL`. About `budget` evaluations are spent on the scan.
pub fn trace_manifold(
    theta_r: &ParamPoint,
    samples: &SampleSet,
    activation: &Activation,
    region: &Region,
    budget: usize,
) -> ManifoldTrace {
    let map = ZeroMap::new(activation, theta_r, samples);
    let d = region.dim();
    if map.all_zero() {
        return ManifoldTrace {
            points: Vec::new(),
            residuals: Vec::new(),
            est_dim: EstimatedDim::Known(d),
            entire_space: true,
            local_dims: Vec::new(),
        };
    }

    let per_line = ((budget.max(1) as f64 / d as f64).powf(1.0 / d as f64).floor() as usize).max(8);
    let grids: Vec<Vec<f64>> = (0..d).map(|t| linspace(region.lo()[t], region.hi()[t], per_line)).collect();

    let mut candidates = Vec::new();
    for axis in 0..d {
        let others: Vec<usize> = (0..d).filter(|&t| t != axis).collect();
        let lines = per_line.pow(others.len() as u32);
        for line in 0..lines {
            let mut base = vec![0.0; d];
            let mut code = line;
            for &t in &others {
                base[t] = grids[t][code % per_line];
                code /= per_line;
            }
            scan_line(&map, &base, axis, &grids[axis], &mut candidates);
        }
    }

    let slack = 1e-9 * (1.0 + region.diameter());
    let mut points: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        let p = polish(&map, c);
        if map.value(&p).abs() <= TRACE_TOL && region.contains(&p, slack) {
            points.push(p);
        }
    }
    let points = dedup_sorted(points);
    let residuals: Vec<f64> = points.iter().map(|p| map.value(p).abs()).collect();
    let local_dims: Vec<Option<usize>> = points.iter().map(|p| local_dim(&map, p)).collect();
    let est_dim = local_dims.iter().flatten().max().map_or(EstimatedDim::Unknown, |&k| EstimatedDim::Known(k));
    ManifoldTrace { points, residuals, est_dim, entire_space: false, local_dims }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn scan_line(map: &ZeroMap, base: &[f64], axis: usize, grid: &[f64], out: &mut Vec<Vec<f64>>) {
    let at = |s: f64| {
        let mut w = base.to_vec();
        w[axis] = s;
        w
    };
    let f = |s: f64| map.value(&at(s));
    let g = |s: f64| map.grad(&at(s))[axis];

    let fs: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
    let gs: Vec<f64> = grid.iter().map(|&s| g(s)).collect();
    for k in 0..grid.len() {
        if fs[k] == 0.0 {
            out.push(at(grid[k]));
        }
        if k + 1 == grid.len() {
            break;
        }
        let (s0, s1) = (grid[k], grid[k + 1]);
        if fs[k] * fs[k + 1] < 0.0 {
            out.push(at(bisect(&f, s0, s1, fs[k])));
        } else if gs[k] * gs[k + 1] < 0.0 {
            let s = bisect(&g, s0, s1, gs[k]);
            let v = f(s);
            if v.abs() <= TRACE_TOL {
                out.push(at(s));
            } else if v * fs[k] < 0.0 {
                out.push(at(bisect(&f, s0, s, fs[k])));
                out.push(at(bisect(&f, s, s1, v)));
            }
        }
    }
}

/// Root of `f` in `[lo, hi]` given a sign change; `flo = f(lo)`.
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

fn is_regular(map: &ZeroMap, w: &[f64], grad: &[f64]) -> bool {
    norm(grad) > 1e-8 * (1.0 + map.grad_scale(w))
}

/// Newton projection onto `τ = 0`; at points where `∇τ` vanishes as well a
/// Gauss-Newton step on `(τ, ∇τ)` is used instead.
fn polish(map: &ZeroMap, mut w: Vec<f64>) -> Vec<f64> {
    let mut best = map.value(&w).abs();
    for _ in 0..30 {
        if best == 0.0 {
            break;
        }
        let g = map.grad(&w);
        let step: Vec<f64> = if is_regular(map, &w, &g) {
            let f = map.value(&w);
            let gg: f64 = g.iter().map(|v| v * v).sum();
            g.iter().map(|v| f * v / gg).collect()
        } else {
            let (f, jac) = stacked(map, &w);
            linalg::pinv_solve(&jac, &f, 1e-12).iter().copied().collect()
        };
        let trial: Vec<f64> = w.iter().zip(&step).map(|(a, b)| a - b).collect();
        let value = map.value(&trial).abs();
        if value.is_nan() || value >= best {
            break;
        }
        let moved = norm(&step);
        w = trial;
        best = value;
        if moved <= 1e-15 * (1.0 + norm(&w)) {
            break;
        }
    }
    w
}

/// `(τ, ∇τ)` and its Jacobian `[∇τᵀ; Hess τ]`.
pub(crate) fn stacked(map: &ZeroMap, w: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let d = w.len();
    let g = map.grad(w);
    let h = map.hess(w);
    let mut f = DVector::zeros(d + 1);
    let mut jac = DMatrix::zeros(d + 1, d);
    f[0] = map.value(w);
    for t in 0..d {
        f[t + 1] = g[t];
        jac[(0, t)] = g[t];
        for u in 0..d {
            jac[(t + 1, u)] = h[(t, u)];
        }
    }
    (f, jac)
}

/// `d - 1` at regular points. Where `∇τ` vanishes, the zero set near `w`
/// is governed by `Hess τ`: a semidefinite Hessian of rank `k` leaves a
/// `(d - k)`-dimensional set, an indefinite one a hypersurface.
fn local_dim(map: &ZeroMap, w: &[f64]) -> Option<usize> {
    let d = w.len();
    let g = map.grad(w);
    if is_regular(map, w, &g) {
        return Some(d - 1);
    }
    let eig = linalg::symmetric_eigen(&map.hess(w));
    let scale = eig.spectral_radius();
    if scale <= 1e-12 {
        return None;
    }
    let nonzero: Vec<f64> = eig.values.iter().copied().filter(|v| v.abs() > 1e-6 * scale).collect();
    let positive = nonzero.iter().any(|&v| v > 0.0);
    let negative = nonzero.iter().any(|&v| v < 0.0);
    if positive && negative {
        Some(d - 1)
    } else {
        Some(d - nonzero.len())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dedup_sorted(mut points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    points.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        let close = kept.iter().rev().take_while(|q| (q[0] - p[0]).abs() <= DEDUP_DIST).any(|q| {
            q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= DEDUP_DIST
        });
        if !close {
            kept.push(p);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_zero_set_is_the_first_axis() {
        let ex = fixtures::exp_four_samples();
        let region = Region::cube(2, -3.0, 3.0).unwrap();
        let trace = trace_manifold(&ex.theta, &ex.samples, &Activation::exp(), &region, 10_000);
        assert!(trace.len() >= 50, "{}", trace.len());
        for (p, r) in trace.points.iter().zip(&trace.residuals) {
            assert!(p[1].abs() <= 1e-8, "{p:?}");
            assert!(*r <= 1e-8);
        }
        assert_eq!(trace.est_dim, EstimatedDim::Known(1));
    }

    #[test]
    fn zero_residuals_give_the_whole_space() {
        let ex = fixtures::exp_four_samples();
        let act = Activation::exp();
        let y = ex.samples.x().iter().map(|x| ex.theta.output(&act, x)).collect();
        let samples = ex.samples.with_targets(y).unwrap();
        let region = Region::cube(2, -1.0, 1.0).unwrap();
        let trace = trace_manifold(&ex.theta, &samples, &act, &region, 100);
        assert!(trace.entire_space);
        assert!(!trace.is_empty());
    }

    #[test]
    fn odd_activation_hypersurface() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for act in [Activation::tanh(), Activation::sin()] {
            for d in 1..=3 {
                let p = fixtures::critical_instance(&mut rng, act, 1, d).unwrap();
                let region = Region::cube(d, -2.0, 2.0).unwrap();
                let trace = trace_manifold(&p.theta, &p.samples, &act, &region, 3000);
                // the origin is always a zero of τ for an odd activation
                assert!(!trace.is_empty());
                assert!(trace.residuals.iter().all(|r| *r <= TRACE_TOL));
                assert_eq!(trace.est_dim, EstimatedDim::Known(d - 1), "{} d={d}", act.name());
            }
        }
    }

    #[test]
    fn dedup_removes_near_copies() {
        let pts = vec![vec![0.0, 1.0], vec![1e-8, 1.0], vec![0.5, 0.0]];
        assert_eq!(dedup_sorted(pts).len(), 2);
    }
}
