use nalgebra::{DMatrix, DVector};

use super::trace::{dedup_sorted, stacked};
use super::{Region, ZeroMap};
use crate::activation::Activation;
use crate::linalg;
use crate::model::{ParamPoint, SampleSet};
use crate::symmetry::probe_points;

/// Largest stacked residual accepted for a common zero.
pub(crate) const ZERO_TOL: f64 = 1e-8;

/// Euclidean norm of `(τ(w), ∇τ(w))`.
pub(crate) fn stacked_residual(map: &ZeroMap, w: &[f64]) -> f64 {
    stacked(map, w).0.norm()
}

/// Euclidean norm of `(τ(w), ∇τ(w))` for the residuals of `θ`; zero exactly
/// when a zero-output neuron with input weight `w` would feel no gradient.
pub fn zero_residual(theta: &ParamPoint, samples: &SampleSet, activation: &Activation, w: &[f64]) -> f64 {
    stacked_residual(&ZeroMap::new(activation, theta, samples), w)
}

/// Common zeros of `τ` and the `d` components of `∇τ` inside `region`.
///
/// Gauss-Newton with step halving is started from `budget` quasi-random
/// points of the box. Converged points with stacked residual `≤ 1e-8` are
/// kept, merged when closer than `1e-6` and returned sorted. When every
/// residual of `θ` vanishes all of weight space qualifies and the start
/// points themselves are returned.
pub fn common_zero_search(
    theta: &ParamPoint,
    samples: &SampleSet,
    activation: &Activation,
    region: &Region,
    budget: usize,
) -> Vec<Vec<f64>> {
    let map = ZeroMap::new(activation, theta, samples);
    let d = region.dim();
    let starts: Vec<Vec<f64>> = probe_points(d, budget.max(1), 1.0)
        .into_iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(t, u)| {
                    let (lo, hi) = (region.lo()[t], region.hi()[t]);
                    lo + (u + 1.0) * 0.5 * (hi - lo)
                })
                .collect()
        })
        .collect();
    if map.all_zero() {
        return dedup_sorted(starts);
    }
    let slack = 1e-9 * (1.0 + region.diameter());
    let found: Vec<Vec<f64>> = starts
        .into_iter()
        .filter_map(|s| gauss_newton(&map, region, s))
        .filter(|w| region.contains(w, slack))
        .collect();
    dedup_sorted(found)
}

/// Smooth size of the terms summed in `(τ, ∇τ)`.
fn term_scale(map: &ZeroMap, w: &[f64]) -> f64 {
    map.samples
        .x()
        .iter()
        .zip(&map.e)
        .map(|(x, e)| {
            let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            let xx: f64 = x.iter().map(|v| v * v).sum();
            e * e * (map.act.eval(z).powi(2) + map.act.d1(z).powi(2) * xx)
        })
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE)
}

/// `(τ, ∇τ)` divided by [`term_scale`]. Shrinking every term at once (for
/// `exp`, sending a weight to `-∞`) does not reduce it, so the iteration
/// heads for genuine zeros.
fn normalized(map: &ZeroMap, w: &[f64]) -> DVector<f64> {
    stacked(map, w).0 / term_scale(map, w)
}

fn normalized_jacobian(map: &ZeroMap, w: &[f64]) -> DMatrix<f64> {
    let d = w.len();
    let mut jac = DMatrix::zeros(d + 1, d);
    for t in 0..d {
        let h = 1e-6 * (1.0 + w[t].abs());
        let mut up = w.to_vec();
        let mut down = w.to_vec();
        up[t] += h;
        down[t] -= h;
        let col = (normalized(map, &up) - normalized(map, &down)) / (2.0 * h);
        jac.set_column(t, &col);
    }
    jac
}

fn gauss_newton(map: &ZeroMap, region: &Region, mut w: Vec<f64>) -> Option<Vec<f64>> {
    let mut g = normalized(map, &w);
    let mut merit = g.norm();
    for _ in 0..100 {
        if stacked(map, &w).0.norm() <= 1e-14 {
            break;
        }
        let step = linalg::pinv_solve(&normalized_jacobian(map, &w), &g, 1e-10);
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = w
                .iter()
                .zip(step.iter())
                .enumerate()
                .map(|(t, (a, b))| (a - scale * b).clamp(region.lo()[t], region.hi()[t]))
                .collect();
            let gt = normalized(map, &trial);
            let mt = gt.norm();
            if mt.is_finite() && mt < merit {
                w = trial;
                g = gt;
                merit = mt;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (stacked(map, &w).0.norm() <= ZERO_TOL).then_some(w)
}
