use nalgebra::DVector;

use super::{trace_manifold, ManifoldTrace, Region};
use crate::activation::Activation;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{self, NetworkSpec, ParamPoint, SampleSet};
use crate::operators::BranchId;
use crate::symmetry::{act, block_assignments, enumerate_partitions, Permutation};

const CRITICAL_TOL: f64 = 1e-8;

/// One piece `φ_{P,π}^{-1}(θ')` of the critical set, isometric to
/// `R^{t_r - r} × (M_{θ'})^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPiece {
    pub branch: BranchId,
    /// A member of the piece: each interval splits its output weight evenly.
    pub base: ParamPoint,
    /// The point of the closure with each interval's output weight
    /// concentrated on its representative slot.
    pub anchor: ParamPoint,
    /// `t_r - r`.
    pub free_affine_dim: usize,
    /// `l`.
    pub manifold_factors: usize,
    /// Input weights given to the `l` zero-output neurons, in slot order.
    pub manifold_weights: Vec<Vec<f64>>,
}

impl BranchPiece {
    /// Basis of the affine factor in flat coordinates of `base`: moving
    /// output weight from the representative of an interval to another slot
    /// of the same interval.
    pub fn free_directions(&self) -> Vec<DVector<f64>> {
        let p = self.branch.partition();
        let place = self.branch.perm().inverse();
        let n = self.base.to_flat().len();
        let mut out = Vec::with_capacity(self.free_affine_dim);
        for j in 0..p.num_intervals() {
            let rep = place.get(p.representative(j));
            for k in p.interval(j) {
                if k == p.representative(j) {
                    continue;
                }
                let mut v = DVector::zeros(n);
                v[self.base.a_slot(place.get(k))] = 1.0;
                v[self.base.a_slot(rep)] = -1.0;
                out.push(v);
            }
        }
        out
    }

    /// `base` moved by `Σ c_i v_i` along [`Self::free_directions`].
    pub fn shifted(&self, coeffs: &[f64]) -> Result<ParamPoint> {
        let dirs = self.free_directions();
        if coeffs.len() != dirs.len() {
            return invalid(format!("expected {} coefficients, got {}", dirs.len(), coeffs.len()));
        }
        let mut flat = DVector::from_vec(self.base.to_flat());
        for (c, v) in coeffs.iter().zip(&dirs) {
            flat += v * *c;
        }
        ParamPoint::from_flat(self.base.input_dim(), flat.as_slice())
    }
}

fn ensure_critical(spec: &NetworkSpec, theta_r: &ParamPoint, samples: &SampleSet) -> Result<()> {
    let g = model::gradient(spec, theta_r, samples)?;
    if g.norm() > CRITICAL_TOL {
        return Err(Error::Domain(format!("θ' is not critical: ‖∇R‖ = {:.3e}", g.norm())));
    }
    Ok(())
}

/// Picks `l` traced points spread over the sorted trace.
fn spread(trace: &ManifoldTrace, l: usize, fallback: &[f64]) -> Result<Vec<Vec<f64>>> {
    if l == 0 {
        return Ok(Vec::new());
    }
    if trace.points.is_empty() {
        if trace.entire_space {
            return Ok(vec![fallback.to_vec(); l]);
        }
        return Err(Error::NotApplicable("piece not constructible: no traced point of M_θ'".into()));
    }
    let n = trace.points.len();
    Ok((0..l).map(|i| trace.points[(2 * i + 1) * n / (2 * l)].clone()).collect())
}

/// One member of the piece of `branch` over `θ'`, with the zero-output
/// neurons taken from `trace`.
pub fn inverse_image_piece(
    theta_r: &ParamPoint,
    branch: &BranchId,
    samples: &SampleSet,
    activation: &Activation,
    trace: &ManifoldTrace,
) -> Result<BranchPiece> {
    let spec = NetworkSpec::for_point(theta_r, *activation)?;
    ensure_critical(&spec, theta_r, samples)?;
    if branch.r() != theta_r.width() {
        return invalid(format!("branch has r = {} but θ' has width {}", branch.r(), theta_r.width()));
    }
    let p = branch.partition();
    let weights = spread(trace, branch.l(), &theta_r.w()[0])?;
    let build = |concentrated: bool| -> Result<ParamPoint> {
        let mut a = Vec::with_capacity(branch.width());
        let mut w = Vec::with_capacity(branch.width());
        for j in 0..p.num_intervals() {
            let len = p.interval_len(j) as f64;
            for k in p.interval(j) {
                a.push(match (concentrated, k == p.representative(j)) {
                    (true, true) => theta_r.a()[j],
                    (true, false) => 0.0,
                    (false, _) => theta_r.a()[j] / len,
                });
                w.push(theta_r.w()[j].clone());
            }
        }
        for v in &weights {
            a.push(0.0);
            w.push(v.clone());
        }
        act(branch.perm(), &ParamPoint::new(a, w)?)
    };
    Ok(BranchPiece {
        branch: branch.clone(),
        base: build(false)?,
        anchor: build(true)?,
        free_affine_dim: p.total() - p.num_intervals(),
        manifold_factors: branch.l(),
        manifold_weights: weights,
    })
}

/// Default trace used when no trace is supplied: `[-3, 3]^d`, 4000 samples.
pub fn default_trace(theta_r: &ParamPoint, samples: &SampleSet, activation: &Activation) -> Result<ManifoldTrace> {
    let region = Region::cube(theta_r.input_dim(), -3.0, 3.0)?;
    Ok(trace_manifold(theta_r, samples, activation, &region, 4000))
}

/// All pieces of the width-`m` critical set over `θ'`, ordered by
/// decreasing `l` and then by partition. With `up_to_permutation` only the
/// canonical `π` is used; otherwise one piece per distinct set `π·Q_P`.
pub fn enumerate_pieces(
    theta_r: &ParamPoint,
    m: usize,
    samples: &SampleSet,
    activation: &Activation,
    up_to_permutation: bool,
    trace: &ManifoldTrace,
) -> Result<Vec<BranchPiece>> {
    let r = theta_r.width();
    if r == 0 || r > m {
        return invalid(format!("need 1 ≤ r ≤ m, got r = {r}, m = {m}"));
    }
    let mut out = Vec::new();
    for l in (0..=m - r).rev() {
        for partition in enumerate_partitions(m - l, r)? {
            let perms = if up_to_permutation {
                vec![Permutation::identity(m)]
            } else {
                let mut sizes = partition.lengths();
                sizes.push(l);
                block_assignments(&sizes).into_iter().map(|b| b.inverse()).collect()
            };
            for perm in perms {
                let branch = BranchId::new(r, l, partition.clone(), perm)?;
                out.push(inverse_image_piece(theta_r, &branch, samples, activation, trace)?);
            }
        }
    }
    Ok(out)
}

/// `(m - l - r) + N_r + l · manifold_dim`, the dimension bound of a piece.
pub fn dimension_report(piece: &BranchPiece, manifold_dim: usize, n_r: usize) -> usize {
    let m = piece.branch.width();
    (m - piece.manifold_factors - piece.branch.r()) + n_r + piece.manifold_factors * manifold_dim
}

/// Number of Hessian singular values below `1e-8`, a local measurement of
/// the dimension of the critical set through `θ`.
pub fn critical_set_nullity(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<usize> {
    let h = model::hessian(spec, theta, samples)?;
    Ok(linalg::singular_values(&h).iter().filter(|s| **s < 1e-8).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::operators::branch_contains;
    use crate::symmetry::Partition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example_trace() -> (fixtures::Problem, ManifoldTrace) {
        let ex = fixtures::exp_four_samples();
        let trace = default_trace(&ex.theta, &ex.samples, &Activation::exp()).unwrap();
        (ex, trace)
    }

    #[test]
    fn example_piece_with_three_active_slots() {
        let (ex, trace) = example_trace();
        let act = Activation::exp();
        let branch =
            BranchId::new(1, 1, Partition::new(vec![0, 3]).unwrap(), Permutation::identity(4)).unwrap();
        let piece = inverse_image_piece(&ex.theta, &branch, &ex.samples, &act, &trace).unwrap();
        assert_eq!(piece.free_affine_dim, 2);
        assert_eq!(piece.manifold_factors, 1);
        let a = piece.base.a();
        assert!((a[0] + a[1] + a[2] - 1.0).abs() < 1e-15);
        assert_eq!(piece.anchor.a(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(a[3], 0.0);
        for k in 0..3 {
            assert_eq!(piece.base.w()[k], ex.theta.w()[0]);
        }
        assert!(piece.base.w()[3][1].abs() <= 1e-8);
        let spec = NetworkSpec::for_point(&piece.base, act).unwrap();
        assert!(model::gradient(&spec, &piece.base, &ex.samples).unwrap().norm() <= 1e-8);
        assert!(branch_contains(&branch, &piece.base, &act));
    }

    #[test]
    fn pieces_for_width_three() {
        let (ex, trace) = example_trace();
        let pieces = enumerate_pieces(&ex.theta, 3, &ex.samples, &Activation::exp(), true, &trace).unwrap();
        let shape: Vec<(Vec<usize>, usize)> =
            pieces.iter().map(|p| (p.branch.partition().cuts().to_vec(), p.branch.l())).collect();
        assert_eq!(shape, vec![(vec![0, 1], 2), (vec![0, 2], 1), (vec![0, 3], 0)]);
    }

    #[test]
    fn piece_counts() {
        let (ex, trace) = example_trace();
        let act = Activation::exp();
        assert_eq!(enumerate_pieces(&ex.theta, 4, &ex.samples, &act, true, &trace).unwrap().len(), 4);
        assert_eq!(enumerate_pieces(&ex.theta, 1, &ex.samples, &act, true, &trace).unwrap().len(), 1);
        // one piece per way of choosing which l of the m slots are inactive
        let expanded = enumerate_pieces(&ex.theta, 4, &ex.samples, &act, false, &trace).unwrap();
        assert_eq!(expanded.len(), 4 + 6 + 4 + 1);
        let bases: std::collections::HashSet<String> =
            expanded.iter().map(|p| format!("{:?}", p.base.a())).collect();
        assert_eq!(bases.len(), 15);
    }

    #[test]
    fn free_directions_keep_output_and_criticality() {
        let (ex, trace) = example_trace();
        let act = Activation::exp();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for piece in enumerate_pieces(&ex.theta, 4, &ex.samples, &act, false, &trace).unwrap() {
            let spec = NetworkSpec::for_point(&piece.base, act).unwrap();
            for _ in 0..20 {
                let c: Vec<f64> = (0..piece.free_affine_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                let moved = piece.shifted(&c).unwrap();
                assert!(model::gradient(&spec, &moved, &ex.samples).unwrap().norm() <= 1e-8);
                for x in ex.samples.x() {
                    let diff = moved.output(&act, x) - ex.theta.output(&act, x);
                    assert!(diff.abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn dimension_formula() {
        let (ex, trace) = example_trace();
        let act = Activation::exp();
        let n_r = critical_set_nullity(&ex.spec, &ex.theta, &ex.samples).unwrap();
        let pieces = enumerate_pieces(&ex.theta, 4, &ex.samples, &act, true, &trace).unwrap();
        let one = pieces.iter().find(|p| p.manifold_factors == 1).unwrap();
        assert_eq!(dimension_report(one, 1, n_r), 2 + n_r + 1);
        let zero = pieces.iter().find(|p| p.manifold_factors == 0).unwrap();
        assert_eq!(dimension_report(zero, 1, n_r), 3 + n_r);
    }

    #[test]
    fn non_critical_point_is_rejected() {
        let (ex, trace) = example_trace();
        let moved = ParamPoint::new(vec![1.1], ex.theta.w().to_vec()).unwrap();
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 1]).unwrap(), Permutation::identity(1)).unwrap();
        assert!(matches!(
            inverse_image_piece(&moved, &branch, &ex.samples, &Activation::exp(), &trace),
            Err(Error::Domain(_))
        ));
    }
}
