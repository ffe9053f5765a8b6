use super::zeros::{stacked_residual, ZERO_TOL};
use super::ZeroMap;
use crate::activation::Activation;
use crate::error::{invalid, Error, Result};
use crate::model::{self, NetworkSpec, ParamPoint, SampleSet};
use crate::operators::{branch_contains, locate_branch, BranchId};
use crate::symmetry::{act, fold_coefficient, is_zero_neuron, pairwise_dependent};

const CRITICAL_TOL: f64 = 1e-8;

/// Critical points `θ_1, ..., θ_N` converging to `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSequence {
    pub points: Vec<ParamPoint>,
    pub limit: ParamPoint,
    pub source_branch: BranchId,
    pub target_branch: BranchId,
    /// `‖∇R(θ_N)‖` for each point.
    pub grad_norms: Vec<f64>,
}

impl WitnessSequence {
    pub fn distances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.distance(&self.limit)).collect()
    }
}

fn check_critical(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<f64> {
    let g = model::gradient(spec, theta, samples)?.norm();
    if g > CRITICAL_TOL {
        return Err(Error::Domain(format!("point is not critical: ‖∇R‖ = {g:.3e}")));
    }
    Ok(g)
}

fn grad_norms(spec: &NetworkSpec, points: &[ParamPoint], samples: &SampleSet) -> Result<Vec<f64>> {
    let norms = points
        .iter()
        .map(|p| Ok(model::gradient(spec, p, samples)?.norm()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = norms.iter().find(|g| **g > CRITICAL_TOL) {
        return Err(Error::Numerical(format!("witness point lost criticality: ‖∇R‖ = {bad:.3e}")));
    }
    Ok(norms)
}

/// Sequence inside `branch` approaching a point where interval `j` has
/// all its output weight on one neuron.
///
/// Within the interval the neurons fold onto the representative with
/// coefficients `c_k ∈ {±1}` (zero-function neurons are left alone). Writing
/// `a' = Σ c_k a_k`, the `N`-th point puts `(1 - 1/2N) a'` on the first
/// folded neuron and spreads `a' / 2N` evenly over the others, so the
/// interval total and therefore the output function never change.
pub fn connectivity_witness_a(
    theta: &ParamPoint,
    branch: &BranchId,
    j: usize,
    n_max: usize,
    activation: &Activation,
    samples: &SampleSet,
) -> Result<WitnessSequence> {
    let spec = NetworkSpec::for_point(theta, *activation)?;
    if !branch_contains(branch, theta, activation) {
        return Err(Error::Domain(format!("point is not in branch {branch}")));
    }
    let p = branch.partition();
    if j >= p.num_intervals() {
        return invalid(format!("interval index {j} out of range for {} intervals", p.num_intervals()));
    }
    if n_max == 0 {
        return invalid("need at least one sequence element");
    }
    check_critical(&spec, theta, samples)?;

    let canon = act(&branch.perm().inverse(), theta)?;
    let rep = canon.w()[p.representative(j)].clone();
    let folded: Vec<(usize, f64)> = p
        .interval(j)
        .filter_map(|k| {
            let c = fold_coefficient(&canon.w()[k], &rep, activation)?;
            (c != 0.0).then_some((k, c))
        })
        .collect();
    if folded.len() < 2 {
        return invalid(format!("interval {j} has fewer than two neurons sharing its output weight"));
    }
    let total: f64 = folded.iter().map(|(k, c)| c * canon.a()[*k]).sum();
    let rest = (folded.len() - 1) as f64;

    let with_split = |head: f64, tail: f64| -> Result<ParamPoint> {
        let mut a = canon.a().to_vec();
        for (i, (k, c)) in folded.iter().enumerate() {
            a[*k] = c * if i == 0 { head } else { tail };
        }
        act(branch.perm(), &ParamPoint::new(a, canon.w().to_vec())?)
    };
    let limit = with_split(total, 0.0)?;
    let points = (1..=n_max)
        .map(|n| {
            let eps = 1.0 / (2.0 * n as f64);
            with_split((1.0 - eps) * total, eps * total / rest)
        })
        .collect::<Result<Vec<_>>>()?;
    for q in &points {
        if !branch_contains(branch, q, activation) {
            return Err(Error::Numerical("witness point left the source branch".into()));
        }
    }
    let grad_norms = grad_norms(&spec, &points, samples)?;
    Ok(WitnessSequence {
        points,
        limit: limit.clone(),
        source_branch: branch.clone(),
        target_branch: locate_branch(&limit, activation),
        grad_norms,
    })
}

/// Sequence in a branch with `r2` effective features converging to `θ`.
///
/// Zero-output neurons of `θ` are given input weights taken from `zeros`,
/// common zeros of `τ` and `∇τ` for `θ`. One new interval is formed per
/// extra feature: two neurons with output weights `±1/N`, the last one
/// absorbing every spare slot except the final `l2`, with weights summing to
/// zero. Every `θ_N` has the output of `θ`; the gradient terms of the new
/// neurons are `τ` and `a ∇τ`, which vanish on the supplied zeros.
#[allow(clippy::too_many_arguments)]
pub fn connectivity_witness_b(
    theta: &ParamPoint,
    branch: &BranchId,
    zeros: &[Vec<f64>],
    r2: usize,
    l2: usize,
    n_max: usize,
    activation: &Activation,
    samples: &SampleSet,
) -> Result<WitnessSequence> {
    let spec = NetworkSpec::for_point(theta, *activation)?;
    if !branch_contains(branch, theta, activation) {
        return Err(Error::Domain(format!("point is not in branch {branch}")));
    }
    if n_max == 0 {
        return invalid("need at least one sequence element");
    }
    check_critical(&spec, theta, samples)?;
    let (r1, l1, m) = (branch.r(), branch.l(), branch.width());
    if l1 == 0 {
        return invalid("the source branch has no zero-output neuron");
    }
    if r2 < r1 {
        return invalid(format!("r2 = {r2} is below r1 = {r1}"));
    }
    if 2 * r2 + l2 > m + r1 {
        return invalid(format!("constraint 2·r2 − r1 + l ≤ m violated: 2·{r2} − {r1} + {l2} > {m}"));
    }
    let t_r1 = branch.partition().total();
    let extra = r2 - r1;
    if extra > 0 && m - l2 < t_r1 + 2 * extra {
        return invalid(format!("{l1} zero-output neurons cannot hold {extra} new pairs and keep l2 = {l2}"));
    }
    if extra == 0 {
        let grad_norms = grad_norms(&spec, &vec![theta.clone(); n_max], samples)?;
        return Ok(WitnessSequence {
            points: vec![theta.clone(); n_max],
            limit: theta.clone(),
            source_branch: branch.clone(),
            target_branch: branch.clone(),
            grad_norms,
        });
    }

    let canon = act(&branch.perm().inverse(), theta)?;
    let map = ZeroMap::new(activation, theta, samples);
    let active: Vec<&Vec<f64>> = canon.w()[..t_r1].iter().collect();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(extra);
    for z in zeros {
        if z.len() != theta.input_dim() || stacked_residual(&map, z) > ZERO_TOL || is_zero_neuron(z, activation) {
            continue;
        }
        let clash = active.iter().copied().chain(chosen.iter()).any(|w| pairwise_dependent(w, z, activation));
        if !clash {
            chosen.push(z.clone());
            if chosen.len() == extra {
                break;
            }
        }
    }
    if chosen.len() < extra {
        return Err(Error::NotApplicable(format!(
            "insufficient zeros: need {extra} independent common zeros, found {}",
            chosen.len()
        )));
    }

    let last_end = m - l2;
    let build = |scale: f64| -> Result<ParamPoint> {
        let mut a = canon.a().to_vec();
        let mut w = canon.w().to_vec();
        for (q, z) in chosen.iter().enumerate() {
            let start = t_r1 + 2 * q;
            let end = if q + 1 == extra { last_end } else { start + 2 };
            let len = (end - start) as f64;
            for k in start..end {
                w[k] = z.clone();
                a[k] = if k + 1 == end { -(len - 1.0) * scale } else { scale };
            }
        }
        act(branch.perm(), &ParamPoint::new(a, w)?)
    };
    let limit = build(0.0)?;
    let points = (1..=n_max).map(|n| build(1.0 / n as f64)).collect::<Result<Vec<_>>>()?;
    let target_branch = locate_branch(&points[0], activation);
    if target_branch.r() != r2 || target_branch.l() != l2 {
        return Err(Error::Numerical(format!("witness landed in {target_branch}, expected r = {r2}, l = {l2}")));
    }
    let grad_norms = grad_norms(&spec, &points, samples)?;
    Ok(WitnessSequence { points, limit, source_branch: branch.clone(), target_branch, grad_norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::symmetry::{Partition, Permutation};

    fn example_pair(delta: f64) -> (ParamPoint, SampleSet, BranchId) {
        let ex = fixtures::exp_four_samples();
        let w = ex.theta.w()[0].clone();
        let theta = ParamPoint::new(vec![delta, 1.0 - delta], vec![w.clone(), w]).unwrap();
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 2]).unwrap(), Permutation::identity(2)).unwrap();
        (theta, ex.samples, branch)
    }

    #[test]
    fn witness_a_on_example() {
        let (theta, samples, branch) = example_pair(0.3);
        let act = Activation::exp();
        let seq = connectivity_witness_a(&theta, &branch, 0, 10, &act, &samples).unwrap();
        assert_eq!(seq.limit.a(), &[1.0, 0.0]);
        assert_eq!((seq.target_branch.r(), seq.target_branch.l()), (1, 1));
        assert!(seq.grad_norms.iter().all(|g| *g <= 1e-10));
        let d = seq.distances();
        assert!(d.windows(2).all(|p| p[1] < p[0]));
        for q in &seq.points {
            assert!((q.a()[0] + q.a()[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn witness_a_rejects_singleton_interval() {
        let ex = fixtures::exp_four_samples();
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 1]).unwrap(), Permutation::identity(1)).unwrap();
        assert!(connectivity_witness_a(&ex.theta, &branch, 0, 5, &Activation::exp(), &ex.samples).is_err());
    }

    #[test]
    fn witness_b_degenerate_is_constant() {
        let ex = fixtures::exp_four_samples();
        let w = ex.theta.w()[0].clone();
        let theta = ParamPoint::new(vec![1.0, 0.0], vec![w, vec![0.5, 0.0]]).unwrap();
        let branch = BranchId::new(1, 1, Partition::new(vec![0, 1]).unwrap(), Permutation::identity(2)).unwrap();
        let seq =
            connectivity_witness_b(&theta, &branch, &[], 1, 1, 4, &Activation::exp(), &ex.samples).unwrap();
        assert!(seq.points.iter().all(|p| *p == theta));
        assert_eq!(seq.limit, theta);
    }

    #[test]
    fn witness_b_with_common_zeros() {
        // exp with zero slots at common zeros: on the example ∇τ vanishes
        // along w_2 = 0 as well, so every (t, 0) is a common zero
        let ex = fixtures::exp_four_samples();
        let act = Activation::exp();
        let w = ex.theta.w()[0].clone();
        let z = vec![0.7, 0.0];
        let theta = ParamPoint::new(vec![1.0, 0.0, 0.0], vec![w, z.clone(), z.clone()]).unwrap();
        let branch = BranchId::new(1, 2, Partition::new(vec![0, 1]).unwrap(), Permutation::identity(3)).unwrap();
        let seq = connectivity_witness_b(&theta, &branch, &[z], 2, 0, 6, &act, &ex.samples).unwrap();
        assert_eq!(seq.limit, theta);
        assert_eq!((seq.target_branch.r(), seq.target_branch.l()), (2, 0));
        assert!(seq.grad_norms.iter().all(|g| *g <= 1e-8));
        assert!(seq.distances().windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn witness_b_needs_enough_zeros() {
        let ex = fixtures::exp_four_samples();
        let w = ex.theta.w()[0].clone();
        let theta = ParamPoint::new(vec![1.0, 0.0, 0.0], vec![w.clone(), w.clone(), w]).unwrap();
        let branch = BranchId::new(1, 2, Partition::new(vec![0, 1]).unwrap(), Permutation::identity(3)).unwrap();
        let err = connectivity_witness_b(&theta, &branch, &[], 2, 0, 3, &Activation::exp(), &ex.samples);
        assert!(matches!(err, Err(Error::NotApplicable(_))));
        let err = connectivity_witness_b(&theta, &branch, &[], 3, 0, 3, &Activation::exp(), &ex.samples);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
