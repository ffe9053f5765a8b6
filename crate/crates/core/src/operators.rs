//! Critical embedding and critical reduction operators and the stratification
//! of parameter space into branches `Q_{P,π}^{r,l}`.
//!
//! A point lies in `Q_P^{r,l}` when its first `t_r` output weights are
//! non-zero, the remaining `l` are zero, every interval of `P` is a group of
//! mutually dependent neurons and the interval representatives are pairwise
//! independent. `Q_{P,π}^{r,l}` is the image of that set under `π`.

use std::fmt;

use crate::activation::Activation;
use crate::error::{invalid, Error, Result};
use crate::model::ParamPoint;
use crate::symmetry::{
    act, fold_coefficient, is_zero_neuron, pairwise_dependent, DeltaVector, IndexMap, Partition,
    Permutation,
};

/// Output weights with `|a| ≤ ZERO_OUTPUT_TOL` count as structurally zero.
pub const ZERO_OUTPUT_TOL: f64 = 1e-10;

/// Names the stratum `Q_{P,π}^{r,l}` of width-`m` parameter space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchId {
    r: usize,
    l: usize,
    partition: Partition,
    perm: Permutation,
}

impl BranchId {
    pub fn new(r: usize, l: usize, partition: Partition, perm: Permutation) -> Result<Self> {
        if partition.num_intervals() != r {
            return invalid(format!("partition has {} intervals, expected r = {r}", partition.num_intervals()));
        }
        if partition.total() + l != perm.len() {
            return invalid(format!(
                "t_r + l = {} + {l} does not match the permutation size {}",
                partition.total(),
                perm.len()
            ));
        }
        Ok(Self { r, l, partition, perm })
    }

    /// Effective feature number.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Ineffective feature number.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn width(&self) -> usize {
        self.perm.len()
    }

    /// Same stratum label with a different permutation.
    pub fn with_perm(&self, perm: Permutation) -> Result<Self> {
        Self::new(self.r, self.l, self.partition.clone(), perm)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r={} l={} P={:?} π={:?}", self.r, self.l, self.partition.cuts(), self.perm.as_slice())
    }
}

/// Critical embedding `π·ι_{Δ(P),I}(θ')`.
///
/// Interval `j` of `P` receives the output weights `δ_k a'_j` and the shared
/// input weight `w'_j`; the `l` trailing neurons get output weight zero and
/// input weight `w'_{I(i)}`.
pub fn embed(
    theta_r: &ParamPoint,
    partition: &Partition,
    delta: &DeltaVector,
    index_map: &IndexMap,
    perm: &Permutation,
) -> Result<ParamPoint> {
    let r = theta_r.width();
    if partition.num_intervals() != r {
        return invalid(format!("partition has {} intervals but θ' has width {r}", partition.num_intervals()));
    }
    if delta.values().len() != partition.total() {
        return invalid("splitting vector does not match the partition");
    }
    if (0..index_map.len()).any(|i| index_map.get(i) >= r) {
        return invalid(format!("index map points outside the {r} reduced neurons"));
    }
    let m = partition.total() + index_map.len();
    if perm.len() != m {
        return invalid(format!("permutation has {} elements, embedded width is {m}", perm.len()));
    }
    let mut a = Vec::with_capacity(m);
    let mut w = Vec::with_capacity(m);
    for j in 0..r {
        for k in partition.interval(j) {
            a.push(delta.values()[k] * theta_r.a()[j]);
            w.push(theta_r.w()[j].clone());
        }
    }
    for i in 0..index_map.len() {
        a.push(0.0);
        w.push(theta_r.w()[index_map.get(i)].clone());
    }
    act(perm, &ParamPoint::new(a, w)?)
}

/// Whether `theta ∈ Q_{P,π}^{r,l}` for the given branch.
pub fn branch_contains(branch: &BranchId, theta: &ParamPoint, activation: &Activation) -> bool {
    if branch.width() != theta.width() {
        return false;
    }
    let Ok(canon) = act(&branch.perm.inverse(), theta) else { return false };
    let p = &branch.partition;
    let t_r = p.total();
    let a = canon.a();
    if a[..t_r].iter().any(|v| v.abs() <= ZERO_OUTPUT_TOL) || a[t_r..].iter().any(|v| v.abs() > ZERO_OUTPUT_TOL) {
        return false;
    }
    let w = canon.w();
    for j in 0..p.num_intervals() {
        let rep = &w[p.representative(j)];
        if p.interval(j).any(|k| fold_coefficient(&w[k], rep, activation).is_none()) {
            return false;
        }
        for jj in 0..j {
            if pairwise_dependent(rep, &w[p.representative(jj)], activation) {
                return false;
            }
        }
    }
    true
}

/// Finds the branch containing `theta`.
///
/// Zero output weights (`|a_k| ≤` [`ZERO_OUTPUT_TOL`]) give `l`. The other
/// neurons are grouped by the transitive closure of [`pairwise_dependent`];
/// groups are ordered by their smallest index and each group's
/// representative (its largest non-zero-function index) is placed last.
/// Zero-function neurons with non-zero output weight join the first group.
pub fn locate_branch(theta: &ParamPoint, activation: &Activation) -> BranchId {
    let m = theta.width();
    let (active, zero): (Vec<usize>, Vec<usize>) =
        (0..m).partition(|&k| theta.a()[k].abs() > ZERO_OUTPUT_TOL);
    let (null_fn, regular): (Vec<usize>, Vec<usize>) =
        active.iter().partition(|&&k| is_zero_neuron(&theta.w()[k], activation));

    // union-find over the regular neurons
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], k: usize) -> usize {
        let mut root = k;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = k;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for (i, &ki) in regular.iter().enumerate() {
        for &kj in &regular[i + 1..] {
            if pairwise_dependent(&theta.w()[ki], &theta.w()[kj], activation) {
                let (ri, rj) = (find(&mut parent, ki), find(&mut parent, kj));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_group: Vec<Option<usize>> = vec![None; m];
    for &k in &regular {
        let root = find(&mut parent, k);
        match root_group[root] {
            Some(g) => groups[g].push(k),
            None => {
                root_group[root] = Some(groups.len());
                groups.push(vec![k]);
            }
        }
    }
    // representative last: the largest regular index ends each group already
    if groups.is_empty() {
        if !null_fn.is_empty() {
            groups.push(null_fn);
        }
    } else {
        let first = &mut groups[0];
        let rep = first.pop().unwrap();
        first.extend(null_fn);
        first.sort_unstable();
        first.push(rep);
    }

    let lengths: Vec<usize> = groups.iter().map(Vec::len).collect();
    let order: Vec<usize> = groups.into_iter().flatten().chain(zero.iter().copied()).collect();
    let partition = Partition::from_lengths(&lengths).expect("group sizes are positive");
    let perm = Permutation::new(order).expect("order is a permutation").inverse();
    BranchId::new(lengths.len(), zero.len(), partition, perm).expect("consistent by construction")
}

/// Critical reduction `φ_{P,π}`: sums the (sign-folded) output weights of
/// each interval onto its representative input weight and drops the
/// zero-output neurons.
pub fn reduce(theta: &ParamPoint, branch: &BranchId, activation: &Activation) -> Result<ParamPoint> {
    if !branch_contains(branch, theta, activation) {
        return Err(Error::Domain(format!("point is not in branch {branch}")));
    }
    reduce_unchecked(theta, branch, activation)
}

fn reduce_unchecked(theta: &ParamPoint, branch: &BranchId, activation: &Activation) -> Result<ParamPoint> {
    let canon = act(&branch.perm.inverse(), theta)?;
    let p = &branch.partition;
    if p.num_intervals() == 0 {
        return Ok(ParamPoint::empty(theta.input_dim()));
    }
    let mut a = Vec::with_capacity(p.num_intervals());
    let mut w = Vec::with_capacity(p.num_intervals());
    for j in 0..p.num_intervals() {
        let rep = &canon.w()[p.representative(j)];
        let sum = p
            .interval(j)
            .map(|k| fold_coefficient(&canon.w()[k], rep, activation).unwrap_or(1.0) * canon.a()[k])
            .sum();
        a.push(sum);
        w.push(rep.clone());
    }
    ParamPoint::new(a, w)
}

/// Whether `theta` is already in `Q^{r,0}(r)`: no zero output weights and
/// every group a singleton.
pub fn is_minimal(branch: &BranchId) -> bool {
    branch.l == 0 && branch.partition.total() == branch.r
}

/// Repeats locate + reduce until the point is minimal. Returns the reduced
/// point and the branches visited, in order.
pub fn minimal_reduce(theta: &ParamPoint, activation: &Activation) -> (ParamPoint, Vec<BranchId>) {
    let mut current = theta.clone();
    let mut chain = Vec::new();
    loop {
        if current.width() == 0 {
            break;
        }
        let branch = locate_branch(&current, activation);
        if is_minimal(&branch) {
            break;
        }
        current = reduce_unchecked(&current, &branch, activation).expect("located branch matches point");
        chain.push(branch);
    }
    (current, chain)
}
