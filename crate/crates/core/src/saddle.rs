//! Criticality tests and saddle certificates.
//!
//! [`classify`] reads the Hessian spectrum. Embedded points of a narrower
//! critical point are strict saddles once the error curvature `B_j` of some
//! neuron is non-zero ([`negative_curvature_direction`]); points with a
//! zero-output neuron are saddles because moving that neuron's input weight
//! off `M_{θ'}` keeps the loss but creates a gradient ([`saddle_witness`]).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{invalid, Error, Result};
use crate::linalg;
use crate::model::{self, NetworkSpec, ParamPoint, SampleSet, Scale};
use crate::operators::{branch_contains, BranchId, ZERO_OUTPUT_TOL};
use crate::symmetry::{act, enumerate_partitions, fold_coefficient, probe_points, DeltaVector, IndexMap, Partition, Permutation};

/// Thresholds used by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Gradient norm up to which a point counts as critical.
    pub tol_grad: f64,
    /// Eigenvalues within `tol_eig_rel · ρ` of zero count as zero, `ρ` the
    /// spectral radius.
    pub tol_eig_rel: f64,
    /// Radius used by the witness fallback for degenerate spectra.
    pub witness_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_grad: 1e-8, tol_eig_rel: 1e-6, witness_radius: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    NonCritical,
    StrictSaddle,
    SaddleWitnessed,
    MinimumCandidate,
    MaximumCandidate,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub grad_norm: f64,
    pub eig_min: f64,
    pub eig_max: f64,
    pub spectral_radius: f64,
    /// Eigenvalues within the zero band.
    pub nullity: usize,
    pub loss: f64,
    pub classification: Classification,
}

/// Gradient norm and Hessian spectrum of `θ`, with a saddle witness tried
/// whenever the spectrum alone is inconclusive.
pub fn classify(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet, tol: &Tolerances) -> Result<CriticalityReport> {
    let d = model::derivatives(spec, theta, samples)?;
    let grad_norm = d.grad.norm();
    let eig = linalg::symmetric_eigen(&d.hess);
    let rho = eig.spectral_radius();
    let band = tol.tol_eig_rel * rho;
    let nullity = eig.values.iter().filter(|v| v.abs() <= band).count();
    let (eig_min, eig_max) = (eig.min(), eig.max());
    let classification = if grad_norm > tol.tol_grad {
        Classification::NonCritical
    } else if eig_min < -band && eig_max > band {
        Classification::StrictSaddle
    } else if nullity > 0 && saddle_witness(spec, theta, samples, tol.witness_radius).is_ok() {
        Classification::SaddleWitnessed
    } else if rho > 0.0 && eig_min >= -band {
        Classification::MinimumCandidate
    } else if rho > 0.0 && nullity == 0 {
        Classification::MaximumCandidate
    } else {
        Classification::Degenerate
    };
    Ok(CriticalityReport { grad_norm, eig_min, eig_max, spectral_radius: rho, nullity, loss: d.value, classification })
}

/// First neuron `j` of `θ'` with non-zero error curvature `B_j` and first
/// neuron `l` with `Σ_i σ(w_l·x_i)² > 0`, or `None`.
pub fn embedding_saddle_condition(
    theta_r: &ParamPoint,
    samples: &SampleSet,
    activation: &Activation,
) -> Option<(usize, usize)> {
    let e = model::residuals(activation, theta_r, samples);
    let j = theta_r.w().iter().position(|w| {
        model::error_curvature(activation, w, samples, &e, Scale::Raw).amax() > 1e-12
    })?;
    let l = theta_r.w().iter().position(|w| {
        samples.x().iter().map(|x| activation.eval(model::dot(w, x)).powi(2)).sum::<f64>() > 1e-12
    })?;
    Some((j, l))
}

/// Negative-curvature certificate for an embedded point.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeCurvature {
    /// The embedded point with the representative of interval `j` holding
    /// `a_choice` and the rest of the interval sharing the remainder evenly.
    pub theta: ParamPoint,
    /// Unit vector moving only the representative's input weight.
    pub direction: DVector<f64>,
    pub a_choice: f64,
    /// `u` with `uᵀ B_j u ≠ 0`.
    pub u: Vec<f64>,
    /// `vᵀ (Hess R) v` from the assembled Hessian.
    pub quadratic_form: f64,
    /// `a² |√A_j u|² + a uᵀ B_j u` with Hessian-scaled `A_j`, `B_j`.
    pub closed_form: f64,
}

/// Moves output weight inside interval `j` of `θ` (laid out canonically for
/// `partition`, zero-output neurons trailing) so that a perturbation of the
/// representative's input weight along an eigenvector `u` of `B_j` has
/// negative curvature.
///
/// With `v` the perturbation, `vᵀHv = |√A_j u|² a² + (uᵀB_j u) a` where `a`
/// is the representative's output weight; any `a` strictly between `0` and
/// `-uᵀB_j u / |√A_j u|²` makes it negative and the midpoint is used.
pub fn negative_curvature_direction(
    theta: &ParamPoint,
    partition: &Partition,
    j: usize,
    samples: &SampleSet,
    activation: &Activation,
) -> Result<NegativeCurvature> {
    if j >= partition.num_intervals() {
        return invalid(format!("interval index {j} out of range"));
    }
    if partition.total() > theta.width() {
        return invalid("partition is wider than the point");
    }
    let len = partition.interval_len(j);
    if len < 2 {
        return invalid(format!("interval {j} has a single neuron, its output weight is not free"));
    }
    let spec = NetworkSpec::for_point(theta, *activation)?;
    let rep = partition.representative(j);
    let wj = theta.w()[rep].clone();
    let total: f64 = partition
        .interval(j)
        .map(|k| fold_coefficient(&theta.w()[k], &wj, activation).unwrap_or(0.0) * theta.a()[k])
        .sum();
    let e = model::errors(&spec, theta, samples)?;
    let a_mat = model::feature_gram(activation, &wj, samples, Scale::Hessian);
    let b_mat = model::error_curvature(activation, &wj, samples, &e, Scale::Hessian);
    let sqrt_a = linalg::psd_sqrt(&a_mat);
    let eig = linalg::symmetric_eigen(&b_mat);
    let scale = eig.spectral_radius();
    if scale <= 1e-12 {
        return Err(Error::NotApplicable(format!("B_{j} vanishes; no negative curvature along this interval")));
    }
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&p, &q| eig.values[q].abs().total_cmp(&eig.values[p].abs()));

    for idx in order {
        let u: DVector<f64> = eig.vectors.column(idx).into_owned();
        let ubu = u.dot(&(&b_mat * &u));
        if ubu.abs() <= 1e-12 * scale.max(1.0) {
            continue;
        }
        let sa = (&sqrt_a * &u).norm_squared();
        let a_choice = if sa <= 1e-14 * a_mat.amax().max(1.0) { -ubu.signum() } else { -ubu / (2.0 * sa) };
        let rest = (total - a_choice) / (len - 1) as f64;
        if rest.abs() <= ZERO_OUTPUT_TOL {
            continue;
        }
        let mut a = theta.a().to_vec();
        for k in partition.interval(j) {
            let c = fold_coefficient(&theta.w()[k], &wj, activation).unwrap_or(0.0);
            if k == rep {
                a[k] = a_choice;
            } else if c != 0.0 {
                a[k] = c * rest;
            }
        }
        let moved = ParamPoint::new(a, theta.w().to_vec())?;
        let mut v = DVector::zeros(spec.num_params());
        for t in 0..theta.input_dim() {
            v[moved.w_slot(rep, t)] = u[t];
        }
        let h = model::hessian(&spec, &moved, samples)?;
        let quadratic_form = (v.transpose() * &h * &v)[(0, 0)];
        let closed_form = sa * a_choice * a_choice + ubu * a_choice;
        return Ok(NegativeCurvature {
            theta: moved,
            direction: v,
            a_choice,
            u: u.iter().copied().collect(),
            quadratic_form,
            closed_form,
        });
    }
    Err(Error::NotApplicable(format!("no eigenvector of B_{j} gives a usable negative direction")))
}

/// A strict saddle of width `m` over the critical point `θ'`, found by
/// trying every partition with `l = 0` and every long interval until the
/// Hessian at the constructed point has eigenvalues of both signs.
pub fn embedding_saddle_search(
    theta_r: &ParamPoint,
    m: usize,
    samples: &SampleSet,
    activation: &Activation,
    tol: &Tolerances,
) -> Result<(BranchId, NegativeCurvature, CriticalityReport)> {
    let r = theta_r.width();
    if r == 0 || m <= r {
        return invalid(format!("need 1 ≤ r < m, got r = {r}, m = {m}"));
    }
    if embedding_saddle_condition(theta_r, samples, activation).is_none() {
        return Err(Error::NotApplicable("embedding saddle condition not satisfied".into()));
    }
    let spec = NetworkSpec::new(m, theta_r.input_dim(), *activation)?;
    for partition in enumerate_partitions(m, r)? {
        let delta = DeltaVector::uniform(&partition);
        let theta = crate::operators::embed(theta_r, &partition, &delta, &IndexMap::new(vec![], r)?, &Permutation::identity(m))?;
        for j in 0..r {
            if partition.interval_len(j) < 2 {
                continue;
            }
            let Ok(nc) = negative_curvature_direction(&theta, &partition, j, samples, activation) else { continue };
            let report = classify(&spec, &nc.theta, samples, tol)?;
            if nc.quadratic_form < 0.0 && report.classification == Classification::StrictSaddle {
                let branch = BranchId::new(r, 0, partition.clone(), Permutation::identity(m))?;
                return Ok((branch, nc, report));
            }
        }
    }
    Err(Error::NotApplicable("no partition certifies a strict embedding saddle".into()))
}

/// Certificate that `θ` is a saddle: `theta_tilde` has the loss of `θ` and
/// lies within `radius`; `theta_up` and `theta_down` lie within `radius`
/// of `theta_tilde` on either side of that loss.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleWitness {
    pub theta_tilde: ParamPoint,
    pub theta_up: ParamPoint,
    pub theta_down: ParamPoint,
    pub radius: f64,
    /// Zero-output neuron that was moved.
    pub slot: usize,
    /// `R(theta_tilde) - R(θ)`.
    pub delta_tilde: f64,
    /// `R(theta_up) - R(θ)`, positive.
    pub delta_up: f64,
    /// `R(theta_down) - R(θ)`, negative.
    pub delta_down: f64,
}

/// Moves the input weight of a zero-output neuron to a nearby point off
/// `M_{θ'}` and then changes its output weight both ways.
///
/// Loss differences are computed with [`model::loss_delta`], so they keep
/// their sign at radii where `R` itself cannot resolve them.
pub fn saddle_witness(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet, radius: f64) -> Result<SaddleWitness> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid("radius must be positive");
    }
    let act = spec.activation();
    let e = model::errors(spec, theta, samples)?;
    let loss: f64 = e.iter().map(|v| v * v).sum();
    if e.iter().all(|v| v.abs() <= 1e-14) {
        return Err(Error::NotApplicable("zero loss: τ vanishes identically".into()));
    }
    let d = theta.input_dim();
    let dirs: Vec<Vec<f64>> = probe_points(d, 64, 1.0)
        .into_iter()
        .filter_map(|p| {
            let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            (n > 1e-3).then(|| p.iter().map(|v| v / n).collect())
        })
        .collect();

    let mut best: Option<(usize, Vec<f64>, f64)> = None;
    for slot in (0..theta.width()).filter(|&k| theta.a()[k].abs() <= ZERO_OUTPUT_TOL) {
        for (i, u) in dirs.iter().enumerate() {
            let s = radius * (0.5 + 0.45 * (i % 10) as f64 / 9.0);
            let w: Vec<f64> = theta.w()[slot].iter().zip(u).map(|(a, b)| a + s * b).collect();
            let t = model::error_correlation(act, &w, samples, &e);
            if best.as_ref().is_none_or(|b| t.abs() > b.2.abs()) {
                best = Some((slot, w, t));
            }
        }
    }
    let Some((slot, w_tilde, t)) = best else {
        return Err(Error::NotApplicable("no zero-output neuron (l = 0)".into()));
    };
    if t.abs() <= 1e-10 {
        return Err(Error::NotApplicable("could not leave M_θ' within the radius".into()));
    }

    let mut tilde = theta.clone();
    tilde.a_mut()[slot] = 0.0;
    tilde.set_w(slot, &w_tilde)?;
    let delta_tilde = model::loss_delta(spec, theta, &tilde, samples)?;
    if delta_tilde.abs() > 1e-12 * (1.0 + loss) {
        return Err(Error::Numerical(format!("perturbation changed the loss by {delta_tilde:.3e}")));
    }

    let along = |s: f64| -> Result<(ParamPoint, f64)> {
        let mut p = tilde.clone();
        p.a_mut()[slot] = s;
        let delta = model::loss_delta(spec, theta, &p, samples)?;
        Ok((p, delta))
    };
    let search = |sign: f64, want_up: bool| -> Result<(ParamPoint, f64)> {
        let mut h = radius / 10.0;
        for _ in 0..=50 {
            let (p, delta) = along(sign * h)?;
            if (want_up && delta > 0.0) || (!want_up && delta < 0.0) {
                return Ok((p, delta));
            }
            h *= 0.5;
        }
        Err(Error::Numerical("line search found no loss change".into()))
    };
    // dR/da at θ̃ is 2τ(w̃)
    let (theta_up, delta_up) = search(t.signum(), true)?;
    let (theta_down, delta_down) = search(-t.signum(), false)?;
    Ok(SaddleWitness { theta_tilde: tilde, theta_up, theta_down, radius, slot, delta_tilde, delta_up, delta_down })
}

/// Straight segment of critical points from `θ0` to a point of a branch with
/// more zero-output neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSegment {
    pub theta1: ParamPoint,
    /// `γ(t)` for `t = 0, 0.1, ..., 1`.
    pub points: Vec<(f64, ParamPoint)>,
    pub grad_norms: Vec<f64>,
    /// `max_t |R(γ(t)) - R(θ0)|`.
    pub loss_deviation: f64,
    /// `max_{t,i} |g(γ(t), x_i) - g(θ0, x_i)|`.
    pub output_deviation: f64,
}

/// `γ(t) = (1 - t) θ0 + t θ1` where `θ1` moves all output weight of
/// interval `j` onto its representative.
pub fn segment_to_saddle(
    theta0: &ParamPoint,
    branch: &BranchId,
    j: usize,
    samples: &SampleSet,
    activation: &Activation,
) -> Result<SaddleSegment> {
    let spec = NetworkSpec::for_point(theta0, *activation)?;
    if !branch_contains(branch, theta0, activation) {
        return Err(Error::Domain(format!("point is not in branch {branch}")));
    }
    let p = branch.partition();
    if j >= p.num_intervals() {
        return invalid(format!("interval index {j} out of range"));
    }
    if p.interval_len(j) < 2 {
        return Err(Error::NotApplicable(format!("interval {j} has a single neuron")));
    }
    let g0 = model::gradient(&spec, theta0, samples)?.norm();
    if g0 > 1e-8 {
        return Err(Error::Domain(format!("θ0 is not critical: ‖∇R‖ = {g0:.3e}")));
    }
    let canon = act(&branch.perm().inverse(), theta0)?;
    let rep = p.representative(j);
    let mut a = canon.a().to_vec();
    let mut total = 0.0;
    for k in p.interval(j) {
        let c = fold_coefficient(&canon.w()[k], &canon.w()[rep], activation).unwrap_or(0.0);
        total += c * canon.a()[k];
        if c != 0.0 {
            a[k] = 0.0;
        }
    }
    a[rep] = total;
    let theta1 = act(branch.perm(), &ParamPoint::new(a, canon.w().to_vec())?)?;

    let f0 = theta0.to_flat();
    let f1 = theta1.to_flat();
    let y0: Vec<f64> = samples.x().iter().map(|x| theta0.output(activation, x)).collect();
    let mut points = Vec::with_capacity(11);
    let mut grad_norms = Vec::with_capacity(11);
    let (mut loss_deviation, mut output_deviation) = (0.0f64, 0.0f64);
    for step in 0..=10 {
        let t = step as f64 / 10.0;
        let flat: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let q = ParamPoint::from_flat(theta0.input_dim(), &flat)?;
        grad_norms.push(model::gradient(&spec, &q, samples)?.norm());
        loss_deviation = loss_deviation.max(model::loss_delta(&spec, theta0, &q, samples)?.abs());
        for (x, y) in samples.x().iter().zip(&y0) {
            output_deviation = output_deviation.max((q.output(activation, x) - y).abs());
        }
        points.push((t, q));
    }
    Ok(SaddleSegment { theta1, points, grad_norms, loss_deviation, output_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn embedded_example(m: usize) -> (ParamPoint, Partition, SampleSet) {
        let ex = fixtures::exp_four_samples();
        let p = Partition::new(vec![0, m]).unwrap();
        let theta = crate::operators::embed(
            &ex.theta,
            &p,
            &DeltaVector::uniform(&p),
            &IndexMap::new(vec![], 1).unwrap(),
            &Permutation::identity(m),
        )
        .unwrap();
        (theta, p, ex.samples)
    }

    #[test]
    fn example_condition() {
        let ex = fixtures::exp_four_samples();
        assert_eq!(embedding_saddle_condition(&ex.theta, &ex.samples, &Activation::exp()), Some((0, 0)));
        let y = ex.samples.x().iter().map(|x| ex.theta.output(&Activation::exp(), x)).collect();
        let exact = ex.samples.with_targets(y).unwrap();
        assert_eq!(embedding_saddle_condition(&ex.theta, &exact, &Activation::exp()), None);
    }

    #[test]
    fn example_negative_direction() {
        let (theta, p, samples) = embedded_example(4);
        let nc = negative_curvature_direction(&theta, &p, 0, &samples, &Activation::exp()).unwrap();
        assert!((nc.a_choice + 1.0 / 11.0).abs() < 1e-12, "{}", nc.a_choice);
        assert!((nc.quadratic_form + 22.0 / 1089.0).abs() < 1e-12, "{}", nc.quadratic_form);
        assert!((nc.quadratic_form - nc.closed_form).abs() <= 1e-8 * nc.closed_form.abs());
        let a = nc.theta.a();
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((a[0] - 4.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn positive_direction_on_output_weight() {
        let (theta, p, samples) = embedded_example(4);
        let nc = negative_curvature_direction(&theta, &p, 0, &samples, &Activation::exp()).unwrap();
        let spec = NetworkSpec::for_point(&nc.theta, Activation::exp()).unwrap();
        let h = model::hessian(&spec, &nc.theta, &samples).unwrap();
        let k = nc.theta.a_slot(3);
        assert!((h[(k, k)] - 8.0 / 3.0).abs() < 1e-12, "{}", h[(k, k)]);
        let report = classify(&spec, &nc.theta, &samples, &Tolerances::default()).unwrap();
        assert_eq!(report.classification, Classification::StrictSaddle);
    }

    #[test]
    fn search_finds_strict_saddle() {
        let ex = fixtures::exp_four_samples();
        let (branch, nc, report) =
            embedding_saddle_search(&ex.theta, 3, &ex.samples, &Activation::exp(), &Tolerances::default()).unwrap();
        assert_eq!(branch.l(), 0);
        assert!(nc.quadratic_form < 0.0);
        assert!(report.eig_min < -1e-6 * report.spectral_radius);
    }

    #[test]
    fn example_point_is_critical() {
        let ex = fixtures::exp_four_samples();
        let report = classify(&ex.spec, &ex.theta, &ex.samples, &Tolerances::default()).unwrap();
        assert!(report.grad_norm <= 1e-10);
        assert_ne!(report.classification, Classification::NonCritical);
    }

    #[test]
    fn interpolating_point_is_minimum_candidate() {
        let ex = fixtures::exp_four_samples();
        let act = Activation::exp();
        let y = ex.samples.x().iter().map(|x| ex.theta.output(&act, x)).collect();
        let exact = ex.samples.with_targets(y).unwrap();
        let report = classify(&ex.spec, &ex.theta, &exact, &Tolerances::default()).unwrap();
        assert_eq!(report.classification, Classification::MinimumCandidate);
        assert!(matches!(saddle_witness(&ex.spec, &ex.theta, &exact, 1e-3), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn witness_on_zero_output_neuron() {
        let ex = fixtures::exp_four_samples();
        let theta = ParamPoint::new(vec![1.0, 0.0], vec![ex.theta.w()[0].clone(), vec![0.4, 0.0]]).unwrap();
        let spec = NetworkSpec::for_point(&theta, Activation::exp()).unwrap();
        for radius in [1e-2, 1e-3, 1e-4] {
            let wit = saddle_witness(&spec, &theta, &ex.samples, radius).unwrap();
            assert!(wit.delta_up > 0.0 && wit.delta_down < 0.0);
            assert!(wit.delta_tilde.abs() <= 1e-12);
            assert!(wit.theta_up.distance(&theta) <= 2.0 * radius);
            assert!(wit.theta_down.distance(&theta) <= 2.0 * radius);
        }
        let report = classify(&spec, &theta, &ex.samples, &Tolerances::default()).unwrap();
        assert_eq!(report.classification, Classification::SaddleWitnessed);
    }

    #[test]
    fn segment_from_split_point() {
        let ex = fixtures::exp_four_samples();
        let w = ex.theta.w()[0].clone();
        let theta0 = ParamPoint::new(vec![0.3, 0.7], vec![w.clone(), w]).unwrap();
        let branch = BranchId::new(1, 0, Partition::new(vec![0, 2]).unwrap(), Permutation::identity(2)).unwrap();
        let seg = segment_to_saddle(&theta0, &branch, 0, &ex.samples, &Activation::exp()).unwrap();
        assert_eq!(seg.theta1.a(), &[0.0, 1.0]);
        assert_eq!(seg.points[0].1, theta0);
        assert_eq!(seg.points.len(), 11);
        assert!(seg.grad_norms.iter().all(|g| *g <= 1e-10));
        assert!(seg.loss_deviation <= 1e-12);
        assert!(seg.output_deviation <= 1e-12);
    }
}
