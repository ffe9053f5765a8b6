//! The two-layer network `g(θ, x) = Σ_k a_k σ(w_k·x)`, its squared loss and
//! closed-form first and second derivatives.
//!
//! Flat parameter vectors interleave the neurons: neuron `k` occupies the
//! slots `k(d+1) .. (k+1)(d+1)`, output weight first, then the `d` input
//! weights. The loss is `R(θ) = Σ_i e_i(θ)²` with no `½` normalization, so
//! every derivative carries the corresponding factor 2.

use nalgebra::{DMatrix, DVector};

use crate::activation::Activation;
use crate::error::{invalid, Result};

/// Width, input dimension and activation of a two-layer network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSpec {
    width: usize,
    input_dim: usize,
    activation: Activation,
}

impl NetworkSpec {
    pub fn new(width: usize, input_dim: usize, activation: Activation) -> Result<Self> {
        if width == 0 {
            return invalid("network width must be at least 1");
        }
        if input_dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self { width, input_dim, activation })
    }

    /// The spec matching the shape of `theta`.
    pub fn for_point(theta: &ParamPoint, activation: Activation) -> Result<Self> {
        Self::new(theta.width(), theta.input_dim(), activation)
    }

    /// Same input dimension and activation, different width.
    pub fn with_width(&self, width: usize) -> Result<Self> {
        Self::new(width, self.input_dim, self.activation)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn activation(&self) -> &Activation {
        &self.activation
    }

    /// Number of scalar parameters, `(d+1)m`.
    pub fn num_params(&self) -> usize {
        (self.input_dim + 1) * self.width
    }

    pub(crate) fn check_point(&self, theta: &ParamPoint) -> Result<()> {
        if theta.width() != self.width || theta.input_dim() != self.input_dim {
            return invalid(format!(
                "parameter point has width {} and input dim {}, network expects {} and {}",
                theta.width(),
                theta.input_dim(),
                self.width,
                self.input_dim
            ));
        }
        Ok(())
    }

    pub(crate) fn check_samples(&self, samples: &SampleSet) -> Result<()> {
        if samples.input_dim() != self.input_dim {
            return invalid(format!(
                "samples have input dim {}, network expects {}",
                samples.input_dim(),
                self.input_dim
            ));
        }
        Ok(())
    }
}

/// A parameter point `θ = (a_k, w_k)_{k=1..m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    a: Vec<f64>,
    w: Vec<Vec<f64>>,
    input_dim: usize,
}

impl ParamPoint {
    /// Builds a point from output weights and input weights. Every input
    /// weight must have the same length `d ≥ 1`.
    pub fn new(a: Vec<f64>, w: Vec<Vec<f64>>) -> Result<Self> {
        if a.len() != w.len() {
            return invalid(format!("{} output weights but {} input weights", a.len(), w.len()));
        }
        let Some(first) = w.first() else {
            return invalid("a parameter point needs at least one neuron; use ParamPoint::empty");
        };
        let d = first.len();
        if d == 0 {
            return invalid("input weights must be non-empty");
        }
        if let Some(bad) = w.iter().position(|wk| wk.len() != d) {
            return invalid(format!("input weight {bad} has length {}, expected {d}", w[bad].len()));
        }
        Ok(Self { a, w, input_dim: d })
    }

    /// The width-0 point (the empty network, output identically zero).
    pub fn empty(input_dim: usize) -> Self {
        Self { a: Vec::new(), w: Vec::new(), input_dim }
    }

    /// Rebuilds a point from the interleaved flat layout.
    pub fn from_flat(input_dim: usize, flat: &[f64]) -> Result<Self> {
        if input_dim == 0 || !flat.len().is_multiple_of(input_dim + 1) {
            return invalid(format!(
                "flat vector of length {} is not a multiple of d+1 = {}",
                flat.len(),
                input_dim + 1
            ));
        }
        let (a, w) = flat
            .chunks(input_dim + 1)
            .map(|c| (c[0], c[1..].to_vec()))
            .unzip();
        Ok(Self { a, w, input_dim })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.a.len() * (self.input_dim + 1));
        for (a, w) in self.a.iter().zip(&self.w) {
            out.push(*a);
            out.extend_from_slice(w);
        }
        out
    }

    pub fn width(&self) -> usize {
        self.a.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    /// Replaces the input weight of neuron `k`.
    pub fn set_w(&mut self, k: usize, w: &[f64]) -> Result<()> {
        if w.len() != self.input_dim {
            return invalid(format!("weight has length {}, expected {}", w.len(), self.input_dim));
        }
        if k >= self.width() {
            return invalid(format!("neuron {k} out of range for width {}", self.width()));
        }
        self.w[k].copy_from_slice(w);
        Ok(())
    }

    /// Flat index of the output weight `a_k`.
    pub fn a_slot(&self, k: usize) -> usize {
        k * (self.input_dim + 1)
    }

    /// Flat index of the input weight component `(w_k)_t`.
    pub fn w_slot(&self, k: usize, t: usize) -> usize {
        k * (self.input_dim + 1) + 1 + t
    }

    /// Euclidean distance between two points of the same shape.
    pub fn distance(&self, other: &ParamPoint) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Output `Σ_k a_k σ(w_k·x)` for any width (including zero).
    pub fn output(&self, act: &Activation, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.w)
            .map(|(a, w)| a * act.eval(dot(w, x)))
            .sum()
    }
}

/// Training pairs `(x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl SampleSet {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return invalid("at least one sample is required");
        }
        if x.len() != y.len() {
            return invalid(format!("{} inputs but {} targets", x.len(), y.len()));
        }
        let d = x[0].len();
        if d == 0 {
            return invalid("sample inputs must be non-empty");
        }
        for (i, xi) in x.iter().enumerate() {
            if xi.len() != d {
                return invalid(format!("sample {i} has dimension {}, expected {d}", xi.len()));
            }
            if xi.iter().any(|v| !v.is_finite()) {
                return invalid(format!("sample {i} has a non-finite input"));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return invalid("targets must be finite");
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Same inputs, different targets.
    pub fn with_targets(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(self.x.clone(), y)
    }
}

/// Loss value, gradient and Hessian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDerivatives {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Network output at one input.
pub fn forward(spec: &NetworkSpec, theta: &ParamPoint, x: &[f64]) -> Result<f64> {
    spec.check_point(theta)?;
    if x.len() != spec.input_dim() {
        return invalid(format!("input has length {}, expected {}", x.len(), spec.input_dim()));
    }
    Ok(theta.output(spec.activation(), x))
}

/// Residuals `e_i = g(θ, x_i) - y_i`.
pub fn errors(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<Vec<f64>> {
    spec.check_point(theta)?;
    spec.check_samples(samples)?;
    Ok(residuals(spec.activation(), theta, samples))
}

/// Residuals for a point of any width; shapes are the caller's business.
pub(crate) fn residuals(act: &Activation, theta: &ParamPoint, samples: &SampleSet) -> Vec<f64> {
    samples
        .x()
        .iter()
        .zip(samples.y())
        .map(|(x, y)| theta.output(act, x) - y)
        .collect()
}

/// `R(θ) = Σ_i e_i²`.
pub fn loss(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<f64> {
    Ok(errors(spec, theta, samples)?.iter().map(|e| e * e).sum())
}

/// `R(to) - R(from)` evaluated without subtracting two loss values.
///
/// The residual change is accumulated neuron by neuron and neurons that did
/// not move contribute exactly zero, so loss differences far below the
/// rounding level of `R` itself keep their sign.
pub fn loss_delta(
    spec: &NetworkSpec,
    from: &ParamPoint,
    to: &ParamPoint,
    samples: &SampleSet,
) -> Result<f64> {
    spec.check_point(from)?;
    spec.check_point(to)?;
    spec.check_samples(samples)?;
    let act = spec.activation();
    let e = residuals(act, from, samples);
    let mut delta = 0.0;
    for (x, ei) in samples.x().iter().zip(&e) {
        let mut de = 0.0;
        for k in 0..spec.width() {
            let (a0, a1) = (from.a[k], to.a[k]);
            let (w0, w1) = (&from.w[k], &to.w[k]);
            if a0 == a1 && w0 == w1 {
                continue;
            }
            let s1 = act.eval(dot(w1, x));
            let ds = if w0 == w1 { 0.0 } else { s1 - act.eval(dot(w0, x)) };
            de += (a1 - a0) * s1 + a0 * ds;
        }
        delta += de * (2.0 * ei + de);
    }
    Ok(delta)
}

/// Closed-form gradient of `R`.
pub fn gradient(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<DVector<f64>> {
    let e = errors(spec, theta, samples)?;
    Ok(gradient_with_errors(spec.activation(), theta, samples, &e))
}

pub(crate) fn gradient_with_errors(
    act: &Activation,
    theta: &ParamPoint,
    samples: &SampleSet,
    e: &[f64],
) -> DVector<f64> {
    let d = theta.input_dim();
    let mut g = DVector::zeros(theta.width() * (d + 1));
    for k in 0..theta.width() {
        let base = theta.a_slot(k);
        let (ak, wk) = (theta.a[k], &theta.w[k]);
        for (x, ei) in samples.x().iter().zip(e) {
            let z = dot(wk, x);
            g[base] += 2.0 * ei * act.eval(z);
            let c = 2.0 * ak * ei * act.d1(z);
            for t in 0..d {
                g[base + 1 + t] += c * x[t];
            }
        }
    }
    g
}

/// Closed-form Hessian of `R`, symmetrized.
pub fn hessian(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet) -> Result<DMatrix<f64>> {
    let e = errors(spec, theta, samples)?;
    Ok(hessian_with_errors(spec.activation(), theta, samples, &e))
}

pub(crate) fn hessian_with_errors(
    act: &Activation,
    theta: &ParamPoint,
    samples: &SampleSet,
    e: &[f64],
) -> DMatrix<f64> {
    let m = theta.width();
    let d = theta.input_dim();
    let p = m * (d + 1);
    let mut h = DMatrix::zeros(p, p);

    for (x, &ei) in samples.x().iter().zip(e) {
        let z: Vec<f64> = theta.w.iter().map(|w| dot(w, x)).collect();
        let s: Vec<f64> = z.iter().map(|&z| act.eval(z)).collect();
        let s1: Vec<f64> = z.iter().map(|&z| act.d1(z)).collect();

        // Gauss-Newton part: 2 J_i J_iᵀ with J_i = ∂g(θ, x_i)/∂θ.
        let mut jac = vec![0.0; p];
        for k in 0..m {
            let base = k * (d + 1);
            jac[base] = s[k];
            for t in 0..d {
                jac[base + 1 + t] = theta.a[k] * s1[k] * x[t];
            }
        }
        for r in 0..p {
            if jac[r] == 0.0 {
                continue;
            }
            for c in 0..p {
                h[(r, c)] += 2.0 * jac[r] * jac[c];
            }
        }

        // Residual part: 2 e_i ∇²g(θ, x_i), block diagonal per neuron.
        for k in 0..m {
            let base = k * (d + 1);
            let aw = 2.0 * ei * s1[k];
            let ww = 2.0 * ei * theta.a[k] * act.d2(z[k]);
            for t in 0..d {
                h[(base, base + 1 + t)] += aw * x[t];
                h[(base + 1 + t, base)] += aw * x[t];
                for u in 0..d {
                    h[(base + 1 + t, base + 1 + u)] += ww * x[t] * x[u];
                }
            }
        }
    }
    let ht = h.transpose();
    (h + ht) * 0.5
}

/// Value, gradient and Hessian in one pass over the residuals.
pub fn derivatives(
    spec: &NetworkSpec,
    theta: &ParamPoint,
    samples: &SampleSet,
) -> Result<LossDerivatives> {
    let e = errors(spec, theta, samples)?;
    let act = spec.activation();
    Ok(LossDerivatives {
        value: e.iter().map(|v| v * v).sum(),
        grad: gradient_with_errors(act, theta, samples, &e),
        hess: hessian_with_errors(act, theta, samples, &e),
    })
}

/// Scaling of the per-feature curvature matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// The bare sums `Σ_i (...) x_i x_iᵀ`.
    Raw,
    /// The sums multiplied by 2, i.e. the blocks as they appear in the
    /// Hessian of `R = Σ e_i²`.
    Hessian,
}

impl Scale {
    fn factor(self) -> f64 {
        match self {
            Scale::Raw => 1.0,
            Scale::Hessian => 2.0,
        }
    }
}

/// `A(w) = Σ_i σ'(w·x_i)² x_i x_iᵀ` (times 2 under [`Scale::Hessian`]).
pub fn feature_gram(act: &Activation, w: &[f64], samples: &SampleSet, scale: Scale) -> DMatrix<f64> {
    outer_sum(samples, |x| act.d1(dot(w, x)).powi(2)) * scale.factor()
}

/// `B(w) = Σ_i e_i σ''(w·x_i) x_i x_iᵀ` (times 2 under [`Scale::Hessian`]).
pub fn error_curvature(
    act: &Activation,
    w: &[f64],
    samples: &SampleSet,
    e: &[f64],
    scale: Scale,
) -> DMatrix<f64> {
    let mut i = 0;
    let b = outer_sum(samples, |x| {
        let c = e[i] * act.d2(dot(w, x));
        i += 1;
        c
    });
    b * scale.factor()
}

fn outer_sum(samples: &SampleSet, mut weight: impl FnMut(&[f64]) -> f64) -> DMatrix<f64> {
    let d = samples.input_dim();
    let mut out = DMatrix::zeros(d, d);
    for x in samples.x() {
        let c = weight(x);
        for t in 0..d {
            for u in 0..d {
                out[(t, u)] += c * x[t] * x[u];
            }
        }
    }
    out
}

/// `Σ_i e_i σ(w·x_i)`: half the derivative of `R` in the output weight of a
/// neuron with input weight `w`.
pub fn error_correlation(act: &Activation, w: &[f64], samples: &SampleSet, e: &[f64]) -> f64 {
    samples.x().iter().zip(e).map(|(x, ei)| ei * act.eval(dot(w, x))).sum()
}

/// `Σ_i e_i σ'(w·x_i) x_i`: the gradient of [`error_correlation`] in `w`.
pub fn error_correlation_grad(act: &Activation, w: &[f64], samples: &SampleSet, e: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for (x, ei) in samples.x().iter().zip(e) {
        let c = ei * act.d1(dot(w, x));
        for (gt, xt) in g.iter_mut().zip(x) {
            *gt += c * xt;
        }
    }
    g
}

/// Hessian in `w` of [`error_correlation`]: `Σ_i e_i σ''(w·x_i) x_i x_iᵀ`.
pub fn error_correlation_hess(act: &Activation, w: &[f64], samples: &SampleSet, e: &[f64]) -> DMatrix<f64> {
    error_curvature(act, w, samples, e, Scale::Raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fd_gradient(spec: &NetworkSpec, theta: &ParamPoint, samples: &SampleSet, h: f64) -> Vec<f64> {
        let flat = theta.to_flat();
        (0..flat.len())
            .map(|j| {
                let mut p = flat.clone();
                let mut q = flat.clone();
                p[j] += h;
                q[j] -= h;
                let lp = loss(spec, &ParamPoint::from_flat(theta.input_dim(), &p).unwrap(), samples).unwrap();
                let lq = loss(spec, &ParamPoint::from_flat(theta.input_dim(), &q).unwrap(), samples).unwrap();
                (lp - lq) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn forward_reference_values() {
        let ex = fixtures::exp_four_samples();
        let v = forward(&ex.spec, &ex.theta, &[1.0, 0.0]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);

        let spec = NetworkSpec::new(2, 3, Activation::exp()).unwrap();
        let theta = ParamPoint::new(vec![1.0, 1.0], vec![vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert_eq!(forward(&spec, &theta, &[0.3, -7.0, 2.0]).unwrap(), 2.0);

        let zero_a = ParamPoint::new(vec![0.0, 0.0], vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.0]]).unwrap();
        assert_eq!(forward(&spec, &zero_a, &[0.3, -7.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn shape_mismatch_is_invalid_argument() {
        let spec = NetworkSpec::new(2, 2, Activation::tanh()).unwrap();
        let theta = ParamPoint::new(vec![1.0], vec![vec![0.0, 1.0]]).unwrap();
        assert!(matches!(forward(&spec, &theta, &[1.0, 2.0]), Err(crate::Error::InvalidArgument(_))));
        let theta = ParamPoint::new(vec![1.0, 2.0], vec![vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(forward(&spec, &theta, &[1.0]).is_err());
        assert!(ParamPoint::new(vec![1.0], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(ParamPoint::new(vec![1.0, 1.0], vec![vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(SampleSet::new(vec![vec![1.0], vec![f64::NAN]], vec![0.0, 1.0]).is_err());
        assert!(NetworkSpec::new(0, 2, Activation::exp()).is_err());
    }

    #[test]
    fn reference_errors_and_loss() {
        let ex = fixtures::exp_four_samples();
        let e = errors(&ex.spec, &ex.theta, &ex.samples).unwrap();
        let expected = [-2.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0];
        for (got, want) in e.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
        let r = loss(&ex.spec, &ex.theta, &ex.samples).unwrap();
        // (4 + 0 + 1 + 1) / 9
        assert!((r - 2.0 / 3.0).abs() < 1e-12 * (2.0 / 3.0));
    }

    #[test]
    fn shifted_single_sample_error() {
        let spec = NetworkSpec::new(1, 2, Activation::tanh()).unwrap();
        let theta = ParamPoint::new(vec![0.7], vec![vec![0.2, -0.4]]).unwrap();
        let x = vec![0.5, 1.5];
        let y = forward(&spec, &theta, &x).unwrap() + 5.0;
        let samples = SampleSet::new(vec![x], vec![y]).unwrap();
        let e = errors(&spec, &theta, &samples).unwrap();
        assert!((e[0] + 5.0).abs() < 1e-14);
    }

    #[test]
    fn reference_point_is_critical() {
        let ex = fixtures::exp_four_samples();
        let g = gradient(&ex.spec, &ex.theta, &ex.samples).unwrap();
        assert!(g.norm() <= 1e-10, "{g}");
    }

    #[test]
    fn zero_output_weights_kill_input_gradient() {
        let spec = NetworkSpec::new(3, 2, Activation::sin()).unwrap();
        let theta = ParamPoint::new(
            vec![0.0, 0.0, 0.0],
            vec![vec![0.3, 1.0], vec![-0.2, 0.5], vec![1.2, -0.7]],
        )
        .unwrap();
        let samples = SampleSet::new(vec![vec![1.0, 0.5], vec![-0.3, 2.0]], vec![0.4, -1.0]).unwrap();
        let g = gradient(&spec, &theta, &samples).unwrap();
        let h = hessian(&spec, &theta, &samples).unwrap();
        for k in 0..3 {
            for t in 0..2 {
                assert_eq!(g[theta.w_slot(k, t)], 0.0);
                for u in 0..2 {
                    assert_eq!(h[(theta.w_slot(k, t), theta.w_slot(k, u))], 0.0);
                }
            }
        }
    }

    #[test]
    fn output_weight_diagonal_matches_feature_energy() {
        let ex = fixtures::exp_four_samples();
        let h = hessian(&ex.spec, &ex.theta, &ex.samples).unwrap();
        let w = &ex.theta.w()[0];
        let energy: f64 = ex.samples.x().iter().map(|x| dot(w, x).exp().powi(2)).sum();
        assert!((h[(0, 0)] - 2.0 * energy).abs() < 1e-13);
        // 1/9 + 1 + 1/9 + 1/9
        assert!((energy - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences_small_case() {
        let spec = NetworkSpec::new(2, 2, Activation::tanh()).unwrap();
        let theta = ParamPoint::new(vec![0.8, -1.1], vec![vec![0.4, -0.3], vec![-0.9, 0.6]]).unwrap();
        let samples = SampleSet::new(
            vec![vec![1.0, 0.2], vec![-0.5, 0.9], vec![0.3, -1.4]],
            vec![0.1, -0.2, 0.7],
        )
        .unwrap();
        let g = gradient(&spec, &theta, &samples).unwrap();
        let fd = fd_gradient(&spec, &theta, &samples, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn loss_delta_agrees_with_direct_difference() {
        let ex = fixtures::exp_four_samples();
        let mut other = ex.theta.clone();
        other.a_mut()[0] = 1.3;
        other.set_w(0, &[-0.5, 0.25]).unwrap();
        let direct = loss(&ex.spec, &other, &ex.samples).unwrap() - loss(&ex.spec, &ex.theta, &ex.samples).unwrap();
        let delta = loss_delta(&ex.spec, &ex.theta, &other, &ex.samples).unwrap();
        assert!((direct - delta).abs() < 1e-12);
        assert_eq!(loss_delta(&ex.spec, &ex.theta, &ex.theta, &ex.samples).unwrap(), 0.0);
    }

    #[test]
    fn flat_layout_round_trips() {
        let theta = ParamPoint::new(vec![1.0, 2.0], vec![vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let flat = theta.to_flat();
        assert_eq!(flat, vec![1.0, 3.0, 4.0, 2.0, 5.0, 6.0]);
        assert_eq!(ParamPoint::from_flat(2, &flat).unwrap(), theta);
        assert_eq!(flat[theta.w_slot(1, 1)], 6.0);
        assert!(ParamPoint::from_flat(2, &flat[..5]).is_err());
    }
}
