//! Ready-made problems: the single exponential neuron fitted to four samples
//! and a generator of random problems with a known critical point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{dot, NetworkSpec, ParamPoint, SampleSet};
use crate::symmetry::independent_family;

/// A network, a sample set and a distinguished parameter point.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: NetworkSpec,
    pub samples: SampleSet,
    pub theta: ParamPoint,
}

/// One exponential neuron `a e^{w·x}` in the plane with samples
/// `((1,0),1), ((0,1),1), ((1,1),0), ((1,-1),0)` and the critical point
/// `θ' = (1, (ln 1/3, 0))`, whose residuals are `(-2/3, 0, 1/3, 1/3)`.
pub fn exp_four_samples() -> Problem {
    let samples = SampleSet::new(
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]],
        vec![1.0, 1.0, 0.0, 0.0],
    )
    .expect("valid samples");
    let theta = ParamPoint::new(vec![1.0], vec![vec![-(3f64.ln()), 0.0]]).expect("valid point");
    Problem {
        spec: NetworkSpec::new(1, 2, Activation::exp()).expect("valid spec"),
        samples,
        theta,
    }
}

/// Random problem of width `r` for which a random point `θ'` is critical
/// with positive loss.
///
/// Inputs are drawn in `[-1.5, 1.5]^d`. The residual vector is drawn from
/// the null space of the linear criticality conditions
/// `Σ_i e_i σ(w_j·x_i) = 0`, `Σ_i e_i σ'(w_j·x_i) x_i = 0` and the targets
/// are set to `g(θ', x_i) - e_i`, so `∇R(θ') = 0` up to round-off.
pub fn critical_instance<R: Rng + ?Sized>(
    rng: &mut R,
    activation: Activation,
    r: usize,
    d: usize,
) -> Result<Problem> {
    let spec = NetworkSpec::new(r, d, activation)?;
    let n = r * (d + 1) + 3;
    for _ in 0..512 {
        let a: Vec<f64> = (0..r)
            .map(|_| {
                let mag = rng.random_range(0.5..1.5);
                if rng.random_bool(0.5) { mag } else { -mag }
            })
            .collect();
        let w: Vec<Vec<f64>> = (0..r).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        if !independent_family(&w, &activation) || !well_separated(&w, &activation) {
            continue;
        }
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();

        let mut rows = Vec::with_capacity(r * (d + 1));
        for wj in &w {
            rows.push(x.iter().map(|xi| activation.eval(dot(wj, xi))).collect::<Vec<_>>());
            for t in 0..d {
                rows.push(x.iter().map(|xi| activation.d1(dot(wj, xi)) * xi[t]).collect());
            }
        }
        let c = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let null = linalg::null_space(&c, 1e-12);
        if null.ncols() == 0 {
            continue;
        }
        let coeffs = DVector::from_fn(null.ncols(), |_, _| rng.random_range(-1.0..1.0));
        let mut e = &null * coeffs;
        let norm = e.norm();
        if norm < 1e-6 {
            continue;
        }
        e *= rng.random_range(0.3..1.0) / norm;
        let theta = ParamPoint::new(a, w)?;
        let y = x.iter().zip(e.iter()).map(|(xi, ei)| theta.output(&activation, xi) - ei).collect();
        let samples = SampleSet::new(x, y)?;
        return Ok(Problem { spec, samples, theta });
    }
    Err(Error::Numerical("could not draw a critical instance".into()))
}

fn well_separated(w: &[Vec<f64>], act: &Activation) -> bool {
    let sign = act.reflection_sign().is_some();
    for (i, wi) in w.iter().enumerate() {
        if act.zero_at_zero() && wi.iter().map(|v| v.abs()).fold(0.0, f64::max) < 0.2 {
            return false;
        }
        for wj in &w[i + 1..] {
            let diff = wi.iter().zip(wj).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let sum = wi.iter().zip(wj).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
            if diff < 0.2 || (sign && sum < 0.2) {
                return false;
            }
        }
    }
    true
}
