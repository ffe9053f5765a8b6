//! Reconstruction of the critical set `C_θ` that represents one output
//! function.
//!
//! Given a minimal critical point `θ'` of width `r`, every critical point of
//! width `m` with the same output splits into an affine part (how each
//! interval shares its output weight) and `l` zero-output neurons whose input
//! weights lie in the zero set `M_{θ'}` of
//! `τ(w) = Σ_i e_i(θ') σ(w·x_i)`. This module samples `M_{θ'}`, builds one
//! member of every branch piece, evaluates the dimension count and produces
//! explicit sequences of critical points showing that branches touch.

mod pieces;
mod trace;
mod witness;
mod zeros;

use crate::activation::Activation;
use crate::error::{invalid, Result};
use crate::model::{self, ParamPoint, SampleSet};

pub use pieces::{
    critical_set_nullity, default_trace, dimension_report, enumerate_pieces, inverse_image_piece, BranchPiece,
};
pub use trace::{trace_manifold, EstimatedDim, ManifoldTrace, TRACE_TOL};
pub use witness::{connectivity_witness_a, connectivity_witness_b, WitnessSequence};
pub use zeros::{common_zero_search, zero_residual};

/// Axis-aligned box in weight space.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("region bounds must be non-empty and of equal length");
        }
        if lo.iter().zip(&hi).any(|(l, h)| !l.is_finite() || !h.is_finite() || l >= h) {
            return invalid("region needs finite bounds with lo < hi in every coordinate");
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, w: &[f64], slack: f64) -> bool {
        w.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }

    pub(crate) fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }
}

/// `τ(w) = Σ_i e_i(θ') σ(w·x_i)`, half the output-weight derivative of a
/// neuron with input weight `w` added to `θ'` with output weight zero.
pub fn tau(activation: &Activation, theta_r: &ParamPoint, samples: &SampleSet, w: &[f64]) -> f64 {
    let e = model::residuals(activation, theta_r, samples);
    model::error_correlation(activation, w, samples, &e)
}

/// `τ` with the residuals frozen, plus its gradient and Hessian in `w`.
#[derive(Debug, Clone)]
pub(crate) struct ZeroMap<'a> {
    pub act: &'a Activation,
    pub samples: &'a SampleSet,
    pub e: Vec<f64>,
}

impl<'a> ZeroMap<'a> {
    pub fn new(act: &'a Activation, theta: &ParamPoint, samples: &'a SampleSet) -> Self {
        Self { act, samples, e: model::residuals(act, theta, samples) }
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        model::error_correlation(self.act, w, self.samples, &self.e)
    }

    pub fn grad(&self, w: &[f64]) -> Vec<f64> {
        model::error_correlation_grad(self.act, w, self.samples, &self.e)
    }

    pub fn hess(&self, w: &[f64]) -> nalgebra::DMatrix<f64> {
        model::error_correlation_hess(self.act, w, self.samples, &self.e)
    }

    /// Size of the terms summed in the gradient; used to decide when the
    /// gradient counts as zero.
    pub fn grad_scale(&self, w: &[f64]) -> f64 {
        self.samples
            .x()
            .iter()
            .zip(&self.e)
            .map(|(x, e)| {
                (e * self.act.d1(model::dot(w, x))).abs() * x.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .sum()
    }

    pub fn all_zero(&self) -> bool {
        self.e.iter().all(|e| e.abs() <= 1e-14)
    }
}
