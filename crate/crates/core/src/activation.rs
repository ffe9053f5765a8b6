//! Scalar activation functions together with their first two derivatives and
//! the symmetry traits the independence rules depend on.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared parity of an activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    None,
    Odd,
    Even,
}

/// An analytic, non-polynomial activation `σ` with closed-form `σ'` and `σ''`.
///
/// Parity and `σ(0) = 0` are declared by whoever builds the value. They cannot
/// be decided from point evaluations, so [`Activation::check_traits`] only
/// spot-checks them on a fixed grid.
#[derive(Clone, Copy)]
pub struct Activation {
    name: &'static str,
    eval: fn(f64) -> f64,
    d1: fn(f64) -> f64,
    d2: fn(f64) -> f64,
    parity: Parity,
    zero_at_zero: bool,
}

/// Grid used by the trait spot-checks.
const CHECK_GRID: [f64; 13] = [
    -3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0,
];

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    /// Builds a custom activation. Call [`Activation::check_traits`] to
    /// validate the declaration.
    pub fn new(
        name: &'static str,
        eval: fn(f64) -> f64,
        d1: fn(f64) -> f64,
        d2: fn(f64) -> f64,
        parity: Parity,
        zero_at_zero: bool,
    ) -> Self {
        Self { name, eval, d1, d2, parity, zero_at_zero }
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp, f64::exp, f64::exp, Parity::None, false)
    }

    pub fn tanh() -> Self {
        fn d1(z: f64) -> f64 {
            let t = z.tanh();
            1.0 - t * t
        }
        fn d2(z: f64) -> f64 {
            let t = z.tanh();
            -2.0 * t * (1.0 - t * t)
        }
        Self::new("tanh", f64::tanh, d1, d2, Parity::Odd, true)
    }

    pub fn sin() -> Self {
        fn d2(z: f64) -> f64 {
            -z.sin()
        }
        Self::new("sin", f64::sin, f64::cos, d2, Parity::Odd, true)
    }

    /// `log(1 + e^z)`, evaluated without overflow.
    pub fn softplus() -> Self {
        fn eval(z: f64) -> f64 {
            z.max(0.0) + (-z.abs()).exp().ln_1p()
        }
        fn d2(z: f64) -> f64 {
            let s = sigmoid(z);
            s * (1.0 - s)
        }
        Self::new("softplus", eval, sigmoid, d2, Parity::None, false)
    }

    /// Even activation with `σ(0) = 1`.
    pub fn cos() -> Self {
        fn d1(z: f64) -> f64 {
            -z.sin()
        }
        fn d2(z: f64) -> f64 {
            -z.cos()
        }
        Self::new("cos", f64::cos, d1, d2, Parity::Even, false)
    }

    /// Even activation with `σ(0) = 0`: `cosh(z) - 1`.
    pub fn cosh_m1() -> Self {
        fn eval(z: f64) -> f64 {
            let h = (0.5 * z).sinh();
            2.0 * h * h
        }
        Self::new("cosh_m1", eval, f64::sinh, f64::cosh, Parity::Even, true)
    }

    /// Activation without parity and with `σ(0) = 0`: `e^z - 1`.
    pub fn expm1() -> Self {
        Self::new("expm1", f64::exp_m1, f64::exp, f64::exp, Parity::None, true)
    }

    /// The activations the command-line front-end ships with.
    pub fn builtin_names() -> &'static [&'static str] {
        &["exp", "tanh", "sin", "softplus"]
    }

    /// Looks up a built-in activation by name (the four CLI activations plus
    /// the extra library ones).
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Self::exp()),
            "tanh" => Some(Self::tanh()),
            "sin" => Some(Self::sin()),
            "softplus" => Some(Self::softplus()),
            "cos" => Some(Self::cos()),
            "cosh_m1" => Some(Self::cosh_m1()),
            "expm1" => Some(Self::expm1()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        (self.eval)(z)
    }

    #[inline]
    pub fn d1(&self, z: f64) -> f64 {
        (self.d1)(z)
    }

    #[inline]
    pub fn d2(&self, z: f64) -> f64 {
        (self.d2)(z)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn zero_at_zero(&self) -> bool {
        self.zero_at_zero
    }

    /// Coefficient `c` with `σ(-z) = c·σ(z)` for every `z`, if the parity
    /// provides one.
    pub fn reflection_sign(&self) -> Option<f64> {
        match self.parity {
            Parity::None => None,
            Parity::Odd => Some(-1.0),
            Parity::Even => Some(1.0),
        }
    }

    /// Spot-checks the declared traits and the derivative closures on a fixed
    /// grid.
    pub fn check_traits(&self) -> Result<()> {
        const PARITY_TOL: f64 = 1e-10;
        const DERIV_TOL: f64 = 1e-6;
        const H: f64 = 1e-4;
        let fail = |what: String| Err(Error::InvalidArgument(format!("{}: {what}", self.name)));

        for &z in &CHECK_GRID {
            let (p, m) = (self.eval(z), self.eval(-z));
            match self.parity {
                Parity::Odd if (p + m).abs() > PARITY_TOL => {
                    return fail(format!("declared odd but σ({z}) + σ({}) = {}", -z, p + m))
                }
                Parity::Even if (p - m).abs() > PARITY_TOL => {
                    return fail(format!("declared even but σ({z}) - σ({}) = {}", -z, p - m))
                }
                _ => {}
            }
            let fd1 = (self.eval(z + H) - self.eval(z - H)) / (2.0 * H);
            let d1 = self.d1(z);
            if (fd1 - d1).abs() > DERIV_TOL * d1.abs().max(1.0) {
                return fail(format!("σ' mismatch at {z}: closed form {d1}, difference {fd1}"));
            }
            let fd2 = (self.d1(z + H) - self.d1(z - H)) / (2.0 * H);
            let d2 = self.d2(z);
            if (fd2 - d2).abs() > DERIV_TOL * d2.abs().max(1.0) {
                return fail(format!("σ'' mismatch at {z}: closed form {d2}, difference {fd2}"));
            }
        }
        let at_zero = self.eval(0.0);
        if self.zero_at_zero && at_zero.abs() > 1e-12 {
            return fail(format!("declared σ(0) = 0 but σ(0) = {at_zero}"));
        }
        if !self.zero_at_zero && at_zero.abs() <= 1e-12 {
            return fail("σ(0) = 0 but not declared".to_string());
        }
        Ok(())
    }
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Activation")
            .field("name", &self.name)
            .field("parity", &self.parity)
            .field("zero_at_zero", &self.zero_at_zero)
            .finish()
    }
}

impl PartialEq for Activation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.parity == other.parity
            && self.zero_at_zero == other.zero_at_zero
    }
}
