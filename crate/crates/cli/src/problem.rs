//! Problem files: network, samples, named parameter points and optional
//! solver settings, stored as TOML.

use std::path::Path;

use critset::{Activation, NetworkSpec, ParamPoint, Parity, SampleSet};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub network: NetworkSection,
    pub samples: Vec<SampleRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointEntry>,
    #[serde(default, skip_serializing_if = "Settings::is_empty")]
    pub settings: Settings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub activation: String,
    pub width: usize,
    pub input_dim: usize,
    /// Declared traits; checked against the built-in activation when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_at_zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRow {
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub name: String,
    pub a: Vec<f64>,
    pub w: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_grad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_target: Option<usize>,
}

impl Settings {
    fn is_empty(&self) -> bool {
        *self == Settings::default()
    }
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub activation: Activation,
    pub samples: SampleSet,
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Numeric(format!("cannot serialize problem: {e}")))
    }

    pub fn validate(self) -> Result<Problem, CliError> {
        let net = &self.network;
        if !Activation::builtin_names().contains(&net.activation.as_str()) {
            return Err(CliError::Input(format!(
                "unknown activation {:?}; expected one of {:?}",
                net.activation,
                Activation::builtin_names()
            )));
        }
        let activation = Activation::by_name(&net.activation).expect("listed as built-in");
        if let Some(p) = net.parity {
            if p != activation.parity() {
                return Err(CliError::Input(format!(
                    "declared parity {p:?} does not match {} ({:?})",
                    activation.name(),
                    activation.parity()
                )));
            }
        }
        if let Some(z) = net.zero_at_zero {
            if z != activation.zero_at_zero() {
                return Err(CliError::Input(format!("declared zero_at_zero = {z} does not match {}", activation.name())));
            }
        }
        NetworkSpec::new(net.width, net.input_dim, activation)?;
        let (x, y) = self.samples.iter().map(|s| (s.x.clone(), s.y)).unzip();
        let samples = SampleSet::new(x, y)?;
        if samples.input_dim() != net.input_dim {
            return Err(CliError::Input(format!(
                "samples have dimension {}, network declares {}",
                samples.input_dim(),
                net.input_dim
            )));
        }
        for p in &self.points {
            let point = p.to_point()?;
            if point.input_dim() != net.input_dim {
                return Err(CliError::Input(format!("point {:?} has input dimension {}", p.name, point.input_dim())));
            }
        }
        Ok(Problem { file: self, activation, samples })
    }
}

impl PointEntry {
    pub fn from_point(name: &str, p: &ParamPoint) -> Self {
        Self { name: name.to_string(), a: p.a().to_vec(), w: p.w().to_vec() }
    }

    pub fn to_point(&self) -> Result<ParamPoint, CliError> {
        ParamPoint::new(self.a.clone(), self.w.clone())
            .map_err(|e| CliError::Input(format!("point {:?}: {e}", self.name)))
    }
}

impl Problem {
    /// The named point, or the first one when `name` is `None`.
    pub fn point(&self, name: Option<&str>) -> Result<(String, ParamPoint), CliError> {
        let entry = match name {
            Some(n) => self.file.points.iter().find(|p| p.name == n),
            None => self.file.points.first(),
        };
        let entry = entry.ok_or_else(|| match name {
            Some(n) => CliError::Input(format!("no point named {n:?}")),
            None => CliError::Input("the problem file lists no points".into()),
        })?;
        Ok((entry.name.clone(), entry.to_point()?))
    }

    /// Spec for a point of any width with this problem's activation.
    pub fn spec_for(&self, p: &ParamPoint) -> Result<NetworkSpec, CliError> {
        Ok(NetworkSpec::for_point(p, self.activation)?)
    }
}

/// The single exponential neuron with four samples, as a problem file.
pub fn example_problem() -> ProblemFile {
    let ex = critset::fixtures::exp_four_samples();
    ProblemFile {
        network: NetworkSection {
            activation: "exp".into(),
            width: 1,
            input_dim: 2,
            parity: Some(Parity::None),
            zero_at_zero: Some(false),
        },
        samples: ex.samples.x().iter().zip(ex.samples.y()).map(|(x, y)| SampleRow { x: x.clone(), y: *y }).collect(),
        points: vec![PointEntry::from_point("theta_prime", &ex.theta)],
        settings: Settings::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips_through_toml() {
        let file = example_problem();
        let text = file.to_toml().unwrap();
        let back: ProblemFile = toml::from_str(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.points[0].w[0][0], -(3f64.ln()));
    }

    #[test]
    fn trait_mismatch_is_an_input_error() {
        let mut file = example_problem();
        file.network.parity = Some(Parity::Odd);
        assert!(matches!(file.validate(), Err(CliError::Input(_))));
    }

    #[test]
    fn unknown_activation_is_rejected() {
        let mut file = example_problem();
        file.network.activation = "relu".into();
        assert!(matches!(file.validate(), Err(CliError::Input(_))));
    }
}
