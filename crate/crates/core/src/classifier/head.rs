use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Encoder;
use crate::context::ContextDocument;
use crate::error::{Error, Result};

pub const HEAD_FORMAT_VERSION: u32 = 1;

/// Probability clamp used by the loss.
pub const PROB_EPS: f64 = 1e-12;

/// Logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 { 1.0 / (1.0 + (-z).exp()) } else { z.exp() / (1.0 + z.exp()) };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Weighted binary cross-entropy. `w` scales positive samples only.
pub fn loss(x: f64, y: bool, w: f64) -> f64 {
    let x = x.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if y {
        -w * x.ln()
    } else {
        -(1.0 - x).ln()
    }
}

/// Linear layer plus sigmoid over encoder features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    pub format_version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl ClassifierHead {
    pub fn zeros(dim: usize) -> Self {
        ClassifierHead { format_version: HEAD_FORMAT_VERSION, weights: vec![0.0; dim], bias: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::Config(format!(
                "head expects {} features, encoder produced {}",
                self.weights.len(),
                features.len()
            )));
        }
        Ok(self.weights.iter().zip(features).map(|(w, x)| w * x).sum::<f64>() + self.bias)
    }

    pub fn probability(&self, features: &[f64]) -> Result<f64> {
        self.logit(features).map(sigmoid)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let head: ClassifierHead = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if head.format_version != HEAD_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "{}: head format version {} is not supported (expected {})",
                path.display(),
                head.format_version,
                HEAD_FORMAT_VERSION
            )));
        }
        Ok(head)
    }
}

/// Gradient of [`loss`] with respect to the head weights and bias.
pub fn gradient(head: &ClassifierHead, features: &[f64], y: bool, w: f64) -> Result<(Vec<f64>, f64)> {
    let p = head.probability(features)?;
    let g = if y { w * (p - 1.0) } else { p };
    Ok((features.iter().map(|x| g * x).collect(), g))
}

pub fn score(doc: &ContextDocument, encoder: &dyn Encoder, head: &ClassifierHead) -> Result<f64> {
    if encoder.dim() != head.dim() {
        return Err(Error::Config(format!(
            "head dimension {} does not match encoder dimension {}",
            head.dim(),
            encoder.dim()
        )));
    }
    head.probability(&encoder.encode(&doc.text()))
}
