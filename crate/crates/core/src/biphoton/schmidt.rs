use nalgebra::DMatrix;
use serde::Serialize;

use super::JsaGrid;
use crate::{Error, Result};

/// Schmidt weights and number of a JSA.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchmidtReport {
    /// Schmidt number K = 1/Σp².
    #[serde(rename = "K")]
    pub k: f64,
    /// Normalized weights pᵢ = sᵢ²/Σs², descending.
    pub weights: Vec<f64>,
}

impl SchmidtReport {
    pub fn from_singular_values(mut s: Vec<f64>) -> Result<Self> {
        s.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = s.iter().map(|v| v * v).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numeric(format!("singular values sum to {total}")));
        }
        let weights: Vec<f64> = s.iter().map(|v| v * v / total).collect();
        let k = 1.0 / weights.iter().map(|p| p * p).sum::<f64>();
        Ok(Self { k, weights })
    }

    /// The largest `n` weights.
    pub fn top(&self, n: usize) -> &[f64] {
        &self.weights[..n.min(self.weights.len())]
    }
}

/// Singular-value decomposition of the amplitude matrix. Purely real JSAs
/// take the cheaper real decomposition.
pub fn schmidt_decomposition(jsa: &JsaGrid) -> Result<SchmidtReport> {
    let a = &jsa.amplitude;
    let sv: Vec<f64> = if a.iter().all(|c| c.im == 0.0) {
        let re: DMatrix<f64> = a.map(|c| c.re);
        re.try_svd(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        a.clone()
            .try_svd(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    SchmidtReport::from_singular_values(sv)
}
