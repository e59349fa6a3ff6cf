//! Geometrically uniform pure states on the equator of the Bloch sphere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::RetargetFamily;
use crate::qcore::{c, DensityMatrix, Ensemble, PureState};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GuParams {
    #[serde(rename = "N")]
    pub n: usize,
}

/// Azimuth `2 pi x / N` of label `x` (0-based; the first state sits at
/// `2 pi / N`).
pub fn azimuth(x: usize, n: usize) -> f64 {
    2.0 * PI * (x + 1) as f64 / n as f64
}

pub fn states(n: usize) -> Vec<PureState> {
    (0..n).map(|x| PureState::qubit(PI / 2.0, azimuth(x, n))).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuOracle {
    #[serde(rename = "N")]
    pub n: usize,
    pub confidence: f64,
    pub weight: f64,
}

pub fn gu(params: GuParams) -> Result<(Ensemble, GuOracle)> {
    let n = params.n;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N = {n} must be at least 2")));
    }
    let e = Ensemble::from_pure(vec![1.0 / n as f64; n], &states(n))?;
    Ok((e, GuOracle { n, confidence: 2.0 / n as f64, weight: 2.0 / n as f64 }))
}

/// `P_+ = 1/2 (1 + prod_k 1/2 (1 + eta0_k))` over the parties that already
/// measured, for `N >= 3`.
pub fn p_plus(previous: &[f64]) -> f64 {
    0.5 * (1.0 + previous.iter().map(|e| 0.5 * (1.0 + e)).product::<f64>())
}

impl GuOracle {
    /// Bloch-vector contraction of one party with rate `eta0`. The antipodal
    /// pair (`N = 2`) is measured projectively and does not contract.
    pub fn contraction(&self, eta0: f64) -> f64 {
        if self.n == 2 {
            1.0
        } else {
            0.5 * (1.0 + eta0)
        }
    }

    /// `P_+` after the parties with inconclusive rates `previous`.
    pub fn p_plus(&self, previous: &[f64]) -> f64 {
        0.5 * (1.0 + previous.iter().map(|&e| self.contraction(e)).product::<f64>())
    }

    /// Confidence of the party following those with inconclusive rates
    /// `previous`.
    pub fn confidence_after(&self, previous: &[f64]) -> f64 {
        self.confidence * self.p_plus(previous)
    }

    /// Confidences of parties `1..=parties` all using rate `eta0`.
    pub fn confidences(&self, eta0: f64, parties: usize) -> Vec<f64> {
        (0..parties).map(|j| self.confidence_after(&vec![eta0; j])).collect()
    }

    /// `P_+ |psi_x><psi_x| + P_- |psi_x^perp><psi_x^perp|`.
    pub fn state_after(&self, x: usize, previous: &[f64]) -> Result<DensityMatrix> {
        let psi = PureState::qubit(PI / 2.0, azimuth(x, self.n));
        let plus = self.p_plus(previous);
        DensityMatrix::new(psi.projector() * c(plus, 0.0) + psi.qubit_perp()?.projector() * c(1.0 - plus, 0.0))
    }
}

/// Covariant retarget states: each `|psi_x>` tilted off the equator by the
/// first parameter and rotated in azimuth by the second.
#[derive(Clone, Copy, Debug)]
pub struct GuCovariantFamily {
    pub n: usize,
}

impl RetargetFamily for GuCovariantFamily {
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(-PI / 2.0, PI / 2.0), (-PI / self.n as f64, PI / self.n as f64)]
    }

    fn states(&self, params: &[f64]) -> Result<Vec<Option<PureState>>> {
        Ok((0..self.n)
            .map(|x| Some(PureState::qubit(PI / 2.0 + params[0], azimuth(x, self.n) + params[1])))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn purity_factor_examples() {
        assert_abs_diff_eq!(p_plus(&[0.0]), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(p_plus(&[0.5, 0.5]), 0.78125, epsilon = 1e-15);
        let (_, o) = gu(GuParams { n: 5 }).unwrap();
        assert_abs_diff_eq!(o.confidence_after(&[0.5, 0.5]), 0.3125, epsilon = 1e-15);
        let (_, o) = gu(GuParams { n: 3 }).unwrap();
        for c in o.confidences(1.0, 6) {
            assert_abs_diff_eq!(c, 2.0 / 3.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(o.confidence_after(&[0.0]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn average_is_maximally_mixed() {
        for n in 2..7 {
            let (e, _) = gu(GuParams { n }).unwrap();
            let avg = e.average();
            let diff = avg.matrix() - DensityMatrix::maximally_mixed(2).matrix();
            assert!(crate::qcore::matrix::max_abs(&diff) < 1e-15);
        }
    }

    #[test]
    fn rejects_single_state() {
        assert!(gu(GuParams { n: 1 }).is_err());
    }
}
