//! Mixed geometrically uniform states on a circle of fixed polar angle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gu::azimuth;
use crate::error::{Error, Result};
use crate::optim::RetargetFamily;
use crate::qcore::{c, DensityMatrix, Ensemble, PureState};
use crate::seqchan::{Retarget, RetargetContext};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LiftedGuParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    #[serde(default = "one")]
    pub lambda: f64,
}

fn one() -> f64 {
    1.0
}

impl LiftedGuParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("N = {} must be at least 2", self.n)));
        }
        if !(self.theta > 0.0 && self.theta <= PI / 2.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("theta = {} must lie in (0, pi/2]", self.theta)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda = {} must lie in [0, 1]", self.lambda)));
        }
        Ok(())
    }
}

/// Contraction `Delta = [1/2 (1 - eta0) + sqrt(eta0^2 - cos^2 theta)] / sin theta`
/// of the mixing parameter per party.
pub fn delta(theta: f64, eta0: f64) -> Result<f64> {
    let floor = theta.cos();
    if !(0.0..=1.0).contains(&eta0) {
        return Err(Error::InvalidParameter(format!("inconclusive rate {eta0} outside [0, 1]")));
    }
    if eta0 < floor - 1e-12 {
        return Err(Error::InfeasibleInconclusiveRate { requested: eta0, minimum: floor });
    }
    // sqrt(eta0^2 - cos^2) = eta0 - cos^2 / (sqrt(..) + eta0), exact on the equator.
    let root = (eta0 * eta0 - floor * floor).max(0.0).sqrt();
    let shortfall = if root + eta0 > 0.0 { floor * floor / (root + eta0) } else { 0.0 };
    Ok((0.5 * (1.0 + eta0) - shortfall) / theta.sin())
}

/// Largest admissible party count for a confidence threshold.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PartyBound {
    /// `1 + log(N C_th - 1) / log Delta`; infinite when every party clears
    /// the threshold.
    pub bound: f64,
    /// `floor(bound)`, or `None` when unbounded.
    pub max_parties: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftedGuOracle {
    pub params: LiftedGuParams,
    pub confidence: f64,
    /// Weight `2 / (N (1 + cos theta))` of the full-strength MCM.
    pub weight: f64,
    /// Least attainable inconclusive rate `cos theta`.
    pub min_rate: f64,
}

fn lifted_state(n: usize, x: usize, theta: f64, lambda: f64) -> Result<DensityMatrix> {
    let phi = azimuth(x, n);
    DensityMatrix::from_bloch([lambda * theta.sin() * phi.cos(), lambda * theta.sin() * phi.sin(), theta.cos()])
}

pub fn lifted_gu(params: LiftedGuParams) -> Result<(Ensemble, LiftedGuOracle)> {
    params.validate()?;
    let LiftedGuParams { n, theta, lambda } = params;
    let states = (0..n)
        .map(|x| lifted_state(n, x, theta, lambda))
        .collect::<Result<Vec<_>>>()?;
    let oracle = LiftedGuOracle {
        params,
        confidence: (1.0 + lambda) / n as f64,
        weight: 2.0 / (n as f64 * (1.0 + theta.cos())),
        min_rate: theta.cos(),
    };
    Ok((Ensemble::uniform(states)?, oracle))
}

impl LiftedGuOracle {
    /// MCM projector states `sin(theta/2)|0> + e^{i 2 pi x/N} cos(theta/2)|1>`.
    pub fn projectors(&self) -> Vec<PureState> {
        let LiftedGuParams { n, theta, .. } = self.params;
        (0..n).map(|x| PureState::qubit(PI - theta, azimuth(x, n))).collect()
    }

    /// `lambda^(1), ..., lambda^(R+1)` for parties with rates `rates`.
    pub fn lambdas(&self, rates: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(rates.len() + 1);
        let mut lambda = self.params.lambda;
        out.push(lambda);
        for &eta0 in rates {
            lambda *= delta(self.params.theta, eta0)?;
            out.push(lambda);
        }
        Ok(out)
    }

    /// `C^(j) = (1 + lambda^(j)) / N` for each party.
    pub fn confidences(&self, rates: &[f64]) -> Result<Vec<f64>> {
        let n = self.params.n as f64;
        let lambdas = self.lambdas(rates)?;
        Ok(lambdas[..rates.len()].iter().map(|l| (1.0 + l) / n).collect())
    }

    pub fn state(&self, x: usize, lambda: f64) -> Result<DensityMatrix> {
        lifted_state(self.params.n, x, self.params.theta, lambda)
    }

    /// Average trace distance caused by one party with rate `eta0` whose
    /// retarget states sit at polar angle `varphi`.
    pub fn disturbance(&self, lambda: f64, eta0: f64, varphi: f64) -> Result<f64> {
        let theta = self.params.theta;
        delta(theta, eta0)?;
        let root = (eta0 * eta0 - theta.cos().powi(2)).max(0.0).sqrt();
        let transverse = 0.5 * (1.0 - eta0) * varphi.sin() + root - theta.sin();
        Ok(((1.0 - eta0).powi(2) * varphi.cos().powi(2) + lambda * lambda * transverse * transverse).sqrt())
    }

    /// Party-count bound for threshold `threshold` when every party uses
    /// rate `eta0`, starting from `lambda = 1`.
    pub fn party_bound(&self, eta0: f64, threshold: f64) -> Result<PartyBound> {
        let d = delta(self.params.theta, eta0)?;
        let excess = self.params.n as f64 * threshold - 1.0;
        let bound = if excess <= 0.0 || d >= 1.0 {
            f64::INFINITY
        } else if d <= 0.0 {
            1.0
        } else {
            1.0 + excess.ln() / d.ln()
        };
        Ok(PartyBound {
            bound,
            max_parties: bound.is_finite().then(|| bound.max(0.0).floor() as usize),
        })
    }
}

/// Sends each outcome to the equatorial state at the azimuth of its MCM
/// projector.
#[derive(Clone, Copy, Debug, Default)]
pub struct EquatorialRetarget;

impl Retarget for EquatorialRetarget {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>> {
        if ctx.ensemble.dim() != 2 {
            return Err(Error::DimensionMismatch(ctx.ensemble.dim(), 2));
        }
        ctx.mcm
            .projector_states()
            .into_iter()
            .map(|s| {
                s.map(|s| {
                    let [x, y, _] = DensityMatrix::from_pure(&s).bloch()?;
                    Ok(PureState::qubit(PI / 2.0, y.atan2(x)))
                })
                .transpose()
            })
            .collect()
    }
}

/// Retarget states at a common polar angle and the ensemble's azimuths.
#[derive(Clone, Copy, Debug)]
pub struct LiftedPolarFamily {
    pub n: usize,
}

impl RetargetFamily for LiftedPolarFamily {
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, PI)]
    }

    fn states(&self, params: &[f64]) -> Result<Vec<Option<PureState>>> {
        Ok((0..self.n).map(|x| Some(PureState::qubit(params[0], azimuth(x, self.n)))).collect())
    }
}

/// `lambda |psi_x><psi_x| + (1 - lambda) rho` written out, for tests.
pub fn mixture_form(n: usize, x: usize, theta: f64, lambda: f64) -> Result<DensityMatrix> {
    let psi = PureState::qubit(theta, azimuth(x, n));
    let avg = DensityMatrix::from_bloch([0.0, 0.0, theta.cos()])?;
    DensityMatrix::new(psi.projector() * c(lambda, 0.0) + avg.matrix() * c(1.0 - lambda, 0.0))
}
