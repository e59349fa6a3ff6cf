//! Two equiprobable noisy qubit states `p |psi_x><psi_x| + (1 - p) 1/2`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcm::McmSolution;
use crate::optim::two_state_least_disturbing;
use crate::qcore::matrix::outer;
use crate::qcore::{c, ComplexMatrix, DensityMatrix, Ensemble, PureState, C64};
use crate::seqchan::{KrausChannel, KrausOperator, Outcome, PartyPlan, PartyStrategy};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TwoMixedParams {
    pub p: f64,
    pub theta: f64,
}

impl TwoMixedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {} must lie in (0, 1]", self.p)));
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("theta = {} must lie in (0, pi)", self.theta)));
        }
        Ok(())
    }
}

/// Closed-form quantities of the two-state family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoMixedOracle {
    pub params: TwoMixedParams,
    pub confidence: f64,
    /// `|<phi_1|phi_2>|`.
    pub overlap: f64,
    pub projectors: [PureState; 2],
}

fn pure(x: usize, theta: f64) -> PureState {
    let sign = if x == 0 { 1.0 } else { -1.0 };
    PureState::from_slice(&[c((theta / 2.0).cos(), 0.0), c(sign * (theta / 2.0).sin(), 0.0)])
        .expect("unit vector")
}

/// The ensemble with uniform priors and its oracle.
pub fn two_mixed(params: TwoMixedParams) -> Result<(Ensemble, TwoMixedOracle)> {
    params.validate()?;
    let TwoMixedParams { p, theta } = params;
    let noise = ComplexMatrix::identity(2, 2) * c((1.0 - p) / 2.0, 0.0);
    let states = (0..2)
        .map(|x| DensityMatrix::new(pure(x, theta).projector() * c(p, 0.0) + &noise))
        .collect::<Result<Vec<_>>>()?;
    let pc = p * theta.cos();
    let projectors = [1.0, -1.0].map(|sign| {
        PureState::from_slice(&[c(((1.0 - pc) / 2.0).sqrt(), 0.0), c(sign * ((1.0 + pc) / 2.0).sqrt(), 0.0)])
            .expect("unit vector")
    });
    let oracle = TwoMixedOracle {
        params,
        confidence: 0.5 * (1.0 + p * theta.sin() / (1.0 - pc * pc).sqrt()),
        overlap: pc.abs(),
        projectors,
    };
    Ok((Ensemble::uniform(states)?, oracle))
}

impl TwoMixedOracle {
    /// `C |phi_{x+1}^perp><..| + (1 - C) |phi_x^perp><..|`.
    pub fn decomposition(&self, x: usize) -> Result<DensityMatrix> {
        let own = self.projectors[x].qubit_perp()?.projector();
        let other = self.projectors[1 - x].qubit_perp()?.projector();
        DensityMatrix::new(other * c(self.confidence, 0.0) + own * c(1.0 - self.confidence, 0.0))
    }

    /// Largest single-party information gain `C (1 - s)`.
    pub fn max_gain(&self) -> f64 {
        self.confidence * (1.0 - self.overlap)
    }

    /// Overlap `s^(j) = s^(1 - (j-1)/R)` seen by party `j` (1-based) under
    /// the equal-gain schedule.
    pub fn scheduled_overlap(&self, party: usize, parties: usize) -> f64 {
        self.overlap.powf(1.0 - (party as f64 - 1.0) / parties as f64)
    }

    /// Best joint success probability `C (1 - s^(1/R))^R`.
    pub fn optimal_joint_success(&self, parties: usize) -> f64 {
        let r = parties as f64;
        self.confidence * (1.0 - self.overlap.powf(1.0 / r)).powi(parties as i32)
    }
}

/// Two unit vectors with overlap `overlap`, placed symmetrically about the
/// bisector of `phi_1` and `phi_2`.
pub fn split_pair(phi1: &PureState, phi2: &PureState, overlap: f64) -> Result<(PureState, PureState)> {
    let g = phi1.inner(phi2);
    let s = g.norm();
    let phase = if s > 0.0 { g / c(s, 0.0) } else { c(1.0, 0.0) };
    let aligned: DVector<C64> = phi2.amplitudes() * phase.conj();
    if 1.0 - s < 1e-15 {
        return Ok((phi1.clone(), phi1.clone()));
    }
    let u = (phi1.amplitudes() + &aligned) / c((2.0 * (1.0 + s)).sqrt(), 0.0);
    let w = (phi1.amplitudes() - &aligned) / c((2.0 * (1.0 - s)).sqrt(), 0.0);
    let beta = overlap.clamp(-1.0, 1.0).acos() / 2.0;
    let first = &u * c(beta.cos(), 0.0) + &w * c(beta.sin(), 0.0);
    let second = &u * c(beta.cos(), 0.0) - &w * c(beta.sin(), 0.0);
    Ok((PureState::normalized(first)?, PureState::normalized(second)?))
}

/// How much information each party extracts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum GainPolicy {
    /// Equal gains `C (1 - s^(1/R))` maximizing the joint success of `R`
    /// parties.
    Optimal { parties: usize },
    /// Gain per party, in order.
    Explicit(Vec<f64>),
}

/// Least-disturbing rank-one Kraus operators that keep the confidence of
/// both labels fixed.
#[derive(Clone, Debug)]
pub struct TwoStateStrategy {
    pub policy: GainPolicy,
}

/// Kraus operators of one least-disturbing party together with the
/// weights and the states its outcomes map to.
#[derive(Clone, Debug)]
pub struct TwoStateStep {
    pub gain: f64,
    pub a: f64,
    pub b: f64,
    pub overlap: f64,
    pub new_overlap: f64,
    pub channel: KrausChannel,
    /// `|varphi_2^perp>` and `|varphi_1^perp>`.
    pub targets: [PureState; 2],
}

/// Builds the channel of one party extracting `gain` from a pair with MCM
/// projector states `phi` and common confidence `confidence`.
pub fn least_disturbing_step(phi: [&PureState; 2], confidence: f64, gain: f64) -> Result<TwoStateStep> {
    let g = phi[0].inner(phi[1]);
    let s = g.norm().min(1.0);
    let ld = two_state_least_disturbing(confidence, s, gain)?;
    let (v1, v2) = split_pair(phi[0], phi[1], ld.new_overlap)?;
    let p1 = v1.qubit_perp()?;
    let p2 = v2.qubit_perp()?;
    let k1 = outer(p2.amplitudes(), phi[0].amplitudes());
    let k2 = outer(p1.amplitudes(), phi[1].amplitudes());
    let cross = p2.inner(&p1);
    let chi = if s > 0.0 && cross.norm() > 0.0 {
        let target = -g / c(s, 0.0);
        target * (cross / c(cross.norm(), 0.0)).conj()
    } else {
        c(1.0, 0.0)
    };
    let k0 = (&k1 + &k2 * chi) * c(ld.b.sqrt(), 0.0);
    let mut ops = Vec::with_capacity(3);
    if ld.a > 0.0 {
        ops.push(KrausOperator { outcome: Outcome::Label(0), operator: k1 * c(ld.a.sqrt(), 0.0) });
        ops.push(KrausOperator { outcome: Outcome::Label(1), operator: k2 * c(ld.a.sqrt(), 0.0) });
    }
    ops.push(KrausOperator { outcome: Outcome::Inconclusive, operator: k0 });
    Ok(TwoStateStep {
        gain,
        a: ld.a,
        b: ld.b,
        overlap: s,
        new_overlap: ld.new_overlap,
        channel: KrausChannel::new(ops)?,
        targets: [p2, p1],
    })
}

/// Common confidence and projector states of a uniform two-state qubit
/// ensemble, checking that both labels share one confidence.
pub fn pair_structure(e: &Ensemble, sol: &McmSolution) -> Result<(f64, [PureState; 2])> {
    if e.len() != 2 || e.dim() != 2 {
        return Err(Error::InvalidEnsemble("two qubit states are required".into()));
    }
    if (e.prior(0) - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidEnsemble("priors must be uniform".into()));
    }
    let conf = sol.confidences();
    if (conf[0] - conf[1]).abs() > 1e-9 {
        return Err(Error::InvalidEnsemble(format!(
            "confidences differ: {} vs {}",
            conf[0], conf[1]
        )));
    }
    let states = sol.projector_states();
    match (&states[0], &states[1]) {
        (Some(a), Some(b)) => Ok((0.5 * (conf[0] + conf[1]), [a.clone(), b.clone()])),
        _ => Err(Error::InvalidEnsemble("missing MCM projector".into())),
    }
}

impl TwoStateStrategy {
    pub fn optimal(parties: usize) -> Self {
        TwoStateStrategy { policy: GainPolicy::Optimal { parties } }
    }

    pub fn explicit(gains: Vec<f64>) -> Self {
        TwoStateStrategy { policy: GainPolicy::Explicit(gains) }
    }

    fn gain(&self, party: usize, confidence: f64, overlap: f64) -> Result<f64> {
        match &self.policy {
            GainPolicy::Optimal { parties } => {
                if party > *parties {
                    return Err(Error::InvalidParameter(format!(
                        "schedule covers {parties} parties, asked for party {party}"
                    )));
                }
                let remaining = (parties - party + 1) as f64;
                Ok(confidence * (1.0 - overlap.powf(1.0 / remaining)))
            }
            GainPolicy::Explicit(gains) => gains.get(party - 1).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("no gain given for party {party}"))
            }),
        }
    }
}

impl PartyStrategy for TwoStateStrategy {
    fn plan(&self, party: usize, e: &Ensemble, sol: &McmSolution) -> Result<PartyPlan> {
        let (confidence, phi) = pair_structure(e, sol)?;
        let overlap = phi[0].inner(&phi[1]).norm().min(1.0);
        let gain = self.gain(party, confidence, overlap)?;
        let step = least_disturbing_step([&phi[0], &phi[1]], confidence, gain)?;
        Ok(PartyPlan {
            channel: step.channel,
            alpha: None,
            weights: vec![step.a, step.a],
            retarget: step.targets.into_iter().map(Some).collect(),
        })
    }
}
