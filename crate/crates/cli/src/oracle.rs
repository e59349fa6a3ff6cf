//! Closed-form predictions for each party of a family run.

use serde::Serialize;

use seqmcm::families::{FamilyOracle, FamilySpec, MirrorState};
use seqmcm::mcm;
use seqmcm::optim::two_state_least_disturbing;
use seqmcm::qcore::matrix::max_abs;
use seqmcm::qcore::DensityMatrix;
use seqmcm::seqchan::PartyRecord;

use crate::error::CliResult;
use crate::input::{ExperimentConfig, Policy};

#[derive(Clone, Debug, Serialize)]
pub struct PartyOracle {
    pub party: usize,
    pub confidences: Vec<f64>,
    #[serde(skip)]
    pub states: Option<Vec<DensityMatrix>>,
    /// Overlap of the MCM projector states, for the two-state family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
}

/// Per-party predictions, or `None` when the family has no closed form for
/// the configured policy.
pub fn predictions(spec: &FamilySpec, config: &ExperimentConfig) -> CliResult<Option<Vec<PartyOracle>>> {
    let (_, oracle) = spec.build()?;
    let r = config.parties;
    let rates = &config.rates;
    let out = match (&oracle, config.policy) {
        (FamilyOracle::Gu(o), Policy::Optimal | Policy::Projector) => (1..=r)
            .map(|j| {
                let previous = &rates[..j - 1];
                let states = (0..o.n).map(|x| o.state_after(x, previous)).collect::<Result<Vec<_>, _>>()?;
                Ok(PartyOracle {
                    party: j,
                    confidences: vec![o.confidence_after(previous); o.n],
                    states: Some(states),
                    overlap: None,
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
        (FamilyOracle::LiftedGu(o), Policy::Optimal | Policy::Equatorial) => {
            let lambdas = o.lambdas(rates)?;
            let confidences = o.confidences(rates)?;
            (1..=r)
                .map(|j| {
                    let states = (0..o.params.n)
                        .map(|x| o.state(x, lambdas[j - 1]))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(PartyOracle {
                        party: j,
                        confidences: vec![confidences[j - 1]; o.params.n],
                        states: Some(states),
                        overlap: None,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        (FamilyOracle::Mirror(o), Policy::Optimal | Policy::Bound) => {
            let mut state = MirrorState::initial(o.theta);
            let mut out = Vec::with_capacity(r);
            for j in 1..=r {
                if j > 1 {
                    state = state.step(rates[j - 2])?;
                }
                out.push(PartyOracle {
                    party: j,
                    confidences: state.confidences().to_vec(),
                    states: Some(state.ensemble()?.states().to_vec()),
                    overlap: None,
                });
            }
            out
        }
        (FamilyOracle::TwoMixed(o), Policy::Optimal | Policy::Explicit) => {
            let mut overlap = o.overlap;
            let mut out = Vec::with_capacity(r);
            for j in 1..=r {
                let s = match &config.gains {
                    None => o.scheduled_overlap(j, r),
                    Some(gains) => {
                        if j > 1 {
                            overlap = two_state_least_disturbing(o.confidence, overlap, gains[j - 2])?.new_overlap;
                        }
                        overlap
                    }
                };
                out.push(PartyOracle { party: j, confidences: vec![o.confidence; 2], states: None, overlap: Some(s) });
            }
            out
        }
        _ => return Ok(None),
    };
    Ok(Some(out))
}

/// Largest confidence deviation, and the largest state (or overlap)
/// deviation, between a simulated party and its prediction.
pub fn residuals(record: &PartyRecord, oracle: &PartyOracle) -> CliResult<(f64, f64)> {
    let conf = record
        .confidences
        .iter()
        .zip(&oracle.confidences)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let state = match (&oracle.states, oracle.overlap) {
        (Some(states), _) => record
            .ensemble
            .states()
            .iter()
            .zip(states)
            .map(|(a, b)| max_abs(&(a.matrix() - b.matrix())))
            .fold(0.0, f64::max),
        (None, Some(s)) => {
            let phi = mcm::solve(&record.ensemble)?.projector_states();
            match (&phi[0], &phi[1]) {
                (Some(a), Some(b)) => (a.inner(b).norm() - s).abs(),
                _ => f64::NAN,
            }
        }
        (None, None) => f64::NAN,
    };
    Ok((conf, state))
}
