use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::channel::{KrausChannel, Outcome};
use super::weak::{alpha_for_rate, ensemble_distance, information_gain, inconclusive_rate, kraus_from_weak, WeakMcm};
use crate::error::{Error, Result};
use crate::mcm::{self, McmSolution};
use crate::optim::min_inconclusive_rate;
use crate::qcore::matrix::identity;
use crate::qcore::{ComplexMatrix, Ensemble, Povm, PureState};

pub const TRACE_SCHEMA: &str = "seqmcm-trace/1";

/// Slack allowed when checking that confidences do not increase.
pub const MONOTONE_TOL: f64 = 1e-9;

/// What one party does to the ensemble it receives.
#[derive(Clone, Debug)]
pub struct PartyPlan {
    pub channel: KrausChannel,
    pub alpha: Option<f64>,
    pub weights: Vec<f64>,
    pub retarget: Vec<Option<PureState>>,
}

/// A party's rule for choosing its measurement from the incoming ensemble.
pub trait PartyStrategy: Send + Sync {
    fn plan(&self, party: usize, e: &Ensemble, mcm: &McmSolution) -> Result<PartyPlan>;
}

/// Inputs available when a party picks its retarget states.
pub struct RetargetContext<'a> {
    pub party: usize,
    pub ensemble: &'a Ensemble,
    pub mcm: &'a McmSolution,
    /// Full-strength MCM with optimal weights.
    pub base: &'a Povm,
    pub weights: &'a [f64],
    pub alpha: f64,
    pub eta0: f64,
}

impl RetargetContext<'_> {
    pub fn weak(&self, retarget: Vec<Option<PureState>>) -> WeakMcm {
        WeakMcm::uniform(self.base.clone(), self.alpha, retarget)
    }

    pub fn channel_for(&self, retarget: &[Option<PureState>]) -> Result<KrausChannel> {
        kraus_from_weak(&self.weak(retarget.to_vec()))
    }

    /// `(D, lower bound)` between the incoming ensemble and its image.
    pub fn disturbance_for(&self, retarget: &[Option<PureState>]) -> Result<(f64, f64)> {
        let next = self.channel_for(retarget)?.apply_ensemble(self.ensemble)?;
        ensemble_distance(self.ensemble, &next)
    }
}

pub trait Retarget: Send + Sync {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>>;
}

/// Sends outcome `x` to the MCM projector state `|phi_x>`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProjectorRetarget;

impl Retarget for ProjectorRetarget {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>> {
        Ok(ctx.mcm.projector_states())
    }
}

/// Fixed user-supplied retarget states.
#[derive(Clone, Debug)]
pub struct ExplicitRetarget(pub Vec<PureState>);

impl Retarget for ExplicitRetarget {
    fn retarget(&self, ctx: &RetargetContext) -> Result<Vec<Option<PureState>>> {
        if self.0.len() != ctx.ensemble.len() {
            return Err(Error::InvalidParameter(format!(
                "{} retarget states for {} labels",
                self.0.len(),
                ctx.ensemble.len()
            )));
        }
        if let Some(s) = self.0.iter().find(|s| s.dim() != ctx.ensemble.dim()) {
            return Err(Error::DimensionMismatch(ctx.ensemble.dim(), s.dim()));
        }
        Ok(self.0.iter().cloned().map(Some).collect())
    }
}

/// Rank-one MCM with SDP-optimal weights, weakened to inconclusive rate
/// `eta0`.
#[derive(Clone)]
pub struct WeakMcmStrategy {
    pub eta0: f64,
    pub retarget: Arc<dyn Retarget>,
}

impl WeakMcmStrategy {
    pub fn new(eta0: f64, retarget: Arc<dyn Retarget>) -> Self {
        WeakMcmStrategy { eta0, retarget }
    }
}

impl PartyStrategy for WeakMcmStrategy {
    fn plan(&self, party: usize, e: &Ensemble, sol: &McmSolution) -> Result<PartyPlan> {
        let projectors = sol.projectors(e.dim());
        let weights = min_inconclusive_rate(e, &projectors)?;
        let alpha = alpha_for_rate(weights.eta0, self.eta0)?;
        let base = weights.povm(&projectors)?;
        let ctx = RetargetContext {
            party,
            ensemble: e,
            mcm: sol,
            base: &base,
            weights: &weights.weights,
            alpha,
            eta0: self.eta0,
        };
        let retarget = self.retarget.retarget(&ctx)?;
        let channel = ctx.channel_for(&retarget)?;
        Ok(PartyPlan {
            channel,
            alpha: Some(alpha),
            weights: weights.weights,
            retarget,
        })
    }
}

/// Bloch geometry of one qubit state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Geometry {
    pub r: f64,
    pub polar: f64,
    pub azimuth: f64,
}

impl Geometry {
    pub fn from_bloch(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Geometry {
            r,
            polar: if r > 0.0 { (v[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 },
            azimuth: v[1].atan2(v[0]),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartyRecord {
    /// 1-based party index.
    pub party: usize,
    pub ensemble: Ensemble,
    pub confidences: Vec<f64>,
    pub gain: f64,
    pub eta0: f64,
    pub alpha: Option<f64>,
    pub weights: Vec<f64>,
    pub disturbance: f64,
    pub disturbance_lower: f64,
    pub purities: Vec<f64>,
    pub geometry: Option<Vec<Geometry>>,
    pub retarget: Vec<Option<PureState>>,
    pub channel: KrausChannel,
    /// Joint success probability of parties `1..=party`.
    pub p_joint: f64,
    /// Probability that parties `1..=party` are all inconclusive.
    pub p_inconclusive: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequentialTrace {
    pub schema: String,
    pub parties: Vec<PartyRecord>,
    pub final_ensemble: Ensemble,
    pub p_joint: f64,
    pub p_inconclusive: f64,
}

fn geometry(e: &Ensemble) -> Option<Vec<Geometry>> {
    if e.dim() != 2 {
        return None;
    }
    e.states()
        .iter()
        .map(|s| s.bloch().ok().map(Geometry::from_bloch))
        .collect()
}

/// `M^_x = K_x^(1)dag ... M_x^(R) ... K_x^(1)` for the given outcome,
/// composed through `channels` in order.
pub fn joint_effect(channels: &[&KrausChannel], outcome: Outcome) -> Result<ComplexMatrix> {
    let last = channels
        .last()
        .ok_or_else(|| Error::InvalidParameter("no stored channels".into()))?;
    let mut acc = identity(last.dim());
    for ch in channels.iter().rev() {
        acc = ch.pullback(outcome, &acc);
    }
    Ok(acc)
}

/// `(P_J, P_I)` of the chain `channels` applied to `e`.
pub fn joint_from_channels(e: &Ensemble, channels: &[&KrausChannel]) -> Result<(f64, f64)> {
    let inconclusive = joint_effect(channels, Outcome::Inconclusive)?;
    let mut pj = 0.0;
    let mut pi = 0.0;
    for x in 0..e.len() {
        let hat = joint_effect(channels, Outcome::Label(x))?;
        pj += e.prior(x) * e.state(x).expectation(&hat);
        pi += e.prior(x) * e.state(x).expectation(&inconclusive);
    }
    Ok((pj, pi))
}

/// `(P_J, P_I)` recomputed from the channels stored in `trace`.
pub fn joint_outcomes(trace: &SequentialTrace) -> Result<(f64, f64)> {
    let first = trace
        .parties
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trace".into()))?;
    let channels: Vec<&KrausChannel> = trace.parties.iter().map(|p| &p.channel).collect();
    joint_from_channels(&first.ensemble, &channels)
}

fn party_error(party: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Party { .. } => e,
        other => Error::Party {
            party,
            source: Box::new(other),
        },
    }
}

/// Runs the parties in order, each seeing the ensemble left by the previous
/// one. Errors carry the 1-based index of the failing party.
pub fn run_sequence(e0: &Ensemble, strategies: &[&dyn PartyStrategy]) -> Result<SequentialTrace> {
    if strategies.is_empty() {
        return Err(Error::InvalidParameter("at least one party is required".into()));
    }
    let n = e0.len();
    let mut current = e0.clone();
    let mut parties: Vec<PartyRecord> = Vec::with_capacity(strategies.len());
    for (j, strategy) in strategies.iter().enumerate() {
        let party = j + 1;
        let wrap = party_error(party);
        let sol = mcm::solve(&current).map_err(&wrap)?;
        let plan = strategy.plan(party, &current, &sol).map_err(&wrap)?;
        let povm = plan.channel.povm(n).map_err(&wrap)?;
        let next = plan.channel.apply_ensemble(&current).map_err(&wrap)?;
        let (disturbance, disturbance_lower) = ensemble_distance(&current, &next).map_err(&wrap)?;
        let confidences = sol.confidences();
        if let Some(prev) = parties.last() {
            for (x, (now, before)) in confidences.iter().zip(&prev.confidences).enumerate() {
                if *now > before + MONOTONE_TOL {
                    return Err(wrap(Error::Numerical(format!(
                        "confidence of label {} rose from {before} to {now}",
                        x + 1
                    ))));
                }
            }
        }
        let mut channels: Vec<&KrausChannel> = parties.iter().map(|p| &p.channel).collect();
        channels.push(&plan.channel);
        let (p_joint, p_inconclusive) = joint_from_channels(e0, &channels).map_err(&wrap)?;
        parties.push(PartyRecord {
            party,
            gain: information_gain(&current, &povm).map_err(&wrap)?,
            eta0: inconclusive_rate(&current, &povm),
            alpha: plan.alpha,
            weights: plan.weights,
            disturbance,
            disturbance_lower,
            purities: current.states().iter().map(|s| s.purity()).collect(),
            geometry: geometry(&current),
            retarget: plan.retarget,
            channel: plan.channel,
            confidences,
            ensemble: current,
            p_joint,
            p_inconclusive,
        });
        current = next;
    }
    let last = parties.last().expect("non-empty");
    Ok(SequentialTrace {
        schema: TRACE_SCHEMA.to_string(),
        p_joint: last.p_joint,
        p_inconclusive: last.p_inconclusive,
        final_ensemble: current,
        parties,
    })
}

impl SequentialTrace {
    pub fn confidences(&self, label: usize) -> Vec<f64> {
        self.parties.iter().map(|p| p.confidences[label]).collect()
    }

    pub fn csv_header(&self) -> Vec<String> {
        let n = self.final_ensemble.len();
        let mut h = vec!["j".to_string()];
        h.extend((1..=n).map(|x| format!("C_{x}")));
        h.extend(["G", "eta0", "D", "D_lower"].map(String::from));
        h.extend((1..=n).map(|x| format!("purity_{x}")));
        if self.final_ensemble.dim() == 2 {
            for x in 1..=n {
                h.extend([format!("r_{x}"), format!("polar_{x}"), format!("azimuth_{x}")]);
            }
        }
        h.extend(["P_J", "P_I"].map(String::from));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.parties
            .iter()
            .map(|p| {
                let mut row = vec![p.party.to_string()];
                row.extend(p.confidences.iter().map(f64::to_string));
                row.extend([p.gain, p.eta0, p.disturbance, p.disturbance_lower].map(|v| v.to_string()));
                row.extend(p.purities.iter().map(f64::to_string));
                if let Some(geo) = &p.geometry {
                    for g in geo {
                        row.extend([g.r, g.polar, g.azimuth].map(|v| v.to_string()));
                    }
                }
                row.extend([p.p_joint, p.p_inconclusive].map(|v| v.to_string()));
                row
            })
            .collect()
    }

    /// One row per party.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.csv_header())?;
        for row in self.csv_rows() {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn trine() -> Ensemble {
        let states: Vec<_> = (1..=3)
            .map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 3.0))
            .collect();
        Ensemble::from_pure(vec![1.0 / 3.0; 3], &states).unwrap()
    }

    #[test]
    fn single_party_is_plain_mcm() {
        let e = trine();
        let s = WeakMcmStrategy::new(0.0, Arc::new(ProjectorRetarget));
        let trace = run_sequence(&e, &[&s]).unwrap();
        assert_eq!(trace.parties.len(), 1);
        for c in &trace.parties[0].confidences {
            assert_abs_diff_eq!(*c, 2.0 / 3.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(trace.p_joint, trace.parties[0].gain, epsilon = 1e-12);
        assert_abs_diff_eq!(trace.p_joint, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn trine_chain_follows_purity_product() {
        let e = trine();
        let eta0 = 0.5;
        let s = WeakMcmStrategy::new(eta0, Arc::new(ProjectorRetarget));
        let strategies: Vec<&dyn PartyStrategy> = vec![&s; 5];
        let trace = run_sequence(&e, &strategies).unwrap();
        for (j, p) in trace.parties.iter().enumerate() {
            let p_plus = 0.5 * (1.0 + (0.5 * (1.0 + eta0)).powi(j as i32));
            for c in &p.confidences {
                assert_abs_diff_eq!(*c, 2.0 / 3.0 * p_plus, epsilon = 1e-9);
            }
        }
        let (pj, pi) = joint_outcomes(&trace).unwrap();
        assert_abs_diff_eq!(pj, trace.p_joint, epsilon = 1e-15);
        assert_abs_diff_eq!(pi, eta0.powi(5), epsilon = 1e-9);
    }

    #[test]
    fn infeasible_rate_names_the_party() {
        let e = trine();
        let ok = WeakMcmStrategy::new(0.5, Arc::new(ProjectorRetarget));
        let bad = WeakMcmStrategy::new(-0.1, Arc::new(ProjectorRetarget));
        match run_sequence(&e, &[&ok, &bad]) {
            Err(Error::Party { party, .. }) => assert_eq!(party, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_round_trips_through_json() {
        let e = trine();
        let s = WeakMcmStrategy::new(0.5, Arc::new(ProjectorRetarget));
        let trace = run_sequence(&e, &[&s, &s]).unwrap();
        let text = serde_json::to_string(&trace).unwrap();
        let back: SequentialTrace = serde_json::from_str(&text).unwrap();
        assert_eq!(back.schema, TRACE_SCHEMA);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("j,C_1,C_2,C_3,G,eta0,D,D_lower"));
        assert_eq!(text.lines().count(), 3);
    }
}
