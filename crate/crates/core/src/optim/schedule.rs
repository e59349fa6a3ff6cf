use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-disturbing parameters for one party on the two-state family.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LeastDisturbing {
    /// Conclusive weight, equal for both labels.
    pub a: f64,
    /// Inconclusive weight `1/(1 - s^2) - a`.
    pub b: f64,
    pub new_overlap: f64,
}

/// Rounding allowed above 1 on confidences and overlaps read off solvers.
const UNIT_SLACK: f64 = 1e-12;

/// Conclusive weight and the overlap the next party sees when one party
/// extracts gain `gain` from a two-state ensemble with confidence
/// `confidence` and projector overlap `overlap`.
pub fn two_state_least_disturbing(confidence: f64, overlap: f64, gain: f64) -> Result<LeastDisturbing> {
    if !(0.0..=1.0 + UNIT_SLACK).contains(&overlap) || !(0.0..=1.0 + UNIT_SLACK).contains(&confidence) || confidence == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} and overlap {overlap} must lie in (0, 1] and [0, 1]"
        )));
    }
    let (confidence, overlap) = (confidence.min(1.0), overlap.min(1.0));
    let max = confidence * (1.0 - overlap);
    if gain < 0.0 || gain > max * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::InfeasibleGain { gain, max });
    }
    let gain = gain.min(max);
    let norm = 1.0 / (1.0 - overlap * overlap);
    let a = gain / confidence * norm;
    let remaining = 1.0 - gain / confidence;
    let new_overlap = if overlap == 0.0 {
        0.0
    } else {
        (overlap / remaining).min(1.0)
    };
    Ok(LeastDisturbing {
        a,
        b: (norm - a).max(0.0),
        new_overlap,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GainSchedule {
    pub gains: Vec<f64>,
    /// `s^(1), ..., s^(R+1)`.
    pub overlaps: Vec<f64>,
    pub p_joint: f64,
    pub note: Option<String>,
}

/// Equal-gain schedule maximizing the joint success probability of `parties`
/// parties on the two-state family.
pub fn optimal_joint_schedule(confidence: f64, overlap: f64, parties: usize) -> Result<GainSchedule> {
    if parties == 0 {
        return Err(Error::InvalidParameter("at least one party is required".into()));
    }
    if !(0.0..=1.0).contains(&overlap) || !(0.0..=1.0).contains(&confidence) {
        return Err(Error::InvalidParameter(format!(
            "confidence {confidence} and overlap {overlap} must lie in [0, 1]"
        )));
    }
    let r = parties as f64;
    if overlap == 0.0 {
        return Ok(GainSchedule {
            gains: vec![confidence; parties],
            overlaps: vec![0.0; parties + 1],
            p_joint: confidence,
            note: Some("orthogonal projectors: every party extracts the full confidence".into()),
        });
    }
    let root = overlap.powf(1.0 / r);
    let gain = confidence * (1.0 - root);
    Ok(GainSchedule {
        gains: vec![gain; parties],
        overlaps: (1..=parties + 1)
            .map(|j| overlap.powf(1.0 - (j as f64 - 1.0) / r))
            .collect(),
        p_joint: confidence * (1.0 - root).powi(parties as i32),
        note: None,
    })
}
