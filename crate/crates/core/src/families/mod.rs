//! The four analytic ensemble families and their closed-form oracles.

pub mod gu;
pub mod lifted_gu;
pub mod mirror;
pub mod two_mixed;

use serde::{Deserialize, Serialize};

pub use gu::{gu, GuCovariantFamily, GuOracle, GuParams};
pub use lifted_gu::{
    delta, lifted_gu, EquatorialRetarget, LiftedGuOracle, LiftedGuParams, LiftedPolarFamily, PartyBound,
};
pub use mirror::{
    mirror, MirrorAngleFamily, MirrorBoundRetarget, MirrorNumericRetarget, MirrorOracle, MirrorParams,
    MirrorState, Trichotomy,
};
pub use two_mixed::{two_mixed, GainPolicy, TwoMixedOracle, TwoMixedParams, TwoStateStrategy};

use crate::error::Result;
use crate::qcore::Ensemble;

/// A family instance, addressable as `{"family": name, ...params}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    TwoMixed(TwoMixedParams),
    Gu(GuParams),
    LiftedGu(LiftedGuParams),
    Mirror(MirrorParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyOracle {
    TwoMixed(TwoMixedOracle),
    Gu(GuOracle),
    LiftedGu(LiftedGuOracle),
    Mirror(MirrorOracle),
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::TwoMixed(_) => "two_mixed",
            FamilySpec::Gu(_) => "gu",
            FamilySpec::LiftedGu(_) => "lifted_gu",
            FamilySpec::Mirror(_) => "mirror",
        }
    }

    pub fn build(&self) -> Result<(Ensemble, FamilyOracle)> {
        Ok(match *self {
            FamilySpec::TwoMixed(p) => {
                let (e, o) = two_mixed(p)?;
                (e, FamilyOracle::TwoMixed(o))
            }
            FamilySpec::Gu(p) => {
                let (e, o) = gu(p)?;
                (e, FamilyOracle::Gu(o))
            }
            FamilySpec::LiftedGu(p) => {
                let (e, o) = lifted_gu(p)?;
                (e, FamilyOracle::LiftedGu(o))
            }
            FamilySpec::Mirror(p) => {
                let (e, o) = mirror(p)?;
                (e, FamilyOracle::Mirror(o))
            }
        })
    }

    pub fn ensemble(&self) -> Result<Ensemble> {
        Ok(self.build()?.0)
    }
}

impl FamilyOracle {
    /// Confidence of each label for the first party.
    pub fn confidences(&self) -> Vec<f64> {
        match self {
            FamilyOracle::TwoMixed(o) => vec![o.confidence; 2],
            FamilyOracle::Gu(o) => vec![o.confidence; o.n],
            FamilyOracle::LiftedGu(o) => vec![o.confidence; o.params.n],
            FamilyOracle::Mirror(o) => o.confidences.to_vec(),
        }
    }
}
