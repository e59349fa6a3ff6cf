//! Parsing of flags, ensemble files and family specs.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use clap::ValueEnum;
use serde_json::{Map, Value};

use seqmcm::families::{
    EquatorialRetarget, FamilySpec, MirrorBoundRetarget, MirrorNumericRetarget, TwoStateStrategy,
};
use seqmcm::qcore::{Ensemble, PureState};
use seqmcm::seqchan::{ExplicitRetarget, PartyStrategy, ProjectorRetarget, Retarget, WeakMcmStrategy};

use crate::error::{CliError, CliResult};

/// Parses an angle in radians, or in degrees with a `deg` or `°` suffix.
pub fn parse_angle(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let (number, scale) = if let Some(v) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
        (v, PI / 180.0)
    } else if let Some(v) = t.strip_suffix("rad") {
        (v, 1.0)
    } else {
        (t, 1.0)
    };
    let v: f64 = number
        .trim()
        .parse()
        .map_err(|_| CliError::malformed(format!("cannot read angle {text:?}")))?;
    if !v.is_finite() {
        return Err(CliError::malformed(format!("angle {text:?} is not finite")));
    }
    Ok(v * scale)
}

/// Comma-separated list of numbers.
pub fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::malformed(format!("cannot read number {s:?} in {text:?}")))
        })
        .collect()
}

/// Replaces string values by the angle they spell, so `"theta": "100deg"`
/// is accepted.
fn resolve_angles(map: &mut Map<String, Value>) -> CliResult<()> {
    for (key, value) in map.iter_mut() {
        if key == "family" {
            continue;
        }
        if let Value::String(s) = value {
            let v = parse_angle(s)?;
            *value = serde_json::Number::from_f64(v)
                .map(Value::Number)
                .ok_or_else(|| CliError::malformed(format!("{key} is not finite")))?;
        }
    }
    Ok(())
}

/// The parameter object from `--family` and `--params`. The name may also
/// be given inside the object.
pub fn params_map(name: Option<&str>, params: Option<&str>) -> CliResult<Map<String, Value>> {
    let mut map = match params {
        Some(text) => match serde_json::from_str::<Value>(text)? {
            Value::Object(m) => m,
            _ => return Err(CliError::malformed("--params must be a JSON object")),
        },
        None => Map::new(),
    };
    if let Some(name) = name {
        if let Some(Value::String(given)) = map.get("family") {
            if given != name {
                return Err(CliError::malformed(format!("--family {name} conflicts with {given} in --params")));
            }
        }
        map.insert("family".into(), Value::String(name.to_string()));
    }
    if !map.contains_key("family") {
        return Err(CliError::malformed("no family name given"));
    }
    resolve_angles(&mut map)?;
    Ok(map)
}

/// Builds and validates a family spec from a parameter object.
pub fn spec_from_map(map: Map<String, Value>) -> CliResult<FamilySpec> {
    let spec: FamilySpec = serde_json::from_value(Value::Object(map))
        .map_err(|e| CliError::malformed(format!("family parameters: {e}")))?;
    spec.build()?;
    Ok(spec)
}

pub fn family_spec(name: Option<&str>, params: Option<&str>) -> CliResult<FamilySpec> {
    spec_from_map(params_map(name, params)?)
}

/// A JSON number, integral when `v` is.
pub fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9e15 {
        Value::from(v as i64)
    } else {
        serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))
}

/// Where the initial ensemble comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Family(FamilySpec),
    File(Ensemble),
}

impl Source {
    pub fn load(ensemble: Option<&Path>, family: Option<&str>, params: Option<&str>) -> CliResult<Source> {
        match (ensemble, family.is_some() || params.is_some()) {
            (Some(_), true) => Err(CliError::malformed("give either --ensemble or --family, not both")),
            (Some(path), false) => Ok(Source::File(read_json(path)?)),
            (None, true) => Ok(Source::Family(family_spec(family, params)?)),
            (None, false) => Err(CliError::malformed("an ensemble is required: use --ensemble or --family")),
        }
    }

    pub fn ensemble(&self) -> CliResult<Ensemble> {
        match self {
            Source::Family(spec) => Ok(spec.ensemble()?),
            Source::File(e) => Ok(e.clone()),
        }
    }

    pub fn spec(&self) -> Option<&FamilySpec> {
        match self {
            Source::Family(spec) => Some(spec),
            Source::File(_) => None,
        }
    }
}

/// How each party picks the states its outcomes are mapped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// The family's least-disturbing choice.
    Optimal,
    /// The MCM projector states.
    Projector,
    /// Mirror family: keep the average state fixed.
    Bound,
    /// Mirror family: minimize the full disturbance numerically.
    Numeric,
    /// Lifted family: equatorial states.
    Equatorial,
    /// Two-state gains from `--gains`, or retarget states from `--targets`.
    Explicit,
}

/// Everything a sequential run needs.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: Source,
    pub parties: usize,
    /// One rate per party; empty for the two-state gain schedules.
    pub rates: Vec<f64>,
    pub policy: Policy,
    pub gains: Option<Vec<f64>>,
    pub targets: Option<Vec<PureState>>,
}

impl ExperimentConfig {
    pub fn new(
        source: Source,
        parties: usize,
        eta0: Option<&[f64]>,
        policy: Policy,
        gains: Option<Vec<f64>>,
        targets: Option<Vec<PureState>>,
    ) -> CliResult<Self> {
        if parties == 0 {
            return Err(CliError::malformed("--parties must be at least 1"));
        }
        let two_state = matches!(source.spec(), Some(FamilySpec::TwoMixed(_)))
            && matches!(policy, Policy::Optimal | Policy::Explicit);
        let rates = match (eta0, two_state) {
            (Some(_), true) => {
                return Err(CliError::malformed(
                    "two_mixed with the optimal or explicit policy takes --gains, not --eta0",
                ))
            }
            (None, true) => Vec::new(),
            (None, false) => return Err(CliError::malformed("--eta0 is required")),
            (Some(list), false) => expand_rates(list, parties)?,
        };
        if let Some(g) = &gains {
            if !(two_state && policy == Policy::Explicit) {
                return Err(CliError::malformed("--gains needs --family two_mixed and --retarget explicit"));
            }
            if g.len() != parties {
                return Err(CliError::malformed(format!("{} gains for {parties} parties", g.len())));
            }
        }
        if two_state && policy == Policy::Explicit && gains.is_none() {
            return Err(CliError::malformed("--retarget explicit on two_mixed needs --gains"));
        }
        if !two_state && policy == Policy::Explicit && targets.is_none() {
            return Err(CliError::malformed("--retarget explicit needs --targets"));
        }
        if targets.is_some() && policy != Policy::Explicit {
            return Err(CliError::malformed("--targets is only used with --retarget explicit"));
        }
        Ok(ExperimentConfig { source, parties, rates, policy, gains, targets })
    }

    fn retarget(&self) -> CliResult<Arc<dyn Retarget>> {
        let family = self.source.spec();
        let mirror_only = |what: &str| CliError::malformed(format!("--retarget {what} applies to the mirror family only"));
        Ok(match self.policy {
            Policy::Projector => Arc::new(ProjectorRetarget),
            Policy::Optimal => match family {
                Some(FamilySpec::LiftedGu(_)) => Arc::new(EquatorialRetarget),
                Some(FamilySpec::Mirror(_)) => Arc::new(MirrorBoundRetarget),
                _ => Arc::new(ProjectorRetarget),
            },
            Policy::Bound => match family {
                Some(FamilySpec::Mirror(_)) => Arc::new(MirrorBoundRetarget),
                _ => return Err(mirror_only("bound")),
            },
            Policy::Numeric => match family {
                Some(FamilySpec::Mirror(_)) => Arc::new(MirrorNumericRetarget),
                _ => return Err(mirror_only("numeric")),
            },
            Policy::Equatorial => match family {
                Some(FamilySpec::LiftedGu(_)) => Arc::new(EquatorialRetarget),
                _ => return Err(CliError::malformed("--retarget equatorial applies to lifted_gu only")),
            },
            Policy::Explicit => Arc::new(ExplicitRetarget(self.targets.clone().unwrap_or_default())),
        })
    }

    /// One strategy per party.
    pub fn strategies(&self) -> CliResult<Vec<Box<dyn PartyStrategy>>> {
        if self.rates.is_empty() {
            let strategy = match &self.gains {
                Some(g) => TwoStateStrategy::explicit(g.clone()),
                None => TwoStateStrategy::optimal(self.parties),
            };
            return Ok((0..self.parties)
                .map(|_| Box::new(strategy.clone()) as Box<dyn PartyStrategy>)
                .collect());
        }
        let retarget = self.retarget()?;
        Ok(self
            .rates
            .iter()
            .map(|&eta0| Box::new(WeakMcmStrategy::new(eta0, retarget.clone())) as Box<dyn PartyStrategy>)
            .collect())
    }
}

/// A single rate applies to every party; otherwise one per party.
pub fn expand_rates(list: &[f64], parties: usize) -> CliResult<Vec<f64>> {
    if let Some(bad) = list.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(CliError::malformed(format!("inconclusive rate {bad} outside [0, 1]")));
    }
    match list.len() {
        1 => Ok(vec![list[0]; parties]),
        n if n == parties => Ok(list.to_vec()),
        n => Err(CliError::malformed(format!("{n} rates for {parties} parties"))),
    }
}
