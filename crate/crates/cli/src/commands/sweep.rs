use rayon::prelude::*;
use serde_json::{Map, Value};

use seqmcm::families::{FamilySpec, MirrorState, Trichotomy};
use seqmcm::seqchan::SequentialTrace;

use crate::error::{CliError, CliResult};
use crate::input::{number, parse_angle, spec_from_map, ExperimentConfig, Policy, Source};
use crate::oracle::{predictions, residuals};
use crate::output::{cell, csv_text, joined, Sink};

pub const MAX_POINTS: usize = 100_000;

/// A swept family parameter: `key=start:stop:count` or `key=v1,v2,...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vary {
    pub key: String,
    pub values: Vec<f64>,
}

impl Vary {
    pub fn parse(text: &str) -> CliResult<Vary> {
        let (key, spec) = text
            .split_once('=')
            .ok_or_else(|| CliError::malformed(format!("--vary {text:?} is not key=values")))?;
        let key = key.trim().to_string();
        if key.is_empty() || key == "family" {
            return Err(CliError::malformed(format!("cannot vary {key:?}")));
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let values = match parts.as_slice() {
            [start, stop, count] => {
                let (a, b) = (parse_angle(start)?, parse_angle(stop)?);
                let n: usize = count
                    .trim()
                    .parse()
                    .ok()
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| CliError::malformed(format!("bad point count {count:?}")))?;
                if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
                }
            }
            [list] => list.split(',').map(parse_angle).collect::<CliResult<Vec<_>>>()?,
            _ => return Err(CliError::malformed(format!("--vary {text:?}: use start:stop:count or a list"))),
        };
        Ok(Vary { key, values })
    }
}

pub struct SweepConfig {
    pub base: Map<String, Value>,
    pub vary: Option<Vary>,
    /// One grid axis; empty for two-state gain schedules.
    pub eta0: Vec<f64>,
    pub parties: usize,
    pub policy: Policy,
    pub threshold: Option<f64>,
}

struct Point {
    index: usize,
    value: f64,
    eta0: Option<f64>,
}

const HEADER: [&str; 17] = [
    "point",
    "value",
    "eta0",
    "j",
    "confidences",
    "oracle_confidences",
    "confidence_residual",
    "state_residual",
    "G",
    "D",
    "D_lower",
    "purities",
    "mirror_theta",
    "trend",
    "clears_threshold",
    "all_clear",
    "error",
];

fn trend(theta: f64, trace: &SequentialTrace) -> CliResult<i32> {
    let next = match trace.parties.get(1) {
        Some(p) => &p.ensemble,
        None => &trace.final_ensemble,
    };
    let change = MirrorState::from_ensemble(next)?.theta - theta;
    Ok(match Trichotomy::observed(change, 1e-9) {
        Trichotomy::Closing => -1,
        Trichotomy::Fixed => 0,
        Trichotomy::Opening => 1,
    })
}

fn rows_for(config: &SweepConfig, point: &Point) -> CliResult<Vec<Vec<String>>> {
    let mut map = config.base.clone();
    if let Some(v) = &config.vary {
        map.insert(v.key.clone(), number(point.value));
    }
    let spec = spec_from_map(map)?;
    let eta0 = point.eta0.map(|e| vec![e]);
    let experiment = ExperimentConfig::new(
        Source::Family(spec),
        config.parties,
        eta0.as_deref(),
        config.policy,
        None,
        None,
    )?;
    let trace = crate::commands::sequence::simulate(&experiment)?;
    let oracle = predictions(&spec, &experiment)?;
    let mirror_theta = match spec {
        FamilySpec::Mirror(p) => Some(p.theta),
        _ => None,
    };
    let trend = mirror_theta.map(|t| trend(t, &trace)).transpose()?;
    let mut all_clear = true;
    let mut rows = Vec::with_capacity(trace.parties.len());
    for p in &trace.parties {
        let (conf_res, state_res, oracle_conf) = match oracle.as_ref().and_then(|o| o.get(p.party - 1)) {
            Some(o) => {
                let (a, b) = residuals(p, o)?;
                (a, b, joined(&o.confidences))
            }
            None => (f64::NAN, f64::NAN, String::new()),
        };
        let theta_j = match mirror_theta {
            Some(_) => MirrorState::from_ensemble(&p.ensemble)?.theta,
            None => f64::NAN,
        };
        let clears = config.threshold.map(|th| p.confidences.iter().all(|&c| c >= th));
        if clears == Some(false) {
            all_clear = false;
        }
        let flag = |b: Option<bool>| b.map(|b| b.to_string()).unwrap_or_default();
        rows.push(vec![
            point.index.to_string(),
            cell(point.value),
            point.eta0.map(cell).unwrap_or_default(),
            p.party.to_string(),
            joined(&p.confidences),
            oracle_conf,
            cell(conf_res),
            cell(state_res),
            cell(p.gain),
            cell(p.disturbance),
            cell(p.disturbance_lower),
            joined(&p.purities),
            cell(theta_j),
            trend.map(|t| t.to_string()).unwrap_or_default(),
            flag(clears),
            flag(clears.map(|_| all_clear)),
            String::new(),
        ]);
    }
    Ok(rows)
}

fn error_row(point: &Point, e: &CliError) -> Vec<String> {
    let mut row = vec![String::new(); HEADER.len()];
    row[0] = point.index.to_string();
    row[1] = cell(point.value);
    row[2] = point.eta0.map(cell).unwrap_or_default();
    row[HEADER.len() - 1] = e.message.clone();
    row
}

pub fn run(config: &SweepConfig, sink: &Sink) -> CliResult<()> {
    let values = match &config.vary {
        Some(v) => v.values.clone(),
        None => vec![f64::NAN],
    };
    let rates: Vec<Option<f64>> = if config.eta0.is_empty() {
        vec![None]
    } else {
        config.eta0.iter().copied().map(Some).collect()
    };
    let total = values.len() * rates.len();
    if total > MAX_POINTS {
        return Err(CliError::malformed(format!("{total} grid points exceed the limit of {MAX_POINTS}")));
    }
    let points: Vec<Point> = values
        .iter()
        .flat_map(|&value| rates.iter().map(move |&eta0| (value, eta0)))
        .enumerate()
        .map(|(index, (value, eta0))| Point { index, value, eta0 })
        .collect();
    let blocks: Vec<Vec<Vec<String>>> = points
        .par_iter()
        .map(|p| rows_for(config, p).unwrap_or_else(|e| vec![error_row(p, &e)]))
        .collect();
    let mut header: Vec<String> = HEADER.map(String::from).to_vec();
    if let Some(v) = &config.vary {
        header[1] = v.key.clone();
    }
    let rows: Vec<Vec<String>> = blocks.into_iter().flatten().collect();
    sink.write("sweep.csv", &csv_text(&header, &rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vary_ranges_and_lists() {
        let v = Vary::parse("theta=0:1:5").unwrap();
        assert_eq!(v.key, "theta");
        assert_eq!(v.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let v = Vary::parse("N=2,3,4").unwrap();
        assert_eq!(v.values, vec![2.0, 3.0, 4.0]);
        let v = Vary::parse("theta=90deg:180deg:2").unwrap();
        assert!((v.values[1] - std::f64::consts::PI).abs() < 1e-15);
        assert!(Vary::parse("theta").is_err());
        assert!(Vary::parse("theta=0:1:0").is_err());
        assert!(Vary::parse("family=1").is_err());
    }
}
