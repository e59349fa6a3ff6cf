use serde::Serialize;

use seqmcm::families::{FamilyOracle, FamilySpec, PartyBound};

use crate::error::{CliError, CliResult};
use crate::input::ExperimentConfig;
use crate::oracle::{predictions, PartyOracle};
use crate::output::{cell, csv_text, json, Format, Sink};

#[derive(Serialize)]
struct FamilyOutput {
    schema: &'static str,
    spec: FamilySpec,
    oracle: FamilyOracle,
    #[serde(skip_serializing_if = "Option::is_none")]
    parties: Option<Vec<PartyOracle>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    party_bound: Option<PartyBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal_joint_success: Option<f64>,
}

pub fn run(
    spec: FamilySpec,
    config: Option<&ExperimentConfig>,
    threshold: Option<f64>,
    format: Format,
    sink: &Sink,
) -> CliResult<()> {
    let (_, oracle) = spec.build()?;
    let parties = match config {
        Some(c) => Some(predictions(&spec, c)?.ok_or_else(|| {
            CliError::malformed(format!("no closed form for {} under this policy", spec.name()))
        })?),
        None => None,
    };
    let party_bound = match (threshold, &oracle) {
        (None, _) => None,
        (Some(th), FamilyOracle::LiftedGu(o)) => {
            let rates = config.map(|c| c.rates.as_slice()).unwrap_or_default();
            let eta0 = match rates {
                [first, rest @ ..] if rest.iter().all(|r| r == first) => *first,
                _ => return Err(CliError::malformed("--threshold needs one common --eta0")),
            };
            Some(o.party_bound(eta0, th)?)
        }
        (Some(_), _) => return Err(CliError::malformed("--threshold applies to lifted_gu only")),
    };
    let optimal_joint_success = match (&oracle, config) {
        (FamilyOracle::TwoMixed(o), Some(c)) if c.gains.is_none() => Some(o.optimal_joint_success(c.parties)),
        _ => None,
    };
    let out = FamilyOutput {
        schema: "seqmcm.family.v1",
        spec,
        oracle: oracle.clone(),
        parties,
        party_bound,
        optimal_joint_success,
    };
    match format {
        Format::Json => sink.write("family.json", &json(&out)?),
        Format::Csv => {
            let rows: Vec<Vec<f64>> = match &out.parties {
                Some(p) => p.iter().map(|p| p.confidences.clone()).collect(),
                None => vec![oracle.confidences()],
            };
            let n = rows[0].len();
            let mut header = vec!["j".to_string()];
            header.extend((1..=n).map(|x| format!("C_{x}")));
            let rows: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(j, c)| std::iter::once((j + 1).to_string()).chain(c.iter().map(|v| cell(*v))).collect())
                .collect();
            sink.write("family.csv", &csv_text(&header, &rows)?)
        }
    }
}
