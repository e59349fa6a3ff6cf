use serde::Serialize;

use seqmcm::mcm::{self, KktReport, McmSolution};
use seqmcm::optim::{min_inconclusive_rate, WeightSolution};
use seqmcm::qcore::{validate_povm, Ensemble, Povm, PovmReport};

use crate::error::{CliError, CliResult, Exit};
use crate::input::Source;
use crate::output::{cell, csv_text, json, Format, Sink};

#[derive(Serialize)]
struct McmOutput<'a> {
    schema: &'static str,
    ensemble: &'a Ensemble,
    mcm: &'a McmSolution,
    weights: &'a WeightSolution,
    povm: &'a Povm,
    povm_report: &'a PovmReport,
    kkt: &'a KktReport,
}

pub fn run(source: &Source, tol: f64, format: Format, sink: &Sink) -> CliResult<()> {
    let e = source.ensemble()?;
    let sol = mcm::solve(&e)?;
    let projectors = sol.projectors(e.dim());
    let weights = min_inconclusive_rate(&e, &projectors)?;
    let povm = weights.povm(&projectors)?;
    let report = validate_povm(&povm)?;
    let kkt = mcm::verify_kkt(&e, &sol, &povm, tol)?;
    let out = McmOutput {
        schema: "seqmcm.mcm.v1",
        ensemble: &e,
        mcm: &sol,
        weights: &weights,
        povm: &povm,
        povm_report: &report,
        kkt: &kkt,
    };
    if sink.to_dir() || format == Format::Json {
        sink.write("mcm.json", &json(&out)?)?;
    }
    if sink.to_dir() || format == Format::Csv {
        let header: Vec<String> = ["label", "prior", "confidence", "degeneracy", "r", "weight", "stationarity", "slackness"]
            .map(String::from)
            .to_vec();
        let rows: Vec<Vec<String>> = sol
            .entries
            .iter()
            .map(|entry| {
                let x = entry.label;
                let k = kkt.entries.iter().find(|k| k.label == x);
                vec![
                    (x + 1).to_string(),
                    cell(e.prior(x)),
                    cell(entry.confidence),
                    entry.degeneracy.to_string(),
                    cell(entry.r),
                    cell(weights.weights.get(x).copied().unwrap_or(f64::NAN)),
                    cell(k.map_or(f64::NAN, |k| k.stationarity)),
                    cell(k.map_or(f64::NAN, |k| k.slackness)),
                ]
            })
            .collect();
        sink.write("mcm.csv", &csv_text(&header, &rows)?)?;
    }
    if !report.passed {
        return Err(CliError::new(Exit::KktFailed, "the measurement is not a valid POVM"));
    }
    if !kkt.passed {
        let worst = kkt
            .entries
            .iter()
            .map(|k| k.stationarity.max(k.slackness))
            .fold(0.0, f64::max);
        return Err(CliError::new(Exit::KktFailed, format!("optimality check failed (residual {worst:e})")));
    }
    Ok(())
}
