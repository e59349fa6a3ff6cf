use seqmcm::seqchan::{run_sequence, PartyStrategy, SequentialTrace};

use crate::error::CliResult;
use crate::input::ExperimentConfig;
use crate::output::{json, Format, Sink};

pub fn simulate(config: &ExperimentConfig) -> CliResult<SequentialTrace> {
    let e = config.source.ensemble()?;
    let strategies = config.strategies()?;
    let refs: Vec<&dyn PartyStrategy> = strategies.iter().map(|s| s.as_ref()).collect();
    Ok(run_sequence(&e, &refs)?)
}

pub fn run(config: &ExperimentConfig, format: Format, sink: &Sink) -> CliResult<()> {
    let trace = simulate(config)?;
    if sink.to_dir() || format == Format::Json {
        sink.write("trace.json", &json(&trace)?)?;
    }
    if sink.to_dir() || format == Format::Csv {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        sink.write("trace.csv", &String::from_utf8_lossy(&buf))?;
    }
    Ok(())
}
