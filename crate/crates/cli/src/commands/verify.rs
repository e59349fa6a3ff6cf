use std::f64::consts::PI;

use clap::ValueEnum;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use seqmcm::families::{two_mixed, FamilySpec, TwoStateStrategy, GuParams, LiftedGuParams, MirrorParams, TwoMixedParams};
use seqmcm::mcm;
use seqmcm::optim::min_inconclusive_rate;
use seqmcm::qcore::matrix::{min_eigenvalue, real_trace};
use seqmcm::qcore::{random, validate_povm, Ensemble, Povm, PureState};
use seqmcm::seqchan::{
    ensemble_distance, linear_independence, run_sequence, KrausChannel, KrausOperator, Outcome, PartyStrategy,
    ProjectorRetarget, WeakMcmStrategy,
};

use crate::error::{CliError, CliResult, Exit};
use crate::input::{ExperimentConfig, Policy, Source};
use crate::oracle::{predictions, residuals};
use crate::output::{json, Sink};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Confidence equals the max-relative-entropy form, and the optimality
    /// conditions hold.
    Duality,
    /// Measurements built from the weight program are valid POVMs.
    Povm,
    /// Random channels preserve trace and positivity and never raise a
    /// confidence.
    Channels,
    /// Confidences never rise along random weak-measurement chains, and D
    /// dominates its lower bound.
    Monotonicity,
    /// Linear independence of the two-state and trine measurements, and the
    /// resulting confidence behaviour.
    Proposition,
    /// Closed forms of the four families against the simulator.
    Families,
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub invariant: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub passed: bool,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    suite: String,
    seed: u64,
    count: usize,
    passed: bool,
    checks: Vec<Check>,
}

/// One instance's measured deviation, with a description when it fails.
type Sample = CliResult<(f64, String)>;

fn check(module: &'static str, invariant: &'static str, tolerance: f64, samples: Vec<Sample>) -> Check {
    let instances = samples.len();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut witness = None;
    for s in samples {
        let (value, what) = match s {
            Ok(v) => v,
            Err(e) => (f64::INFINITY, e.message),
        };
        worst = worst.max(value);
        if !(value <= tolerance) {
            failures += 1;
            witness.get_or_insert(format!("{what}: deviation {value:e}"));
        }
    }
    Check { module, invariant, instances, failures, worst, tolerance, witness, passed: failures == 0 }
}

fn rng(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_instance(seed: u64, i: usize) -> (ChaCha8Rng, Ensemble) {
    let mut g = rng(seed, i);
    let dim = 2 + (g.next_u32() % 2) as usize;
    let n = 2 + (g.next_u32() % 3) as usize;
    let e = random::ensemble(&mut g, dim, n);
    (g, e)
}

fn mcm_povm(e: &Ensemble) -> CliResult<Povm> {
    let sol = mcm::solve(e)?;
    let projectors = sol.projectors(e.dim());
    Ok(min_inconclusive_rate(e, &projectors)?.povm(&projectors)?)
}

fn unit(g: &mut ChaCha8Rng) -> f64 {
    (g.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn duality(seed: u64, count: usize) -> Vec<Check> {
    let identity: Vec<Sample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (_, e) = random_instance(seed, i);
            let mut worst: f64 = 0.0;
            for x in 0..e.len() {
                let (c, entropic) = mcm::confidence_entropy_identity(&e, x)?;
                worst = worst.max((c - entropic).abs());
            }
            Ok((worst, format!("instance {i}")))
        })
        .collect();
    let kkt: Vec<Sample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (_, e) = random_instance(seed, i);
            let sol = mcm::solve(&e)?;
            let report = mcm::verify_kkt(&e, &sol, &mcm_povm(&e)?, f64::INFINITY)?;
            let worst = report.entries.iter().map(|k| k.stationarity.max(k.slackness)).fold(0.0, f64::max);
            Ok((worst, format!("instance {i}")))
        })
        .collect();
    vec![
        check("mcm", "confidence = 2^(-D_max)", 1e-9, identity),
        check("mcm", "stationarity and slackness", 1e-9, kkt),
    ]
}

fn povm(seed: u64, count: usize) -> Vec<Check> {
    let samples: Vec<Sample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (_, e) = random_instance(seed, i);
            let r = validate_povm(&mcm_povm(&e)?)?;
            Ok(((-r.min_margin()).max(0.0).max(r.completeness_residual), format!("instance {i}")))
        })
        .collect();
    vec![check("qcore", "POVM positivity and completeness", 1e-9, samples)]
}

fn random_channel(g: &mut ChaCha8Rng, dim: usize) -> CliResult<KrausChannel> {
    let count = 1 + (g.next_u32() % 3) as usize;
    let ops = random::kraus_operators(g, dim, count)
        .into_iter()
        .map(|k| KrausOperator { outcome: Outcome::Inconclusive, operator: k })
        .collect();
    Ok(KrausChannel::new(ops)?)
}

fn channels(seed: u64, count: usize) -> Vec<Check> {
    let results: Vec<CliResult<(f64, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (mut g, e) = random_instance(seed, i);
            let k = random_channel(&mut g, e.dim())?;
            let out = k.apply_ensemble(&e)?;
            let mut trace: f64 = k.completeness_residual();
            for s in out.states() {
                trace = trace.max((real_trace(s.matrix()) - 1.0).abs()).max(-min_eigenvalue(s.matrix())?);
            }
            let before = mcm::solve(&e)?.confidences();
            let after = mcm::solve(&out)?.confidences();
            let rise = after.iter().zip(&before).map(|(a, b)| a - b).fold(0.0, f64::max);
            Ok((trace, rise))
        })
        .collect();
    let split = |pick: fn(&(f64, f64)) -> f64| -> Vec<Sample> {
        results
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                Ok(v) => Ok((pick(v), format!("instance {i}"))),
                Err(e) => Err(CliError::new(e.exit, format!("instance {i}: {}", e.message))),
            })
            .collect()
    };
    vec![
        check("seqchan", "trace preservation and positivity", 1e-10, split(|v| v.0)),
        check("seqchan", "confidence never rises under a channel", 1e-9, split(|v| v.1)),
    ]
}

fn monotonicity(seed: u64, count: usize) -> Vec<Check> {
    let results: Vec<CliResult<(f64, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let (mut g, mut e) = random_instance(seed, i);
            let mut rise: f64 = 0.0;
            let mut gap: f64 = 0.0;
            let mut previous = mcm::solve(&e)?.confidences();
            for _ in 0..3 {
                let sol = mcm::solve(&e)?;
                let projectors = sol.projectors(e.dim());
                let floor = min_inconclusive_rate(&e, &projectors)?.eta0.clamp(0.0, 1.0);
                let eta0 = floor + unit(&mut g) * (1.0 - floor);
                let strategy = WeakMcmStrategy::new(eta0, std::sync::Arc::new(ProjectorRetarget));
                let trace = run_sequence(&e, &[&strategy as &dyn PartyStrategy])?;
                let next = trace.final_ensemble;
                let (d, lower) = ensemble_distance(&e, &next)?;
                gap = gap.max(lower - d);
                let now = mcm::solve(&next)?.confidences();
                rise = rise.max(now.iter().zip(&previous).map(|(a, b)| a - b).fold(0.0, f64::max));
                previous = now;
                e = next;
            }
            Ok((rise, gap))
        })
        .collect();
    let split = |pick: fn(&(f64, f64)) -> f64| -> Vec<Sample> {
        results
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                Ok(v) => Ok((pick(v), format!("trace {i}"))),
                Err(e) => Err(CliError::new(e.exit, format!("trace {i}: {}", e.message))),
            })
            .collect()
    };
    vec![
        check("seqchan", "confidence never rises along a chain", 1e-9, split(|v| v.0)),
        check("seqchan", "D >= its lower bound", 1e-10, split(|v| v.1)),
    ]
}

fn trine() -> CliResult<Ensemble> {
    let states: Vec<PureState> = (1..=3).map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 3.0)).collect();
    Ok(Ensemble::from_pure(vec![1.0 / 3.0; 3], &states)?)
}

/// Largest confidence drop after one party.
fn drop_after(e: &Ensemble, strategy: &dyn PartyStrategy) -> CliResult<f64> {
    let trace = run_sequence(e, &[strategy])?;
    let before = mcm::solve(e)?.confidences();
    let after = mcm::solve(&trace.final_ensemble)?.confidences();
    Ok(before.iter().zip(&after).map(|(b, a)| b - a).fold(0.0, f64::max))
}

fn proposition() -> Vec<Check> {
    let pair = || -> CliResult<Ensemble> { Ok(two_mixed(TwoMixedParams { p: 0.8, theta: PI / 3.0 })?.0) };
    let independent = |e: CliResult<Ensemble>, expect: bool, name: &str| -> Sample {
        let e = e?;
        let flag = linear_independence(&mcm_povm(&e)?)?;
        Ok((if flag == expect { 0.0 } else { 1.0 }, format!("{name}: independent = {flag}")))
    };
    let kept: Sample = pair().and_then(|e| {
        Ok((drop_after(&e, &TwoStateStrategy::optimal(2))?, "two-state confidence drop".to_string()))
    });
    let weak = WeakMcmStrategy::new(0.5, std::sync::Arc::new(ProjectorRetarget));
    let lost: Sample = trine()
        .and_then(|e| drop_after(&e, &weak))
        .map(|d| (if d > 1e-6 { 0.0 } else { 1.0 }, format!("trine confidence drop {d:e}")));
    vec![
        check("seqchan", "two-state measurement is linearly independent", 0.0, vec![independent(pair(), true, "two-state")]),
        check("seqchan", "trine measurement is linearly dependent", 0.0, vec![independent(trine(), false, "trine")]),
        check("seqchan", "independent measurement keeps the confidence", 1e-9, vec![kept]),
        check("seqchan", "dependent measurement lowers the confidence", 0.0, vec![lost]),
    ]
}

fn family_points() -> Vec<(FamilySpec, Option<f64>, usize)> {
    let mut out = Vec::new();
    for n in 2..=6 {
        for eta0 in [0.1, 0.5, 0.9] {
            out.push((FamilySpec::Gu(GuParams { n }), Some(eta0), 6));
        }
    }
    for n in 3..=5 {
        for theta in [PI / 6.0, PI / 3.0, PI / 2.0] {
            for frac in [0.2, 0.7] {
                let eta0 = theta.cos() + 1e-3 + frac * (1.0 - theta.cos() - 1e-3);
                out.push((FamilySpec::LiftedGu(LiftedGuParams { n, theta, lambda: 1.0 }), Some(eta0), 4));
            }
        }
    }
    for theta in [5.0 * PI / 9.0, 2.0 * PI / 3.0, 7.0 * PI / 9.0] {
        for eta0 in [0.5, 0.9] {
            out.push((FamilySpec::Mirror(MirrorParams { theta }), Some(eta0), 5));
        }
    }
    for p in [0.6, 1.0] {
        for theta in [PI / 4.0, PI / 3.0, 5.0 * PI / 12.0] {
            out.push((FamilySpec::TwoMixed(TwoMixedParams { p, theta }), None, 3));
        }
    }
    out
}

fn families() -> Vec<Check> {
    let samples: Vec<CliResult<(f64, f64, String)>> = family_points()
        .into_par_iter()
        .map(|(spec, eta0, parties)| {
            let name = format!("{spec:?} eta0 {eta0:?}");
            let rates = eta0.map(|e| vec![e]);
            let config = ExperimentConfig::new(Source::Family(spec), parties, rates.as_deref(), Policy::Optimal, None, None)?;
            let trace = super::sequence::simulate(&config)?;
            let oracle = predictions(&spec, &config)?
                .ok_or_else(|| CliError::malformed(format!("no closed form for {name}")))?;
            let mut conf: f64 = 0.0;
            let mut state: f64 = 0.0;
            for (p, o) in trace.parties.iter().zip(&oracle) {
                let (a, b) = residuals(p, o)?;
                conf = conf.max(a);
                state = state.max(b);
            }
            Ok((conf, state, name))
        })
        .collect();
    let split = |first: bool| -> Vec<Sample> {
        samples
            .iter()
            .map(|r| match r {
                Ok((a, b, name)) => Ok((if first { *a } else { *b }, name.clone())),
                Err(e) => Err(CliError::new(e.exit, e.message.clone())),
            })
            .collect()
    };
    vec![
        check("families", "closed-form confidences match the simulator", 1e-9, split(true)),
        check("families", "closed-form states match the simulator", 1e-9, split(false)),
    ]
}

pub fn run(suite: Suite, seed: u64, count: usize, sink: &Sink) -> CliResult<()> {
    if count == 0 {
        return Err(CliError::malformed("--count must be at least 1"));
    }
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Duality {
        checks.extend(duality(seed, count));
    }
    if all || suite == Suite::Povm {
        checks.extend(povm(seed, count));
    }
    if all || suite == Suite::Channels {
        checks.extend(channels(seed, count));
    }
    if all || suite == Suite::Monotonicity {
        checks.extend(monotonicity(seed, count));
    }
    if all || suite == Suite::Proposition {
        checks.extend(proposition());
    }
    if all || suite == Suite::Families {
        checks.extend(families());
    }
    let passed = checks.iter().all(|c| c.passed);
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let report = Report { schema: "seqmcm.verify.v1", suite: name, seed, count, passed, checks };
    sink.write("verify.json", &json(&report)?)?;
    if passed {
        return Ok(());
    }
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} / {}: {}", c.module, c.invariant, c.witness.clone().unwrap_or_default()))
        .collect();
    Err(CliError::new(Exit::VerifyFailed, format!("failed invariants:\n  {}", failed.join("\n  "))))
}
