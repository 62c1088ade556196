//! Paired controller comparison, seed sweeps and their JSON reports.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_scenario, Metrics, ScenarioResult};
use crate::airframe::{trim_level_flight, Airframe, TrimPoint};
use crate::config::{ControllerKind, RunConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::tec::{allocation_matrix, AllocationMatrix};

pub const METRICS_SCHEMA: &str = "mav-tec/metrics/v1";
pub const COMPARE_SCHEMA: &str = "mav-tec/compare/v1";
pub const SWEEP_SCHEMA: &str = "mav-tec/sweep/v1";

/// Contents of `<name>_metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema: String,
    pub name: String,
    pub kind: ScenarioKind,
    pub controller: ControllerKind,
    pub seed: u64,
    pub trim: TrimPoint,
    pub allocation: AllocationMatrix,
    pub metrics: Metrics,
}

impl RunRecord {
    pub fn new(cfg: &RunConfig, result: &ScenarioResult) -> Self {
        Self {
            schema: METRICS_SCHEMA.into(),
            name: cfg.scenario.name.clone(),
            kind: cfg.scenario.kind,
            controller: result.controller,
            seed: result.seed,
            trim: result.trim,
            allocation: result.allocation,
            metrics: result.metrics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultRecord {
    pub kind: String,
    /// Simulation time of the fault (s), when it happened during stepping.
    pub time: Option<f64>,
    pub message: String,
}

impl From<&Error> for FaultRecord {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().into(),
            time: e.time(),
            message: e.to_string(),
        }
    }
}

/// One seed's outcome: metrics on success, the fault otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedOutcome {
    pub seed: u64,
    pub metrics: Option<Metrics>,
    pub error: Option<FaultRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerRuns {
    pub controller: ControllerKind,
    pub runs: Vec<SeedOutcome>,
    /// Mean over the runs that completed.
    pub mean: Option<Metrics>,
    pub failures: usize,
}

impl ControllerRuns {
    fn from_outcomes(controller: ControllerKind, runs: Vec<SeedOutcome>) -> Self {
        let mean = Metrics::mean(runs.iter().filter_map(|r| r.metrics.as_ref()));
        let failures = runs.iter().filter(|r| r.error.is_some()).count();
        Self {
            controller,
            runs,
            mean,
            failures,
        }
    }

    fn check(&self, seeds: &[u64]) -> std::result::Result<(), String> {
        if self.runs.iter().map(|r| r.seed).ne(seeds.iter().copied()) {
            return Err(format!(
                "{}: run seeds do not match the seed list",
                self.controller
            ));
        }
        if let Some(r) = self
            .runs
            .iter()
            .find(|r| r.metrics.is_some() == r.error.is_some())
        {
            return Err(format!(
                "{} seed {}: exactly one of metrics and error must be set",
                self.controller, r.seed
            ));
        }
        if self.failures != self.runs.iter().filter(|r| r.error.is_some()).count() {
            return Err(format!("{}: failure count disagrees with runs", self.controller));
        }
        if self.mean.is_some() != (self.failures < self.runs.len()) {
            return Err(format!(
                "{}: mean must be present exactly when a run completed",
                self.controller
            ));
        }
        Ok(())
    }
}

/// Contents of `compare_<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareReport {
    pub schema: String,
    pub name: String,
    pub kind: ScenarioKind,
    pub seeds: Vec<u64>,
    pub trim: TrimPoint,
    pub allocation: AllocationMatrix,
    pub baseline: ControllerRuns,
    pub candidate: ControllerRuns,
    /// Per compared metric: candidate mean strictly below baseline mean.
    pub candidate_better: BTreeMap<String, bool>,
}

impl CompareReport {
    /// Parses and checks a report against the documented schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            key: None,
            message: format!("compare report: {e}"),
        })?;
        report
            .check()
            .map_err(|message| Error::Config { key: None, message })?;
        Ok(report)
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.schema != COMPARE_SCHEMA {
            return Err(format!("schema `{}`, expected `{COMPARE_SCHEMA}`", self.schema));
        }
        if self.seeds.is_empty() {
            return Err("empty seed list".into());
        }
        self.baseline.check(&self.seeds)?;
        self.candidate.check(&self.seeds)?;
        let expected = compared_metrics(self.kind);
        if self
            .candidate_better
            .keys()
            .map(String::as_str)
            .ne(sorted(expected))
        {
            return Err(format!("candidate_better must list exactly {expected:?}"));
        }
        Ok(())
    }

    /// True when the candidate wins every compared metric with no failed runs.
    pub fn candidate_wins(&self) -> bool {
        self.baseline.failures == 0
            && self.candidate.failures == 0
            && self.candidate_better.values().all(|&b| b)
    }
}

fn sorted(fields: &[&'static str]) -> Vec<&'static str> {
    let mut v = fields.to_vec();
    v.sort_unstable();
    v
}

/// Metrics the comparison ranks for a scenario kind.
pub fn compared_metrics(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::AltitudeStep | ScenarioKind::AirspeedStep => &["settling_time", "overshoot"],
        ScenarioKind::TurbulenceOnset | ScenarioKind::Hold => &["std_h", "std_va", "std_de", "std_dt"],
    }
}

/// Contents of `sweep_<name>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub schema: String,
    pub name: String,
    pub kind: ScenarioKind,
    pub seeds: Vec<u64>,
    pub results: ControllerRuns,
}

/// Report plus the full results of the first seed for each side.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: CompareReport,
    pub baseline: Option<ScenarioResult>,
    pub candidate: Option<ScenarioResult>,
}

/// Seeds a configuration runs over: the configured seed for step and hold
/// scenarios, `seeds` consecutive seeds from it for turbulence.
pub fn seed_list(cfg: &RunConfig) -> Vec<u64> {
    let sc = &cfg.scenario;
    match sc.kind {
        ScenarioKind::TurbulenceOnset => (0..sc.seeds).map(|i| sc.seed.wrapping_add(i)).collect(),
        _ => vec![sc.seed],
    }
}

/// Classical TEC against LADRC-TEC.
pub fn run_comparison(cfg: &RunConfig) -> Result<Comparison> {
    run_comparison_pair(cfg, ControllerKind::TecClassic, ControllerKind::LadrcTec)
}

/// Runs both controllers over the same seeds. Trim or allocation failures
/// abort; per-run faults are recorded in the report.
pub fn run_comparison_pair(
    cfg: &RunConfig,
    baseline: ControllerKind,
    candidate: ControllerKind,
) -> Result<Comparison> {
    let (trim, allocation) = operating_point(cfg)?;
    let seeds = seed_list(cfg);
    let (base_runs, base_first) = run_seeds(cfg, baseline, &seeds);
    let (cand_runs, cand_first) = run_seeds(cfg, candidate, &seeds);
    let baseline = ControllerRuns::from_outcomes(baseline, base_runs);
    let candidate = ControllerRuns::from_outcomes(candidate, cand_runs);

    let candidate_better = compared_metrics(cfg.scenario.kind)
        .iter()
        .map(|&field| {
            let better = match (&baseline.mean, &candidate.mean) {
                (Some(b), Some(c)) => c.get(field) < b.get(field),
                _ => false,
            };
            (field.to_string(), better)
        })
        .collect();

    Ok(Comparison {
        report: CompareReport {
            schema: COMPARE_SCHEMA.into(),
            name: cfg.scenario.name.clone(),
            kind: cfg.scenario.kind,
            seeds,
            trim,
            allocation,
            baseline,
            candidate,
            candidate_better,
        },
        baseline: base_first,
        candidate: cand_first,
    })
}

/// Runs one controller over `scenario.seeds` consecutive seeds regardless of
/// the scenario kind.
pub fn run_sweep(cfg: &RunConfig, controller: ControllerKind) -> Result<SweepReport> {
    operating_point(cfg)?;
    let sc = &cfg.scenario;
    let seeds: Vec<u64> = (0..sc.seeds).map(|i| sc.seed.wrapping_add(i)).collect();
    let (runs, _) = run_seeds(cfg, controller, &seeds);
    Ok(SweepReport {
        schema: SWEEP_SCHEMA.into(),
        name: sc.name.clone(),
        kind: sc.kind,
        seeds,
        results: ControllerRuns::from_outcomes(controller, runs),
    })
}

fn operating_point(cfg: &RunConfig) -> Result<(TrimPoint, AllocationMatrix)> {
    cfg.validate()?;
    let airframe = Airframe::new(cfg.airframe.clone())?;
    let trim = trim_level_flight(cfg.scenario.va, cfg.scenario.h, &airframe).map_err(|e| e.at_time(0.0))?;
    let alloc = allocation_matrix(&trim, airframe.params()).map_err(|e| e.at_time(0.0))?;
    Ok((trim, alloc))
}

/// Runs in parallel; results come back in seed-list order.
fn run_seeds(
    cfg: &RunConfig,
    controller: ControllerKind,
    seeds: &[u64],
) -> (Vec<SeedOutcome>, Option<ScenarioResult>) {
    let results: Vec<(SeedOutcome, Option<ScenarioResult>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| match run_scenario(cfg, controller, seed) {
            Ok(r) => {
                let outcome = SeedOutcome {
                    seed,
                    metrics: Some(r.metrics),
                    error: None,
                };
                (outcome, (i == 0).then_some(r))
            }
            Err(e) => (
                SeedOutcome {
                    seed,
                    metrics: None,
                    error: Some(FaultRecord::from(&e)),
                },
                None,
            ),
        })
        .collect();
    let mut first = None;
    let mut outcomes = Vec::with_capacity(results.len());
    for (o, r) in results {
        if r.is_some() {
            first = r;
        }
        outcomes.push(o);
    }
    (outcomes, first)
}
