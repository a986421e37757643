//! Seeded Monte Carlo experiments over the solvers and baselines.
//!
//! Trial `t` of every sweep value draws from the same generator stream, so
//! all solvers and sweep points see common random numbers. Within a trial
//! the draw order is device placement, channels, then random-beam phases.

mod baselines;
mod checks;
mod config;
mod dump;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use baselines::{local_only, no_irs, offload_only, random_beam, random_beams};
pub use checks::{check_scenario, CheckOutcome};
pub use config::{
    DeviceGroup, ExperimentSpec, Scenario, ScenarioConfig, SolverKind, Sweep, SweepParam, SystemConfig,
    DEFAULT_DEVICE_COUNT,
};
pub use dump::{read_channel_dump, write_channel_dump};

use crate::beamforming::BeamVector;
use crate::channel::{place_devices, realize_channels, trial_rng, ChannelSet};
use crate::error::{Error, Result};
use crate::model::{Device, Solution};
use crate::oracle::{grouping_oracle, subset_oracle};
use crate::selection::{solve_finite_q, solve_infinite_q};

/// Everything random about one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub devices: Vec<Device>,
    pub channels: ChannelSet,
    pub random_beams: Vec<BeamVector>,
}

pub fn realize_trial(scenario: &Scenario, seed: u64, trial: usize) -> Result<TrialDraw> {
    let mut rng = trial_rng(seed, trial);
    let devices = place_devices(&scenario.geometry, &scenario.devices, &mut rng);
    let channels = realize_channels(&scenario.params, &scenario.geometry, &devices, &mut rng)?;
    let random_beams = random_beams(scenario.params.q_budget, scenario.params.n_elements, &mut rng);
    Ok(TrialDraw {
        devices,
        channels,
        random_beams,
    })
}

pub fn run_solver(kind: SolverKind, scenario: &Scenario, draw: &TrialDraw, phase_levels: usize) -> Result<Solution> {
    let (devs, ch, p) = (&draw.devices, &draw.channels, &scenario.params);
    match kind {
        SolverKind::InfiniteQ => solve_infinite_q(devs, ch, p),
        SolverKind::FiniteQ => solve_finite_q(devs, ch, p),
        SolverKind::OracleSubset => Ok(subset_oracle(devs, ch, p)?.solution),
        SolverKind::OracleGrouping => Ok(grouping_oracle(devs, ch, p, phase_levels)?.solution),
        SolverKind::RandomBeam => random_beam(devs, ch, p, &draw.random_beams),
        SolverKind::OffloadOnly => offload_only(devs, ch, p),
        SolverKind::LocalOnly => local_only(devs, p),
        SolverKind::NoIrs => no_irs(devs, ch, p),
    }
}

/// Per-trial record of one solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rate_bits: f64,
    pub offloaders: usize,
    pub runtime_ms: f64,
}

/// One output line: a solver's statistics at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub solver: String,
    pub trials: usize,
    pub mean_rate_bits: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std_rate_bits: f64,
    pub mean_offloaders: f64,
    /// Zero unless timing was requested.
    pub mean_runtime_ms: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_trial(
    spec: &ExperimentSpec,
    scenario: &Scenario,
    solvers: &[SolverKind],
    trial: usize,
) -> Result<Vec<TrialOutcome>> {
    let draw = realize_trial(scenario, spec.seed, trial)?;
    solvers
        .iter()
        .map(|&kind| {
            let start = spec.timing.then(std::time::Instant::now);
            let sol = run_solver(kind, scenario, &draw, spec.phase_levels)?;
            Ok(TrialOutcome {
                rate_bits: sol.sum_rate_bits,
                offloaders: sol.offloaders(),
                runtime_ms: start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}

/// Per-trial outcomes at one sweep value, indexed `[trial][solver]`.
pub fn run_point(spec: &ExperimentSpec, value: f64) -> Result<Vec<Vec<TrialOutcome>>> {
    let base = spec.scenario.resolve()?;
    let scenario = spec.sweep.apply(&base, value)?;
    let solvers = spec.solver_list();
    let tag = |trial: usize| {
        move |e: Error| Error::Trial {
            sweep_value: value,
            trial,
            source: Box::new(e),
        }
    };
    let one = |t: usize| run_trial(spec, &scenario, &solvers, t).map_err(tag(t));

    #[cfg(feature = "parallel")]
    let outcomes: Vec<Result<Vec<TrialOutcome>>> = {
        use rayon::prelude::*;
        (0..spec.trials).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Result<Vec<TrialOutcome>>> = (0..spec.trials).map(one).collect();

    outcomes.into_iter().collect()
}

/// Runs every sweep value and solver. Rows are ordered by sweep value, then
/// by solver as listed in the experiment file.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let solvers = spec.solver_list();
    let mut rows = Vec::new();
    for &value in &spec.sweep.values {
        let outcomes = run_point(spec, value)?;
        for (j, kind) in solvers.iter().enumerate() {
            let rates: Vec<f64> = outcomes.iter().map(|o| o[j].rate_bits).collect();
            let (mean, std) = mean_std(&rates);
            let n = outcomes.len() as f64;
            rows.push(SweepRow {
                sweep_name: spec.sweep.name.name().to_string(),
                sweep_value: value,
                solver: kind.name().to_string(),
                trials: outcomes.len(),
                mean_rate_bits: mean,
                std_rate_bits: std,
                mean_offloaders: outcomes.iter().map(|o| o[j].offloaders as f64).sum::<f64>() / n,
                mean_runtime_ms: outcomes.iter().map(|o| o[j].runtime_ms).sum::<f64>() / n,
            });
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
