//! Browser bindings: each export takes plain numbers and returns a JSON
//! string the page plots.

use irs_mec::channel::{complex_gaussian, trial_rng};
use irs_mec::harness::{run_experiment, ExperimentSpec, ScenarioConfig, SolverKind, Sweep, SweepParam};
use irs_mec::{shared_beam_sca, ScaOptions, WeightedLink};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_TRIALS: usize = 500;

#[derive(Serialize)]
struct Curve {
    solver: String,
    x: Vec<f64>,
    mean_rate_mbits: Vec<f64>,
    mean_offloaders: Vec<f64>,
}

fn spec(scenario: ScenarioConfig, name: SweepParam, values: Vec<f64>, solvers: Vec<SolverKind>, trials: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        scenario,
        sweep: Sweep { name, values },
        trials: trials.clamp(1, MAX_TRIALS),
        seed,
        solver: None,
        solvers,
        phase_levels: 16,
        timing: false,
    }
}

fn curves(spec: &ExperimentSpec) -> Result<String, String> {
    let rows = run_experiment(spec).map_err(|e| e.to_string())?;
    let out: Vec<Curve> = spec
        .solver_list()
        .iter()
        .map(|k| {
            let mine: Vec<_> = rows.iter().filter(|r| r.solver == k.name()).collect();
            Curve {
                solver: k.name().to_string(),
                x: mine.iter().map(|r| r.sweep_value).collect(),
                mean_rate_mbits: mine.iter().map(|r| r.mean_rate_bits / 1e6).collect(),
                mean_offloaders: mine.iter().map(|r| r.mean_offloaders).collect(),
            }
        })
        .collect();
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn base(devices: usize, cycles_per_bit: f64, n_elements: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.devices[0].count = devices;
    cfg.devices[0].cycles_per_bit = cycles_per_bit;
    cfg.system.n_elements = n_elements;
    cfg
}

pub fn budget_curves(devices: usize, cycles_per_bit: f64, n_elements: usize, trials: usize, seed: u64) -> Result<String, String> {
    let values = (1..=devices.max(1)).map(|q| q as f64).collect();
    let s = spec(
        base(devices, cycles_per_bit, n_elements),
        SweepParam::Q,
        values,
        vec![SolverKind::FiniteQ, SolverKind::InfiniteQ],
        trials,
        seed,
    );
    curves(&s)
}

pub fn distance_curves(devices: usize, n_elements: usize, energy_dbm: f64, trials: usize, seed: u64) -> Result<String, String> {
    let mut cfg = base(devices, 1000.0, n_elements);
    cfg.devices[0].energy_dbm = energy_dbm;
    let s = spec(
        cfg,
        SweepParam::DistanceM,
        vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0],
        vec![
            SolverKind::FiniteQ,
            SolverKind::RandomBeam,
            SolverKind::OffloadOnly,
            SolverKind::NoIrs,
            SolverKind::LocalOnly,
        ],
        trials,
        seed,
    );
    curves(&s)
}

#[derive(Serialize)]
struct Trace {
    objective: Vec<f64>,
    iterations: usize,
}

pub fn shared_beam_trace(members: usize, n_elements: usize, seed: u64) -> Result<String, String> {
    let mut rng = trial_rng(seed, 0);
    let data: Vec<_> = (0..members.max(1))
        .map(|_| {
            let h = complex_gaussian(&mut rng);
            let q: Vec<_> = (0..n_elements.max(1)).map(|_| complex_gaussian(&mut rng) * 0.3).collect();
            (h, q)
        })
        .collect();
    let links: Vec<WeightedLink<'_>> = data
        .iter()
        .map(|(h, q)| WeightedLink { weight: 1.0, h_d: *h, q })
        .collect();
    let out = shared_beam_sca(&links, None, ScaOptions::default()).map_err(|e| e.to_string())?;
    serde_json::to_string(&Trace {
        objective: out.trace,
        iterations: out.iterations,
    })
    .map_err(|e| e.to_string())
}

/// Mean sum rate against the beam budget, for the finite and unlimited
/// budget solvers.
#[wasm_bindgen(js_name = sweepBudget)]
pub fn sweep_budget(devices: usize, cycles_per_bit: f64, n_elements: usize, trials: usize, seed: u32) -> Result<String, JsValue> {
    budget_curves(devices, cycles_per_bit, n_elements, trials, seed.into()).map_err(|e| JsValue::from_str(&e))
}

/// Mean sum rate of every scheme against the AP to cluster distance.
#[wasm_bindgen(js_name = compareSchemes)]
pub fn compare_schemes(devices: usize, n_elements: usize, energy_dbm: f64, trials: usize, seed: u32) -> Result<String, JsValue> {
    distance_curves(devices, n_elements, energy_dbm, trials, seed.into()).map_err(|e| JsValue::from_str(&e))
}

/// Objective per iteration of the shared-beam optimizer on random links.
#[wasm_bindgen(js_name = sharedBeamTrace)]
pub fn shared_beam_trace_js(members: usize, n_elements: usize, seed: u32) -> Result<String, JsValue> {
    shared_beam_trace(members, n_elements, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_curve_shape() {
        let text = budget_curves(4, 1000.0, 16, 10, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert_eq!(v[0]["x"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn scheme_curves() {
        let text = distance_curves(4, 8, 10.0, 5, 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 5);
        assert_eq!(v[4]["solver"], "local_only");
    }

    #[test]
    fn trace_ascends() {
        let text = shared_beam_trace(3, 16, 4).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let obj: Vec<f64> = v["objective"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(obj.windows(2).all(|w| w[1] >= w[0]));
    }
}
