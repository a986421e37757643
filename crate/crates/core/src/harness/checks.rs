//! Invariant checks run on one realization of a scenario.

use serde::Serialize;

use crate::beamforming::{align_phase, aligned_gain, effective_gain};
use crate::error::Result;
use crate::oracle::{subset_oracle, MAX_SUBSET_DEVICES};

use super::{realize_trial, run_solver, Scenario, SolverKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

const SOLVERS: [SolverKind; 6] = [
    SolverKind::InfiniteQ,
    SolverKind::FiniteQ,
    SolverKind::RandomBeam,
    SolverKind::OffloadOnly,
    SolverKind::LocalOnly,
    SolverKind::NoIrs,
];

/// Realizes trial `trial` and checks the solution invariants of every
/// solver, beam alignment, and dominance by the exhaustive reference when
/// the instance is small enough.
pub fn check_scenario(scenario: &Scenario, seed: u64, trial: usize) -> Result<Vec<CheckOutcome>> {
    scenario.validate()?;
    let draw = realize_trial(scenario, seed, trial)?;
    let p = &scenario.params;
    let mut out = Vec::new();

    out.push(match draw.channels.validate(p.n_elements) {
        Ok(()) => CheckOutcome::new("channel_dimensions", true, format!("{} devices", draw.channels.len())),
        Err(e) => CheckOutcome::new("channel_dimensions", false, e.to_string()),
    });

    let mut worst = 0.0f64;
    for (h, q) in draw.channels.h_d.iter().zip(&draw.channels.q) {
        let g = effective_gain(*h, q, &align_phase(*h, q))?;
        let ideal = aligned_gain(*h, q);
        worst = worst.max((g - ideal).abs() / ideal.max(f64::MIN_POSITIVE));
    }
    out.push(CheckOutcome::new("alignment_identity", worst <= 1e-10, format!("max relative error {worst:.3e}")));

    let mut rates = Vec::new();
    for kind in SOLVERS {
        let sol = run_solver(kind, scenario, &draw, 0)?;
        let modulus = sol.beams.iter().all(|b| b.is_unit_modulus(1e-9));
        let budget = kind == SolverKind::InfiniteQ || sol.beams.len() <= p.q_budget;
        let verdict = sol.check(p.frame_s).and_then(|_| {
            if !modulus {
                Err("beam entries not unit modulus".into())
            } else if !budget {
                Err(format!("{} beams exceed budget {}", sol.beams.len(), p.q_budget))
            } else {
                Ok(())
            }
        });
        out.push(match verdict {
            Ok(()) => CheckOutcome::new(
                format!("solution_{kind}"),
                true,
                format!("rate {:.6e} bits, {} offloading", sol.sum_rate_bits, sol.offloaders()),
            ),
            Err(e) => CheckOutcome::new(format!("solution_{kind}"), false, e),
        });
        rates.push((kind, sol.sum_rate_bits));
    }

    if draw.devices.len() <= MAX_SUBSET_DEVICES {
        let best = subset_oracle(&draw.devices, &draw.channels, p)?.best_rate_bits;
        let over: Vec<String> = rates
            .iter()
            .filter(|(_, r)| *r > best * (1.0 + 1e-9))
            .map(|(k, r)| format!("{k} {r:.6e}"))
            .collect();
        out.push(CheckOutcome::new(
            "exhaustive_dominance",
            over.is_empty(),
            if over.is_empty() {
                format!("reference {best:.6e} bits")
            } else {
                format!("above reference {best:.6e}: {}", over.join(", "))
            },
        ));
    }
    Ok(out)
}
