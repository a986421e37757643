//! Reference schemes the main solver is compared against.

use rand::Rng;

use crate::beamforming::{effective_gain, BeamVector, ScaOptions};
use crate::channel::ChannelSet;
use crate::error::Result;
use crate::model::{Device, Solution, SystemParams};
use crate::selection::{
    admits, assemble_solution, check_dims, descending_order, finite_q, solve_finite_q, trading_rate, Admission,
    Offloader,
};

/// `count` beams with independent uniform phases.
pub fn random_beams<R: Rng + ?Sized>(count: usize, n_elements: usize, rng: &mut R) -> Vec<BeamVector> {
    (0..count)
        .map(|_| {
            let phases: Vec<f64> = (0..n_elements)
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect();
            BeamVector::from_phases(&phases)
        })
        .collect()
}

/// Random IRS configuration: each device takes the best of the given
/// beams, then selection and allocation proceed as usual.
pub fn random_beam(
    devices: &[Device],
    channels: &ChannelSet,
    params: &SystemParams,
    beams: &[BeamVector],
) -> Result<Solution> {
    check_dims(devices, channels)?;
    let mut choice = Vec::with_capacity(devices.len());
    for (h, q) in channels.h_d.iter().zip(&channels.q) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, v) in beams.iter().enumerate() {
            let g = effective_gain(*h, q, v)?;
            if g > best.1 {
                best = (i, g);
            }
        }
        choice.push(best);
    }
    if beams.is_empty() {
        return local_only(devices, params);
    }
    let lambda: Vec<f64> = devices
        .iter()
        .zip(&choice)
        .map(|(d, &(_, g))| trading_rate(d, g, params))
        .collect();

    let mut offloaders = Vec::new();
    let mut total = 0.0;
    for k in descending_order(&lambda) {
        let eg = devices[k].energy_j * choice[k].1;
        if !admits(total, &devices[k], eg, params) {
            break;
        }
        total += eg;
        offloaders.push(Offloader {
            device: k,
            beam: choice[k].0,
            energy_gain: eg,
        });
    }
    assemble_solution(devices, params, &offloaders, beams.to_vec())
}

/// Every device offloads; beams are assigned as in the finite-budget solver.
pub fn offload_only(devices: &[Device], channels: &ChannelSet, params: &SystemParams) -> Result<Solution> {
    finite_q(devices, channels, params, ScaOptions::default(), Admission::Everyone)
}

/// Every device computes locally.
pub fn local_only(devices: &[Device], params: &SystemParams) -> Result<Solution> {
    assemble_solution(devices, params, &[], Vec::new())
}

/// The finite-budget solver with the reflected path removed.
pub fn no_irs(devices: &[Device], channels: &ChannelSet, params: &SystemParams) -> Result<Solution> {
    solve_finite_q(devices, &channels.without_irs(), params)
}
