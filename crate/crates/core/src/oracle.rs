//! Brute-force references for desk-size instances.
//!
//! [`subset_oracle`] tries every offloading set with ideal aligned beams,
//! which is the exact optimum when beams are unlimited. [`grouping_oracle`]
//! additionally tries every assignment of the offloaders to `Q` beam groups
//! and optimizes each group's beam over a quantized phase grid.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::allocation::local_rate;
use crate::beamforming::{align_phase, BeamVector};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::model::{Device, Solution, SystemParams};
use crate::selection::{assemble_solution, check_dims, ideal_gains, Offloader};

pub const MAX_SUBSET_DEVICES: usize = 16;
pub const MAX_GROUPING_DEVICES: usize = 6;
pub const MAX_GROUPING_BEAMS: usize = 3;
pub const MAX_GROUPING_ELEMENTS: usize = 4;
pub const MAX_PHASE_LEVELS: usize = 16;
pub const DEFAULT_PHASE_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_rate_bits: f64,
    pub best_offload_set: BTreeSet<usize>,
    /// Device → beam index into `solution.beams`.
    pub best_grouping: BTreeMap<usize, usize>,
    pub enumerated_count: u64,
    pub solution: Solution,
}

fn members(mask: usize, k: usize) -> Vec<usize> {
    (0..k).filter(|b| mask >> b & 1 == 1).collect()
}

/// Rate of offloading the set whose products sum to `total`, everyone else
/// local.
fn set_rate(total: f64, offloading: bool, local_outside: f64, params: &SystemParams) -> f64 {
    let offload = if offloading {
        params.bandwidth_hz * params.frame_s * (total / params.noise_energy()).ln_1p() / std::f64::consts::LN_2
    } else {
        0.0
    };
    offload + local_outside
}

/// `a` beats `b` if its rate is higher, or equal within rounding and its
/// set is lexicographically smaller.
fn better(rate_a: f64, set_a: &[usize], rate_b: f64, set_b: &[usize]) -> bool {
    let tol = 1e-12 * rate_a.abs().max(rate_b.abs());
    if (rate_a - rate_b).abs() <= tol {
        set_a < set_b
    } else {
        rate_a > rate_b
    }
}

/// Exhaustive search over all offloading sets with dedicated aligned beams.
pub fn subset_oracle(devices: &[Device], channels: &ChannelSet, params: &SystemParams) -> Result<OracleResult> {
    let k = devices.len();
    if k > MAX_SUBSET_DEVICES {
        return Err(Error::TooLarge(format!("{k} devices > {MAX_SUBSET_DEVICES}")));
    }
    check_dims(devices, channels)?;
    let gains = ideal_gains(channels);
    let eg: Vec<f64> = devices.iter().zip(&gains).map(|(d, g)| d.energy_j * g).collect();
    let local: Vec<f64> = devices.iter().map(|d| local_rate(d, params).rate_bits).collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0..1usize << k {
        let set = members(mask, k);
        let total: f64 = set.iter().map(|&j| eg[j]).sum();
        let outside: f64 = (0..k).filter(|j| mask >> j & 1 == 0).map(|j| local[j]).sum();
        let rate = set_rate(total, !set.is_empty(), outside, params);
        if best.as_ref().is_none_or(|(r, s)| better(rate, &set, *r, s)) {
            best = Some((rate, set));
        }
    }
    let (_, set) = best.expect("at least the empty set is enumerated");

    let offloaders: Vec<Offloader> = set
        .iter()
        .enumerate()
        .map(|(i, &j)| Offloader {
            device: j,
            beam: i,
            energy_gain: eg[j],
        })
        .collect();
    let beams = set.iter().map(|&j| align_phase(channels.h_d[j], &channels.q[j])).collect();
    let solution = assemble_solution(devices, params, &offloaders, beams)?;
    Ok(OracleResult {
        best_rate_bits: solution.sum_rate_bits,
        best_offload_set: solution.offload_set.clone(),
        best_grouping: solution.beam_assignment.clone(),
        enumerated_count: 1u64 << k,
        solution,
    })
}

/// Exhaustive search over offloading sets, groupings into `params.q_budget`
/// beams, and per-group beams on a `phase_levels`-point phase grid.
pub fn grouping_oracle(
    devices: &[Device],
    channels: &ChannelSet,
    params: &SystemParams,
    phase_levels: usize,
) -> Result<OracleResult> {
    let k = devices.len();
    let q_budget = params.q_budget;
    let n = channels.n_elements();
    if q_budget < 1 {
        return Err(Error::InvalidBudget(q_budget));
    }
    if k > MAX_GROUPING_DEVICES || q_budget > MAX_GROUPING_BEAMS || n > MAX_GROUPING_ELEMENTS {
        return Err(Error::TooLarge(format!(
            "K={k}, Q={q_budget}, N={n} exceeds {MAX_GROUPING_DEVICES}/{MAX_GROUPING_BEAMS}/{MAX_GROUPING_ELEMENTS}"
        )));
    }
    if phase_levels == 0 || phase_levels > MAX_PHASE_LEVELS {
        return Err(Error::TooLarge(format!("phase_levels={phase_levels}, allowed 1..={MAX_PHASE_LEVELS}")));
    }
    check_dims(devices, channels)?;

    let (group_value, group_beam) = best_group_beams(devices, channels, phase_levels);
    let local: Vec<f64> = devices.iter().map(|d| local_rate(d, params).rate_bits).collect();

    let mut enumerated = 0u64;
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None; // rate, set, labels
    for mask in 0..1usize << k {
        let set = members(mask, k);
        let outside: f64 = (0..k).filter(|j| mask >> j & 1 == 0).map(|j| local[j]).sum();
        let mut labels = vec![0usize; set.len()];
        loop {
            enumerated += 1;
            let mut group_masks = vec![0usize; q_budget];
            for (&dev, &g) in set.iter().zip(&labels) {
                group_masks[g] |= 1 << dev;
            }
            let total: f64 = group_masks.iter().map(|&m| group_value[m]).sum();
            let rate = set_rate(total, !set.is_empty(), outside, params);
            let replace = match &best {
                None => true,
                Some((r, s, _)) => better(rate, &set, *r, s),
            };
            if replace {
                best = Some((rate, set.clone(), labels.clone()));
            }
            if !next_labels(&mut labels, q_budget) {
                break;
            }
        }
    }
    let (_, set, labels) = best.expect("at least the empty set is enumerated");

    // compact used groups into beam indices
    let mut beam_of_group: BTreeMap<usize, usize> = BTreeMap::new();
    let mut group_masks = vec![0usize; q_budget];
    for (&dev, &g) in set.iter().zip(&labels) {
        group_masks[g] |= 1 << dev;
    }
    let mut beams = Vec::new();
    let mut offloaders = Vec::new();
    for (&dev, &g) in set.iter().zip(&labels) {
        let idx = *beam_of_group.entry(g).or_insert_with(|| {
            beams.push(group_beam[group_masks[g]].clone());
            beams.len() - 1
        });
        let gain = channel_gain(channels.h_d[dev], &channels.q[dev], beams[idx].as_slice());
        offloaders.push(Offloader {
            device: dev,
            beam: idx,
            energy_gain: devices[dev].energy_j * gain,
        });
    }
    let solution = assemble_solution(devices, params, &offloaders, beams)?;
    Ok(OracleResult {
        best_rate_bits: solution.sum_rate_bits,
        best_offload_set: solution.offload_set.clone(),
        best_grouping: solution.beam_assignment.clone(),
        enumerated_count: enumerated,
        solution,
    })
}

/// Base-`q` counter over group labels; `false` once it wraps around.
fn next_labels(labels: &mut [usize], q: usize) -> bool {
    for l in labels.iter_mut() {
        *l += 1;
        if *l < q {
            return true;
        }
        *l = 0;
    }
    false
}

fn channel_gain(h_d: Complex64, q: &[Complex64], v: &[Complex64]) -> f64 {
    let reflected: Complex64 = q.iter().zip(v).map(|(q, v)| q.conj() * v).sum();
    (h_d + reflected).norm_sqr()
}

/// For every device mask, the best `Σ E_k |h_d + qᴴ v|²` over the phase
/// grid and the beam attaining it (first in grid order).
fn best_group_beams(devices: &[Device], channels: &ChannelSet, levels: usize) -> (Vec<f64>, Vec<BeamVector>) {
    let k = devices.len();
    let n = channels.n_elements();
    let n_masks = 1usize << k;
    let mut best_value = vec![f64::NEG_INFINITY; n_masks];
    let mut best_index = vec![0usize; n_masks];
    best_value[0] = 0.0;

    let alphabet: Vec<Complex64> = (0..levels)
        .map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / levels as f64))
        .collect();
    let points = levels.pow(n as u32);
    let mut v = vec![Complex64::new(1.0, 0.0); n];
    let mut weighted = vec![0.0; k];
    let mut value = vec![0.0; n_masks];
    for p in 0..points {
        grid_point(p, levels, &alphabet, &mut v);
        for j in 0..k {
            weighted[j] = devices[j].energy_j * channel_gain(channels.h_d[j], &channels.q[j], &v);
        }
        for m in 1..n_masks {
            let low = m.trailing_zeros() as usize;
            value[m] = value[m & (m - 1)] + weighted[low];
            if value[m] > best_value[m] {
                best_value[m] = value[m];
                best_index[m] = p;
            }
        }
    }
    let beams = best_index
        .iter()
        .map(|&p| {
            grid_point(p, levels, &alphabet, &mut v);
            BeamVector::from_directions(v.iter().copied())
        })
        .collect();
    (best_value, beams)
}

fn grid_point(mut p: usize, levels: usize, alphabet: &[Complex64], v: &mut [Complex64]) {
    for x in v.iter_mut() {
        *x = alphabet[p % levels];
        p /= levels;
    }
}
