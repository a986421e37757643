//! Computational mode selection by successive refinement.
//!
//! Devices are ranked by their trading computation rate
//! `Λ_k = B T log2(1 + E_k g_k/(T σ²)) − R_k^loc` (offloading with a
//! dedicated aligned beam versus computing locally), then admitted in that
//! order while the offloading activation condition holds. The first
//! rejection ends the search, so the offloading set is always a prefix of
//! the ranking.
//!
//! With unlimited beams every offloader keeps its aligned beam
//! ([`solve_infinite_q`]). With a budget of `Q` beams the first `Q − 1`
//! admitted devices keep dedicated beams and every later one joins a
//! shared beam re-optimized by [`shared_beam_sca`] ([`solve_finite_q`]).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::allocation::{local_rate, offload_allocation, OffloadProfile};
use crate::beamforming::{
    align_phase, aligned_gain, effective_gain, shared_beam_sca, BeamVector, ScaOptions,
    WeightedLink,
};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::model::{Device, Solution, SystemParams};

/// Per-device trading rate and the admission order it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingRate {
    pub lambda: Vec<f64>,
    /// Device indices by nonincreasing `lambda`, ties by ascending index.
    pub order: Vec<usize>,
}

impl TradingRate {
    pub fn compute(devices: &[Device], ideal_gains: &[f64], params: &SystemParams) -> Self {
        let lambda: Vec<f64> = devices
            .iter()
            .zip(ideal_gains)
            .map(|(dev, &g)| trading_rate(dev, g, params))
            .collect();
        let order = descending_order(&lambda);
        Self { lambda, order }
    }
}

pub(crate) fn descending_order(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// `Λ = B T log2(1 + E g/(T σ²)) − R^loc`, in bits.
pub fn trading_rate(dev: &Device, ideal_gain: f64, params: &SystemParams) -> f64 {
    let snr = dev.energy_j * ideal_gain / params.noise_energy();
    params.bandwidth_hz * params.frame_s * snr.ln_1p() / std::f64::consts::LN_2
        - local_rate(dev, params).rate_bits
}

/// Offloaded-bit increment from adding a product `candidate_eg` to a set
/// whose products sum to `current_total`.
fn offload_increment(current_total: f64, candidate_eg: f64, params: &SystemParams) -> f64 {
    let base = params.noise_energy() + current_total;
    params.bandwidth_hz * params.frame_s * (candidate_eg / base).ln_1p() / std::f64::consts::LN_2
}

/// Offloading activation condition: `true` iff adding the candidate raises
/// the offloaded bits by at least its local computing rate. Ties activate.
pub fn activation_test(
    current: &OffloadProfile,
    candidate: &Device,
    candidate_eg: f64,
    params: &SystemParams,
) -> bool {
    activation_holds(current.total(), candidate, candidate_eg, params)
}

fn activation_holds(current_total: f64, candidate: &Device, candidate_eg: f64, params: &SystemParams) -> bool {
    offload_increment(current_total, candidate_eg.max(0.0), params) >= local_rate(candidate, params).rate_bits
}

/// Solver admission: the activation condition, except that a candidate
/// adding no offloaded bits is never admitted.
pub(crate) fn admits(current_total: f64, candidate: &Device, candidate_eg: f64, params: &SystemParams) -> bool {
    candidate_eg > 0.0 && activation_holds(current_total, candidate, candidate_eg, params)
}

/// `g_k = (|h_d| + Σ|q_n|)²` for every device.
pub fn ideal_gains(channels: &ChannelSet) -> Vec<f64> {
    channels
        .h_d
        .iter()
        .zip(&channels.q)
        .map(|(&h, q)| aligned_gain(h, q))
        .collect()
}

pub(crate) fn check_dims(devices: &[Device], channels: &ChannelSet) -> Result<()> {
    if channels.len() != devices.len() || channels.q.len() != devices.len() {
        return Err(Error::DimensionMismatch {
            expected: devices.len(),
            actual: channels.len(),
        });
    }
    channels.validate(channels.n_elements())
}

/// An admitted offloader: device, beam index, `E_k g_k`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Offloader {
    pub device: usize,
    pub beam: usize,
    pub energy_gain: f64,
}

/// Builds the final allocation: closed-form time split for the offloaders,
/// local optimum for everyone else.
pub(crate) fn assemble_solution(
    devices: &[Device],
    params: &SystemParams,
    offloaders: &[Offloader],
    beams: Vec<BeamVector>,
) -> Result<Solution> {
    let k_total = devices.len();
    let mut rate_offload_bits = vec![0.0; k_total];
    let mut rate_local_bits: Vec<f64> = devices
        .iter()
        .map(|d| local_rate(d, params).rate_bits)
        .collect();
    let mut tau_s = BTreeMap::new();
    let mut beam_assignment = BTreeMap::new();

    let mut offload_sum = 0.0;
    if !offloaders.is_empty() {
        let profile: OffloadProfile = offloaders.iter().map(|o| (o.device, o.energy_gain)).collect();
        let alloc = offload_allocation(&profile, params)?;
        for (i, o) in offloaders.iter().enumerate() {
            rate_offload_bits[o.device] = alloc.rate_bits[i];
            rate_local_bits[o.device] = 0.0;
            tau_s.insert(o.device, alloc.tau_s[i]);
            beam_assignment.insert(o.device, o.beam);
        }
        offload_sum = alloc.sum_rate_bits;
    }
    let local_sum: f64 = rate_local_bits.iter().sum();

    Ok(Solution {
        offload_set: offloaders.iter().map(|o| o.device).collect::<BTreeSet<_>>(),
        admission_order: offloaders.iter().map(|o| o.device).collect(),
        beam_assignment,
        beams,
        tau_s,
        rate_offload_bits,
        rate_local_bits,
        sum_rate_bits: offload_sum + local_sum,
    })
}

/// Mode selection with unlimited beams: each offloader keeps its own
/// aligned beam.
pub fn solve_infinite_q(devices: &[Device], channels: &ChannelSet, params: &SystemParams) -> Result<Solution> {
    check_dims(devices, channels)?;
    let gains = ideal_gains(channels);
    let ranking = TradingRate::compute(devices, &gains, params);

    let mut offloaders = Vec::new();
    let mut beams = Vec::new();
    let mut total = 0.0;
    for &k in &ranking.order {
        let eg = devices[k].energy_j * gains[k];
        if !admits(total, &devices[k], eg, params) {
            break;
        }
        total += eg;
        offloaders.push(Offloader {
            device: k,
            beam: beams.len(),
            energy_gain: eg,
        });
        beams.push(align_phase(channels.h_d[k], &channels.q[k]));
    }
    assemble_solution(devices, params, &offloaders, beams)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Admission {
    ActivationTest,
    Everyone,
}

/// Mode selection with at most `params.q_budget` beams.
pub fn solve_finite_q(devices: &[Device], channels: &ChannelSet, params: &SystemParams) -> Result<Solution> {
    finite_q(devices, channels, params, ScaOptions::default(), Admission::ActivationTest)
}

pub(crate) fn finite_q(
    devices: &[Device],
    channels: &ChannelSet,
    params: &SystemParams,
    sca: ScaOptions,
    admission: Admission,
) -> Result<Solution> {
    if params.q_budget < 1 {
        return Err(Error::InvalidBudget(params.q_budget));
    }
    check_dims(devices, channels)?;
    let gains = ideal_gains(channels);
    let ranking = TradingRate::compute(devices, &gains, params);
    let dedicated_slots = params.q_budget - 1;

    let mut dedicated: Vec<Offloader> = Vec::new();
    let mut beams: Vec<BeamVector> = Vec::new();
    let mut shared_members: Vec<usize> = Vec::new();
    let mut shared_eg: Vec<f64> = Vec::new();
    let mut shared_beam: Option<BeamVector> = None;

    for (pos, &k) in ranking.order.iter().enumerate() {
        let dev = &devices[k];
        let dedicated_total: f64 = dedicated.iter().map(|o| o.energy_gain).sum();
        if pos < dedicated_slots {
            let eg = dev.energy_j * gains[k];
            if admission == Admission::ActivationTest && !admits(dedicated_total, dev, eg, params) {
                break;
            }
            dedicated.push(Offloader {
                device: k,
                beam: beams.len(),
                energy_gain: eg,
            });
            beams.push(align_phase(channels.h_d[k], &channels.q[k]));
        } else {
            let mut members = shared_members.clone();
            members.push(k);
            let links: Vec<WeightedLink<'_>> = members
                .iter()
                .map(|&j| WeightedLink {
                    weight: devices[j].energy_j,
                    h_d: channels.h_d[j],
                    q: &channels.q[j],
                })
                .collect();
            let beam = shared_beam_sca(&links, None, sca)?.beam;
            let egs = members
                .iter()
                .map(|&j| Ok(devices[j].energy_j * effective_gain(channels.h_d[j], &channels.q[j], &beam)?))
                .collect::<Result<Vec<f64>>>()?;
            let candidate_eg = egs[egs.len() - 1];
            // members already admitted are re-evaluated under the new beam
            let current_total = dedicated_total + egs[..egs.len() - 1].iter().sum::<f64>();
            if admission == Admission::ActivationTest && !admits(current_total, dev, candidate_eg, params) {
                break;
            }
            shared_members = members;
            shared_eg = egs;
            shared_beam = Some(beam);
        }
    }

    let mut offloaders = dedicated;
    if let Some(beam) = shared_beam {
        let idx = beams.len();
        beams.push(beam);
        offloaders.extend(shared_members.iter().zip(&shared_eg).map(|(&k, &eg)| Offloader {
            device: k,
            beam: idx,
            energy_gain: eg,
        }));
    }
    assemble_solution(devices, params, &offloaders, beams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{place_devices, realize_channels, trial_rng, GeometryConfig};
    use num_complex::Complex64;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn scenario(k: usize, n: usize, seed: u64) -> (Vec<Device>, ChannelSet, SystemParams) {
        let p = SystemParams { n_elements: n, ..params() };
        let cfg = GeometryConfig::default();
        let mut rng = trial_rng(seed, 0);
        let devs = place_devices(&cfg, &vec![Device::new(0.01, 1000.0, 3e8); k], &mut rng);
        let ch = realize_channels(&p, &cfg, &devs, &mut rng).unwrap();
        (devs, ch, p)
    }

    #[test]
    fn trading_rate_examples() {
        let p = params();
        assert_eq!(trading_rate(&Device::new(0.0, 1000.0, 1e9), 1.0, &p), 0.0);

        // E g = T σ² → offload 1e6 bits; local (1e26)^(1/3)/1000
        let dev = Device::new(0.01, 1000.0, 1e12);
        let lambda = trading_rate(&dev, 1e-11 / 0.01, &p);
        let expected = 1e6 - 10f64.powf(26.0 / 3.0) / 1000.0;
        assert!((lambda - expected).abs() <= 1e-9 * expected);
        assert!((lambda - 5.358e5).abs() < 100.0);

        let heavy = Device::new(0.01, 1e30, 1e12);
        assert!((trading_rate(&heavy, 1e-7, &p) - 1e6 * 101f64.log2()).abs() < 1e-3);
    }

    #[test]
    fn order_ties_break_by_index() {
        assert_eq!(descending_order(&[1.0, 3.0, 3.0, 2.0, 1.0]), vec![1, 2, 3, 0, 4]);
    }

    #[test]
    fn activation_examples() {
        let p = params();
        let dev = Device::new(0.01, 1000.0, 1e12);
        assert!(activation_test(&OffloadProfile::new(), &dev, 1e-11, &p));
        assert!(!activation_test(&OffloadProfile::new(), &dev, 0.0, &p));
        let idle = Device::new(0.0, 1000.0, 1e12);
        assert!(activation_test(&OffloadProfile::new(), &idle, 0.0, &p));
        // but the solvers never admit a zero-gain tie
        assert!(!admits(0.0, &idle, 0.0, &p));
    }

    #[test]
    fn single_device_closed_form() {
        let p = params();
        let devs = vec![Device::new(0.01, 1000.0, 1e12).at([30.0, 0.0, 0.0])];
        // E g = T σ²
        let ch = ChannelSet {
            h_d: vec![Complex64::new((1e-9f64).sqrt(), 0.0)],
            q: vec![vec![Complex64::new(0.0, 0.0); 4]],
        };
        let sol = solve_infinite_q(&devs, &ch, &p).unwrap();
        assert_eq!(sol.offload_set.len(), 1);
        assert!((sol.sum_rate_bits - 1e6).abs() < 1e-3);
        assert!(sol.check(p.frame_s).is_ok());
    }

    #[test]
    fn all_zero_energy_goes_local() {
        let (mut devs, ch, p) = scenario(5, 8, 1);
        devs.iter_mut().for_each(|d| d.energy_j = 0.0);
        for sol in [
            solve_infinite_q(&devs, &ch, &p).unwrap(),
            solve_finite_q(&devs, &ch, &p).unwrap(),
        ] {
            assert!(sol.offload_set.is_empty());
            assert_eq!(sol.sum_rate_bits, 0.0);
        }
    }

    #[test]
    fn large_budget_matches_infinite() {
        for seed in 0..20 {
            let (devs, ch, p) = scenario(6, 16, seed);
            let p = SystemParams { q_budget: 6, ..p };
            let inf = solve_infinite_q(&devs, &ch, &p).unwrap();
            let fin = solve_finite_q(&devs, &ch, &p).unwrap();
            assert_eq!(inf.offload_set, fin.offload_set);
            assert!((inf.sum_rate_bits - fin.sum_rate_bits).abs() <= 1e-9 * inf.sum_rate_bits);
        }
    }

    #[test]
    fn single_beam_identical_channels() {
        let p = SystemParams { q_budget: 1, n_elements: 4, ..params() };
        let h = Complex64::new(2e-5, 1e-5);
        let q = vec![Complex64::new(1e-5, -2e-5), Complex64::new(3e-6, 0.0), Complex64::new(0.0, 1e-5), Complex64::new(-5e-6, 5e-6)];
        // C large so both devices want to offload
        let devs = vec![Device::new(0.01, 1e4, 3e8).at([30.0, 0.0, 0.0]); 2];
        let ch = ChannelSet { h_d: vec![h, h], q: vec![q.clone(), q.clone()] };
        let sol = solve_finite_q(&devs, &ch, &p).unwrap();
        assert_eq!(sol.offloaders(), 2);
        assert_eq!(sol.beams.len(), 1);
        let eg = 0.01 * aligned_gain(h, &q);
        let expected = 1e6 * (1.0 + 2.0 * eg / p.noise_energy()).log2();
        assert!((sol.sum_rate_bits - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn prefix_and_add_one_consistency() {
        for seed in 0..30 {
            let (devs, ch, p) = scenario(10, 32, seed);
            let gains = ideal_gains(&ch);
            let ranking = TradingRate::compute(&devs, &gains, &p);
            let sol = solve_infinite_q(&devs, &ch, &p).unwrap();
            let m = sol.offloaders();
            assert_eq!(sol.admission_order, ranking.order[..m].to_vec());
            if m < devs.len() {
                let profile: OffloadProfile = sol
                    .admission_order
                    .iter()
                    .map(|&k| (k, devs[k].energy_j * gains[k]))
                    .collect();
                let next = ranking.order[m];
                let eg = devs[next].energy_j * gains[next];
                assert!(eg == 0.0 || !activation_test(&profile, &devs[next], eg, &p));
            }
            for q_budget in 1..=6 {
                let p = SystemParams { q_budget, ..p };
                let fin = solve_finite_q(&devs, &ch, &p).unwrap();
                assert_eq!(fin.admission_order, ranking.order[..fin.offloaders()].to_vec());
                assert!(fin.beams.len() <= q_budget);
                assert!(fin.check(p.frame_s).is_ok());
                assert!(fin.sum_rate_bits <= sol.sum_rate_bits * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn invalid_budget() {
        let (devs, ch, p) = scenario(2, 4, 0);
        let p = SystemParams { q_budget: 0, ..p };
        assert_eq!(solve_finite_q(&devs, &ch, &p).unwrap_err(), Error::InvalidBudget(0));
    }

    #[test]
    fn mismatched_channels() {
        let (devs, ch, p) = scenario(3, 4, 0);
        assert!(matches!(
            solve_infinite_q(&devs[..2], &ch, &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
