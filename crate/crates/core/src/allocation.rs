//! Closed-form rate and time allocation.
//!
//! A local device runs for the whole frame at `f* = min((E/(Tγ_c))^(1/3), f_max)`.
//! Offloading devices share the frame by TDMA; the KKT conditions of the
//! time split force every offloader to the same received SNR
//!
//! ```text
//! γ* = Σ_k E_k g_k / (T σ²),   τ_k = E_k g_k / (γ* σ²)
//! ```
//!
//! so the offloaded bits collapse to `B T log2(1 + γ*)`. No bisection on
//! the dual variable is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Device, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalRate {
    pub rate_bits: f64,
    pub f_star_hz: f64,
}

/// Best local computing mode for one device.
pub fn local_rate(dev: &Device, params: &SystemParams) -> LocalRate {
    let t = params.frame_s;
    let f_energy = (dev.energy_j / (t * params.gamma_c)).cbrt();
    let f_star = f_energy.min(dev.f_max_hz);
    LocalRate {
        rate_bits: t * f_star / dev.cycles_per_bit,
        f_star_hz: f_star,
    }
}

/// Energy–gain products `E_k g_k` of a set of offloading devices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OffloadProfile {
    entries: Vec<(usize, f64)>,
}

impl OffloadProfile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds device `device` with product `energy_gain` (clamped at zero).
    pub fn push(&mut self, device: usize, energy_gain: f64) {
        self.entries.push((device, energy_gain.max(0.0)));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, eg)| eg).sum()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn devices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|(k, _)| *k)
    }
}

impl FromIterator<(usize, f64)> for OffloadProfile {
    fn from_iter<I: IntoIterator<Item = (usize, f64)>>(iter: I) -> Self {
        let mut p = OffloadProfile::new();
        for (k, eg) in iter {
            p.push(k, eg);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadAllocation {
    /// Aligned with the profile entries.
    pub tau_s: Vec<f64>,
    pub rate_bits: Vec<f64>,
    pub gamma_star: f64,
    pub sum_rate_bits: f64,
}

/// Optimal TDMA time split for a fixed offloading set.
pub fn offload_allocation(profile: &OffloadProfile, params: &SystemParams) -> Result<OffloadAllocation> {
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let t = params.frame_s;
    let total = profile.total();
    let gamma_star = total / params.noise_energy();
    let spectral = (1.0 + gamma_star).log2();

    let tau_s: Vec<f64> = if gamma_star > 0.0 {
        profile
            .entries()
            .iter()
            .map(|&(_, eg)| t * (eg / total))
            .collect()
    } else {
        vec![t / profile.len() as f64; profile.len()]
    };
    let rate_bits = tau_s
        .iter()
        .map(|tau| params.bandwidth_hz * tau * spectral)
        .collect();

    Ok(OffloadAllocation {
        tau_s,
        rate_bits,
        gamma_star,
        sum_rate_bits: params.bandwidth_hz * t * spectral,
    })
}

/// Offloaded bits if a device with product `candidate_eg` joins a set whose
/// products sum to `current_total`.
pub fn offload_rate_if_added(current_total: f64, candidate_eg: f64, params: &SystemParams) -> f64 {
    let gamma = (candidate_eg.max(0.0) + current_total) / params.noise_energy();
    params.bandwidth_hz * params.frame_s * (1.0 + gamma).log2()
}

/// `Σ_k B τ_k log2(1 + E_k g_k / (τ_k σ²))` for an arbitrary split, with
/// the `τ → 0` limit taken as zero.
pub fn rate_for_split(energy_gain: &[f64], tau_s: &[f64], params: &SystemParams) -> f64 {
    energy_gain
        .iter()
        .zip(tau_s)
        .map(|(&eg, &tau)| {
            if tau <= 0.0 {
                0.0
            } else {
                params.bandwidth_hz * tau * (1.0 + eg / (tau * params.noise_w)).log2()
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn local_energy_bound() {
        let dev = Device::new(0.01, 1000.0, 1e9);
        let lr = local_rate(&dev, &params());
        // (1e26)^(1/3)
        let f = 10f64.powf(26.0 / 3.0);
        assert!((lr.f_star_hz - f).abs() <= 1e-12 * f);
        assert!((lr.f_star_hz - 4.6416e8).abs() < 1e4);
        assert!((lr.rate_bits - f / 1000.0).abs() <= 1e-9 * lr.rate_bits);
        // the whole budget is spent
        let energy = 1e-28 * lr.f_star_hz.powi(3) * 1.0;
        assert!((energy - 0.01).abs() <= 1e-12);
    }

    #[test]
    fn local_zero_energy() {
        let lr = local_rate(&Device::new(0.0, 1000.0, 1e9), &params());
        assert_eq!(lr.rate_bits, 0.0);
        assert_eq!(lr.f_star_hz, 0.0);
    }

    #[test]
    fn local_cpu_bound() {
        let dev = Device::new(0.01, 1000.0, 1e8);
        let lr = local_rate(&dev, &params());
        assert_eq!(lr.f_star_hz, 1e8);
        assert!((lr.rate_bits - 1e5).abs() < 1e-9);
        let used = 1e-28 * 1e8f64.powi(3) * 1.0;
        assert!((used - 1e-4).abs() < 1e-18 && used <= 0.01);
    }

    #[test]
    fn two_device_split() {
        let p = params();
        let profile: OffloadProfile = [(1, 3e-11), (2, 1e-11)].into_iter().collect();
        let a = offload_allocation(&profile, &p).unwrap();
        assert!((a.gamma_star - 4.0).abs() < 1e-12);
        assert!((a.tau_s[0] - 0.75).abs() < 1e-12);
        assert!((a.tau_s[1] - 0.25).abs() < 1e-12);
        assert!((a.sum_rate_bits - 1e6 * 5f64.log2()).abs() < 1e-6);
        assert!((a.sum_rate_bits / 1e6 - 2.3219).abs() < 1e-4);
        let direct = rate_for_split(&[3e-11, 1e-11], &a.tau_s, &p);
        assert!((direct - a.sum_rate_bits).abs() <= 1e-9 * a.sum_rate_bits);
    }

    #[test]
    fn single_device_unit_snr() {
        let p = params();
        let profile: OffloadProfile = [(0, p.noise_energy())].into_iter().collect();
        let a = offload_allocation(&profile, &p).unwrap();
        assert!((a.gamma_star - 1.0).abs() < 1e-12);
        assert_eq!(a.tau_s, vec![1.0]);
        assert!((a.sum_rate_bits - 1e6).abs() < 1e-6);
    }

    #[test]
    fn all_zero_profile() {
        let profile: OffloadProfile = [(0, 0.0), (1, 0.0), (2, 0.0), (3, 0.0)].into_iter().collect();
        let a = offload_allocation(&profile, &params()).unwrap();
        assert_eq!(a.gamma_star, 0.0);
        assert_eq!(a.sum_rate_bits, 0.0);
        assert_eq!(a.tau_s, vec![0.25; 4]);
    }

    #[test]
    fn zero_member_gets_no_time() {
        let profile: OffloadProfile = [(0, 2e-11), (1, 0.0)].into_iter().collect();
        let a = offload_allocation(&profile, &params()).unwrap();
        assert_eq!(a.tau_s[1], 0.0);
        assert_eq!(a.rate_bits[1], 0.0);
        assert!((a.tau_s[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_profile_is_an_error() {
        assert_eq!(
            offload_allocation(&OffloadProfile::new(), &params()),
            Err(Error::EmptyProfile)
        );
    }

    #[test]
    fn rate_if_added_cases() {
        let p = params();
        let tn = p.noise_energy();
        assert!((offload_rate_if_added(0.0, tn, &p) - 1e6).abs() < 1e-6);
        assert!((offload_rate_if_added(3.0 * tn, tn, &p) - 1e6 * 5f64.log2()).abs() < 1e-6);
        let base = offload_rate_if_added(2.0 * tn, 0.0, &p);
        let profile: OffloadProfile = [(0, tn), (1, tn)].into_iter().collect();
        assert!((base - offload_allocation(&profile, &p).unwrap().sum_rate_bits).abs() < 1e-6);
    }
}
