//! Domain types shared by every other module.
//!
//! Everything here is in SI units: watts, joules, hertz, seconds and bits.
//! Rates are bits per frame, so a bits/s figure is `rate / frame_s`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::BeamVector;
use crate::error::{Error, Result};

/// Relative tolerance used by invariant checks.
pub const REL_TOL: f64 = 1e-9;

/// Complex column vector; its length must match the IRS element count of
/// the scenario it belongs to.
pub type ComplexVec = Vec<Complex64>;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Global constants of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub bandwidth_hz: f64,
    pub frame_s: f64,
    pub noise_w: f64,
    pub n_elements: usize,
    pub q_budget: usize,
    /// Effective switched capacitance of the device CPUs (J·s²/cycle³).
    pub gamma_c: f64,
}

impl Default for SystemParams {
    /// N = 60, T = 1 s, B = 1 MHz, σ² = -80 dBm, γ_c = 1e-28, Q = 5.
    fn default() -> Self {
        Self {
            bandwidth_hz: 1e6,
            frame_s: 1.0,
            noise_w: dbm_to_watts(-80.0),
            n_elements: 60,
            q_budget: 5,
            gamma_c: 1e-28,
        }
    }
}

impl SystemParams {
    /// `T·σ²`, the noise energy over one frame.
    pub fn noise_energy(&self) -> f64 {
        self.frame_s * self.noise_w
    }
}

/// Default CPU frequency cap of a device, in cycles per second.
pub const DEFAULT_F_MAX_HZ: f64 = 3e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub energy_j: f64,
    pub cycles_per_bit: f64,
    pub f_max_hz: f64,
    pub position_m: [f64; 3],
}

impl Device {
    pub fn new(energy_j: f64, cycles_per_bit: f64, f_max_hz: f64) -> Self {
        Self {
            energy_j,
            cycles_per_bit,
            f_max_hz,
            position_m: [0.0; 3],
        }
    }

    pub fn at(mut self, position_m: [f64; 3]) -> Self {
        self.position_m = position_m;
        self
    }
}

fn positive(value: f64, name: impl Into<String>) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter(name.into()))
    }
}

/// Checks the scenario invariants, reporting the first one violated.
pub fn validate_scenario(params: &SystemParams, devices: &[Device]) -> Result<()> {
    positive(params.bandwidth_hz, "bandwidth_hz")?;
    positive(params.frame_s, "frame_s")?;
    positive(params.noise_w, "noise_w")?;
    if params.n_elements == 0 {
        return Err(Error::NonPositiveParameter("n_elements".into()));
    }
    if params.q_budget == 0 {
        return Err(Error::NonPositiveParameter("q_budget".into()));
    }
    positive(params.gamma_c, "gamma_c")?;
    if devices.is_empty() {
        return Err(Error::EmptyDeviceList);
    }
    for (k, dev) in devices.iter().enumerate() {
        if !(dev.energy_j.is_finite() && dev.energy_j >= 0.0) {
            return Err(Error::NonPositiveParameter(format!(
                "devices[{k}].energy_j"
            )));
        }
        positive(dev.cycles_per_bit, format!("devices[{k}].cycles_per_bit"))?;
        positive(dev.f_max_hz, format!("devices[{k}].f_max_hz"))?;
        if dev.position_m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonPositiveParameter(format!(
                "devices[{k}].position_m"
            )));
        }
    }
    Ok(())
}

/// A complete resource allocation for one channel realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub offload_set: BTreeSet<usize>,
    /// Device indices in the order they were admitted for offloading.
    pub admission_order: Vec<usize>,
    /// Offloading device → index into `beams`.
    pub beam_assignment: BTreeMap<usize, usize>,
    pub beams: Vec<BeamVector>,
    pub tau_s: BTreeMap<usize, f64>,
    /// Per device, zero for local devices.
    pub rate_offload_bits: Vec<f64>,
    /// Per device, zero for offloading devices.
    pub rate_local_bits: Vec<f64>,
    pub sum_rate_bits: f64,
}

impl Solution {
    pub fn offloaders(&self) -> usize {
        self.offload_set.len()
    }

    /// Checks the structural invariants of a solution.
    pub fn check(&self, frame_s: f64) -> std::result::Result<(), String> {
        let tau_total: f64 = self.tau_s.values().sum();
        if tau_total > frame_s * (1.0 + REL_TOL) {
            return Err(format!("time budget exceeded: {tau_total} > {frame_s}"));
        }
        if self.tau_s.values().any(|&t| t < 0.0) {
            return Err("negative time allocation".into());
        }
        let tau_keys: BTreeSet<usize> = self.tau_s.keys().copied().collect();
        if tau_keys != self.offload_set {
            return Err("tau keys differ from offload set".into());
        }
        let assigned: BTreeSet<usize> = self.beam_assignment.keys().copied().collect();
        if assigned != self.offload_set {
            return Err("beam assignment keys differ from offload set".into());
        }
        if self.beam_assignment.values().any(|&b| b >= self.beams.len()) {
            return Err("beam assignment points past the beam list".into());
        }
        for (k, (&off, &loc)) in self
            .rate_offload_bits
            .iter()
            .zip(&self.rate_local_bits)
            .enumerate()
        {
            if off < 0.0 || loc < 0.0 {
                return Err(format!("negative rate for device {k}"));
            }
            if self.offload_set.contains(&k) {
                if loc != 0.0 {
                    return Err(format!("offloading device {k} has local rate"));
                }
            } else if off != 0.0 {
                return Err(format!("local device {k} has offloading rate"));
            }
        }
        let parts: f64 =
            self.rate_offload_bits.iter().sum::<f64>() + self.rate_local_bits.iter().sum::<f64>();
        let scale = parts.abs().max(self.sum_rate_bits.abs()).max(f64::MIN_POSITIVE);
        if (parts - self.sum_rate_bits).abs() > REL_TOL * scale {
            return Err(format!(
                "sum rate {} differs from per-device total {parts}",
                self.sum_rate_bits
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_devices(k: usize) -> Vec<Device> {
        (0..k)
            .map(|i| Device::new(dbm_to_watts(10.0), 1000.0, 1e9).at([30.0, i as f64 * 0.1, 0.0]))
            .collect()
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn dbm_decade_scaling() {
        for x in [-120.0, -80.5, -3.0, 0.0, 7.25, 40.0] {
            let ratio = dbm_to_watts(x + 10.0) / dbm_to_watts(x);
            assert!((ratio - 10.0).abs() < 10.0 * 1e-12);
            assert!(dbm_to_watts(x + 1e-6) > dbm_to_watts(x));
        }
    }

    #[test]
    fn defaults_validate() {
        let params = SystemParams::default();
        assert_eq!(params.n_elements, 60);
        assert_eq!(params.q_budget, 5);
        assert!(validate_scenario(&params, &default_devices(10)).is_ok());
    }

    #[test]
    fn rejects_empty_and_nonpositive() {
        let params = SystemParams::default();
        assert_eq!(validate_scenario(&params, &[]), Err(Error::EmptyDeviceList));

        let zero_frame = SystemParams { frame_s: 0.0, ..params };
        assert_eq!(
            validate_scenario(&zero_frame, &default_devices(2)),
            Err(Error::NonPositiveParameter("frame_s".into()))
        );

        let no_beams = SystemParams { q_budget: 0, ..params };
        assert_eq!(
            validate_scenario(&no_beams, &default_devices(2)),
            Err(Error::NonPositiveParameter("q_budget".into()))
        );

        let mut devs = default_devices(3);
        devs[2].cycles_per_bit = 0.0;
        assert_eq!(
            validate_scenario(&params, &devs),
            Err(Error::NonPositiveParameter("devices[2].cycles_per_bit".into()))
        );

        // zero energy is allowed
        let mut devs = default_devices(2);
        devs[0].energy_j = 0.0;
        assert!(validate_scenario(&params, &devs).is_ok());
        devs[0].energy_j = -1.0;
        assert!(validate_scenario(&params, &devs).is_err());
    }
}
