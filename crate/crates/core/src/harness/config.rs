//! JSON scenario and experiment files. Powers are in dBm here and
//! converted to watts on load.

use serde::{Deserialize, Serialize};

use crate::channel::GeometryConfig;
use crate::error::{Error, Result};
use crate::model::{dbm_to_watts, validate_scenario, Device, SystemParams, DEFAULT_F_MAX_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub bandwidth_hz: f64,
    pub frame_s: f64,
    pub noise_dbm: f64,
    pub n_elements: usize,
    pub q_budget: usize,
    pub gamma_c: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: 1e6,
            frame_s: 1.0,
            noise_dbm: -80.0,
            n_elements: 60,
            q_budget: 5,
            gamma_c: 1e-28,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> SystemParams {
        SystemParams {
            bandwidth_hz: self.bandwidth_hz,
            frame_s: self.frame_s,
            noise_w: dbm_to_watts(self.noise_dbm),
            n_elements: self.n_elements,
            q_budget: self.q_budget,
            gamma_c: self.gamma_c,
        }
    }
}

/// `count` identical devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceGroup {
    pub count: usize,
    pub energy_dbm: f64,
    pub cycles_per_bit: f64,
    pub f_max_hz: f64,
}

impl Default for DeviceGroup {
    fn default() -> Self {
        Self {
            count: 1,
            energy_dbm: 10.0,
            cycles_per_bit: 1000.0,
            f_max_hz: DEFAULT_F_MAX_HZ,
        }
    }
}

pub const DEFAULT_DEVICE_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub geometry: GeometryConfig,
    pub devices: Vec<DeviceGroup>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            geometry: GeometryConfig::default(),
            devices: vec![DeviceGroup {
                count: DEFAULT_DEVICE_COUNT,
                ..DeviceGroup::default()
            }],
        }
    }
}

/// A scenario in solver units. Device positions are placeholders until a
/// trial places them.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub geometry: GeometryConfig,
    pub devices: Vec<Device>,
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<Scenario> {
        let devices: Vec<Device> = self
            .devices
            .iter()
            .flat_map(|g| {
                std::iter::repeat_n(Device::new(dbm_to_watts(g.energy_dbm), g.cycles_per_bit, g.f_max_hz), g.count)
            })
            .collect();
        let scenario = Scenario {
            params: self.system.params(),
            geometry: self.geometry,
            devices,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        validate_scenario(&self.params, &self.devices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    InfiniteQ,
    FiniteQ,
    OracleSubset,
    OracleGrouping,
    RandomBeam,
    OffloadOnly,
    LocalOnly,
    NoIrs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::InfiniteQ,
        SolverKind::FiniteQ,
        SolverKind::OracleSubset,
        SolverKind::OracleGrouping,
        SolverKind::RandomBeam,
        SolverKind::OffloadOnly,
        SolverKind::LocalOnly,
        SolverKind::NoIrs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::InfiniteQ => "infinite_q",
            SolverKind::FiniteQ => "finite_q",
            SolverKind::OracleSubset => "oracle_subset",
            SolverKind::OracleGrouping => "oracle_grouping",
            SolverKind::RandomBeam => "random_beam",
            SolverKind::OffloadOnly => "offload_only",
            SolverKind::LocalOnly => "local_only",
            SolverKind::NoIrs => "no_irs",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown solver `{s}`")))
    }
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    None,
    /// Beam budget.
    Q,
    /// IRS element count.
    N,
    CyclesPerBit,
    EnergyDbm,
    /// AP to cluster-center distance; the IRS moves with the cluster.
    DistanceM,
    AlphaApDev,
    /// Device count; extra devices copy the last template.
    Devices,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::None => "none",
            SweepParam::Q => "q",
            SweepParam::N => "n",
            SweepParam::CyclesPerBit => "cycles_per_bit",
            SweepParam::EnergyDbm => "energy_dbm",
            SweepParam::DistanceM => "distance_m",
            SweepParam::AlphaApDev => "alpha_ap_dev",
            SweepParam::Devices => "devices",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: SweepParam,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            name: SweepParam::None,
            values: vec![0.0],
        }
    }
}

fn count_value(name: SweepParam, value: f64, min: usize) -> Result<usize> {
    if value.fract() != 0.0 || value < min as f64 || !value.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "sweep `{}` needs integers ≥ {min}, got {value}",
            name.name()
        )));
    }
    Ok(value as usize)
}

impl Sweep {
    /// The scenario with the swept parameter set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        match self.name {
            SweepParam::None => {}
            SweepParam::Q => s.params.q_budget = count_value(self.name, value, 1)?,
            SweepParam::N => s.params.n_elements = count_value(self.name, value, 1)?,
            SweepParam::CyclesPerBit => s.devices.iter_mut().for_each(|d| d.cycles_per_bit = value),
            SweepParam::EnergyDbm => s.devices.iter_mut().for_each(|d| d.energy_j = dbm_to_watts(value)),
            SweepParam::DistanceM => s.geometry = s.geometry.with_cluster_distance(value),
            SweepParam::AlphaApDev => s.geometry.alpha_ap_dev = value,
            SweepParam::Devices => {
                let k = count_value(self.name, value, 1)?;
                let last = *s.devices.last().ok_or(Error::EmptyDeviceList)?;
                s.devices.resize(k, last);
            }
        }
        s.validate()?;
        Ok(s)
    }
}

fn default_trials() -> usize {
    200
}

fn default_phase_levels() -> usize {
    crate::oracle::DEFAULT_PHASE_LEVELS
}

/// One Monte Carlo experiment. `solver` and `solvers` are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
    #[serde(default)]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "default_phase_levels")]
    pub phase_levels: usize,
    /// Record wall-clock solver time; off by default so output files are
    /// reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn solver_list(&self) -> Vec<SolverKind> {
        let mut out: Vec<SolverKind> = self.solver.into_iter().collect();
        for &s in &self.solvers {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidSpec("trials must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::InvalidSpec("sweep values are empty".into()));
        }
        if self.solver_list().is_empty() {
            return Err(Error::InvalidSpec("no solver given".into()));
        }
        let base = self.scenario.resolve()?;
        for &v in &self.sweep.values {
            self.sweep.apply(&base, v)?;
        }
        Ok(())
    }
}
