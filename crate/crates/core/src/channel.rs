//! Channel realizations: path loss, Rician small-scale fading, and the
//! cascaded AP–IRS–device channel.
//!
//! For device `k` the generator draws the direct link `h_d`, the shared
//! AP–IRS link `g` and the IRS–device link `h_r`, and stores only the
//! cascaded vector `q` with `q_n = h_r[n] · conj(g[n])`, so that
//! `qᴴ v = h_rᴴ diag(g) v` for any reflection vector `v`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{db_to_linear, ComplexVec, Device, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub ap_pos_m: [f64; 3],
    pub irs_pos_m: [f64; 3],
    pub device_cluster_center_m: [f64; 3],
    pub cluster_radius_m: f64,
    /// Path loss at the reference distance, in dB (negative = attenuation).
    pub pathloss_ref_db: f64,
    pub ref_distance_m: f64,
    pub alpha_ap_irs: f64,
    pub alpha_irs_dev: f64,
    pub alpha_ap_dev: f64,
    pub rician_k_db: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            ap_pos_m: [0.0, 0.0, 0.0],
            irs_pos_m: [30.0, 0.0, 4.0],
            device_cluster_center_m: [30.0, 0.0, 0.0],
            cluster_radius_m: 4.0,
            pathloss_ref_db: -30.0,
            ref_distance_m: 1.0,
            alpha_ap_irs: 2.2,
            alpha_irs_dev: 2.2,
            alpha_ap_dev: 3.4,
            rician_k_db: 3.0,
        }
    }
}

impl GeometryConfig {
    /// Moves the device cluster to `distance_m` along the x axis, carrying
    /// the IRS along so its offset from the cluster center is unchanged.
    pub fn with_cluster_distance(mut self, distance_m: f64) -> Self {
        let before = self.device_cluster_center_m;
        self.device_cluster_center_m = [
            self.ap_pos_m[0] + distance_m,
            self.ap_pos_m[1],
            self.ap_pos_m[2],
        ];
        for ((irs, new), old) in self.irs_pos_m.iter_mut().zip(self.device_cluster_center_m).zip(before) {
            *irs += new - old;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_radius_m.is_nan() || self.cluster_radius_m < 0.0 {
            return Err(Error::NonPositiveParameter("cluster_radius_m".into()));
        }
        if self.ref_distance_m.is_nan() || self.ref_distance_m <= 0.0 {
            return Err(Error::NonPositiveParameter("ref_distance_m".into()));
        }
        Ok(())
    }
}

/// Channel coefficients of every device for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub h_d: Vec<Complex64>,
    pub q: Vec<ComplexVec>,
}

impl ChannelSet {
    pub fn len(&self) -> usize {
        self.h_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_d.is_empty()
    }

    /// IRS element count (zero when the reflected path is absent).
    pub fn n_elements(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    /// Same direct links, no reflected path.
    pub fn without_irs(&self) -> ChannelSet {
        ChannelSet {
            h_d: self.h_d.clone(),
            q: vec![Vec::new(); self.h_d.len()],
        }
    }

    pub fn validate(&self, n_elements: usize) -> Result<()> {
        if self.q.len() != self.h_d.len() {
            return Err(Error::DimensionMismatch {
                expected: self.h_d.len(),
                actual: self.q.len(),
            });
        }
        for q in &self.q {
            if q.len() != n_elements {
                return Err(Error::DimensionMismatch {
                    expected: n_elements,
                    actual: q.len(),
                });
            }
        }
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if !self.h_d.iter().all(finite) || !self.q.iter().flatten().all(finite) {
            return Err(Error::NonPositiveParameter("channel entries must be finite".into()));
        }
        Ok(())
    }
}

/// Large-scale power attenuation `c0 · (d/d0)^(-alpha)`.
pub fn path_loss(d_m: f64, alpha: f64, cfg: &GeometryConfig) -> Result<f64> {
    if d_m.is_nan() || d_m <= 0.0 {
        return Err(Error::NonPositiveDistance(d_m));
    }
    Ok(db_to_linear(cfg.pathloss_ref_db) * (d_m / cfg.ref_distance_m).powf(-alpha))
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Standard circularly-symmetric complex Gaussian, `E|w|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Rician-faded vector with unit average power per entry.
///
/// The line-of-sight part is a half-wavelength ULA steering vector
/// `e^{jπ n sin φ}` with `φ ~ U(0, 2π)` drawn once per call.
pub fn rician_vector<R: Rng + ?Sized>(dim: usize, k_factor_db: f64, rng: &mut R) -> ComplexVec {
    let kappa = db_to_linear(k_factor_db);
    let los_w = (kappa / (1.0 + kappa)).sqrt();
    let nlos_w = (1.0 / (1.0 + kappa)).sqrt();
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let step = PI * phi.sin();
    (0..dim)
        .map(|n| {
            let los = Complex64::from_polar(1.0, step * n as f64);
            los * los_w + complex_gaussian(rng) * nlos_w
        })
        .collect()
}

/// Cascaded channel with `qᴴ = h_rᴴ diag(g)`, i.e. `q_n = h_r[n] · conj(g[n])`.
pub fn cascade(g: &[Complex64], h_r: &[Complex64]) -> ComplexVec {
    g.iter().zip(h_r).map(|(g, h)| h * g.conj()).collect()
}

/// Draws device positions uniformly over the cluster disk (z fixed at the
/// cluster center height).
pub fn place_devices<R: Rng + ?Sized>(
    cfg: &GeometryConfig,
    templates: &[Device],
    rng: &mut R,
) -> Vec<Device> {
    let c = cfg.device_cluster_center_m;
    templates
        .iter()
        .map(|dev| {
            let r = cfg.cluster_radius_m * rng.gen::<f64>().sqrt();
            let theta = rng.gen_range(0.0..2.0 * PI);
            dev.at([c[0] + r * theta.cos(), c[1] + r * theta.sin(), c[2]])
        })
        .collect()
}

/// Draws one channel realization for the given device positions.
pub fn realize_channels<R: Rng + ?Sized>(
    params: &SystemParams,
    cfg: &GeometryConfig,
    devices: &[Device],
    rng: &mut R,
) -> Result<ChannelSet> {
    let n = params.n_elements;
    let d_ap_irs = distance(&cfg.ap_pos_m, &cfg.irs_pos_m);
    let g_amp = path_loss(d_ap_irs, cfg.alpha_ap_irs, cfg)?.sqrt();
    let g: ComplexVec = rician_vector(n, cfg.rician_k_db, rng)
        .into_iter()
        .map(|x| x * g_amp)
        .collect();

    let mut h_d = Vec::with_capacity(devices.len());
    let mut q = Vec::with_capacity(devices.len());
    for dev in devices {
        let d_direct = distance(&cfg.ap_pos_m, &dev.position_m);
        let d_reflect = distance(&cfg.irs_pos_m, &dev.position_m);
        let direct_amp = path_loss(d_direct, cfg.alpha_ap_dev, cfg)?.sqrt();
        let reflect_amp = path_loss(d_reflect, cfg.alpha_irs_dev, cfg)?.sqrt();

        h_d.push(rician_vector(1, cfg.rician_k_db, rng)[0] * direct_amp);
        let h_r: ComplexVec = rician_vector(n, cfg.rician_k_db, rng)
            .into_iter()
            .map(|x| x * reflect_amp)
            .collect();
        let q_k = cascade(&g, &h_r);
        debug_assert!({
            // qᴴ·1 against h_rᴴ diag(g)·1
            let via_q: Complex64 = q_k.iter().map(|x| x.conj()).sum();
            let via_factors: Complex64 = h_r.iter().zip(&g).map(|(h, g)| h.conj() * g).sum();
            let scale = q_k.iter().map(|x| x.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
            (via_q - via_factors).norm() <= 1e-12 * scale
        });
        q.push(q_k);
    }
    Ok(ChannelSet { h_d, q })
}

/// Independent generator for trial `trial` of an experiment seeded with
/// `seed`: one ChaCha stream per trial index.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}
