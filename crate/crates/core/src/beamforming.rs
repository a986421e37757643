//! IRS reflection design.
//!
//! A device with its own beam gets the closed-form phase alignment, which
//! co-phases every reflected path with the direct link. Devices sharing one
//! beam are served by a successive convex approximation: each step
//! maximizes the first-order lower bound
//!
//! ```text
//! |a(v)|² ≥ -|a(v̂)|² + 2 Re(conj(a(v̂)) · a(v)),   a(v) = h_d + qᴴ v
//! ```
//!
//! summed with weights `E_k`, whose maximizer over unit-modulus vectors is
//! `v = exp(j arg Σ_k E_k q_k a_k(v̂))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `exp(j arg z)`, with `arg 0 = 0`.
pub(crate) fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 || !r.is_finite() {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, z.im.atan2(z.re))
    }
}

/// Unit-modulus reflection vector `[e^{jθ_1}, …, e^{jθ_N}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeamVector(Vec<Complex64>);

impl BeamVector {
    pub fn ones(n: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self(phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect())
    }

    /// Projects each entry onto the unit circle (zero entries map to 1).
    pub fn from_directions(entries: impl IntoIterator<Item = Complex64>) -> Self {
        Self(entries.into_iter().map(unit_phase).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.arg()).collect()
    }

    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.0.iter().all(|v| (v.norm() - 1.0).abs() <= tol)
    }
}

/// `h_d + qᴴ v` without dimension checks.
fn combined(h_d: Complex64, q: &[Complex64], v: &[Complex64]) -> Complex64 {
    h_d + q.iter().zip(v).map(|(q, v)| q.conj() * v).sum::<Complex64>()
}

/// Closed-form beam maximizing `|h_d + qᴴ v|²`:
/// `v_n = exp(j(arg q_n + arg h_d))`. Elements with `q_n = 0` carry no
/// signal and are left at phase 0.
pub fn align_phase(h_d: Complex64, q: &[Complex64]) -> BeamVector {
    let direct = unit_phase(h_d);
    let one = Complex64::new(1.0, 0.0);
    BeamVector(
        q.iter()
            .map(|&q_n| if q_n == Complex64::new(0.0, 0.0) { one } else { unit_phase(q_n) * direct })
            .collect(),
    )
}

/// The optimum reached by [`align_phase`]: `(|h_d| + Σ|q_n|)²`.
pub fn aligned_gain(h_d: Complex64, q: &[Complex64]) -> f64 {
    let amp = h_d.norm() + q.iter().map(|x| x.norm()).sum::<f64>();
    amp * amp
}

/// Effective channel power gain `|h_d + qᴴ v|²`.
pub fn effective_gain(h_d: Complex64, q: &[Complex64], v: &BeamVector) -> Result<f64> {
    if q.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            actual: v.len(),
        });
    }
    Ok(combined(h_d, q, v.as_slice()).norm_sqr())
}

/// First-order lower bound of `|h_d + qᴴ v|²` expanded at `v_hat`; tight
/// when `v == v_hat`.
pub fn taylor_lower_bound(
    h_d: Complex64,
    q: &[Complex64],
    v_hat: &BeamVector,
    v: &BeamVector,
) -> Result<f64> {
    for beam in [v_hat, v] {
        if beam.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                actual: beam.len(),
            });
        }
    }
    let a_hat = combined(h_d, q, v_hat.as_slice());
    let a = combined(h_d, q, v.as_slice());
    Ok(-a_hat.norm_sqr() + 2.0 * (a_hat.conj() * a).re)
}

/// One member of a beam-sharing group, weighted by its energy budget.
#[derive(Debug, Clone, Copy)]
pub struct WeightedLink<'a> {
    pub weight: f64,
    pub h_d: Complex64,
    pub q: &'a [Complex64],
}

/// `Σ_k E_k |h_{d,k} + q_kᴴ v|²`.
pub fn weighted_objective(links: &[WeightedLink<'_>], v: &BeamVector) -> f64 {
    links
        .iter()
        .map(|l| l.weight * combined(l.h_d, l.q, v.as_slice()).norm_sqr())
        .sum()
}

/// Aligned beam of the member with the largest `E_k (|h_d| + Σ|q_n|)²`.
pub fn default_shared_init(links: &[WeightedLink<'_>]) -> Result<BeamVector> {
    let best = links
        .iter()
        .map(|l| (l.weight * aligned_gain(l.h_d, l.q), l))
        .fold(None::<(f64, &WeightedLink<'_>)>, |acc, (score, l)| match acc {
            Some((s, _)) if s >= score => acc,
            _ => Some((score, l)),
        })
        .ok_or(Error::EmptySubset)?;
    Ok(align_phase(best.1.h_d, best.1.q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaOptions {
    /// Stop when the objective grows by less than this fraction.
    pub eps: f64,
    pub max_iter: usize,
    /// Keep every accepted iterate in [`ScaOutcome::iterates`].
    pub record_iterates: bool,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iter: 200,
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub beam: BeamVector,
    /// Objective at the initial point and after every accepted update.
    pub trace: Vec<f64>,
    /// Update steps computed, including a final rejected one.
    pub iterations: usize,
    /// Initial point followed by every accepted update; empty unless
    /// requested.
    pub iterates: Vec<BeamVector>,
}

/// Optimizes the beam shared by `links` with successive lower-bound
/// maximization. Starts from `v_init`, or from [`default_shared_init`].
pub fn shared_beam_sca(
    links: &[WeightedLink<'_>],
    v_init: Option<&BeamVector>,
    opts: ScaOptions,
) -> Result<ScaOutcome> {
    if links.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = links[0].q.len();
    if let Some(bad) = links.iter().find(|l| l.q.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.q.len(),
        });
    }
    let mut v = match v_init {
        Some(v) if v.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: v.len(),
            })
        }
        Some(v) => v.clone(),
        None => default_shared_init(links)?,
    };

    let mut objective = weighted_objective(links, &v);
    let mut trace = vec![objective];
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(v.clone());
    }
    let mut iterations = 0;
    let mut direction = vec![Complex64::new(0.0, 0.0); n];

    while iterations < opts.max_iter {
        iterations += 1;
        direction.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for l in links {
            let a = combined(l.h_d, l.q, v.as_slice()) * l.weight;
            for (c, q) in direction.iter_mut().zip(l.q) {
                *c += q * a;
            }
        }
        let next = BeamVector::from_directions(direction.iter().copied());
        let next_objective = weighted_objective(links, &next);
        // the bound guarantees ascent; a drop can only be rounding
        if next_objective < objective {
            break;
        }
        let gain = next_objective - objective;
        v = next;
        trace.push(next_objective);
        if opts.record_iterates {
            iterates.push(v.clone());
        }
        if gain <= opts.eps * objective.abs() {
            break;
        }
        objective = next_objective;
    }

    Ok(ScaOutcome {
        beam: v,
        trace,
        iterations,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::trial_rng;
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_beam<R: Rng>(n: usize, rng: &mut R) -> BeamVector {
        let phases: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        BeamVector::from_phases(&phases)
    }

    fn random_vec<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn aligned_single_element() {
        let h = c(0.3, 0.4);
        let q = [c(3.0, 4.0)];
        let v = align_phase(h, &q);
        let gain = effective_gain(h, &q, &v).unwrap();
        assert!((gain - 30.25).abs() < 1e-12);

        // oracle: no random unit-modulus v beats the closed form
        let mut rng = trial_rng(1, 0);
        for _ in 0..1_000_000 {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let g = effective_gain(h, &q, &BeamVector::from_phases(&[theta])).unwrap();
            assert!(g <= gain + 1e-12);
        }
    }

    #[test]
    fn zero_reflection_returns_ones() {
        let q = [c(0.0, 0.0); 3];
        let v = align_phase(c(0.5, -0.2), &q);
        assert_eq!(v, BeamVector::ones(3));
        let gain = effective_gain(c(0.5, -0.2), &q, &v).unwrap();
        assert!((gain - 0.29).abs() < 1e-12);
    }

    #[test]
    fn pure_reflected_path_adds_magnitudes() {
        let q = [c(1.0, 0.0), c(0.0, 1.0)];
        let v = align_phase(c(0.0, 0.0), &q);
        assert!((effective_gain(c(0.0, 0.0), &q, &v).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn effective_gain_cases() {
        let ones = BeamVector::ones(2);
        let g = effective_gain(c(1.0, 0.0), &[c(0.0, 0.0); 2], &ones).unwrap();
        assert_eq!(g, 1.0);
        let g = effective_gain(c(1.0, 0.0), &[c(1.0, 0.0)], &BeamVector::from_phases(&[PI])).unwrap();
        assert!(g < 1e-30);
        assert_eq!(
            effective_gain(c(1.0, 0.0), &[c(1.0, 0.0)], &ones),
            Err(Error::DimensionMismatch { expected: 1, actual: 2 })
        );
    }

    #[test]
    fn alignment_identity_and_unit_modulus() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..100 {
            let h = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let q = random_vec(32, &mut rng);
            let v = align_phase(h, &q);
            assert!(v.is_unit_modulus(1e-12));
            let g = effective_gain(h, &q, &v).unwrap();
            let expected = aligned_gain(h, &q);
            assert!((g - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn lower_bound_is_tight_and_below() {
        let mut rng = trial_rng(3, 0);
        let h = c(0.2, -0.1);
        let q = random_vec(8, &mut rng);
        let v_hat = random_beam(8, &mut rng);
        let at_hat = taylor_lower_bound(h, &q, &v_hat, &v_hat).unwrap();
        let exact = effective_gain(h, &q, &v_hat).unwrap();
        assert!((at_hat - exact).abs() <= 1e-10 * exact);
        for _ in 0..1000 {
            let v = random_beam(8, &mut rng);
            let lb = taylor_lower_bound(h, &q, &v_hat, &v).unwrap();
            assert!(lb <= effective_gain(h, &q, &v).unwrap() + 1e-12);
        }
    }

    #[test]
    fn sca_single_member_is_alignment() {
        let mut rng = trial_rng(4, 0);
        let q = random_vec(16, &mut rng);
        let h = c(0.05, 0.3);
        let links = [WeightedLink { weight: 0.01, h_d: h, q: &q }];
        let out = shared_beam_sca(&links, None, ScaOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        let expected = 0.01 * aligned_gain(h, &q);
        let got = *out.trace.last().unwrap();
        assert!((got - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn sca_identical_members() {
        let mut rng = trial_rng(5, 0);
        let q = random_vec(10, &mut rng);
        let h = c(-0.4, 0.1);
        let links = [
            WeightedLink { weight: 0.01, h_d: h, q: &q },
            WeightedLink { weight: 0.01, h_d: h, q: &q },
        ];
        let expected = 2.0 * 0.01 * aligned_gain(h, &q);
        let out = shared_beam_sca(&links, None, ScaOptions::default()).unwrap();
        let got = weighted_objective(&links, &out.beam);
        assert!((got - expected).abs() <= 1e-9 * expected);
        // from a cold start the stopping rule leaves a small gap
        let cold = shared_beam_sca(&links, Some(&BeamVector::ones(10)), ScaOptions::default()).unwrap();
        let got = weighted_objective(&links, &cold.beam);
        assert!(got <= expected * (1.0 + 1e-12) && got >= expected * (1.0 - 1e-4));
    }

    #[test]
    fn sca_matches_grid_search() {
        // 3 devices, N = 4, against 16 phase levels per element
        let mut rng = trial_rng(7, 0);
        let qs: Vec<Vec<Complex64>> = (0..3).map(|_| random_vec(4, &mut rng)).collect();
        let hs: Vec<Complex64> = (0..3).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let weights = [1.0, 0.5, 2.0];
        let links: Vec<WeightedLink<'_>> = (0..3)
            .map(|k| WeightedLink { weight: weights[k], h_d: hs[k], q: &qs[k] })
            .collect();

        let init = BeamVector::ones(4);
        let out = shared_beam_sca(&links, Some(&init), ScaOptions::default()).unwrap();
        let sca = weighted_objective(&links, &out.beam);
        assert!(sca >= weighted_objective(&links, &init));
        for l in &links {
            assert!(sca + 1e-12 >= weighted_objective(&links, &align_phase(l.h_d, l.q)));
        }

        let levels: usize = 16;
        let mut best = 0.0f64;
        for idx in 0..levels * levels * levels * levels {
            let phases: Vec<f64> = (0..4)
                .map(|n| ((idx / levels.pow(n)) % levels) as f64 * 2.0 * PI / levels as f64)
                .collect();
            best = best.max(weighted_objective(&links, &BeamVector::from_phases(&phases)));
        }
        assert!(sca >= 0.98 * best, "sca {sca} vs grid {best}");
    }

    #[test]
    fn sca_trace_is_monotone() {
        let mut rng = trial_rng(6, 0);
        let qs: Vec<Vec<Complex64>> = (0..4).map(|_| random_vec(24, &mut rng)).collect();
        let links: Vec<WeightedLink<'_>> = qs
            .iter()
            .map(|q| WeightedLink { weight: rng.gen_range(0.1..1.0), h_d: c(0.1, 0.0), q })
            .collect();
        let out = shared_beam_sca(
            &links,
            Some(&random_beam(24, &mut rng)),
            ScaOptions { record_iterates: true, ..ScaOptions::default() },
        )
        .unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(out.iterates.len(), out.trace.len());
        assert!(out.iterates.iter().all(|v| v.is_unit_modulus(1e-12)));
    }

    #[test]
    fn sca_rejects_empty_group() {
        assert!(matches!(
            shared_beam_sca(&[], None, ScaOptions::default()),
            Err(Error::EmptySubset)
        ));
    }

    #[test]
    fn arg_of_zero_is_zero() {
        assert_eq!(unit_phase(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(unit_phase(c(-0.0, -0.0)), c(1.0, 0.0));
    }
}
