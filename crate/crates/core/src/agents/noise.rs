//! Action noise: von Mises rotation of the direction and exponential
//! perturbation of the step length.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// How the exponential draw perturbs the step length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceNoiseModel {
    /// `len + η` with `η ~ Exp(mean = ν)`.
    #[default]
    AdditiveMean,
    /// `len + η` with `η ~ Exp(rate = ν)`, i.e. mean `1/ν`.
    AdditiveRate,
    /// `len · (1 + η)` with `η ~ Exp(mean = ν)`.
    Multiplicative,
}

impl DistanceNoiseModel {
    pub fn perturb_length<R: Rng + ?Sized>(self, len: f64, intensity: f64, rng: &mut R) -> f64 {
        match self {
            Self::AdditiveMean => len + exp_with_mean(intensity, rng),
            Self::AdditiveRate => len + exp_with_mean(1.0 / intensity, rng),
            Self::Multiplicative => len * (1.0 + exp_with_mean(intensity, rng)),
        }
    }
}

fn exp_with_mean<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// ν
    pub distance_intensity: f64,
    /// κ
    pub angular_concentration: f64,
    pub distance_model: DistanceNoiseModel,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            distance_intensity: 0.1,
            angular_concentration: 40.0,
            distance_model: DistanceNoiseModel::AdditiveMean,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.distance_intensity > 0.0 && self.distance_intensity.is_finite()) {
            return Err(crate::Error::contract("distance noise intensity must be positive"));
        }
        if !(self.angular_concentration > 0.0 && self.angular_concentration.is_finite()) {
            return Err(crate::Error::contract("angular concentration must be positive"));
        }
        Ok(())
    }
}

/// Draws an angle from von Mises(0, κ) using the Best–Fisher wrapped-Cauchy
/// envelope. Acceptance rate is above 65% for every κ.
pub fn sample_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    debug_assert!(kappa > 0.0);
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let theta = f.clamp(-1.0, 1.0).acos();
            return if u3 < 0.5 && theta < PI { -theta } else { theta };
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rotates `a` by `theta` inside the plane spanned by `a` and a uniformly
/// drawn unit vector orthogonal to it. Length is preserved. In one
/// dimension the sign flips when `|theta| > π/2`.
pub fn rotate_action<R: Rng + ?Sized>(a: &[f64], theta: f64, rng: &mut R) -> Vec<f64> {
    let mut out = a.to_vec();
    let mut scratch = vec![0.0; a.len()];
    rotate_in_place(&mut out, theta, rng, &mut scratch);
    out
}

fn rotate_in_place<R: Rng + ?Sized>(a: &mut [f64], theta: f64, rng: &mut R, ortho: &mut [f64]) {
    let len = norm(a);
    if len == 0.0 {
        return;
    }
    if a.len() == 1 {
        if theta.abs() > PI / 2.0 {
            a[0] = -a[0];
        }
        return;
    }
    a.iter_mut().for_each(|x| *x /= len);
    loop {
        ortho.iter_mut().for_each(|g| *g = rng.sample(StandardNormal));
        let proj = crate::smw::dot(ortho, a);
        for (gi, ui) in ortho.iter_mut().zip(a.iter()) {
            *gi -= proj * ui;
        }
        let n = norm(ortho);
        if n > 1e-9 {
            ortho.iter_mut().for_each(|g| *g /= n);
            break;
        }
    }
    let (sin, cos) = theta.sin_cos();
    for (u, v) in a.iter_mut().zip(ortho.iter()) {
        *u = len * (cos * *u + sin * v);
    }
}

/// Applies direction noise and then distance noise to an ideal action.
/// The zero action is returned unchanged.
pub fn perturb_action<R: Rng + ?Sized>(a: &[f64], noise: &NoiseParams, rng: &mut R) -> Vec<f64> {
    let mut out = a.to_vec();
    let mut scratch = vec![0.0; a.len()];
    perturb_in_place(&mut out, noise, rng, &mut scratch);
    out
}

/// In-place form of [`perturb_action`]; `scratch` must have the action's length.
pub(crate) fn perturb_in_place<R: Rng + ?Sized>(a: &mut [f64], noise: &NoiseParams, rng: &mut R, scratch: &mut [f64]) {
    let len = norm(a);
    if len == 0.0 {
        return;
    }
    let theta = sample_von_mises(noise.angular_concentration, rng);
    rotate_in_place(a, theta, rng, scratch);
    let new_len = noise.distance_model.perturb_length(len, noise.distance_intensity, rng);
    a.iter_mut().for_each(|x| *x *= new_len / len);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn von_mises_is_centered_and_in_range() {
        let mut rng = rng_from_seed(3);
        let draws: Vec<f64> = (0..20_000).map(|_| sample_von_mises(40.0, &mut rng)).collect();
        assert!(draws.iter().all(|t| *t > -PI && *t <= PI));
        let s: f64 = draws.iter().map(|t| t.sin()).sum();
        let c: f64 = draws.iter().map(|t| t.cos()).sum();
        assert!(s.atan2(c).abs() < 0.01);
    }

    #[test]
    fn von_mises_small_concentration_spreads_out() {
        let mut rng = rng_from_seed(4);
        let wide = (0..10_000)
            .filter(|_| sample_von_mises(0.01, &mut rng).abs() > PI / 2.0)
            .count();
        // Nearly uniform: about half the mass beyond ±π/2.
        assert!((4_000..6_000).contains(&wide), "{wide}");
    }

    #[test]
    fn huge_concentration_is_nearly_degenerate() {
        let mut rng = rng_from_seed(5);
        let close = (0..10_000)
            .filter(|_| sample_von_mises(1e6, &mut rng).abs() < 0.01)
            .count();
        assert!(close >= 9_900);
    }

    #[test]
    fn rotation_preserves_length_and_angle() {
        let mut rng = rng_from_seed(6);
        let a = [3.0, -1.0, 2.0, 0.5];
        let r = rotate_action(&a, 0.3, &mut rng);
        let (na, nr) = (norm(&a), norm(&r));
        assert!((na - nr).abs() < 1e-12 * na);
        let cos = crate::smw::dot(&a, &r) / (na * nr);
        assert!((cos - 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_rotation_flips_sign() {
        let mut rng = rng_from_seed(0);
        assert_eq!(rotate_action(&[2.0], 0.2, &mut rng), vec![2.0]);
        assert_eq!(rotate_action(&[2.0], -2.0, &mut rng), vec![-2.0]);
    }

    #[test]
    fn zero_action_untouched() {
        let mut rng = rng_from_seed(1);
        assert_eq!(
            perturb_action(&[0.0, 0.0], &NoiseParams::default(), &mut rng),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn degenerate_noise_converges_to_ideal() {
        let mut rng = rng_from_seed(2);
        let noise = NoiseParams {
            distance_intensity: 1e-6,
            angular_concentration: 1e6,
            ..Default::default()
        };
        let a = [4.0, -2.0, 1.0];
        // Angular sd is 1/sqrt(κ) = 1e-3, so bound the mean deviation.
        let devs: Vec<f64> = (0..1000)
            .map(|_| {
                let out = perturb_action(&a, &noise, &mut rng);
                let diff: Vec<f64> = out.iter().zip(&a).map(|(x, y)| x - y).collect();
                norm(&diff) / norm(&a)
            })
            .collect();
        let mean = devs.iter().sum::<f64>() / devs.len() as f64;
        assert!(mean < 1e-3, "{mean}");
        assert!(devs.iter().all(|d| *d < 6e-3));
    }

    #[test]
    fn noise_models_shift_length_as_documented() {
        let mut rng = rng_from_seed(9);
        let n = 20_000;
        let mean = |model: DistanceNoiseModel, rng: &mut crate::seed::SimRng| {
            (0..n).map(|_| model.perturb_length(2.0, 0.5, rng)).sum::<f64>() / n as f64
        };
        let add = mean(DistanceNoiseModel::AdditiveMean, &mut rng);
        let rate = mean(DistanceNoiseModel::AdditiveRate, &mut rng);
        let mul = mean(DistanceNoiseModel::Multiplicative, &mut rng);
        assert!((add - 2.5).abs() < 0.03, "{add}");
        assert!((rate - 4.0).abs() < 0.1, "{rate}");
        assert!((mul - 3.0).abs() < 0.06, "{mul}");
    }

    #[test]
    fn params_validation() {
        assert!(NoiseParams::default().validate().is_ok());
        let bad = NoiseParams {
            angular_concentration: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
