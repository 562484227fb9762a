//! Truncated compound-Poisson sampling of the jump families.

use crate::error::{CbitclError, Result};
use crate::levy::LevyMeasureSpec;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Poisson variate; inversion for small means, `rand_distr` otherwise.
pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 20.0 {
        let mut p = (-mean).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k
    } else {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
    }
}

/// Precomputed truncation of one Lévy measure at `eps`.
#[derive(Debug, Clone, Copy)]
pub struct JumpSampler {
    spec: LevyMeasureSpec,
    eps: f64,
    /// Mass of `{x >= eps}` (one-sided) or of the positive half (cgmy).
    mass_pos: f64,
    /// Mass of `{x <= -eps}` (cgmy only).
    mass_neg: f64,
    /// Deterministic drift per unit of the time product.
    drift: f64,
    /// Variance per unit of the time product of the jumps below `eps`.
    small_var: f64,
}

impl JumpSampler {
    pub fn new(spec: LevyMeasureSpec, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CbitclError::Config(format!("small-jump cutoff must be positive, got {eps}")));
        }
        let (mass_pos, mass_neg) = match spec {
            LevyMeasureSpec::None => (0.0, 0.0),
            LevyMeasureSpec::Cgmy { c, g, m, y } => {
                let pos = LevyMeasureSpec::TemperedStablePositive { alpha: y, theta: m, c };
                let neg = LevyMeasureSpec::TemperedStablePositive { alpha: y, theta: g, c };
                (pos.tail_mass(eps), neg.tail_mass(eps))
            }
            _ => (spec.tail_mass(eps), 0.0),
        };
        let drift = if spec.is_none() {
            0.0
        } else if finite_variation(&spec) {
            // small jumps of a subordinator replaced by their mean
            spec.small_first_moment(eps)
        } else {
            // compensation of the large jumps
            -spec.tail_first_moment(eps)
        };
        Ok(JumpSampler { spec, eps, mass_pos, mass_neg, drift, small_var: spec.small_second_moment(eps) })
    }

    pub fn is_none(&self) -> bool {
        self.spec.is_none()
    }

    /// Jump intensity above the cutoff per unit time product.
    pub fn intensity(&self) -> f64 {
        self.mass_pos + self.mass_neg
    }

    pub fn drift_rate(&self) -> f64 {
        self.drift
    }

    pub fn small_variance_rate(&self) -> f64 {
        self.small_var
    }

    /// One jump of size at least `eps` in absolute value.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.spec {
            LevyMeasureSpec::None => 0.0,
            LevyMeasureSpec::StablePositive { alpha, .. } => pareto(rng, self.eps, alpha),
            LevyMeasureSpec::TemperedStablePositive { alpha, theta, .. } => tempered(rng, self.eps, alpha, theta),
            LevyMeasureSpec::Cgmy { g, m, y, .. } => {
                let u: f64 = rng.random();
                if u * (self.mass_pos + self.mass_neg) < self.mass_pos {
                    tempered(rng, self.eps, y, m)
                } else {
                    -tempered(rng, self.eps, y, g)
                }
            }
        }
    }

    /// Sum of the jumps above the cutoff over a time product `tp`.
    pub fn sample_sum<R: Rng + ?Sized>(&self, rng: &mut R, tp: f64) -> f64 {
        if self.is_none() || tp <= 0.0 {
            return 0.0;
        }
        let n = poisson(rng, tp * self.intensity());
        (0..n).map(|_| self.sample_jump(rng)).sum()
    }
}

fn finite_variation(spec: &LevyMeasureSpec) -> bool {
    match *spec {
        LevyMeasureSpec::StablePositive { alpha, .. } | LevyMeasureSpec::TemperedStablePositive { alpha, .. } => {
            alpha < 1.0
        }
        _ => false,
    }
}

/// Inverse transform for the density proportional to `x^(-1-alpha)` on `[eps, inf)`.
fn pareto<R: Rng + ?Sized>(rng: &mut R, eps: f64, alpha: f64) -> f64 {
    let u: f64 = rng.random();
    eps * (1.0 - u).powf(-1.0 / alpha)
}

/// Rejection from the Pareto tail with acceptance `exp(-theta (x - eps))`.
fn tempered<R: Rng + ?Sized>(rng: &mut R, eps: f64, alpha: f64, theta: f64) -> f64 {
    loop {
        let x = pareto(rng, eps, alpha);
        let v: f64 = rng.random();
        if v < (-theta * (x - eps)).exp() {
            return x;
        }
    }
}

/// Jumps of size at least `eps` accumulated over the intensity-time product `tp`, together with
/// the drift the truncation implies: the mean of the small jumps for finite-variation
/// subordinator measures, minus the mean of the large jumps for compensated measures.
pub fn sample_levy_increment<R: Rng + ?Sized>(
    spec: &LevyMeasureSpec,
    tp: f64,
    eps: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(tp >= 0.0) {
        return Err(CbitclError::Config("time product must be nonnegative".into()));
    }
    let s = JumpSampler::new(*spec, eps)?;
    if tp == 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok((s.sample_sum(rng, tp), tp * s.drift_rate()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_time_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = LevyMeasureSpec::StablePositive { alpha: 1.5, scale: 1.0, c: 0.4 };
        assert_eq!(sample_levy_increment(&spec, 0.0, 1e-3, &mut rng).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn poisson_mean_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mean in [0.05, 3.0, 40.0] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| poisson(&mut rng, mean) as f64).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: {m}");
            assert!((v - mean).abs() < 0.05 * mean, "var {mean}: {v}");
        }
    }

    #[test]
    fn tempered_jump_sum_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = LevyMeasureSpec::TemperedStablePositive { alpha: 1.5, theta: 2.0, c: 0.42 };
        let eps = 1e-2;
        let tp = 0.5;
        let n = 50_000;
        let s = JumpSampler::new(spec, eps).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| s.sample_sum(&mut rng, tp)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let exact = tp * spec.tail_first_moment(eps);
        assert!((m - exact).abs() < 3.0 * sd / (n as f64).sqrt(), "{m} vs {exact}");
    }
}
