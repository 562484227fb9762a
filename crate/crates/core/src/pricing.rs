//! Log-price construction, its characteristic function, Fourier call pricing and
//! Black–Scholes implied volatility.

use crate::error::{CbitclError, Result};
use crate::measure::{CompensatorConstants, EsscherSpec};
use crate::mechanisms::CbitclModel;
use crate::quadrature::integrate_with;
use crate::riccati::{solve_riccati_at, transform_unchecked, RiccatiArgs, SolveStatus, SolverConfig};
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erfc;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `log S_t = lambda Z_t + zeta (X_t - X0) - K_t`, a martingale with `S_0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPriceSpec {
    pub model: CbitclModel,
    pub tilt: EsscherSpec,
}

impl LogPriceSpec {
    pub fn new(model: CbitclModel, zeta: f64, lambda: f64) -> Result<Self> {
        let tilt = EsscherSpec::new(&model, zeta, lambda)?;
        Ok(LogPriceSpec { model, tilt })
    }

    pub fn constants(&self) -> Result<CompensatorConstants> {
        self.tilt.constants(&self.model)
    }

    /// Riccati arguments `(iu zeta, -iu c, iu lambda)` for `E[exp(iu log S_t)]`.
    pub fn exponents(&self, u: Complex64) -> Result<RiccatiArgs<Complex64>> {
        let c = self.constants()?.c;
        let iu = I * u;
        Ok(RiccatiArgs::new(iu * self.tilt.zeta, -iu * c, iu * self.tilt.lambda))
    }

    /// Whether `E[S_t^p]` is finite.
    pub fn moment_finite(&self, p: f64, t: f64) -> Result<bool> {
        let c = self.constants()?.c;
        let (u1, u2, u3) = (p * self.tilt.zeta, -p * c, p * self.tilt.lambda);
        let d = self.model.domain_info();
        if !d.contains_x(u1) || !d.contains_z(u3) {
            return Ok(false);
        }
        Ok(crate::moments::lifetime(&self.model, u1, u2, u3)?.value > t)
    }
}

fn char_fn_inner(spec: &LogPriceSpec, k: &CompensatorConstants, t: f64, u: Complex64, cfg: &SolverConfig) -> Result<Complex64> {
    let iu = I * u;
    let args = RiccatiArgs::new(iu * spec.tilt.zeta, -iu * k.c, iu * spec.tilt.lambda);
    let x0 = spec.model.x0;
    let sol = solve_riccati_at(&spec.model, args, &[t], cfg)?;
    match sol.status {
        SolveStatus::CompletedHorizon => {
            let (_, v, uu) = sol.last();
            Ok((-iu * (spec.tilt.zeta * x0) - iu * (t * k.psi_zeta) + uu + v * x0).exp())
        }
        SolveStatus::BlewUp { at } | SolveStatus::LeftDomain { at } => {
            Err(CbitclError::LifetimeExceeded { horizon: t, lifetime: at })
        }
    }
}

/// `phi_t(u) = E[exp(iu log S_t)]`.
///
/// On the strip `-1 <= Im(u) <= 0` the transform is finite by the martingale property; elsewhere
/// the moment of order `-Im(u)` is checked first.
pub fn char_fn_log_price(spec: &LogPriceSpec, t: f64, u: Complex64, cfg: &SolverConfig) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(CbitclError::Domain("time must be nonnegative".into()));
    }
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = -u.im;
    if !(0.0..=1.0).contains(&p) && !spec.moment_finite(p, t)? {
        let re = spec.exponents(Complex64::new(0.0, u.im))?.real_parts();
        let life = crate::moments::lifetime(&spec.model, re.u1, re.u2, re.u3).map(|l| l.value).unwrap_or(0.0);
        return Err(CbitclError::LifetimeExceeded { horizon: t, lifetime: life });
    }
    let k = spec.constants()?;
    char_fn_inner(spec, &k, t, u, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingConfig {
    /// Absolute and relative accuracy target of the contour integral.
    pub tol: f64,
    /// Width of the first truncation panel.
    pub first_panel: f64,
    pub max_panels: usize,
    pub solver: SolverConfig,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig { tol: 1e-10, first_panel: 8.0, max_panels: 40, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub damping: f64,
    /// Truncation panels integrated along the contour.
    pub panels: usize,
    pub err_estimate: f64,
}

pub const DEFAULT_DAMPING: f64 = -0.5;

/// `E[(S_T - K)^+] = phi_T(-i) + (1/pi) int_0^inf Re(e^{-iz log K} phi_T(z - i) / (-z (z - i))) dx`
/// along `z = x - i alpha`.
pub fn price_call(spec: &LogPriceSpec, t: f64, strike: f64, damping: f64, cfg: &PricingConfig) -> Result<PriceResult> {
    if !(damping > -1.0 && damping < 0.0) {
        return Err(CbitclError::Domain(format!("damping must lie in (-1, 0), got {damping}")));
    }
    if !(strike > 0.0 && strike.is_finite()) {
        return Err(CbitclError::Domain("strike must be positive".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(CbitclError::Domain("maturity must be positive".into()));
    }
    let k = spec.constants()?;
    let log_k = strike.ln();
    let forward = char_fn_inner(spec, &k, t, Complex64::new(0.0, -1.0), &cfg.solver)?.re;

    let integrand = |x: f64| -> Result<f64> {
        let z = Complex64::new(x, -damping);
        let w = z - I;
        let phi = char_fn_inner(spec, &k, t, w, &cfg.solver)?;
        Ok(((-I * z * log_k).exp() * phi / (-z * w)).re)
    };

    let mut acc = 0.0;
    let mut err = 0.0;
    let mut a = 0.0;
    let mut width = cfg.first_panel;
    let mut panels = 0;
    let mut quiet = 0;
    while panels < cfg.max_panels {
        let r = integrate_with(integrand, a, a + width, cfg.tol * 0.1, cfg.tol)?;
        acc += r.value;
        err += r.error;
        panels += 1;
        a += width;
        width *= 2.0;
        if r.value.abs() <= 1e-12 * acc.abs().max(1e-300) + 0.1 * cfg.tol * std::f64::consts::PI {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if quiet < 2 {
        log::warn!("contour integral truncated at x = {a} after {panels} panels");
    }
    let raw = forward + acc / std::f64::consts::PI;
    let err_estimate = err / std::f64::consts::PI;
    let lower = (1.0 - strike).max(0.0);
    let price = raw.clamp(lower, 1.0);
    if (price - raw).abs() > err_estimate.max(cfg.tol) {
        log::warn!("call price {raw} clamped to the no-arbitrage interval [{lower}, 1]");
    }
    Ok(PriceResult { price, damping, panels, err_estimate })
}

/// Standard normal cdf via `erfc` (accurate in the far left tail).
fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Black–Scholes call on a unit forward.
pub fn black_scholes_call(strike: f64, t: f64, vol: f64) -> f64 {
    let lower = (1.0 - strike).max(0.0);
    if vol <= 0.0 || t <= 0.0 {
        return lower;
    }
    let s = vol * t.sqrt();
    let d1 = (-strike.ln() + 0.5 * s * s) / s;
    norm_cdf(d1) - strike * norm_cdf(d1 - s)
}

/// Out-of-the-money option value (put below the forward, call above) on a unit forward.
fn otm_price(strike: f64, t: f64, vol: f64) -> f64 {
    let s = vol * t.sqrt();
    let d1 = (-strike.ln() + 0.5 * s * s) / s;
    let d2 = d1 - s;
    if strike < 1.0 {
        strike * norm_cdf(-d2) - norm_cdf(-d1)
    } else {
        norm_cdf(d1) - strike * norm_cdf(d2)
    }
}

fn vega(strike: f64, t: f64, vol: f64) -> f64 {
    let s = vol * t.sqrt();
    let d1 = (-strike.ln() + 0.5 * s * s) / s;
    (-0.5 * d1 * d1).exp() / (2.0 * std::f64::consts::PI).sqrt() * t.sqrt()
}

/// Black–Scholes implied volatility of a call on a unit forward.
pub fn implied_vol(price: f64, strike: f64, t: f64) -> Result<f64> {
    if !(strike > 0.0 && t > 0.0) {
        return Err(CbitclError::Domain("strike and maturity must be positive".into()));
    }
    let lower = (1.0 - strike).max(0.0);
    let upper = 1.0;
    // a few ulps of slack absorb the rounding of `1 - strike`
    if !(price > lower * (1.0 + 4.0 * f64::EPSILON) && price < upper) {
        return Err(CbitclError::OutOfBounds { price, lower, upper });
    }
    // work with the out-of-the-money leg, whose value is not swamped by intrinsic value
    let target = if strike < 1.0 { price - lower } else { price };
    if !(target > 0.0) {
        return Err(CbitclError::OutOfBounds { price, lower, upper });
    }
    let ln_target = target.ln();
    let f = |v: f64| otm_price(strike, t, v).ln() - ln_target;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(CbitclError::Nonconvergence("implied volatility above 1e4".into()));
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fv = f(v);
        if fv.is_finite() {
            if fv > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
        } else {
            lo = v;
        }
        // Newton on the log price: d/dv ln P = vega / P
        let p = otm_price(strike, t, v);
        let step = if p > 0.0 && fv.is_finite() { fv * p / vega(strike, t, v) } else { f64::NAN };
        let mut next = v - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-12 * v || hi - lo <= 1e-14 * hi {
            return Ok(next);
        }
        v = next;
    }
    Err(CbitclError::Nonconvergence("implied volatility iteration did not converge".into()))
}

/// Transform of the joint law at real `u`, used by the wing and Monte Carlo checks.
pub fn log_price_moment(spec: &LogPriceSpec, t: f64, p: f64, cfg: &SolverConfig) -> Result<f64> {
    if !spec.moment_finite(p, t)? {
        return Err(CbitclError::LifetimeExceeded { horizon: t, lifetime: 0.0 });
    }
    let k = spec.constants()?;
    let args = RiccatiArgs::new(p * spec.tilt.zeta, -p * k.c, p * spec.tilt.lambda);
    let x0 = spec.model.x0;
    let e = transform_unchecked(&spec.model, t, args, (x0, 0.0, 0.0), cfg)?;
    Ok(e * (-p * spec.tilt.zeta * x0 - p * t * k.psi_zeta).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implied_vol_round_trip() {
        for &k in &[0.02, 0.5, 1.0, 1.7, 50.0] {
            for &v in &[0.05, 0.2, 0.9] {
                let p = black_scholes_call(k, 1.0, v);
                if p - (1.0 - k).max(0.0) < 1e-300 {
                    continue;
                }
                let iv = implied_vol(p, k, 1.0).unwrap();
                assert!((iv - v).abs() < 1e-10 * v.max(1.0), "k={k} v={v} iv={iv}");
            }
        }
    }

    #[test]
    fn implied_vol_rejects_bounds() {
        assert!(matches!(implied_vol(1.0, 1.0, 1.0), Err(CbitclError::OutOfBounds { .. })));
        assert!(matches!(implied_vol(0.2, 0.8, 1.0), Err(CbitclError::OutOfBounds { .. })));
    }

    #[test]
    fn bs_atm_value() {
        assert!((black_scholes_call(1.0, 1.0, 0.2) - 0.0796557).abs() < 1e-7);
    }
}
