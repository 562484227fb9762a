//! Explosion times of exponential moments, long-run asymptotics and implied-volatility wings.

use crate::error::{CbitclError, Result};
use crate::mechanisms::CbitclModel;
use crate::quadrature::integrate_with;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LifetimeClass {
    /// `u1 <= chi`: the exponential moment is finite at every horizon.
    BelowChi,
    /// `u1 > chi`: the lifetime is the integral of `1/g` from `u1` to the domain endpoint.
    AboveChi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeResult {
    pub value: f64,
    pub classification: LifetimeClass,
    pub chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticResult {
    /// Long-run limit of `V(t, 0, 0, u)`.
    pub xi: f64,
    /// Long-run growth rate `Psi(xi(u))` of `U(t, 0, 0, u)`.
    pub psi_xi: f64,
}

/// `g(x) = Phi(x) + u2 + rho sigma_X sigma_Z u3 x + Xi(u3)`, the Riccati right-hand side.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Drift<'a> {
    model: &'a CbitclModel,
    shift: f64,
    slope: f64,
}

impl<'a> Drift<'a> {
    pub(crate) fn new(model: &'a CbitclModel, u2: f64, u3: f64) -> Result<Self> {
        model.check_z(u3)?;
        Ok(Drift { model, shift: u2 + model.xi(u3)?, slope: model.cross() * u3 })
    }

    pub(crate) fn value(&self, x: f64) -> Result<f64> {
        Ok(self.model.phi(x)? + self.slope * x + self.shift)
    }

    fn derivative(&self, x: f64) -> Result<f64> {
        Ok(self.model.phi_prime(x)? + self.slope)
    }

    /// Coefficients `(a, b, c)` of `a x^2 + b x + c` when `Phi` is quadratic.
    fn quadratic(&self) -> Option<(f64, f64, f64)> {
        let br = &self.model.branching;
        if br.is_quadratic() {
            Some((0.5 * br.sigma * br.sigma, -br.b + self.slope, self.shift))
        } else {
            None
        }
    }
}

/// Roots of `a x^2 + b x + c` in increasing order, `a > 0`.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

const ROOT_TOL: f64 = 1e-12;

/// Bisection for the sign change of a convex `g` on `[lo, hi]` where `g(lo)` and `g(hi)` have
/// the signs given by `lo_nonpos`. Returns the endpoint on the `g <= 0` side.
fn bisect(g: &Drift<'_>, mut lo: f64, mut hi: f64, lo_nonpos: bool) -> Result<f64> {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= ROOT_TOL * 1e-3 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let nonpos = g.value(mid)? <= 0.0;
        if nonpos == lo_nonpos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if lo_nonpos { lo } else { hi })
}

/// `chi^{(u2,u3)} = sup{x in D_X : g(x) <= 0}`, `-inf` when the set is empty.
pub fn chi(model: &CbitclModel, u2: f64, u3: f64) -> Result<f64> {
    let g = Drift::new(model, u2, u3)?;
    let e = model.domain_info().x_upper;

    if let Some((a, b, c)) = g.quadratic() {
        let at_e = if e.is_finite() { Some(g.value(e)?) } else { None };
        if let Some(ge) = at_e {
            if ge <= 0.0 {
                return Ok(e);
            }
        }
        let largest = if a > 0.0 {
            quadratic_roots(a, b, c).map(|(_, r2)| r2)
        } else if b > 0.0 {
            Some(-c / b)
        } else if b < 0.0 {
            // decreasing line: nonpositive on a right half-line
            return Ok(if e.is_finite() { f64::NEG_INFINITY } else { f64::INFINITY });
        } else if c <= 0.0 {
            return Ok(e);
        } else {
            return Ok(f64::NEG_INFINITY);
        };
        return Ok(match largest {
            Some(r) if r <= e => r,
            // g(e) > 0 with e below the roots: g is positive on all of D_X
            _ => f64::NEG_INFINITY,
        });
    }

    // Jump branching mechanisms always have a finite endpoint.
    let ge = g.value(e)?;
    if ge <= 0.0 {
        return Ok(e);
    }
    if g.derivative(e)? <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut width = 1.0;
    let mut left = e - width;
    loop {
        if g.value(left)? <= 0.0 {
            break;
        }
        if g.derivative(left)? <= 0.0 {
            // the minimum of g lies in (left, e); g' is nondecreasing, so bisect on its sign
            let (mut lo, mut hi) = (left, e);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g.value(mid)? <= 0.0 {
                    return bisect(&g, mid, e, true);
                }
                if g.derivative(mid)? <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(f64::NEG_INFINITY);
        }
        width *= 2.0;
        left = e - width;
        if width > 1e300 {
            return Ok(f64::NEG_INFINITY);
        }
    }
    bisect(&g, left, e, true)
}

/// Explosion time of `E[exp(u1 X_t + u2 Y_t + u3 Z_t)]`.
pub fn lifetime(model: &CbitclModel, u1: f64, u2: f64, u3: f64) -> Result<LifetimeResult> {
    model.check_x(u1)?;
    model.check_z(u3)?;
    if !u2.is_finite() {
        return Err(CbitclError::Domain("u2 must be finite".into()));
    }
    if !model.satisfies_lipschitz_assumption() {
        return Err(CbitclError::Precondition(
            "the branching measure has no first moment at the D_X endpoint".into(),
        ));
    }
    let chi = chi(model, u2, u3)?;
    if u1 <= chi {
        return Ok(LifetimeResult { value: f64::INFINITY, classification: LifetimeClass::BelowChi, chi });
    }
    let g = Drift::new(model, u2, u3)?;
    let e = model.domain_info().x_upper;
    let value = if e.is_finite() {
        if u1 == e {
            0.0
        } else {
            // x = u1 + (e - u1) s^2 flattens the integrand where g is small near u1
            let w = e - u1;
            integrate_with(
                |s| {
                    let x = (u1 + w * s * s).min(e);
                    Ok(2.0 * w * s / g.value(x)?)
                },
                0.0,
                1.0,
                0.0,
                1e-9,
            )?
            .value
        }
    } else {
        let (a, _, _) = g.quadratic().expect("infinite D_X endpoint implies a quadratic mechanism");
        if a == 0.0 {
            // linear g, positive on [u1, inf): the integral of 1/g diverges logarithmically
            f64::INFINITY
        } else {
            integrate_with(
                |s| {
                    let r = 1.0 - s;
                    let x = u1 + s / r;
                    Ok(1.0 / (g.value(x)? * r * r))
                },
                0.0,
                1.0,
                0.0,
                1e-9,
            )?
            .value
        }
    };
    Ok(LifetimeResult { value, classification: LifetimeClass::AboveChi, chi })
}

/// Whether the lifetime is infinite for every `u1 in D_X`, i.e. `g(psi ∧ phi) <= 0`.
pub fn moment_domain_full(model: &CbitclModel, u2: f64, u3: f64) -> Result<bool> {
    let d = model.domain_info();
    if d.psi.is_finite() && d.psi <= d.phi && !d.x_upper_closed {
        return Err(CbitclError::Precondition(
            "the immigration measure has no exponential moment at its domain endpoint".into(),
        ));
    }
    let g = Drift::new(model, u2, u3)?;
    if d.x_upper.is_finite() {
        return Ok(g.value(d.x_upper)? <= 0.0);
    }
    let (a, b, c) = g.quadratic().expect("infinite D_X endpoint implies a quadratic mechanism");
    // limit of g at +inf
    Ok(if a > 0.0 {
        false
    } else if b != 0.0 {
        b < 0.0
    } else {
        c <= 0.0
    })
}

/// Long-run limit `xi(u)` of `V(t, 0, 0, u)` and the growth rate `Psi(xi(u))`.
pub fn xi_asymptotic(model: &CbitclModel, u: f64) -> Result<AsymptoticResult> {
    if !(model.branching.b > 0.0) {
        return Err(CbitclError::Precondition("the long-run limit requires b_X > 0".into()));
    }
    model.check_z(u)?;
    let c = chi(model, 0.0, u)?;
    if !(c >= 0.0) {
        return Err(CbitclError::NotInX(u));
    }
    let xi_u: f64 = model.xi(u)?;
    if xi_u == 0.0 {
        return Ok(AsymptoticResult { xi: 0.0, psi_xi: 0.0 });
    }
    let g = Drift::new(model, 0.0, u)?;
    let root = if let Some((a, b, cc)) = g.quadratic() {
        if a > 0.0 {
            let (r1, _) = quadratic_roots(a, b, cc).expect("chi >= 0 implies a real root");
            r1
        } else {
            -cc / b
        }
    } else {
        // g <= 0 at chi; walk left until g > 0, which b_X > 0 guarantees
        let mut width = 1.0;
        let mut left = c - width;
        while g.value(left)? <= 0.0 {
            width *= 2.0;
            left = c - width;
            if width > 1e300 {
                return Err(CbitclError::Nonconvergence("no bracket for xi(u)".into()));
            }
        }
        bisect(&g, left, c, false)?
    };
    Ok(AsymptoticResult { xi: root, psi_xi: model.psi(root)? })
}

/// Lee's slope function `2 - 4 (sqrt(x^2 + x) - x)` of a critical moment exponent.
pub fn lee_beta(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    // sqrt(x^2 + x) - x = x / (sqrt(x^2 + x) + x), stable for large x
    let d = if x == 0.0 { 0.0 } else { x / ((x * x + x).sqrt() + x) };
    2.0 - 4.0 * d
}

/// Largest `p` (searching away from the finite point `start` in direction `dir`) such that the
/// indicator `finite(p)` holds; `inf` if it holds up to `cap`.
fn critical_exponent<F: Fn(f64) -> Result<bool>>(finite: F, start: f64, dir: f64) -> Result<f64> {
    const CAP: f64 = 1e6;
    let mut step = 0.5;
    let mut good = start;
    let bad;
    loop {
        let p = start + dir * step;
        if finite(p)? {
            good = p;
            if step >= CAP {
                return Ok(f64::INFINITY);
            }
            step *= 2.0;
        } else {
            bad = p;
            break;
        }
    }
    let (mut a, mut b) = (good, bad);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        if finite(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

/// Limiting implied-variance slopes `limsup sigma^2(T, k) / |k|` as `k -> -inf` and `k -> +inf`
/// for the price `log S = lambda Z + zeta (X - X0) - K`.
pub fn wing_slopes(model: &CbitclModel, zeta: f64, lambda: f64, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(CbitclError::Domain("maturity must be positive".into()));
    }
    let spec = crate::measure::EsscherSpec::new(model, zeta, lambda)?;
    let consts = spec.constants(model)?;
    let d = model.domain_info();
    let finite = |p: f64| -> Result<bool> {
        let (u1, u2, u3) = (p * zeta, -p * consts.c, p * lambda);
        if !d.contains_x(u1) || !d.contains_z(u3) {
            return Ok(false);
        }
        Ok(lifetime(model, u1, u2, u3)?.value > t)
    };
    let p_plus = critical_exponent(finite, 1.0, 1.0)?;
    let q_minus = -critical_exponent(finite, 0.0, -1.0)?;
    let snap = |x: f64| if x < 1e-9 { 0.0 } else { x };
    let right = lee_beta(snap(p_plus - 1.0)) / t;
    let left = lee_beta(snap(q_minus)) / t;
    Ok((left, right))
}
