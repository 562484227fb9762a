//! Extended Riccati system
//!
//! ```text
//! dV/dt = Phi(V) + u2 + rho sigma_X sigma_Z u3 V + Xi(u3),   V(0) = u1
//! dU/dt = Psi(V),                                             U(0) = 0
//! ```
//!
//! integrated with Dormand–Prince 5(4) and a PI step-size controller. The transform
//! `E[exp(u1 X_T + u2 Y_T + u3 Z_T)] = exp(U(T) + V(T) x + u2 y + u3 z)`.

use crate::error::{CbitclError, Result};
use crate::mechanisms::CbitclModel;
use crate::moments;
use crate::scalar::Scalar;
use num_complex::Complex64;

/// Argument triple `(u1, u2, u3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiArgs<S> {
    pub u1: S,
    pub u2: S,
    pub u3: S,
}

impl<S: Scalar> RiccatiArgs<S> {
    pub fn new(u1: S, u2: S, u3: S) -> Self {
        RiccatiArgs { u1, u2, u3 }
    }

    /// Real parts, the triple governing finiteness of the transform.
    pub fn real_parts(&self) -> RiccatiArgs<f64> {
        RiccatiArgs { u1: self.u1.re(), u2: self.u2.re(), u3: self.u3.re() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// `|V|` above which a diverging solution is declared blown up.
    pub blowup_threshold: f64,
    /// Stage values whose real part exceeds the `D_X` endpoint by less than this
    /// (relative to `max(1, |endpoint|)`) are projected back onto the endpoint.
    pub domain_margin: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rtol: 1e-10,
            atol: 1e-14,
            max_step: f64::INFINITY,
            blowup_threshold: 1e8,
            domain_margin: 1e-10,
            max_steps: 500_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(CbitclError::Config("solver tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(CbitclError::Config("max_step must be positive".into()));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(CbitclError::Config("blow-up threshold must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    CompletedHorizon,
    /// `|V|` crossed the blow-up threshold while diverging; the lifetime lies in the last step.
    BlewUp { at: f64 },
    /// `Re(V)` reached the upper endpoint of `D_X` with a nonzero outward velocity.
    LeftDomain { at: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution<S> {
    pub args: RiccatiArgs<S>,
    pub times: Vec<f64>,
    pub v: Vec<S>,
    pub u: Vec<S>,
    pub status: SolveStatus,
}

impl<S: Scalar> RiccatiSolution<S> {
    pub fn completed(&self) -> bool {
        self.status == SolveStatus::CompletedHorizon
    }

    /// `(t, V(t), U(t))` at the last recorded time.
    pub fn last(&self) -> (f64, S, S) {
        let n = self.times.len() - 1;
        (self.times[n], self.v[n], self.u[n])
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes c_i are not needed
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy)]
struct Deriv<S> {
    v: S,
    u: S,
}

enum Stage<S> {
    Ok(Deriv<S>, S),
    Exit,
}

struct Rhs<'a, S> {
    model: &'a CbitclModel,
    shift: S,
    slope: S,
    upper: f64,
    tol_upper: f64,
}

impl<S: Scalar> Rhs<'_, S> {
    /// Evaluates the right-hand side at `v`, returning the (possibly projected) state.
    fn eval(&self, v: S) -> Result<Stage<S>> {
        let mut v = v;
        if v.re() > self.upper {
            if v.re() > self.tol_upper {
                return Ok(Stage::Exit);
            }
            v = v.with_re(self.upper);
        }
        let dv = self.model.phi(v)? + self.slope * v + self.shift;
        let du = self.model.psi(v)?;
        Ok(Stage::Ok(Deriv { v: dv, u: du }, v))
    }
}

fn check_args<S: Scalar>(model: &CbitclModel, args: &RiccatiArgs<S>) -> Result<()> {
    model.check_x(args.u1.re())?;
    model.check_z(args.u3.re())?;
    if !args.u2.is_finite() || !args.u1.is_finite() || !args.u3.is_finite() {
        return Err(CbitclError::Domain("Riccati arguments must be finite".into()));
    }
    if !model.satisfies_lipschitz_assumption() {
        return Err(CbitclError::Precondition(
            "the branching measure has no first moment at the D_X endpoint".into(),
        ));
    }
    Ok(())
}

/// Solves the extended Riccati system on `[0, horizon]`, recording every accepted step.
pub fn solve_riccati<S: Scalar>(
    model: &CbitclModel,
    args: RiccatiArgs<S>,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<RiccatiSolution<S>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CbitclError::Domain(format!("horizon must be positive and finite, got {horizon}")));
    }
    integrate(model, args, horizon, None, cfg)
}

/// Solves the system recording values exactly at the given increasing positive `times`.
pub fn solve_riccati_at<S: Scalar>(
    model: &CbitclModel,
    args: RiccatiArgs<S>,
    times: &[f64],
    cfg: &SolverConfig,
) -> Result<RiccatiSolution<S>> {
    if times.is_empty() {
        return Err(CbitclError::Domain("no output times".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev && t.is_finite()) {
            return Err(CbitclError::Domain("output times must be positive, finite and increasing".into()));
        }
        prev = t;
    }
    integrate(model, args, prev, Some(times), cfg)
}

fn integrate<S: Scalar>(
    model: &CbitclModel,
    args: RiccatiArgs<S>,
    horizon: f64,
    outputs: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<RiccatiSolution<S>> {
    cfg.validate()?;
    check_args(model, &args)?;
    let upper = model.domain_info().x_upper;
    let rhs = Rhs {
        model,
        shift: args.u2 + model.xi(args.u3)?,
        slope: args.u3 * model.cross(),
        upper,
        tol_upper: upper + cfg.domain_margin * upper.abs().max(1.0),
    };

    let mut times = vec![0.0];
    let mut vs = vec![args.u1];
    let mut us = vec![S::zero()];
    let mut next_out = 0usize;

    let mut t = 0.0;
    let mut v = args.u1;
    let mut u = S::zero();
    let mut k1 = match rhs.eval(v)? {
        Stage::Ok(d, _) => d,
        Stage::Exit => unreachable!("initial point checked against D_X"),
    };

    let scale0 = 1.0 + v.abs();
    let mut h = (1e-2 * scale0 / (k1.v.abs() + 1e-12)).min(horizon).min(cfg.max_step).max(1e-10);
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    let status = loop {
        if t >= horizon {
            break SolveStatus::CompletedHorizon;
        }
        steps += 1;
        if steps > cfg.max_steps {
            return Err(CbitclError::Nonconvergence(format!("step budget exhausted at t = {t}")));
        }
        let target = match outputs {
            Some(o) => o[next_out],
            None => horizon,
        };
        let mut hh = h.min(cfg.max_step);
        let mut hits_target = false;
        if t + hh >= target {
            hh = target - t;
            hits_target = true;
        }
        let h_min = 1e-12 * t.abs().max(1.0);

        let attempt = dp_step(&rhs, v, u, k1, hh)?;
        let (v_new, u_new, k7, err) = match attempt {
            Some(x) => x,
            None => {
                // a stage left D_X: shrink towards the crossing
                if hh <= h_min {
                    break SolveStatus::LeftDomain { at: t };
                }
                h = 0.5 * hh;
                continue;
            }
        };

        let sc_v = cfg.atol + cfg.rtol * v.abs().max(v_new.abs());
        let sc_u = cfg.atol + cfg.rtol * u.abs().max(u_new.abs());
        let en = ((err.v.abs() / sc_v).powi(2) + (err.u.abs() / sc_u).powi(2)) * 0.5;
        let en = en.sqrt();

        if !en.is_finite() || !v_new.is_finite() {
            if v.abs() > 1e-3 * cfg.blowup_threshold && diverging(v, k1.v) {
                break SolveStatus::BlewUp { at: t };
            }
            if hh <= h_min {
                return Err(CbitclError::Nonconvergence(format!("non-finite state at t = {t}")));
            }
            h = 0.25 * hh;
            continue;
        }

        if en <= 1.0 {
            t = if hits_target { target } else { t + hh };
            v = v_new;
            u = u_new;
            k1 = k7;
            let fac = 0.9 * en.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            err_prev = en.max(1e-4);
            let next = hh * fac.clamp(0.2, 5.0);
            // a clipped step should not shrink the controller's proposal
            h = if hits_target { next.max(h) } else { next };

            match outputs {
                Some(o) => {
                    if hits_target {
                        times.push(t);
                        vs.push(v);
                        us.push(u);
                        next_out += 1;
                        if next_out == o.len() {
                            break SolveStatus::CompletedHorizon;
                        }
                    }
                }
                None => {
                    times.push(t);
                    vs.push(v);
                    us.push(u);
                }
            }
            if v.abs() > cfg.blowup_threshold && diverging(v, k1.v) {
                break SolveStatus::BlewUp { at: t };
            }
            // sitting on the closed endpoint with an outward velocity
            if v.re() >= upper && k1.v.re() > 0.0 {
                break SolveStatus::LeftDomain { at: t };
            }
        } else {
            if hh <= h_min {
                return Err(CbitclError::Nonconvergence(format!("step size underflow at t = {t}")));
            }
            let fac = 0.9 * en.powf(-1.0 / 5.0);
            h = hh * fac.clamp(0.1, 0.9);
        }
    };

    Ok(RiccatiSolution { args, times, v: vs, u: us, status })
}

/// `|V|` is increasing along the flow.
fn diverging<S: Scalar>(v: S, dv: S) -> bool {
    v.re() * dv.re() + v.im() * dv.im() > 0.0
}

type StepOut<S> = Option<(S, S, Deriv<S>, Deriv<S>)>;

fn dp_step<S: Scalar>(rhs: &Rhs<'_, S>, v: S, u: S, k1: Deriv<S>, h: f64) -> Result<StepOut<S>> {
    macro_rules! stage {
        ($x:expr) => {
            match rhs.eval($x)? {
                Stage::Ok(d, _) => d,
                Stage::Exit => return Ok(None),
            }
        };
    }
    let k2 = stage!(v + k1.v * (h * A21));
    let k3 = stage!(v + (k1.v * A31 + k2.v * A32) * h);
    let k4 = stage!(v + (k1.v * A41 + k2.v * A42 + k3.v * A43) * h);
    let k5 = stage!(v + (k1.v * A51 + k2.v * A52 + k3.v * A53 + k4.v * A54) * h);
    let k6 = stage!(v + (k1.v * A61 + k2.v * A62 + k3.v * A63 + k4.v * A64 + k5.v * A65) * h);
    let v_new = v + (k1.v * B1 + k3.v * B3 + k4.v * B4 + k5.v * B5 + k6.v * B6) * h;
    let u_new = u + (k1.u * B1 + k3.u * B3 + k4.u * B4 + k5.u * B5 + k6.u * B6) * h;
    let (k7, v_new) = match rhs.eval(v_new)? {
        Stage::Ok(d, projected) => (d, projected),
        Stage::Exit => return Ok(None),
    };
    let err = Deriv {
        v: (k1.v * E1 + k3.v * E3 + k4.v * E4 + k5.v * E5 + k6.v * E6 + k7.v * E7) * h,
        u: (k1.u * E1 + k3.u * E3 + k4.u * E4 + k5.u * E5 + k6.u * E6 + k7.u * E7) * h,
    };
    Ok(Some((v_new, u_new, k7, err)))
}

/// `E[exp(u1 X_T + u2 Y_T + u3 Z_T) | (X, Y, Z)_0 = state]`.
///
/// Real parts of the arguments must have a lifetime strictly above `t`.
pub fn transform<S: Scalar>(
    model: &CbitclModel,
    t: f64,
    args: RiccatiArgs<S>,
    state: (f64, f64, f64),
    cfg: &SolverConfig,
) -> Result<S> {
    let re = args.real_parts();
    let life = moments::lifetime(model, re.u1, re.u2, re.u3)?;
    if t >= life.value {
        return Err(CbitclError::LifetimeExceeded { horizon: t, lifetime: life.value });
    }
    transform_unchecked(model, t, args, state, cfg)
}

/// [`transform`] without the lifetime check; a solver stop before `t` is still an error.
pub fn transform_unchecked<S: Scalar>(
    model: &CbitclModel,
    t: f64,
    args: RiccatiArgs<S>,
    state: (f64, f64, f64),
    cfg: &SolverConfig,
) -> Result<S> {
    let (x, y, z) = state;
    if x < 0.0 || y < 0.0 {
        return Err(CbitclError::Domain("state must satisfy x >= 0 and y >= 0".into()));
    }
    let sol = solve_riccati_at(model, args, &[t], cfg)?;
    match sol.status {
        SolveStatus::CompletedHorizon => {
            let (_, v, u) = sol.last();
            Ok((u + v * x + args.u2 * y + args.u3 * z).exp())
        }
        SolveStatus::BlewUp { at } | SolveStatus::LeftDomain { at } => {
            Err(CbitclError::LifetimeExceeded { horizon: t, lifetime: at })
        }
    }
}

/// `E[exp(w1 X_T + w2 Y_T + w3 Z_T)]` from the initial state `(X0, 0, 0)`.
pub fn char_fn_joint(
    model: &CbitclModel,
    t: f64,
    w1: Complex64,
    w2: Complex64,
    w3: Complex64,
    cfg: &SolverConfig,
) -> Result<Complex64> {
    transform(model, t, RiccatiArgs::new(w1, w2, w3), (model.x0, 0.0, 0.0), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyMeasureSpec;
    use crate::mechanisms::{BranchingMechanism, ImmigrationMechanism, NoiseExponent};

    fn cir_model(beta: f64, b: f64, sigma: f64) -> CbitclModel {
        CbitclModel::new(
            0.04,
            ImmigrationMechanism { beta, nu: LevyMeasureSpec::None },
            BranchingMechanism { b, sigma, pi: LevyMeasureSpec::None },
            NoiseExponent { b: -0.5, sigma: 1.0, gamma: LevyMeasureSpec::None },
            -0.5,
        )
        .unwrap()
    }

    fn cir_v(u1: f64, b: f64, s: f64, t: f64) -> f64 {
        let e = (-b * t).exp();
        u1 * e / (1.0 - u1 * (s * s / (2.0 * b)) * (1.0 - e))
    }

    #[test]
    fn zero_arguments_give_zero_solution() {
        let m = cir_model(0.3, 1.0, 0.5);
        let sol = solve_riccati(&m, RiccatiArgs::new(0.0, 0.0, 0.0), 3.0, &SolverConfig::default()).unwrap();
        assert!(sol.v.iter().all(|&v| v == 0.0));
        assert!(sol.u.iter().all(|&u| u == 0.0));
        assert_eq!(sol.status, SolveStatus::CompletedHorizon);
    }

    #[test]
    fn cir_matches_closed_form() {
        let m = cir_model(0.3, 1.0, 0.5);
        let times: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
        let sol = solve_riccati_at(&m, RiccatiArgs::new(-1.0, 0.0, 0.0), &times, &SolverConfig::default()).unwrap();
        for (k, &t) in sol.times.iter().enumerate().skip(1) {
            let exact = cir_v(-1.0, 1.0, 0.5, t);
            assert!((sol.v[k] - exact).abs() <= 1e-8 * exact.abs(), "t={t}");
        }
        assert_eq!(sol.times.len(), 21);
    }

    #[test]
    fn blow_up_detected_near_closed_form_lifetime() {
        let (b, s) = (1.0, 0.5);
        let m = cir_model(0.3, b, s);
        let u1 = 10.0;
        let exact = (1.0 / b) * (s * s * u1 / (s * s * u1 - 2.0 * b)).ln();
        let sol = solve_riccati(&m, RiccatiArgs::new(u1, 0.0, 0.0), 10.0, &SolverConfig::default()).unwrap();
        match sol.status {
            SolveStatus::BlewUp { at } => assert!((at - exact).abs() < 1e-6 * exact),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn complex_conjugate_symmetry() {
        let m = cir_model(0.3, 1.0, 0.5);
        let cfg = SolverConfig::default();
        let w = Complex64::new(0.0, 0.7);
        let a = char_fn_joint(&m, 1.0, w, w * 0.3, w * 1.5, &cfg).unwrap();
        let b = char_fn_joint(&m, 1.0, -w, -w * 0.3, -w * 1.5, &cfg).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }
}
