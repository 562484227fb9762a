//! Esscher-type changes of probability `dP'/dP = exp(W_T - K_T)` with
//! `W = zeta (X - X0) + lambda Z` and `K` the exponential compensator of `W`.

use crate::error::{CbitclError, Result};
use crate::levy::LevyMeasureSpec;
use crate::mechanisms::{BranchingMechanism, CbitclModel, ImmigrationMechanism, NoiseExponent};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EsscherSpec {
    pub zeta: f64,
    pub lambda: f64,
}

/// Coefficients of `K_t = t Psi(zeta) + Y_t c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompensatorConstants {
    pub psi_zeta: f64,
    /// `Phi(zeta) + zeta lambda rho sigma_X sigma_Z + Xi(lambda)`
    pub c: f64,
}

impl EsscherSpec {
    /// Validates `zeta in D_X` and `lambda in D_Z` for the model.
    pub fn new(model: &CbitclModel, zeta: f64, lambda: f64) -> Result<Self> {
        model.check_x(zeta)?;
        model.check_z(lambda)?;
        Ok(EsscherSpec { zeta, lambda })
    }

    /// Recomputed from the model on every call.
    pub fn constants(&self, model: &CbitclModel) -> Result<CompensatorConstants> {
        let psi_zeta = model.psi(self.zeta)?;
        let c = model.phi(self.zeta)? + self.zeta * self.lambda * model.cross() + model.xi(self.lambda)?;
        Ok(CompensatorConstants { psi_zeta, c })
    }
}

/// `K_t = t Psi(zeta) + y (Phi(zeta) + zeta lambda rho sigma_X sigma_Z + Xi(lambda))` at `Y_t = y`.
pub fn exponential_compensator(model: &CbitclModel, spec: &EsscherSpec, t: f64, y: f64) -> Result<f64> {
    let k = spec.constants(model)?;
    Ok(t * k.psi_zeta + y * k.c)
}

/// `e^{zeta x} mu(dx)` for a one-sided family.
fn tilt_positive(mu: LevyMeasureSpec, zeta: f64, section: &str) -> Result<LevyMeasureSpec> {
    Ok(match mu {
        LevyMeasureSpec::None => LevyMeasureSpec::None,
        LevyMeasureSpec::StablePositive { alpha, scale, c } => {
            if zeta == 0.0 {
                mu
            } else if zeta < 0.0 {
                LevyMeasureSpec::TemperedStablePositive { alpha, theta: -zeta, c: c * scale.powf(alpha) }
            } else {
                return Err(CbitclError::FamilyClosure(format!(
                    "{section}: tilting a stable measure by zeta = {zeta} > 0 is not a Lévy measure"
                )));
            }
        }
        LevyMeasureSpec::TemperedStablePositive { alpha, theta, c } => {
            if zeta == 0.0 {
                mu
            } else if zeta < theta {
                LevyMeasureSpec::TemperedStablePositive { alpha, theta: theta - zeta, c }
            } else if zeta == theta {
                LevyMeasureSpec::StablePositive { alpha, scale: 1.0, c }
            } else {
                return Err(CbitclError::FamilyClosure(format!(
                    "{section}: zeta = {zeta} exceeds the tempering theta = {theta}"
                )));
            }
        }
        LevyMeasureSpec::Cgmy { .. } => {
            return Err(CbitclError::FamilyClosure(format!("{section}: unexpected cgmy measure")));
        }
    })
}

fn tilt_cgmy(mu: LevyMeasureSpec, lambda: f64) -> Result<LevyMeasureSpec> {
    Ok(match mu {
        LevyMeasureSpec::Cgmy { c, g, m, y } => {
            if lambda == 0.0 {
                mu
            } else if -g < lambda && lambda < m {
                LevyMeasureSpec::Cgmy { c, g: g + lambda, m: m - lambda, y }
            } else {
                return Err(CbitclError::FamilyClosure(format!(
                    "noise: lambda = {lambda} must lie strictly inside (-G, M) = ({}, {m})",
                    -g
                )));
            }
        }
        other => other,
    })
}

/// Parameters of the model under `P'`.
pub fn esscher_transform(model: &CbitclModel, spec: &EsscherSpec) -> Result<CbitclModel> {
    if !model.satisfies_lipschitz_assumption() {
        return Err(CbitclError::Precondition(
            "the branching measure has no first moment at the D_X endpoint".into(),
        ));
    }
    model.check_x(spec.zeta)?;
    model.check_z(spec.lambda)?;
    let (zeta, lambda) = (spec.zeta, spec.lambda);
    let cross = model.cross();
    let br = &model.branching;
    let nz = &model.noise;

    let nu = tilt_positive(model.immigration.nu, zeta, "immigration")?;
    let pi = tilt_positive(br.pi, zeta, "branching")?;
    let gamma = tilt_cgmy(nz.gamma, lambda)?;

    let b_x = if zeta == 0.0 && lambda == 0.0 {
        br.b
    } else {
        br.b - zeta * br.sigma * br.sigma - lambda * cross - br.pi.compensated_exponent_derivative(zeta)?
    };
    let b_z = if zeta == 0.0 && lambda == 0.0 {
        nz.b
    } else {
        nz.b + zeta * cross + lambda * nz.sigma * nz.sigma + nz.gamma.compensated_exponent_derivative(lambda)?
    };

    CbitclModel::new(
        model.x0,
        ImmigrationMechanism { beta: model.immigration.beta, nu },
        BranchingMechanism { b: b_x, sigma: br.sigma, pi },
        NoiseExponent { b: b_z, sigma: nz.sigma, gamma },
        model.rho,
    )
}

/// `exp(Z)` is a martingale iff `1 in D_Z` and `Xi(1) = 0`.
///
/// With a jump component `Xi(1)` is a rounded closed form, and `|Xi(1)| < 1e-14` is accepted.
pub fn is_exp_martingale(model: &CbitclModel) -> bool {
    if !model.domain_info().contains_z(1.0) {
        return false;
    }
    let Ok(x) = model.xi(1.0_f64) else { return false };
    if model.noise.gamma.is_none() {
        x == 0.0
    } else {
        let ok = x.abs() < 1e-14;
        if ok && x != 0.0 {
            log::warn!("Xi(1) = {x:e} accepted as zero within 1e-14");
        }
        ok
    }
}
