//! Immigration, branching and noise exponents of a CBITCL model.

use crate::error::{CbitclError, Result};
use crate::levy::{JumpRole, LevyMeasureSpec};
use crate::scalar::Scalar;
use serde::Serialize;

/// `Psi(u) = beta u + int (e^{ux} - 1) nu(dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImmigrationMechanism {
    pub beta: f64,
    pub nu: LevyMeasureSpec,
}

/// `Phi(u) = -b u + (sigma u)^2 / 2 + int (e^{ux} - 1 - ux) pi(dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchingMechanism {
    pub b: f64,
    pub sigma: f64,
    pub pi: LevyMeasureSpec,
}

/// `Xi(u) = b u + (sigma u)^2 / 2 + int (e^{uz} - 1 - uz) gamma(dz)`.
///
/// `b` is the drift of the fully compensated Lévy triplet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseExponent {
    pub b: f64,
    pub sigma: f64,
    pub gamma: LevyMeasureSpec,
}

/// `CBITCL(X0, Psi, Phi, Xi, rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CbitclModel {
    pub x0: f64,
    pub immigration: ImmigrationMechanism,
    pub branching: BranchingMechanism,
    pub noise: NoiseExponent,
    pub rho: f64,
}

/// Effective domains. An infinite endpoint is reported as open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainInfo {
    /// `sup{x >= 0 : Psi(x) < inf}`
    pub psi: f64,
    /// `sup{x >= 0 : Phi(x) < inf}`
    pub phi: f64,
    /// Upper endpoint of `D_X`, i.e. `min(psi, phi)`.
    pub x_upper: f64,
    pub x_upper_closed: bool,
    pub z_lower: f64,
    pub z_lower_closed: bool,
    pub z_upper: f64,
    pub z_upper_closed: bool,
}

impl DomainInfo {
    pub fn contains_x(&self, x: f64) -> bool {
        x < self.x_upper || (self.x_upper_closed && x == self.x_upper)
    }

    pub fn contains_z(&self, z: f64) -> bool {
        let lo = z > self.z_lower || (self.z_lower_closed && z == self.z_lower);
        let hi = z < self.z_upper || (self.z_upper_closed && z == self.z_upper);
        lo && hi
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CbitclError::InvalidParameter(format!("{name} must be finite")))
    }
}

impl ImmigrationMechanism {
    pub fn validate(&self) -> Result<()> {
        finite("immigration.beta", self.beta)?;
        if self.beta < 0.0 {
            return Err(CbitclError::InvalidParameter("immigration.beta must be nonnegative".into()));
        }
        self.nu.validate(JumpRole::Immigration)
    }

    pub fn eval<S: Scalar>(&self, u: S) -> Result<S> {
        Ok(u * self.beta + self.nu.subordinator_exponent(u)?)
    }

    /// `Psi'(u) = beta + int x e^{ux} nu(dx)` for real `u` in the domain.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        let jump = match self.nu {
            LevyMeasureSpec::None => 0.0,
            LevyMeasureSpec::StablePositive { alpha, scale, c } => {
                if u >= 0.0 {
                    return Err(CbitclError::EndpointDerivativeUnavailable(u));
                }
                -scale * alpha * c * crate::levy::gamma_neg(alpha) * (-scale * u).powf(alpha - 1.0)
            }
            LevyMeasureSpec::TemperedStablePositive { alpha, theta, c } => {
                if u >= theta {
                    return Err(CbitclError::EndpointDerivativeUnavailable(u));
                }
                -alpha * c * crate::levy::gamma_neg(alpha) * (theta - u).powf(alpha - 1.0)
            }
            LevyMeasureSpec::Cgmy { .. } => unreachable!("validated immigration measure"),
        };
        Ok(self.beta + jump)
    }

    pub fn domain_upper(&self) -> f64 {
        self.nu.exp_moment_bounds().1
    }
}

impl BranchingMechanism {
    pub fn validate(&self) -> Result<()> {
        finite("branching.b", self.b)?;
        finite("branching.sigma", self.sigma)?;
        if self.sigma < 0.0 {
            return Err(CbitclError::InvalidParameter("branching.sigma must be nonnegative".into()));
        }
        self.pi.validate(JumpRole::Branching)
    }

    pub fn eval<S: Scalar>(&self, u: S) -> Result<S> {
        let s2 = self.sigma * self.sigma;
        Ok(u * (-self.b) + u * u * (0.5 * s2) + self.pi.compensated_exponent(u)?)
    }

    /// `Phi'(u) = -b + sigma^2 u + int x (e^{ux} - 1) pi(dx)`.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        let upper = self.domain_upper();
        if u > upper {
            return Err(CbitclError::Domain(format!("u = {u} above the branching domain endpoint {upper}")));
        }
        if u == upper && !self.pi.first_moment_at_upper_endpoint_finite() {
            return Err(CbitclError::EndpointDerivativeUnavailable(u));
        }
        Ok(-self.b + self.sigma * self.sigma * u + self.pi.compensated_exponent_derivative(u)?)
    }

    pub fn domain_upper(&self) -> f64 {
        self.pi.exp_moment_bounds().1
    }

    /// Whether `Phi` is the pure quadratic `-b u + sigma^2 u^2 / 2`.
    pub fn is_quadratic(&self) -> bool {
        self.pi.is_none()
    }
}

impl NoiseExponent {
    pub fn validate(&self) -> Result<()> {
        finite("noise.b", self.b)?;
        finite("noise.sigma", self.sigma)?;
        if self.sigma < 0.0 {
            return Err(CbitclError::InvalidParameter("noise.sigma must be nonnegative".into()));
        }
        self.gamma.validate(JumpRole::Noise)
    }

    pub fn eval<S: Scalar>(&self, u: S) -> Result<S> {
        let s2 = self.sigma * self.sigma;
        Ok(u * self.b + u * u * (0.5 * s2) + self.gamma.compensated_exponent(u)?)
    }

    pub fn derivative(&self, u: f64) -> Result<f64> {
        Ok(self.b + self.sigma * self.sigma * u + self.gamma.compensated_exponent_derivative(u)?)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.gamma.exp_moment_bounds()
    }
}

impl CbitclModel {
    /// Builds and validates a model.
    pub fn new(
        x0: f64,
        immigration: ImmigrationMechanism,
        branching: BranchingMechanism,
        noise: NoiseExponent,
        rho: f64,
    ) -> Result<Self> {
        let m = CbitclModel { x0, immigration, branching, noise, rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        finite("initial_state.x0", self.x0)?;
        if self.x0 < 0.0 {
            return Err(CbitclError::InvalidParameter("initial_state.x0 must be nonnegative".into()));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(CbitclError::InvalidParameter("correlation.rho must lie in [-1, 1]".into()));
        }
        self.immigration.validate()?;
        self.branching.validate()?;
        self.noise.validate()
    }

    pub fn psi<S: Scalar>(&self, u: S) -> Result<S> {
        self.immigration.eval(u)
    }

    pub fn phi<S: Scalar>(&self, u: S) -> Result<S> {
        self.branching.eval(u)
    }

    pub fn phi_prime(&self, u: f64) -> Result<f64> {
        self.branching.derivative(u)
    }

    pub fn xi<S: Scalar>(&self, u: S) -> Result<S> {
        self.noise.eval(u)
    }

    /// `rho sigma_X sigma_Z`, the coefficient of the cross term.
    pub fn cross(&self) -> f64 {
        self.rho * self.branching.sigma * self.noise.sigma
    }

    /// `Lambda(u1, u2) = Phi(u1) + rho sigma_X sigma_Z u1 u2 + Xi(u2)`.
    pub fn lambda<S: Scalar>(&self, u1: S, u2: S) -> Result<S> {
        Ok(self.phi(u1)? + u1 * u2 * self.cross() + self.xi(u2)?)
    }

    pub fn domain_info(&self) -> DomainInfo {
        let psi = self.immigration.domain_upper();
        let phi = self.branching.domain_upper();
        let x_upper = psi.min(phi);
        let (z_lower, z_upper) = self.noise.domain();
        // every supported family converges at its finite endpoints
        DomainInfo {
            psi,
            phi,
            x_upper,
            x_upper_closed: x_upper.is_finite(),
            z_lower,
            z_lower_closed: z_lower.is_finite(),
            z_upper,
            z_upper_closed: z_upper.is_finite(),
        }
    }

    /// `psi ∧ phi = inf`, or `int_1^inf x e^{(psi ∧ phi) x} pi(dx) < inf`.
    pub fn satisfies_lipschitz_assumption(&self) -> bool {
        let d = self.domain_info();
        if d.x_upper.is_infinite() {
            return true;
        }
        match self.branching.pi {
            LevyMeasureSpec::None => true,
            LevyMeasureSpec::StablePositive { alpha, .. } => d.x_upper < 0.0 || alpha > 1.0,
            LevyMeasureSpec::TemperedStablePositive { alpha, theta, .. } => d.x_upper < theta || alpha > 1.0,
            LevyMeasureSpec::Cgmy { .. } => false,
        }
    }

    pub fn check_x(&self, x: f64) -> Result<()> {
        let d = self.domain_info();
        if d.contains_x(x) {
            Ok(())
        } else {
            Err(CbitclError::Domain(format!("{x} is outside D_X = (-inf, {}]", d.x_upper)))
        }
    }

    pub fn check_z(&self, z: f64) -> Result<()> {
        let d = self.domain_info();
        if d.contains_z(z) {
            Ok(())
        } else {
            Err(CbitclError::Domain(format!("{z} is outside D_Z = [{}, {}]", d.z_lower, d.z_upper)))
        }
    }
}
