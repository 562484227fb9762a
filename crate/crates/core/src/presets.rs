//! Ready-made models used by the examples, the CLI and the tests.

use crate::levy::{default_normalization, LevyMeasureSpec};
use crate::mechanisms::{BranchingMechanism, CbitclModel, ImmigrationMechanism, NoiseExponent};

/// Alpha-CIR variance driving a time-changed geometric Brownian motion
/// (`Xi(u) = u (u - 1) / 2`, so `exp(Z)` is a martingale).
pub fn alpha_cir() -> CbitclModel {
    let alpha = 1.5;
    CbitclModel {
        x0: 0.04,
        immigration: ImmigrationMechanism { beta: 0.08, nu: LevyMeasureSpec::None },
        branching: BranchingMechanism {
            b: 2.0,
            sigma: 0.3,
            pi: LevyMeasureSpec::StablePositive { alpha, scale: 0.2, c: default_normalization(alpha) },
        },
        noise: NoiseExponent { b: -0.5, sigma: 1.0, gamma: LevyMeasureSpec::None },
        rho: -0.5,
    }
}

/// Tempered alpha-stable CBI clock with a symmetric CGMY noise. Satisfies both
/// `Phi(theta) <= 0` and the bound on `M` that makes `chi(u) = theta` on `[-M, M]`.
pub fn tempered_cgmy() -> CbitclModel {
    let alpha = 1.5;
    let y = 1.5;
    CbitclModel {
        x0: 0.2,
        immigration: ImmigrationMechanism { beta: 0.2, nu: LevyMeasureSpec::None },
        branching: BranchingMechanism {
            b: 2.5,
            sigma: 0.4,
            pi: LevyMeasureSpec::TemperedStablePositive { alpha, theta: 2.0, c: default_normalization(alpha) },
        },
        noise: NoiseExponent {
            b: 0.0,
            sigma: 0.0,
            gamma: LevyMeasureSpec::Cgmy { c: default_normalization(y), g: 2.0, m: 2.0, y },
        },
        rho: 0.0,
    }
}

/// Deterministic clock `X = x0`: `Z_T` is Gaussian with variance `x0 T`.
pub fn black_scholes(variance: f64) -> CbitclModel {
    CbitclModel {
        x0: variance,
        immigration: ImmigrationMechanism { beta: 0.0, nu: LevyMeasureSpec::None },
        branching: BranchingMechanism { b: 0.0, sigma: 0.0, pi: LevyMeasureSpec::None },
        noise: NoiseExponent { b: -0.5, sigma: 1.0, gamma: LevyMeasureSpec::None },
        rho: 0.0,
    }
}

/// Heston variance `dv = kappa (theta - v) dt + xi sqrt(v) dW` with log-price noise.
pub fn heston(v0: f64, kappa: f64, theta: f64, xi: f64, rho: f64) -> CbitclModel {
    CbitclModel {
        x0: v0,
        immigration: ImmigrationMechanism { beta: kappa * theta, nu: LevyMeasureSpec::None },
        branching: BranchingMechanism { b: kappa, sigma: xi, pi: LevyMeasureSpec::None },
        noise: NoiseExponent { b: -0.5, sigma: 1.0, gamma: LevyMeasureSpec::None },
        rho,
    }
}

/// Looks a preset up by name.
pub fn by_name(name: &str) -> Option<CbitclModel> {
    match name {
        "alpha-cir" => Some(alpha_cir()),
        "tempered-cgmy" => Some(tempered_cgmy()),
        "black-scholes" => Some(black_scholes(0.04)),
        "heston" => Some(heston(0.04, 1.5, 0.04, 0.5, -0.7)),
        _ => None,
    }
}

pub const NAMES: [&str; 4] = ["alpha-cir", "tempered-cgmy", "black-scholes", "heston"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for n in NAMES {
            by_name(n).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn tempered_preset_moment_conditions() {
        let m = tempered_cgmy();
        let phi_theta: f64 = m.phi(2.0).unwrap();
        assert!(phi_theta <= 0.0);
        let (y, mm) = (1.5f64, 2.0f64);
        let bound = (phi_theta / (2.0 * (1.0 - 2f64.powf(y - 1.0)))).powf(1.0 / y);
        assert!(mm <= bound);
    }
}
