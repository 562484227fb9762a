#![allow(dead_code)]

use cbitcl::levy::default_normalization;
use cbitcl::*;
use proptest::prelude::*;

pub fn immigration_measure() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        Just(LevyMeasureSpec::None),
        (0.2..0.8f64, 0.1..1.0f64).prop_map(|(alpha, scale)| LevyMeasureSpec::StablePositive {
            alpha,
            scale,
            c: default_normalization(alpha)
        }),
        (0.2..0.8f64, 0.5..3.0f64).prop_map(|(alpha, theta)| LevyMeasureSpec::TemperedStablePositive {
            alpha,
            theta,
            c: default_normalization(alpha)
        }),
    ]
}

pub fn branching_measure() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        Just(LevyMeasureSpec::None),
        (1.1..1.9f64, 0.1..1.0f64).prop_map(|(alpha, scale)| LevyMeasureSpec::StablePositive {
            alpha,
            scale,
            c: default_normalization(alpha)
        }),
        (1.1..1.9f64, 0.5..3.0f64).prop_map(|(alpha, theta)| LevyMeasureSpec::TemperedStablePositive {
            alpha,
            theta,
            c: default_normalization(alpha)
        }),
    ]
}

pub fn noise_measure() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        Just(LevyMeasureSpec::None),
        (1.1..1.9f64, 0.5..3.0f64, 0.5..3.0f64).prop_map(|(y, g, m)| LevyMeasureSpec::Cgmy {
            c: default_normalization(y),
            g,
            m,
            y
        }),
    ]
}

prop_compose! {
    pub fn model()(
        x0 in 0.01..1.0f64,
        beta in 0.0..1.0f64,
        nu in immigration_measure(),
        b in 0.1..3.0f64,
        sigma in 0.0..1.0f64,
        pi in branching_measure(),
        b_z in -1.0..1.0f64,
        sigma_z in 0.0..1.0f64,
        gamma in noise_measure(),
        rho in -0.9..0.9f64,
    ) -> CbitclModel {
        CbitclModel::new(
            x0,
            ImmigrationMechanism { beta, nu },
            BranchingMechanism { b, sigma, pi },
            NoiseExponent { b: b_z, sigma: sigma_z, gamma },
            rho,
        )
        .unwrap()
    }
}

/// Finite interval inside `[lo, hi]`, clipped to `[-cap, cap]`.
pub fn clip(lo: f64, hi: f64, cap: f64) -> (f64, f64) {
    (lo.max(-cap), hi.min(cap))
}

pub fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
