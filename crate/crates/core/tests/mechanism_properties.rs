mod common;

use cbitcl::*;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn real_fns(m: &CbitclModel) -> [(&'static str, f64, Box<dyn Fn(f64) -> f64 + '_>); 3] {
    let d = m.domain_info();
    [
        ("psi", d.psi, Box::new(move |u| m.psi(u).unwrap())),
        ("phi", d.phi, Box::new(move |u| m.phi(u).unwrap())),
        ("xi", d.z_upper, Box::new(move |u| m.xi(u).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponents_vanish_at_zero(m in model()) {
        prop_assert_eq!(m.psi(0.0).unwrap(), 0.0);
        prop_assert_eq!(m.phi(0.0).unwrap(), 0.0);
        prop_assert_eq!(m.xi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn chord_inequality(m in model(), s in prop::collection::vec(0.0..1.0f64, 3), w in 0.05..0.95f64) {
        let d = m.domain_info();
        let lows = [-5.0, -5.0, d.z_lower];
        for (i, (name, upper, f)) in real_fns(&m).iter().enumerate() {
            let (lo, hi) = clip(lows[i], *upper, 5.0);
            let mut us: Vec<f64> = s.iter().map(|&t| lerp(lo, hi, t)).collect();
            us.sort_by(f64::total_cmp);
            let (a, c) = (us[0], us[2]);
            if c - a < 1e-6 {
                continue;
            }
            let mid = w * a + (1.0 - w) * c;
            let chord = w * f(a) + (1.0 - w) * f(c);
            let val = f(mid);
            let scale = chord.abs().max(val.abs()).max(1.0);
            prop_assert!(val <= chord + 1e-12 * scale, "{name}: f({mid}) = {val} above chord {chord}");
        }
    }

    #[test]
    fn phi_derivative_matches_differences(m in model(), s in 0.0..1.0f64) {
        let upper = m.domain_info().phi;
        let (lo, hi) = clip(-4.0, upper - 0.05, 4.0);
        let u = lerp(lo, hi, s);
        let h = 1e-5;
        let fd = (m.phi(u + h).unwrap() - m.phi(u - h).unwrap()) / (2.0 * h);
        let exact = m.phi_prime(u).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }

    #[test]
    fn complex_agrees_with_real(m in model(), s in 0.0..1.0f64) {
        let d = m.domain_info();
        let lows = [-5.0, -5.0, d.z_lower];
        for (i, (name, upper, f)) in real_fns(&m).iter().enumerate() {
            let (lo, hi) = clip(lows[i], *upper, 5.0);
            let u = lerp(lo, hi, s);
            let z = Complex64::new(u, 0.0);
            let zc = match i {
                0 => m.psi(z).unwrap(),
                1 => m.phi(z).unwrap(),
                _ => m.xi(z).unwrap(),
            };
            let r = f(u);
            prop_assert!((zc.re - r).abs() <= 1e-14 * r.abs().max(1.0), "{name}({u}): {zc} vs {r}");
            prop_assert!(zc.im.abs() <= 1e-14 * r.abs().max(1.0), "{name}({u}): imaginary residue {}", zc.im);
        }
    }
}
