mod common;

use cbitcl::*;
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Real arguments with `u1` inside `D_X` and `u3` inside `D_Z`.
fn real_args(m: &CbitclModel, s1: f64, u2: f64, s3: f64) -> (f64, f64, f64) {
    let d = m.domain_info();
    let (lo, hi) = clip(-3.0, d.x_upper, 3.0);
    let (zl, zh) = clip(d.z_lower, d.z_upper, 3.0);
    (lerp(lo, hi, s1), u2, lerp(zl, zh, s3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flow_property(m in model(), w1 in -3.0..3.0f64, w2 in -3.0..3.0f64, w3 in -3.0..3.0f64, s in 0.1..0.9f64) {
        let c = cfg();
        let t = 1.0;
        let args = RiccatiArgs::new(Complex64::new(-0.5, w1), Complex64::new(-0.2, w2), Complex64::new(0.0, w3));
        let full = solve_riccati_at(&m, args, &[s * t, t], &c).unwrap();
        prop_assume!(full.completed());
        let (vs, us) = (full.v[1], full.u[1]);
        let rest = solve_riccati_at(&m, RiccatiArgs::new(vs, args.u2, args.u3), &[t - s * t], &c).unwrap();
        let (_, v2, u2) = rest.last();
        let (vt, ut) = (full.v[2], full.u[2]);
        let tol_v = 5.0 * (c.rtol * vt.norm().max(1.0) + c.atol);
        let tol_u = 5.0 * (c.rtol * ut.norm().max(1.0) + c.atol);
        prop_assert!((v2 - vt).norm() <= tol_v, "V: {v2} vs {vt}");
        prop_assert!((u2 - (ut - us)).norm() <= tol_u, "U: {} vs {}", u2, ut - us);
    }

    #[test]
    fn real_monotonicity(m in model(), s1 in 0.0..1.0f64, u2 in -2.0..2.0f64, s3 in 0.0..1.0f64) {
        let (u1, u2, u3) = real_args(&m, s1, u2, s3);
        let g = m.lambda(u1, u3).unwrap() + u2;
        prop_assume!(g.abs() > 1e-6);
        let sol = solve_riccati(&m, RiccatiArgs::new(u1, u2, u3), 2.0, &cfg()).unwrap();
        for w in sol.v.windows(2) {
            if g > 0.0 {
                prop_assert!(w[1] > w[0], "not increasing: {} -> {}", w[0], w[1]);
            } else {
                prop_assert!(w[1] < w[0], "not decreasing: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn comparison(m in model(), s1 in 0.0..1.0f64, ds in 0.0..1.0f64, u2 in -2.0..2.0f64, s3 in 0.0..1.0f64) {
        let (a, u2, u3) = real_args(&m, s1 * (1.0 - ds), u2, s3);
        let (b, _, _) = real_args(&m, s1, u2, s3);
        let times: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let lo = solve_riccati_at(&m, RiccatiArgs::new(a, u2, u3), &times, &cfg()).unwrap();
        let hi = solve_riccati_at(&m, RiccatiArgs::new(b, u2, u3), &times, &cfg()).unwrap();
        let n = lo.v.len().min(hi.v.len());
        for k in 0..n {
            prop_assert!(lo.v[k] <= hi.v[k] + 1e-12 * hi.v[k].abs().max(1.0), "t={}: {} > {}", lo.times[k], lo.v[k], hi.v[k]);
        }
    }
}

#[test]
fn tower_property() {
    let m = presets::alpha_cir();
    let (t, s) = (1.0, 0.5);
    let (w1, w3) = (Complex64::new(0.0, -1.5), Complex64::new(0.0, 0.8));
    let zero = Complex64::new(0.0, 0.0);
    let c = cfg();
    let exact = char_fn_joint(&m, t, w1, zero, w3, &c).unwrap();
    let sol = solve_riccati_at(&m, RiccatiArgs::new(w1, zero, w3), &[t - s], &c).unwrap();
    let (_, v, u) = sol.last();
    let sim = SimConfig { horizon: s, step: 1.0 / 512.0, n_paths: 40_000, seed: 17, epsilon: 1e-3, small_jumps: SmallJumps::DiffusionApprox };
    let ts = simulate_terminal(&m, &sim).unwrap();
    let vals: Vec<Complex64> = (0..sim.n_paths).map(|i| (u + v * ts.x[i] + w3 * ts.z[i]).exp()).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<Complex64>() / n;
    let var = vals.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - exact).norm() <= 3.0 * se, "{mean} vs {exact}, se {se}");
}

#[test]
fn cir_riccati_closed_form_from_mc_mean() {
    let m = presets::heston(0.04, 1.5, 0.04, 0.5, 0.0);
    let c = cfg();
    let exact = transform(&m, 1.0, RiccatiArgs::new(-1.0, 0.0, 0.0), (0.04, 0.0, 0.0), &c).unwrap();
    let b = 1.5f64;
    let s2 = 0.25;
    let q = 1.0 + s2 / (2.0 * b) * (1.0 - (-b).exp());
    let v = -(-b).exp() / q;
    let u = -2.0 * 0.06 / s2 * q.ln();
    assert!((exact - (u + v * 0.04).exp()).abs() < 1e-12);
    let sim = SimConfig { horizon: 1.0, step: 1.0 / 256.0, n_paths: 40_000, seed: 3, epsilon: 1e-3, small_jumps: SmallJumps::DiffusionApprox };
    let ts = simulate_terminal(&m, &sim).unwrap();
    let vals: Vec<f64> = ts.x.iter().map(|x| (-x).exp()).collect();
    let (mean, se) = mean_se(&vals);
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact}");
}
