//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use crate::error::{CbitclError, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    /// Number of GK15 panels evaluated.
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    if !value.is_finite() {
        return Err(CbitclError::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates a fallible integrand over `[a, b]` until the summed error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_with<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_PANELS: usize = 4000;
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let first = gk15(&mut f, a, b)?;
    let mut total = first.value;
    let mut err = first.error;
    let mut panels = 1;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while err > abs_tol.max(rel_tol * total.abs()) {
        if panels >= MAX_PANELS {
            return Err(CbitclError::Quadrature(format!(
                "no convergence on [{a}, {b}] after {panels} panels (error estimate {err:e})"
            )));
        }
        let worst = heap.pop().expect("heap holds every panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            return Err(CbitclError::Quadrature(format!(
                "refinement stalled near {mid} (error estimate {err:e})"
            )));
        }
        let l = gk15(&mut f, worst.a, mid)?;
        let r = gk15(&mut f, mid, worst.b)?;
        panels += 2;
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        if heap.len() % 64 == 0 {
            // resum to limit drift from incremental updates
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, panels })
}

/// Infallible-integrand convenience wrapper around [`integrate_with`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate_with(|x| Ok(f(x)), a, b, abs_tol, rel_tol)
}
