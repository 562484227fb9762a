//! Time-change construction `X = X0 + M_Y + K`, `Z = N_Y`, `Y = int X`.
//!
//! `M` and `N` live on a business clock and are sampled lazily: Brownian values by bridging
//! between stored nodes, jumps as compound-Poisson arrival lists, so every query is consistent
//! with one underlying path regardless of the order of evaluation.

use super::{assemble, prepare, substream, JumpSampler, PathSet, SimConfig, SmallJumps};
use crate::error::Result;
use crate::mechanisms::CbitclModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

const DIMS: usize = 4;

/// Lazily sampled independent standard Brownian motions in business time.
struct LazyBrownian {
    nodes: Vec<(f64, [f64; DIMS])>,
    rng: ChaCha8Rng,
}

impl LazyBrownian {
    fn new(rng: ChaCha8Rng) -> Self {
        LazyBrownian { nodes: vec![(0.0, [0.0; DIMS])], rng }
    }

    fn at(&mut self, y: f64) -> [f64; DIMS] {
        let pos = self.nodes.partition_point(|n| n.0 < y);
        if pos < self.nodes.len() && self.nodes[pos].0 == y {
            return self.nodes[pos].1;
        }
        let mut w = [0.0; DIMS];
        if pos == self.nodes.len() {
            let (y0, w0) = self.nodes[pos - 1];
            let sd = (y - y0).sqrt();
            for (d, wd) in w.iter_mut().enumerate() {
                let g: f64 = StandardNormal.sample(&mut self.rng);
                *wd = w0[d] + sd * g;
            }
            self.nodes.push((y, w));
        } else {
            let (ya, wa) = self.nodes[pos - 1];
            let (yb, wb) = self.nodes[pos];
            let r = (y - ya) / (yb - ya);
            let sd = ((y - ya) * (yb - y) / (yb - ya)).sqrt();
            for (d, wd) in w.iter_mut().enumerate() {
                let g: f64 = StandardNormal.sample(&mut self.rng);
                *wd = wa[d] + r * (wb[d] - wa[d]) + sd * g;
            }
            self.nodes.insert(pos, (y, w));
        }
        w
    }

    /// Drops nodes that no later query (all at or beyond `y`) can need.
    fn prune_before(&mut self, y: f64) {
        let pos = self.nodes.partition_point(|n| n.0 <= y);
        if pos > 1 {
            self.nodes.drain(..pos - 1);
        }
    }
}

/// Jumps above the cutoff with exponential arrival times in business time.
struct LazyJumps {
    sampler: JumpSampler,
    /// `(arrival, cumulative sum including this jump)`
    arrivals: Vec<(f64, f64)>,
    next: f64,
}

impl LazyJumps {
    fn new<R: Rng>(sampler: JumpSampler, rng: &mut R) -> Self {
        let next = Self::gap(&sampler, rng);
        LazyJumps { sampler, arrivals: Vec::new(), next }
    }

    fn gap<R: Rng>(s: &JumpSampler, rng: &mut R) -> f64 {
        let rate = s.intensity();
        if s.is_none() || rate <= 0.0 {
            return f64::INFINITY;
        }
        let e: f64 = Exp1.sample(rng);
        e / rate
    }

    fn sum_to<R: Rng>(&mut self, y: f64, rng: &mut R) -> f64 {
        while self.next <= y {
            let prev = self.arrivals.last().map_or(0.0, |a| a.1);
            self.arrivals.push((self.next, prev + self.sampler.sample_jump(rng)));
            self.next += Self::gap(&self.sampler, rng);
        }
        let pos = self.arrivals.partition_point(|a| a.0 <= y);
        if pos == 0 {
            0.0
        } else {
            self.arrivals[pos - 1].1
        }
    }
}

/// The pair `(M, N)` on the business clock.
struct BusinessPath {
    w: LazyBrownian,
    pi: LazyJumps,
    gamma: LazyJumps,
    rng_j: ChaCha8Rng,
    m_drift: f64,
    n_drift: f64,
    sig_x: f64,
    sig_z: f64,
    rho: f64,
    rho_c: f64,
    pi_sd: f64,
    gamma_sd: f64,
}

impl BusinessPath {
    fn at(&mut self, y: f64) -> (f64, f64) {
        let w = self.w.at(y);
        let jp = self.pi.sum_to(y, &mut self.rng_j);
        let jg = self.gamma.sum_to(y, &mut self.rng_j);
        let m = self.m_drift * y + self.sig_x * w[0] + self.pi_sd * w[2] + jp;
        let n = self.n_drift * y + self.sig_z * (self.rho * w[0] + self.rho_c * w[1]) + self.gamma_sd * w[3] + jg;
        (m, n)
    }
}

const MAX_SUBSTITUTIONS: usize = 12;

fn lamperti_path(model: &CbitclModel, cfg: &SimConfig, times: &[f64], path: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let s = super::Samplers::new(model, cfg)?;
    let diffuse = cfg.small_jumps == SmallJumps::DiffusionApprox;
    let mut rng_j = substream(cfg.seed, path, 1);
    let mut rng_k = substream(cfg.seed, path, 2);
    let pi = LazyJumps::new(s.pi, &mut rng_j);
    let gamma = LazyJumps::new(s.gamma, &mut rng_j);
    let rho = model.rho;
    let mut bp = BusinessPath {
        w: LazyBrownian::new(substream(cfg.seed, path, 0)),
        pi,
        gamma,
        rng_j,
        m_drift: -model.branching.b + s.pi.drift_rate(),
        n_drift: model.noise.b + s.gamma.drift_rate(),
        sig_x: model.branching.sigma,
        sig_z: model.noise.sigma,
        rho,
        rho_c: (1.0 - rho * rho).max(0.0).sqrt(),
        pi_sd: if diffuse { s.pi.small_variance_rate().sqrt() } else { 0.0 },
        gamma_sd: if diffuse { s.gamma.small_variance_rate().sqrt() } else { 0.0 },
    };

    let n = times.len();
    let (mut xs, mut ys, mut zs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let x0 = model.x0;
    xs[0] = x0;
    let mut k_t = 0.0;
    for k in 0..n - 1 {
        let dt = times[k + 1] - times[k];
        k_t += model.immigration.beta * dt;
        if !s.nu.is_none() {
            k_t += s.nu.sample_sum(&mut rng_k, dt) + s.nu.drift_rate() * dt;
            if diffuse {
                let g: f64 = StandardNormal.sample(&mut rng_k);
                k_t += (s.nu.small_variance_rate() * dt).sqrt() * g;
            }
        }
        let (xk, yk) = (xs[k], ys[k]);
        let mut x = xk;
        for _ in 0..MAX_SUBSTITUTIONS {
            let yc = yk + 0.5 * (xk + x) * dt;
            let next = (x0 + bp.at(yc).0 + k_t).max(0.0);
            let done = (next - x).abs() <= 1e-13 * (1.0 + x.abs());
            x = next;
            if done {
                break;
            }
        }
        let y = yk + 0.5 * (xk + x) * dt;
        xs[k + 1] = x;
        ys[k + 1] = y;
        zs[k + 1] = bp.at(y).1;
        bp.w.prune_before(y);
    }
    Ok((xs, ys, zs))
}

/// Cross-check simulator solving the time-change equation by per-step substitution.
pub fn simulate_lamperti(model: &CbitclModel, cfg: &SimConfig) -> Result<PathSet> {
    prepare(model, cfg)?;
    let times = cfg.grid();
    let paths = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| lamperti_path(model, cfg, &times, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(times, paths, *cfg))
}
