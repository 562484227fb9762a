//! Monte Carlo simulation of `(X, Y, Z)` from the factorized SDE system.

mod jumps;
mod lamperti;

pub use jumps::{sample_levy_increment, JumpSampler};
pub use lamperti::simulate_lamperti;

use crate::error::{CbitclError, Result};
use crate::mechanisms::CbitclModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Treatment of the jumps below the cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SmallJumps {
    /// Replaced by a Gaussian with matching variance.
    #[default]
    DiffusionApprox,
    /// Dropped, keeping only their mean.
    CompensateOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub step: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub small_jumps: SmallJumps,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { horizon: 1.0, step: 1.0 / 256.0, n_paths: 1000, seed: 0, epsilon: 1e-3, small_jumps: SmallJumps::default() }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CbitclError::Config(m));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.step > 0.0 && self.step <= self.horizon) {
            return bad(format!("step must lie in (0, horizon], got {}", self.step));
        }
        if self.n_paths == 0 {
            return bad("path count must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("small-jump cutoff must lie in (0, 1], got {}", self.epsilon));
        }
        Ok(())
    }

    /// Uniform grid of spacing `step`; the last interval is shortened to end at `horizon`.
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.horizon / self.step) - 1e-9).ceil().max(1.0) as usize;
        (0..=n).map(|k| if k == n { self.horizon } else { k as f64 * self.step }).collect()
    }

    /// Warns when the frozen-intensity step is coarse relative to the jump activity.
    pub fn check_stability(&self, model: &CbitclModel) -> Result<f64> {
        let pi = JumpSampler::new(model.branching.pi, self.epsilon)?;
        let gamma = JumpSampler::new(model.noise.gamma, self.epsilon)?;
        let b = model.branching.b;
        let level = if b > 0.0 { model.x0.max(model.immigration.beta / b) } else { model.x0.max(model.immigration.beta) };
        let h = self.step * (pi.intensity() + gamma.intensity()) * level;
        if h > 1.0 {
            log::warn!("step {} gives {h:.3} expected self-exciting jumps per step; consider a smaller step", self.step);
        }
        Ok(h)
    }
}

/// Trajectories on a common grid; `x[p][k]` is path `p` at `times[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSet {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub streams: Vec<u64>,
    pub config: SimConfig,
}

/// Values at the horizon only, one entry per path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalSet {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub config: SimConfig,
}

/// Substreams per path: Brownian drivers, jumps, small-jump Gaussians, time-change clock.
pub(crate) const SUBSTREAMS: u64 = 4;

pub(crate) fn substream(seed: u64, path: usize, sub: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64 * SUBSTREAMS + sub);
    rng
}

pub(crate) struct Samplers {
    pub nu: JumpSampler,
    pub pi: JumpSampler,
    pub gamma: JumpSampler,
}

impl Samplers {
    pub fn new(model: &CbitclModel, cfg: &SimConfig) -> Result<Self> {
        Ok(Samplers {
            nu: JumpSampler::new(model.immigration.nu, cfg.epsilon)?,
            pi: JumpSampler::new(model.branching.pi, cfg.epsilon)?,
            gamma: JumpSampler::new(model.noise.gamma, cfg.epsilon)?,
        })
    }
}

fn prepare(model: &CbitclModel, cfg: &SimConfig) -> Result<Samplers> {
    model.validate()?;
    cfg.validate()?;
    cfg.check_stability(model)?;
    Samplers::new(model, cfg)
}

/// Euler scheme for one path; `record(k, x, y, z)` is called at every grid node.
fn euler_path(
    model: &CbitclModel,
    s: &Samplers,
    cfg: &SimConfig,
    times: &[f64],
    path: usize,
    mut record: impl FnMut(usize, f64, f64, f64),
) {
    let mut rng_w = substream(cfg.seed, path, 0);
    let mut rng_j = substream(cfg.seed, path, 1);
    let mut rng_s = substream(cfg.seed, path, 2);
    let diffuse = cfg.small_jumps == SmallJumps::DiffusionApprox;
    let (beta, b_x, sig_x) = (model.immigration.beta, model.branching.b, model.branching.sigma);
    let (b_z, sig_z, rho) = (model.noise.b, model.noise.sigma, model.rho);
    let rho_c = (1.0 - rho * rho).max(0.0).sqrt();

    // `xt` is the unclipped Euler state; drift, diffusion and intensities see only its positive part
    let (mut xt, mut y, mut z) = (model.x0, 0.0, 0.0);
    let mut x = xt.max(0.0);
    record(0, x, y, z);
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        let g1: f64 = StandardNormal.sample(&mut rng_w);
        let g2: f64 = StandardNormal.sample(&mut rng_w);
        let clock = x * dt;
        let sq = clock.sqrt();

        let mut dx = (beta - b_x * x) * dt + sig_x * sq * g1;
        let mut dz = b_z * clock + sig_z * sq * (rho * g1 + rho_c * g2);

        if !s.nu.is_none() {
            dx += s.nu.sample_sum(&mut rng_j, dt) + s.nu.drift_rate() * dt;
            if diffuse {
                let g: f64 = StandardNormal.sample(&mut rng_s);
                dx += (s.nu.small_variance_rate() * dt).sqrt() * g;
            }
        }
        if !s.pi.is_none() && clock > 0.0 {
            dx += s.pi.sample_sum(&mut rng_j, clock) + s.pi.drift_rate() * clock;
            if diffuse {
                let g: f64 = StandardNormal.sample(&mut rng_s);
                dx += (s.pi.small_variance_rate() * clock).sqrt() * g;
            }
        }
        if !s.gamma.is_none() && clock > 0.0 {
            dz += s.gamma.sample_sum(&mut rng_j, clock) + s.gamma.drift_rate() * clock;
            if diffuse {
                let g: f64 = StandardNormal.sample(&mut rng_s);
                dz += (s.gamma.small_variance_rate() * clock).sqrt() * g;
            }
        }

        xt += dx;
        let x_new = xt.max(0.0);
        y += 0.5 * (x + x_new) * dt;
        x = x_new;
        z += dz;
        record(k + 1, x, y, z);
    }
}

/// Full-truncation Euler paths of `(X, Y, Z)`; the reported `X` is the positive part of the state.
pub fn simulate_paths(model: &CbitclModel, cfg: &SimConfig) -> Result<PathSet> {
    let s = prepare(model, cfg)?;
    let times = cfg.grid();
    let n = times.len();
    let paths: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let (mut xs, mut ys, mut zs) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            euler_path(model, &s, cfg, &times, p, |k, x, y, z| {
                xs[k] = x;
                ys[k] = y;
                zs[k] = z;
            });
            (xs, ys, zs)
        })
        .collect();
    Ok(assemble(times, paths, *cfg))
}

pub(crate) fn assemble(times: Vec<f64>, paths: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>, config: SimConfig) -> PathSet {
    let mut set = PathSet {
        times,
        x: Vec::with_capacity(paths.len()),
        y: Vec::with_capacity(paths.len()),
        z: Vec::with_capacity(paths.len()),
        streams: (0..paths.len() as u64).collect(),
        config,
    };
    for (x, y, z) in paths {
        set.x.push(x);
        set.y.push(y);
        set.z.push(z);
    }
    set
}

/// Same scheme and streams as [`simulate_paths`], keeping only the horizon values.
pub fn simulate_terminal(model: &CbitclModel, cfg: &SimConfig) -> Result<TerminalSet> {
    let s = prepare(model, cfg)?;
    let times = cfg.grid();
    let last = times.len() - 1;
    let out: Vec<(f64, f64, f64)> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut end = (0.0, 0.0, 0.0);
            euler_path(model, &s, cfg, &times, p, |k, x, y, z| {
                if k == last {
                    end = (x, y, z);
                }
            });
            end
        })
        .collect();
    Ok(TerminalSet {
        x: out.iter().map(|o| o.0).collect(),
        y: out.iter().map(|o| o.1).collect(),
        z: out.iter().map(|o| o.2).collect(),
        config: *cfg,
    })
}

impl PathSet {
    pub fn n_paths(&self) -> usize {
        self.x.len()
    }

    /// CSV with columns `path,t,X,Y,Z`, preceded by `#` lines echoing the configuration.
    pub fn write_csv<W: Write>(&self, mut w: W, echo: &[String]) -> std::io::Result<()> {
        let c = &self.config;
        writeln!(w, "# horizon = {:?}", c.horizon)?;
        writeln!(w, "# step = {:?}", c.step)?;
        writeln!(w, "# n_paths = {}", c.n_paths)?;
        writeln!(w, "# seed = {}", c.seed)?;
        writeln!(w, "# epsilon = {:?}", c.epsilon)?;
        writeln!(w, "# small_jumps = {:?}", c.small_jumps)?;
        for line in echo {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "path,t,X,Y,Z")?;
        for p in 0..self.n_paths() {
            for (k, t) in self.times.iter().enumerate() {
                writeln!(w, "{},{:?},{:?},{:?},{:?}", self.streams[p], t, self.x[p][k], self.y[p][k], self.z[p][k])?;
            }
        }
        Ok(())
    }
}
