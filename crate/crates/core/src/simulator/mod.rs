//! Monte-Carlo marching of the mild formulation on a periodic lattice.
//!
//! A run splits `u = (G u₀)_t + v`: the free term comes from
//! [`initial_smoothing`](crate::kernel::initial_smoothing) and `v` collects the
//! drift and noise forcing, convolved with cell-integrated kernel weights.
//! For `β = 1` the kernel is a semigroup and `v` is marched by the one-step
//! (restart) map. For `β < 1` it is not, and each step re-convolves the whole
//! forcing history in Fourier space.

mod engine;
mod moments;
mod noise;
mod weights;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CorrelationKernel, InitialData, ModelParams};

pub use engine::{
    run_deterministic, simulate, simulate_deterministic, threads_from_env, DeterministicRun,
};
pub use moments::{
    detect_explosion, estimate_pair_moment, write_moments, write_snapshots, ExplosionVerdict,
    MomentSeries, PathSamples,
};
pub use noise::NoiseSampler;
pub use weights::{kernel_weights, suggest_half_width};

/// Uniform lattice `x = -L + h k`, `k = 0..n`, per axis, with periodic wrap.
/// `n` is even, so the origin is a site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub cells: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, cells: usize) -> Result<Self> {
        let g = Grid {
            dim,
            half_width,
            cells,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::domain(format!(
                "the simulator supports d ∈ {{1, 2}}, got {}",
                self.dim
            )));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::domain("box half-width must be positive"));
        }
        if self.cells < 4 || !self.cells.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "cells per side must be even and at least 4, got {}",
                self.cells
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn sites(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn coord(&self, site: usize) -> Vec<f64> {
        let h = self.spacing();
        let n = self.cells;
        let axis = |k: usize| -self.half_width + h * k as f64;
        match self.dim {
            1 => vec![axis(site)],
            _ => vec![axis(site / n), axis(site % n)],
        }
    }

    /// Nearest site to `x`, wrapping periodically.
    pub fn site_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::domain("point dimension does not match the grid"));
        }
        let h = self.spacing();
        let n = self.cells as i64;
        let mut site = 0usize;
        for &c in x {
            let k = ((c + self.half_width) / h).round() as i64;
            site = site * self.cells + k.rem_euclid(n) as usize;
        }
        Ok(site)
    }
}

/// A field on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub time: f64,
    pub values: Vec<f64>,
    pub exploded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sigma {
    Zero,
    /// additive noise, `σ ≡ value`
    Constant {
        value: f64,
    },
    /// `σ(u) = lip · u`
    Lipschitz {
        lip: f64,
    },
    /// `σ(u) = |u|^{1+γ}`
    PowerLaw {
        gamma: f64,
    },
}

impl Sigma {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Sigma::Zero => 0.0,
            Sigma::Constant { value } => value,
            Sigma::Lipschitz { lip } => lip * u,
            Sigma::PowerLaw { gamma } => u.abs().powf(1.0 + gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Drift {
    None,
    /// `b(u) = |u|^{1+η}`
    PowerLaw {
        eta: f64,
    },
}

impl Drift {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Drift::None => 0.0,
            Drift::PowerLaw { eta } => u.abs().powf(1.0 + eta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub sigma: Sigma,
    pub drift: Drift,
}

impl ReactionSpec {
    pub fn new(sigma: Sigma, drift: Drift) -> Result<Self> {
        let r = ReactionSpec { sigma, drift };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.sigma {
            Sigma::Zero => true,
            Sigma::Constant { value } => value.is_finite(),
            Sigma::Lipschitz { lip } => lip.is_finite(),
            Sigma::PowerLaw { gamma } => gamma > 0.0 && gamma.is_finite(),
        } && match self.drift {
            Drift::None => true,
            Drift::PowerLaw { eta } => eta > 0.0 && eta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid reaction {self:?}")))
        }
    }
}

#[derive(Clone)]
pub enum NoiseSpec {
    White,
    Colored(CorrelationKernel),
}

impl fmt::Debug for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::White => write!(f, "White"),
            NoiseSpec::Colored(k) => write!(f, "Colored({k:?})"),
        }
    }
}

/// Lag at which the kernel weights of the step `[t_m, t_{m+1}]` are taken
/// when seen from `t_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagRule {
    /// `t_n - t_m`
    #[default]
    Right,
    /// `t_n - t_m - dt/2`
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// restart for `β = 1` with right lags, memory otherwise
    #[default]
    Auto,
    /// one-step map `v ← K_dt * (v + forcing)`
    Restart,
    /// full history convolution
    Memory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub threshold: f64,
    pub lag: LagRule,
    pub scheme: Scheme,
    pub probe: Vec<f64>,
    /// moment order `p` of `E|u(x*)|^p`
    pub order: f64,
    pub record_every: usize,
    /// extra points recorded on every path, for pair moments
    pub record_points: Vec<Vec<f64>>,
    /// steps between snapshots of path 0 (initial and final are always kept)
    pub snapshot_every: Option<usize>,
    /// worker threads; `FRACSPDE_THREADS` caps this
    pub threads: Option<usize>,
}

impl SimOptions {
    pub fn for_dim(d: usize) -> Self {
        SimOptions {
            threshold: 1e8,
            lag: LagRule::Right,
            scheme: Scheme::Auto,
            probe: vec![0.0; d],
            order: 2.0,
            record_every: 1,
            record_points: vec![],
            snapshot_every: None,
            threads: None,
        }
    }
}

/// Everything that defines a run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: ModelParams,
    pub reaction: ReactionSpec,
    pub noise: NoiseSpec,
    pub initial: InitialData,
    pub grid: Grid,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub options: SimOptions,
}

impl Simulation {
    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn resolved_scheme(&self) -> Result<Scheme> {
        match (self.options.scheme, self.options.lag) {
            (Scheme::Restart, LagRule::Midpoint) => {
                Err(Error::Config("midpoint lags need the memory scheme".into()))
            }
            (Scheme::Auto, LagRule::Right) if self.params.beta == 1.0 => Ok(Scheme::Restart),
            (Scheme::Auto, _) => Ok(Scheme::Memory),
            (s, _) => Ok(s),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        p.validate()?;
        self.grid.validate()?;
        self.reaction.validate()?;
        self.initial.validate()?;
        if p.d != self.grid.dim {
            return Err(Error::domain("grid dimension does not match d"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::domain(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::domain("need at least one step and one path"));
        }
        let resolution = self.dt.powf(p.beta / p.alpha);
        if self.grid.spacing() > resolution {
            return Err(Error::domain(format!(
                "grid spacing {} does not resolve dt^(β/α) = {resolution}",
                self.grid.spacing()
            )));
        }
        match &self.noise {
            NoiseSpec::White => {
                if self.reaction.sigma != Sigma::Zero {
                    p.check_white_noise()?;
                }
            }
            NoiseSpec::Colored(k) => k.validate(p)?,
        }
        let o = &self.options;
        if !(o.threshold > 0.0) || o.record_every == 0 || !(o.order > 0.0) {
            return Err(Error::domain(
                "threshold and moment order must be positive and record_every at least 1",
            ));
        }
        if o.snapshot_every == Some(0) {
            return Err(Error::domain("snapshot_every must be at least 1"));
        }
        self.grid.site_of(&o.probe)?;
        for x in &o.record_points {
            self.grid.site_of(x)?;
        }
        self.resolved_scheme()?;
        Ok(())
    }
}

/// Per-run numerical diagnostics, kept in the run record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub scheme: Scheme,
    /// kernel mass outside the inscribed ball of the box at the horizon
    pub truncation_error: f64,
    /// diagonal used for a singular Riesz covariance, if any
    pub diagonal_regularization: Option<f64>,
    pub probe_site: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub moments: MomentSeries,
    pub snapshots: Vec<FieldState>,
    pub samples: PathSamples,
    pub diagnostics: Diagnostics,
}
