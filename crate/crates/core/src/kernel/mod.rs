//! The space-time fractional Green's function `G_t(x)`, its moment integrals
//! and the killed (Dirichlet) kernel on a ball.
//!
//! `G_t` is the density of `X_{E_t}`: an isotropic α-stable process run on
//! the inverse of a β-stable subordinator. Its Fourier transform is
//! `E_β(-ν t^β |ξ|^α)`, so `G_t(x) = a^{-d} Φ(|x|/a)` with `a = (ν t^β)^{1/α}`
//! and a single radial profile `Φ` per `(α, β, d)`.

mod bounds;
mod export;
mod green;
mod killed;
mod l2;
mod pair;
mod profile;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bounds::{green_bounds, GreenBounds};
pub use export::write_kernel_table;
pub use green::InitialFn;
pub use green::{green_fourier, green_subordination, initial_smoothing, InitialData};
pub use killed::{
    dirichlet_eigenpairs_interval, killed_green, killed_green_with_tol, EigenPairs, KilledSum,
};
pub use killed::{BasisFn, ResolventFn};
pub use l2::{cstar, l2_norm};
pub use pair::{pair_correlation_integral, PairOptions};
pub use profile::{profile_fourier, GreenProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub d: usize,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, nu: f64, d: usize) -> Result<Self> {
        let p = ModelParams { alpha, beta, nu, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0,2], got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain(format!(
                "beta must lie in (0,1], got {}",
                self.beta
            )));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::domain(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if self.d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(())
    }

    /// Exponent `βd/α` of the on-diagonal decay `G_t(0) ~ t^{-βd/α}`.
    pub fn theta(&self) -> f64 {
        self.beta * self.d as f64 / self.alpha
    }

    /// Spatial scale `(ν t^β)^{1/α}` of `G_t`.
    pub fn scale(&self, t: f64) -> f64 {
        (self.nu * t.powf(self.beta)).powf(1.0 / self.alpha)
    }

    /// `d < (2 ∧ 1/β) α`, needed for white-noise solutions.
    pub fn check_white_noise(&self) -> Result<()> {
        let bound = 2f64.min(1.0 / self.beta) * self.alpha;
        if (self.d as f64) < bound {
            Ok(())
        } else {
            Err(Error::hypothesis(format!(
                "white noise needs d < (2 ∧ 1/β)α = {bound}, got d = {}",
                self.d
            )))
        }
    }

    /// `d < 2α`, needed for `G_t ∈ L²`.
    pub fn check_l2(&self) -> Result<()> {
        if (self.d as f64) < 2.0 * self.alpha {
            Ok(())
        } else {
            Err(Error::hypothesis(format!(
                "G_t is square integrable only for d < 2α; d = {}, α = {}",
                self.d, self.alpha
            )))
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "α={} β={} ν={} d={}",
            self.alpha, self.beta, self.nu, self.d
        )
    }
}

pub type CorrelationFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Spatial covariance `f(x, y)` of a colored noise.
#[derive(Clone)]
pub enum CorrelationKernel {
    /// `f(x, y) = |x - y|^{-ω}`.
    Riesz { omega: f64 },
    /// User-supplied `f`, bounded below by `floor` on `B(0, radius)²`.
    Tabulated {
        f: CorrelationFn,
        floor: f64,
        radius: f64,
    },
}

impl fmt::Debug for CorrelationKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationKernel::Riesz { omega } => write!(f, "Riesz {{ omega: {omega} }}"),
            CorrelationKernel::Tabulated { floor, radius, .. } => {
                write!(f, "Tabulated {{ floor: {floor}, radius: {radius} }}")
            }
        }
    }
}

impl CorrelationKernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CorrelationKernel::Riesz { omega } => {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                r2.powf(-omega / 2.0)
            }
            CorrelationKernel::Tabulated { f, .. } => f(x, y),
        }
    }

    /// Checks `ω < d ∧ α/β` (Riesz) or that the stored floor is positive.
    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        match self {
            CorrelationKernel::Riesz { omega } => {
                let bound = (p.d as f64).min(p.alpha / p.beta);
                if *omega > 0.0 && *omega < bound {
                    Ok(())
                } else {
                    Err(Error::hypothesis(format!(
                        "Riesz exponent must lie in (0, d ∧ α/β) = (0, {bound}), got {omega}"
                    )))
                }
            }
            CorrelationKernel::Tabulated { floor, radius, .. } => {
                if *floor > 0.0 && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(
                        "tabulated correlation needs a positive floor and radius",
                    ))
                }
            }
        }
    }
}

/// Average of `|z|^{-ω}` over one cubic cell `[-h/2, h/2]^d`, `d ≤ 2`; used
/// in place of the singular diagonal of a Riesz covariance.
pub fn riesz_cell_average(omega: f64, h: f64, d: usize) -> f64 {
    match d {
        1 => (h / 2.0).powf(-omega) / (1.0 - omega),
        2 => {
            // eight triangles; polar r ≤ (h/2) sec θ, θ ∈ [0, π/4]
            let f = |th: f64| (h / 2.0 / th.cos()).powf(2.0 - omega) / (2.0 - omega);
            let v = crate::quad::integrate(f, 0.0, std::f64::consts::FRAC_PI_4, Default::default())
                .map(|e| e.value)
                .unwrap_or(f64::NAN);
            8.0 * v / (h * h)
        }
        _ => f64::NAN,
    }
}
