use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use super::profile::profile_fourier;
use super::{GreenProfile, ModelParams};
use crate::error::{Error, Result};
use crate::quad::{integrate_points, integrate_points_to_infinity, Tolerance};
use crate::specialfn::{
    inverse_subordinator_density, stable_density, stable_profile, StableParams,
};

fn check_point(p: &ModelParams, t: f64, x: &[f64]) -> Result<f64> {
    p.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if x.len() != p.d {
        return Err(Error::domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            p.d
        )));
    }
    Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `G_t(x)` by radial Fourier inversion of `E_β(-ν t^β |ξ|^α)`.
pub fn green_fourier(p: &ModelParams, t: f64, x: &[f64]) -> Result<f64> {
    let r = check_point(p, t, x)?;
    let a = p.scale(t);
    let phi = profile_fourier(p.alpha, p.beta, p.d, r / a)?;
    Ok(a.powi(-(p.d as i32)) * phi)
}

/// `G_t(x) = ∫_0^∞ p(s, x) f_{E_t}(s) ds`.
pub fn green_subordination(p: &ModelParams, t: f64, x: &[f64]) -> Result<f64> {
    let r = check_point(p, t, x)?;
    let sp = StableParams::new(p.alpha, p.nu, p.d)?;
    if p.beta == 1.0 {
        return stable_density(sp, t, x);
    }
    let (alpha, beta) = (p.alpha, p.beta);
    let df = p.d as f64;
    let tol = Tolerance::new(1e-13, 1e-10);
    let failed = Cell::new(false);
    let fet = |s: f64| match inverse_subordinator_density(beta, t, s) {
        Ok(v) => v,
        Err(_) => {
            failed.set(true);
            0.0
        }
    };
    let tb = t.powf(beta);
    let value = if r == 0.0 {
        if df >= alpha {
            return Err(Error::domain(format!(
                "G_t(0) is infinite for d = {} ≥ α = {alpha}",
                p.d
            )));
        }
        // s = w^q makes p(s,0) ds = ν^{-d/α} p_1(0) q dw
        let q = 1.0 / (1.0 - df / alpha);
        let c = p.nu.powf(-df / alpha) * stable_profile(alpha, p.d, 0.0)? * q;
        let f = |w: f64| c * fet(w.powf(q));
        let pts: Vec<f64> = std::iter::once(0.0)
            .chain(
                [0.01, 0.1, 0.5, 1.0, 2.0, 5.0]
                    .iter()
                    .map(|m| (m * tb).powf(1.0 / q)),
            )
            .collect();
        integrate_points_to_infinity(f, &pts, tol)?.value
    } else {
        let f = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let ps = stable_density(sp, s, x).unwrap_or_else(|_| {
                failed.set(true);
                0.0
            });
            ps * fet(s)
        };
        let sc = r.powf(alpha) / p.nu;
        let mut pts = vec![0.0];
        for m in [0.01, 0.1, 1.0, 10.0] {
            pts.push(m * sc);
        }
        for m in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
            pts.push(m * tb);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        integrate_points_to_infinity(f, &pts, tol)?.value
    };
    if failed.get() || !value.is_finite() {
        return Err(Error::Quadrature {
            value,
            error: f64::NAN,
            evaluations: 0,
        });
    }
    Ok(value)
}

pub type InitialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Initial data `u_0`.
#[derive(Clone)]
pub enum InitialData {
    Constant(f64),
    /// `level · 1_{B(0, radius)}`
    Ball {
        radius: f64,
        level: f64,
    },
    /// Bounded function vanishing outside `B(0, support)`; one dimension only.
    Function {
        f: InitialFn,
        support: f64,
    },
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Constant(k) => write!(f, "Constant({k})"),
            InitialData::Ball { radius, level } => {
                write!(f, "Ball {{ radius: {radius}, level: {level} }}")
            }
            InitialData::Function { support, .. } => write!(f, "Function {{ support: {support} }}"),
        }
    }
}

impl InitialData {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InitialData::Constant(k) => *k,
            InitialData::Ball { radius, level } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 < radius * radius {
                    *level
                } else {
                    0.0
                }
            }
            InitialData::Function { f, support } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 <= support * support {
                    f(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Value far from the origin.
    pub fn far_field(&self) -> f64 {
        match self {
            InitialData::Constant(k) => *k,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InitialData::Constant(k) => *k >= 0.0 && k.is_finite(),
            InitialData::Ball { radius, level } => *radius > 0.0 && *level >= 0.0,
            InitialData::Function { support, .. } => *support > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid initial data {self:?}")))
        }
    }
}

/// `(G u_0)_t(x) = ∫ G_t(x - y) u_0(y) dy`.
pub fn initial_smoothing(
    profile: &GreenProfile,
    u0: &InitialData,
    t: f64,
    x: &[f64],
) -> Result<f64> {
    let p = profile.params();
    let r = check_point(&p, t, x)?;
    u0.validate()?;
    match u0 {
        InitialData::Constant(k) => Ok(*k),
        InitialData::Ball { radius, level } => {
            if p.d == 1 {
                Ok(level * profile.segment_mass(t, -radius - x[0], radius - x[0]))
            } else if r == 0.0 {
                Ok(level * profile.ball_mass(t, *radius))
            } else {
                Err(Error::domain(
                    "ball data off the origin is only supported in one dimension",
                ))
            }
        }
        InitialData::Function { f, support } => {
            if p.d != 1 {
                return Err(Error::domain(
                    "function data is only supported in one dimension",
                ));
            }
            let x0 = x[0];
            let a = p.scale(t);
            let mut pts = vec![-support, *support];
            for m in [-1.0, -0.1, -0.01, 0.0, 0.01, 0.1, 1.0] {
                let y = x0 + m * a;
                if y > -support && y < *support {
                    pts.push(y);
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let g = |y: f64| profile.density(t, (x0 - y).abs()) * f(&[y]);
            Ok(integrate_points(g, &pts, Tolerance::new(1e-12, 1e-10))?.value)
        }
    }
}
