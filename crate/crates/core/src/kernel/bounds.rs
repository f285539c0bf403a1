use serde::Serialize;

use super::{GreenProfile, ModelParams};
use crate::error::{Error, Result};
use std::f64::consts::PI;

use crate::specialfn::ln_gamma;

/// Calibrated two-sided bounds
/// `c₁ S ≤ G_t(x) ≤ c₂ S`, `S = t^{-βd/α} ∧ t^β/|x|^{d+α}`.
#[derive(Debug, Clone, Serialize)]
pub struct GreenBounds {
    pub c1: f64,
    pub c2: f64,
    /// relative safety margin applied to the sampled extremes
    pub margin: f64,
    #[serde(skip)]
    profile: GreenProfile,
}

fn shape(p: &ModelParams, t: f64, r: f64) -> f64 {
    let diag = t.powf(-p.theta());
    if r == 0.0 {
        return diag;
    }
    diag.min(t.powf(p.beta) * r.powf(-(p.d as f64) - p.alpha))
}

impl GreenBounds {
    pub fn calibrate(profile: GreenProfile) -> Result<Self> {
        let p = profile.params();
        let df = p.d as f64;
        if df >= p.alpha {
            return Err(Error::hypothesis(format!(
                "two-sided bounds need d < α, got d = {}, α = {}",
                p.d, p.alpha
            )));
        }
        if p.alpha >= 2.0 {
            return Err(Error::hypothesis(
                "two-sided power-law bounds need α < 2 (the α = 2 kernel has no algebraic tail)",
            ));
        }
        // the ratio depends on ξ = |x|/t^{β/α} only; sample it at t = 1
        let a = p.scale(1.0);
        let ratio = |xi: f64| {
            let r = a * xi;
            profile.density(1.0, r) / shape(&p, 1.0, r)
        };
        let mut lo = ratio(0.0);
        let mut hi = lo;
        for i in 0..=4000 {
            let xi = 10f64.powf(-4.0 + 10.0 * i as f64 / 4000.0);
            let v = ratio(xi);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // ξ → ∞: Φ(ρ) ρ^{d+α} → π^{-d/2-1} 2^α Γ((α+d)/2) Γ(1+α/2) sin(πα/2) / Γ(1+β)
        let k_inf = (-(df / 2.0 + 1.0) * PI.ln()
            + p.alpha * 2f64.ln()
            + ln_gamma((p.alpha + df) / 2.0)
            + ln_gamma(1.0 + p.alpha / 2.0)
            - ln_gamma(1.0 + p.beta))
        .exp()
            * (PI * p.alpha / 2.0).sin();
        let limit = k_inf * p.nu;
        lo = lo.min(limit);
        hi = hi.max(limit);
        let margin = 0.02;
        Ok(GreenBounds {
            c1: lo * (1.0 - margin),
            c2: hi * (1.0 + margin),
            margin,
            profile,
        })
    }

    pub fn params(&self) -> ModelParams {
        self.profile.params()
    }

    /// `G_t(x)` divided by the bound shape.
    pub fn ratio(&self, t: f64, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.profile.density(t, r) / shape(&self.params(), t, r)
    }

    pub fn bounds(&self, t: f64, x: &[f64]) -> (f64, f64) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = shape(&self.params(), t, r);
        (self.c1 * s, self.c2 * s)
    }
}

/// One-shot calibration and evaluation of the two-sided bounds.
pub fn green_bounds(p: &ModelParams, t: f64, x: &[f64]) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if x.len() != p.d {
        return Err(Error::domain("point dimension does not match d"));
    }
    let b = GreenBounds::calibrate(GreenProfile::new(*p)?)?;
    Ok(b.bounds(t, x))
}
