//! Blow-up times of the renewal inequalities
//! `h(t) ≥ C + D ∫_0^t h(s)^{1+γ} (t-s)^{-θ} ds` and their numerical
//! equality-case solutions.

mod dirichlet;
mod volterra;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dirichlet::{dirichlet_blowup_time, DirichletOutcome, DirichletRegime, DirichletRenewal};
pub use volterra::{
    laplace_renewal_check, volterra_solve, volterra_solve_with, BlowupEstimate, LaplaceVerdict,
    Trajectory, VolterraOptions, VolterraSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalProblem {
    pub c: f64,
    pub d: f64,
    pub gamma: f64,
    pub theta: f64,
    /// `T` of the bounded-horizon variant
    pub horizon: Option<f64>,
}

impl RenewalProblem {
    pub fn new(c: f64, d: f64, gamma: f64, theta: f64) -> Result<Self> {
        let rp = RenewalProblem {
            c,
            d,
            gamma,
            theta,
            horizon: None,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn with_horizon(mut self, t: f64) -> Result<Self> {
        self.horizon = Some(t);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.c) || !pos(self.d) || !pos(self.gamma) {
            return Err(Error::domain(format!(
                "C, D and γ must be positive, got C = {}, D = {}, γ = {}",
                self.c, self.d, self.gamma
            )));
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(Error::domain(format!(
                "θ must be nonnegative, got {}",
                self.theta
            )));
        }
        if let Some(t) = self.horizon {
            if !pos(t) {
                return Err(Error::domain(format!("horizon must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// `(1+γ)θ < 1`.
    pub fn is_subcritical(&self) -> bool {
        (1.0 + self.gamma) * self.theta < 1.0
    }
}

/// `T^θ / (C^γ D γ)`: on `[0, T]` the kernel is at least `T^{-θ}`.
pub fn blowup_time_bounded(rp: &RenewalProblem) -> Result<f64> {
    rp.validate()?;
    let t = rp
        .horizon
        .ok_or_else(|| Error::domain("the bounded variant needs a horizon T"))?;
    Ok(t.powf(rp.theta) / (rp.c.powf(rp.gamma) * rp.d * rp.gamma))
}

/// Smallest `C` with `blowup_time_bounded ≤ t0`: `(T^θ/(D γ t0))^{1/γ}`.
pub fn minimal_initial_level(rp: &RenewalProblem, t0: f64) -> Result<f64> {
    rp.validate()?;
    let t = rp
        .horizon
        .ok_or_else(|| Error::domain("the bounded variant needs a horizon T"))?;
    if !(t0 > 0.0) {
        return Err(Error::domain(format!("t0 must be positive, got {t0}")));
    }
    Ok((t.powf(rp.theta) / (rp.d * rp.gamma * t0)).powf(1.0 / rp.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnboundedVariant {
    /// initial term `C`
    Constant,
    /// initial term `C t^{-θ}`
    Decaying,
}

/// Blow-up time of the unbounded-horizon inequality, `(1+γ)θ < 1`.
pub fn blowup_time_unbounded(rp: &RenewalProblem, variant: UnboundedVariant) -> Result<f64> {
    rp.validate()?;
    if !rp.is_subcritical() {
        return Err(Error::hypothesis(format!(
            "needs (1+γ)θ < 1, got (1+{})·{} = {}",
            rp.gamma,
            rp.theta,
            (1.0 + rp.gamma) * rp.theta
        )));
    }
    let e = 1.0 - (1.0 + rp.gamma) * rp.theta;
    let gd = rp.gamma * rp.d;
    Ok(match variant {
        UnboundedVariant::Constant => ((e / gd) * (rp.c.powf(-rp.gamma) + gd / e)).powf(1.0 / e),
        UnboundedVariant::Decaying => (e / (gd * rp.c.powf(rp.gamma))).powf(1.0 / e),
    })
}

/// Trades nonlinearity for forcing: with `h ≥ C`, `h^{1+γ} ≥ C^{γ-γ₀} h^{1+γ₀}`.
pub fn reduce_exponent(rp: &RenewalProblem, gamma0: f64) -> Result<RenewalProblem> {
    rp.validate()?;
    if !(gamma0 > 0.0 && gamma0 <= rp.gamma) {
        return Err(Error::domain(format!(
            "γ₀ must lie in (0, γ] = (0, {}], got {gamma0}",
            rp.gamma
        )));
    }
    Ok(RenewalProblem {
        gamma: gamma0,
        d: rp.d * rp.c.powf(rp.gamma - gamma0),
        ..*rp
    })
}

/// [`blowup_time_unbounded`], first reducing `γ` to the midpoint of the
/// admissible range `(0, 1/θ - 1)` when `(1+γ)θ ≥ 1`.
pub fn blowup_time_unbounded_reduced(
    rp: &RenewalProblem,
    variant: UnboundedVariant,
) -> Result<f64> {
    rp.validate()?;
    if rp.is_subcritical() {
        return blowup_time_unbounded(rp, variant);
    }
    if rp.theta >= 1.0 {
        return Err(Error::hypothesis(format!(
            "no γ₀ > 0 gives (1+γ₀)θ < 1 for θ = {}",
            rp.theta
        )));
    }
    let gamma0 = 0.5 * (1.0 / rp.theta - 1.0);
    blowup_time_unbounded(&reduce_exponent(rp, gamma0)?, variant)
}

/// `κ^{-η}/η`, the explosion time of `v' = v^{1+η}`, `v(0) = κ`.
pub fn blowup_time_drift(kappa: f64, eta: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(eta > 0.0) {
        return Err(Error::domain(format!(
            "κ and η must be positive, got κ = {kappa}, η = {eta}"
        )));
    }
    Ok(kappa.powf(-eta) / eta)
}

/// Formula versus numerical blow-up for one problem.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupCertificate {
    pub problem: RenewalProblem,
    pub formula_time: f64,
    pub numerical_time: Option<f64>,
    /// numerical blow-up no later than the formula (within `slack`)
    pub ordering_holds: bool,
    pub slack: f64,
}

impl BlowupCertificate {
    pub fn new(problem: RenewalProblem, formula_time: f64, numerical_time: Option<f64>) -> Self {
        let slack = 1e-3;
        let ordering_holds = numerical_time.is_some_and(|t| t <= formula_time * (1.0 + slack));
        BlowupCertificate {
            problem,
            formula_time,
            numerical_time,
            ordering_holds,
            slack,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Writes `t,h` rows.
pub fn write_trajectory<W: Write>(out: W, tr: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "h"])?;
    for (t, h) in tr.times.iter().zip(&tr.values) {
        w.write_record([format!("{t}"), format!("{h:e}")])?;
    }
    w.flush()?;
    Ok(())
}
