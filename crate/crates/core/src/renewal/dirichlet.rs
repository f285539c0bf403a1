use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirichletRegime {
    /// β(1+η) < 1
    Sub,
    /// β(1+η) = 1
    Critical,
    /// β(1+η) > 1
    Super,
}

/// `P(t) ≥ C₃ + C₄ ∫_1^t P(s)^{1+η} s^{-β(1+η)} ds`, `t ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletRenewal {
    pub c3: f64,
    pub c4: f64,
    pub eta: f64,
    pub beta: f64,
    pub regime: DirichletRegime,
}

impl DirichletRenewal {
    pub fn new(c3: f64, c4: f64, eta: f64, beta: f64) -> Result<Self> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(c3) || !pos(c4) || !pos(eta) || !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!(
                "need C3, C4, η > 0 and β ∈ (0,1], got {c3}, {c4}, {eta}, {beta}"
            )));
        }
        let q = beta * (1.0 + eta);
        let regime = if q < 1.0 {
            DirichletRegime::Sub
        } else if q == 1.0 {
            DirichletRegime::Critical
        } else {
            DirichletRegime::Super
        };
        Ok(DirichletRenewal {
            c3,
            c4,
            eta,
            beta,
            regime,
        })
    }

    fn q(&self) -> f64 {
        self.beta * (1.0 + self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DirichletOutcome {
    ClosedForm(f64),
    Numerical(f64),
    /// the solution stays finite up to the integration horizon
    NoBlowup {
        horizon: f64,
    },
}

impl DirichletOutcome {
    pub fn time(&self) -> Option<f64> {
        match *self {
            DirichletOutcome::ClosedForm(t) | DirichletOutcome::Numerical(t) => Some(t),
            DirichletOutcome::NoBlowup { .. } => None,
        }
    }
}

/// Blow-up time of the equality case; closed form for β(1+η) < 1, otherwise
/// an adaptive integration of `P' = C₄ P^{1+η} t^{-β(1+η)}`, `P(1) = C₃`.
pub fn dirichlet_blowup_time(dr: &DirichletRenewal) -> DirichletOutcome {
    let q = dr.q();
    if dr.regime == DirichletRegime::Sub {
        let e = 1.0 - q;
        let t0 = (1.0 + dr.c3.powf(-dr.eta) / (dr.eta * dr.c4) * e).powf(1.0 / e);
        return DirichletOutcome::ClosedForm(t0);
    }
    integrate_ode(dr, 1e12, 1e8)
}

fn integrate_ode(dr: &DirichletRenewal, threshold: f64, horizon: f64) -> DirichletOutcome {
    let q = dr.q();
    let rhs = |t: f64, p: f64| dr.c4 * p.powf(1.0 + dr.eta) * t.powf(-q);
    let rk4 = |t: f64, p: f64, h: f64| {
        let k1 = rhs(t, p);
        let k2 = rhs(t + h / 2.0, p + h / 2.0 * k1);
        let k3 = rhs(t + h / 2.0, p + h / 2.0 * k2);
        let k4 = rhs(t + h, p + h * k3);
        p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let (mut t, mut p) = (1.0, dr.c3);
    let mut h = 1e-3;
    while t < horizon {
        // step doubling; relative local error 1e-10
        let full = rk4(t, p, h);
        let half = rk4(t + h / 2.0, rk4(t, p, h / 2.0), h / 2.0);
        let err = (full - half).abs() / half.abs();
        if !half.is_finite() || err > 1e-10 {
            h /= 2.0;
            if h < 1e-15 * t {
                break;
            }
            continue;
        }
        t += h;
        p = half + (half - full) / 15.0;
        if p > threshold {
            // near blow-up P^{-η} falls linearly at rate η C₄ t^{-q}
            let rest = p.powf(-dr.eta) / (dr.eta * dr.c4 * t.powf(-q));
            return DirichletOutcome::Numerical(t + rest);
        }
        if err < 1e-12 {
            h *= 2.0;
        }
    }
    if p > threshold / 1e3 {
        let rest = p.powf(-dr.eta) / (dr.eta * dr.c4 * t.powf(-q));
        return DirichletOutcome::Numerical(t + rest);
    }
    DirichletOutcome::NoBlowup { horizon }
}
