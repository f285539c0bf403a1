use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specialfn::{gamma, recip_gamma_one_minus, MittagLeffler};

pub type BasisFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;
pub type ResolventFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Dirichlet eigenpairs `(μ_n, φ_n)` of the generator on `B(0, R)`.
///
/// The tail of the eigen-series is controlled through `sup_bound ≥ sup|φ_n|`
/// and a Weyl-type growth `μ_n ≥ μ_N (n/N)^p` for `n > N`. When the Green
/// function `g(x, y) = Σ φ_n(x)φ_n(y)/μ_n` of the generator is known, the
/// leading `1/(Γ(1-β) z)` part of the Mittag-Leffler tail is summed exactly.
#[derive(Clone)]
pub struct EigenPairs {
    mu: Vec<f64>,
    radius: f64,
    dim: usize,
    basis: BasisFn,
    sup_bound: f64,
    weyl_exponent: f64,
    resolvent: Option<ResolventFn>,
}

impl fmt::Debug for EigenPairs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenPairs")
            .field("n", &self.mu.len())
            .field("mu_1", &self.mu.first())
            .field("radius", &self.radius)
            .field("dim", &self.dim)
            .field("sup_bound", &self.sup_bound)
            .field("weyl_exponent", &self.weyl_exponent)
            .field("resolvent", &self.resolvent.is_some())
            .finish()
    }
}

impl EigenPairs {
    pub fn new(
        mu: Vec<f64>,
        radius: f64,
        dim: usize,
        basis: BasisFn,
        sup_bound: f64,
        weyl_exponent: f64,
    ) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::domain("need at least one eigenpair"));
        }
        if !(mu[0] > 0.0) || mu.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "eigenvalues must be positive and strictly increasing",
            ));
        }
        if !(radius > 0.0) || dim == 0 {
            return Err(Error::domain("radius must be positive and dim at least 1"));
        }
        if !(sup_bound > 0.0) || !(weyl_exponent > 1.0) {
            return Err(Error::domain(
                "sup bound must be positive and the Weyl exponent above 1",
            ));
        }
        Ok(EigenPairs {
            mu,
            radius,
            dim,
            basis,
            sup_bound,
            weyl_exponent,
            resolvent: None,
        })
    }

    pub fn with_resolvent(mut self, g: ResolventFn) -> Self {
        self.resolvent = Some(g);
        self
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `φ_n(x)`, zero-based `n`.
    pub fn phi(&self, n: usize, x: &[f64]) -> f64 {
        (self.basis)(n, x)
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().map(|v| v * v).sum::<f64>() <= self.radius * self.radius
    }
}

/// First `n` Dirichlet eigenpairs of `-ν ∂²` on `(-R, R)`:
/// `μ_n = ν (nπ/2R)²`, `φ_n(x) = R^{-1/2} sin(nπ(x+R)/2R)`.
pub fn dirichlet_eigenpairs_interval(radius: f64, nu: f64, n: usize) -> Result<EigenPairs> {
    if n == 0 {
        return Err(Error::domain("need N ≥ 1 eigenpairs"));
    }
    if !(radius > 0.0) || !(nu > 0.0) {
        return Err(Error::domain("radius and nu must be positive"));
    }
    let mu = (1..=n)
        .map(|k| nu * (k as f64 * PI / (2.0 * radius)).powi(2))
        .collect();
    let norm = radius.powf(-0.5);
    let basis: BasisFn =
        Arc::new(move |k, x| norm * ((k + 1) as f64 * PI * (x[0] + radius) / (2.0 * radius)).sin());
    let resolvent: ResolventFn = Arc::new(move |x, y| {
        let (lo, hi) = if x[0] < y[0] {
            (x[0], y[0])
        } else {
            (y[0], x[0])
        };
        (radius + lo) * (radius - hi) / (2.0 * radius * nu)
    });
    Ok(EigenPairs::new(mu, radius, 1, basis, norm, 2.0)?.with_resolvent(resolvent))
}

/// Truncated eigen-sum with its rigorous tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KilledSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `sup_z z² |E_β(-z) - 1/(Γ(1-β) z)|`, sampled with a safety margin.
fn second_order_constant(ml: &MittagLeffler, beta: f64) -> f64 {
    let lead = recip_gamma_one_minus(beta);
    let mut c: f64 = 0.0;
    for i in 0..=2000 {
        let z = 10f64.powf(-3.0 + 8.0 * i as f64 / 2000.0);
        c = c.max(z * z * (ml.neg(z) - lead / z).abs());
    }
    // z → ∞ limit is 1/|Γ(1-2β)|
    c = c.max(recip_gamma_one_minus(2.0 * beta).abs());
    c * 1.05
}

/// `G_B(t, x, y) = Σ_n E_β(-μ_n t^β) φ_n(x) φ_n(y)`, truncated as soon as the
/// tail bound drops below `tol`.
pub fn killed_green_with_tol(
    ep: &EigenPairs,
    beta: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<KilledSum> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0,1], got {beta}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if !ep.contains(x) || !ep.contains(y) {
        return Err(Error::domain("points must lie in the ball"));
    }
    let ml = MittagLeffler::new(beta)?;
    let tb = t.powf(beta);
    let p = ep.weyl_exponent;
    let sup2 = ep.sup_bound * ep.sup_bound;
    let c2 = ep
        .resolvent
        .as_ref()
        .map(|_| second_order_constant(&ml, beta));
    let g_xy = ep.resolvent.as_ref().map(|g| g(x, y));
    let lead = recip_gamma_one_minus(beta);

    let mut value = 0.0;
    let mut partial_resolvent = 0.0;
    let mut best = f64::INFINITY;
    for (n, &mu) in ep.mu.iter().enumerate() {
        let pp = ep.phi(n, x) * ep.phi(n, y);
        let z = mu * tb;
        value += ml.neg(z) * pp;
        partial_resolvent += pp / mu;
        let count = (n + 1) as f64;
        let (correction, bound) = match (g_xy, c2) {
            // z_n ≥ z_N (1 + p(n-N)/N) gives a geometric tail
            _ if beta == 1.0 => (0.0, sup2 * (-z).exp() / (z * p / count).exp_m1()),
            (Some(g), Some(c2)) => (
                lead * (g - partial_resolvent) / tb,
                sup2 * c2 * count / (z * z * (2.0 * p - 1.0)),
            ),
            _ => (0.0, sup2 * gamma(1.0 + beta) * count / (z * (p - 1.0))),
        };
        best = best.min(bound);
        if bound <= tol {
            return Ok(KilledSum {
                value: value + correction,
                tail_bound: bound,
                terms: n + 1,
            });
        }
    }
    Err(Error::Truncation(format!(
        "{} eigenpairs leave a tail bound of {best:e} above tolerance {tol:e} at t = {t}",
        ep.len()
    )))
}

/// [`killed_green_with_tol`] at tolerance `1e-8`, returning the value only.
pub fn killed_green(ep: &EigenPairs, beta: f64, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(killed_green_with_tol(ep, beta, t, x, y, 1e-8)?.value)
}
