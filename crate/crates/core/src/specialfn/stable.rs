//! Isotropic α-stable densities on `R^d`, symbol `e^{-tν|ξ|^α}`.

use std::f64::consts::PI;

use super::{gamma, ln_gamma, sphere_area, spherical_mean, subordinator_density};
use crate::error::{Error, Result};
use crate::quad::{integrate_points, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub nu: f64,
    pub d: usize,
}

impl StableParams {
    pub fn new(alpha: f64, nu: f64, d: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!(
                "alpha must lie in (0,2], got {alpha}"
            )));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::domain(format!("nu must be positive, got {nu}")));
        }
        if d == 0 {
            return Err(Error::domain("dimension must be at least 1"));
        }
        Ok(StableParams { alpha, nu, d })
    }
}

/// `p(t, x) = (tν)^{-d/α} p_1(|x| (tν)^{-1/α})`.
pub fn stable_density(params: StableParams, t: f64, x: &[f64]) -> Result<f64> {
    let params = StableParams::new(params.alpha, params.nu, params.d)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if x.len() != params.d {
        return Err(Error::domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            params.d
        )));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tau = t * params.nu;
    let scale = tau.powf(-1.0 / params.alpha);
    Ok(scale.powi(params.d as i32) * stable_profile(params.alpha, params.d, r * scale)?)
}

/// Radial profile of the standard density, the inverse transform of
/// `e^{-|ξ|^α}` at distance `r`.
pub fn stable_profile(alpha: f64, d: usize, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) || d == 0 {
        return Err(Error::domain(format!(
            "invalid stable parameters alpha={alpha}, d={d}"
        )));
    }
    let r = r.abs();
    let df = d as f64;
    if alpha == 2.0 {
        return Ok((4.0 * PI).powf(-df / 2.0) * (-r * r / 4.0).exp());
    }
    if alpha == 1.0 {
        let h = (df + 1.0) / 2.0;
        return Ok(gamma(h) * PI.powf(-h) * (1.0 + r * r).powf(-h));
    }
    if r == 0.0 {
        return Ok(sphere_area(d) * gamma(df / alpha) / (alpha * (2.0 * PI).powf(df)));
    }
    if let Some(v) = small_r_series(alpha, d, r) {
        return Ok(v);
    }
    if let Some(v) = large_r_series(alpha, d, r) {
        return Ok(v);
    }
    // the Hankel integral is cheap when e^{-k^α} dies within a few hundred half periods
    if 40f64.powf(1.0 / alpha) * r / PI < 400.0 {
        return hankel(alpha, d, r);
    }
    subordinated(alpha, d, r)
}

// p_1(r) = 2^{1-d} π^{-d/2} Σ_m (-1)^m (r/2)^{2m} Γ((2m+d)/α) / (α m! Γ(m+d/2)),
// convergent for α > 1; rejected when cancellation would eat the accuracy.
fn small_r_series(alpha: f64, d: usize, r: f64) -> Option<f64> {
    if alpha <= 1.0 {
        return None;
    }
    let df = d as f64;
    let lh = (r / 2.0).ln();
    let mut sum = 0.0;
    let mut biggest: f64 = 0.0;
    for m in 0..400 {
        let mf = m as f64;
        let lt = 2.0 * mf * lh + ln_gamma((2.0 * mf + df) / alpha)
            - ln_gamma(mf + 1.0)
            - ln_gamma(mf + df / 2.0);
        let term = lt.exp();
        biggest = biggest.max(term);
        sum += if m % 2 == 0 { term } else { -term };
        if m > 2 && term < 1e-17 * sum.abs() {
            if biggest > 1e3 * sum.abs() {
                return None;
            }
            return Some(2f64.powf(1.0 - df) * PI.powf(-df / 2.0) * sum / alpha);
        }
    }
    None
}

// p_1(r) = π^{-d/2-1} Σ_{n≥1} (-1)^{n+1}/n! 2^{αn} Γ((αn+d)/2) Γ(1+αn/2) sin(παn/2) r^{-αn-d},
// asymptotic for α > 1 and convergent for α < 1; truncated at the smallest term.
fn large_r_series(alpha: f64, d: usize, r: f64) -> Option<f64> {
    let df = d as f64;
    let lr = r.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut biggest: f64 = 0.0;
    for n in 1..400 {
        let nf = n as f64;
        let an = alpha * nf;
        let lt = an * 2f64.ln() + ln_gamma((an + df) / 2.0) + ln_gamma(1.0 + an / 2.0)
            - ln_gamma(nf + 1.0)
            - an * lr;
        let mag = lt.exp();
        if mag > prev && alpha > 1.0 {
            // divergence sets in before reaching the target accuracy
            return None;
        }
        prev = mag;
        biggest = biggest.max(mag);
        let s = (PI * an / 2.0).sin();
        sum += if n % 2 == 1 { mag * s } else { -mag * s };
        if mag < 1e-16 * sum.abs() {
            if biggest > 1e3 * sum.abs() {
                return None;
            }
            return Some(PI.powf(-df / 2.0 - 1.0) * r.powf(-df) * sum);
        }
    }
    None
}

// Bochner subordination of the heat kernel by the one-sided (α/2)-stable law:
// p_1(r) = ∫ (4πs)^{-d/2} e^{-r²/(4s)} g_{α/2}(s) ds, integrated in ln s.
fn subordinated(alpha: f64, d: usize, r: f64) -> Result<f64> {
    let df = d as f64;
    let beta = alpha / 2.0;
    let r2 = r * r / 4.0;
    let f = |v: f64| {
        let s = v.exp();
        let g = subordinator_density(beta, s).unwrap_or(0.0);
        s * (4.0 * PI * s).powf(-df / 2.0) * (-r2 / s).exp() * g
    };
    let lo_gauss = (r2 / 750.0).ln();
    let lo_g = -(1.0 - beta) / beta * 750f64.ln();
    let lo = lo_gauss.max(lo_g);
    let hi = r2.max(1.0).ln() + 80.0 / (df / 2.0 + beta);
    let n = ((hi - lo).ceil() as usize).max(4);
    let points: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let est = integrate_points(f, &points, Tolerance::new(1e-300, 1e-12))?;
    Ok(est.value)
}

fn hankel(alpha: f64, d: usize, r: f64) -> Result<f64> {
    let df = d as f64;
    let kmax = 40f64.powf(1.0 / alpha);
    let width = PI / r;
    let mut points = vec![0.0];
    let mut k = width;
    while k < kmax {
        points.push(k);
        k += width;
    }
    points.push(kmax);
    // small breakpoints resolve the k^α cusp at the origin
    if alpha < 1.0 && points[1] > 1e-3 {
        points.insert(1, 1e-3);
    }
    let f = |k: f64| (-k.powf(alpha)).exp() * spherical_mean(d, k * r) * k.powi(d as i32 - 1);
    let tol = Tolerance::new(1e-15, 1e-11).with_max_intervals(points.len() * 20 + 2000);
    let est = integrate_points(f, &points, tol)?;
    Ok(sphere_area(d) / (2.0 * PI).powf(df) * est.value)
}
