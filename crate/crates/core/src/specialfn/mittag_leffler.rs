//! One-parameter Mittag-Leffler function `E_β(x) = Σ x^k / Γ(1 + βk)` on the
//! real line, `0 < β ≤ 1`.
//!
//! Three evaluation routes are combined:
//!
//! * the power series where it does not cancel badly,
//! * the algebraic asymptotic expansion for large negative arguments,
//!   `E_β(-t) = Σ_{k≥1} (-1)^{k+1} t^{-k} / Γ(1 - βk)`, used only when its
//!   terms have dropped below roundoff before they start to grow,
//! * the completely-monotone integral representation in between,
//!   `E_β(-t) = sin(βπ)/(πβ) ∫_0^∞ t e^{-w^{1/β}} / (w² + 2tw cos βπ + t²) dw`.

use std::f64::consts::PI;

use super::{gamma, ln_gamma, recip_gamma_one_minus};
use crate::error::{Error, Result};
use crate::interp::ChebyshevTable;
use crate::quad::{integrate_points, Tolerance};

/// Validated Mittag-Leffler order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    beta: f64,
}

impl MLParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!(
                "Mittag-Leffler order beta = {beta} outside (0, 1]"
            )));
        }
        Ok(MLParams { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// `E_β(x)` to roughly 1e-12 relative accuracy.
pub fn mittag_leffler(beta: f64, x: f64) -> Result<f64> {
    let p = MLParams::new(beta)?;
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "Mittag-Leffler argument {x} not finite"
        )));
    }
    Ok(eval(p.beta, x))
}

fn eval(beta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if beta == 1.0 {
        return x.exp();
    }
    if x > 0.0 {
        return positive(beta, x);
    }
    let t = -x;
    if t.powf(1.0 / beta) <= SERIES_RADIUS {
        return series(beta, x);
    }
    if let Some(v) = asymptotic_negative(beta, t) {
        return v;
    }
    integral_negative(beta, t)
}

// Series cancellation costs about exp(|x|^{1/β}); keep it below ~e^{2.5}.
const SERIES_RADIUS: f64 = 2.5;

fn series(beta: f64, x: f64) -> f64 {
    let ln_abs = x.abs().ln();
    let neg = x < 0.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for k in 1..5000 {
        let kf = k as f64;
        let mag = (kf * ln_abs - ln_gamma(1.0 + beta * kf)).exp();
        let term = if neg && k % 2 == 1 { -mag } else { mag };
        // Kahan summation
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if mag < 1e-17 * sum.abs() && kf * beta > 1.0 {
            break;
        }
    }
    sum
}

fn positive(beta: f64, x: f64) -> f64 {
    let z = x.powf(1.0 / beta);
    if z < 40.0 {
        return series(beta, x);
    }
    // E_β(x) = e^{x^{1/β}}/β - Σ_{k≥1} x^{-k}/Γ(1-βk)
    let mut corr = 0.0;
    for k in 1..20 {
        let term = recip_gamma_one_minus(beta * k as f64) * x.powi(-k);
        corr += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    z.exp() / beta - corr
}

/// Optimally truncated algebraic expansion, if it reaches roundoff.
fn asymptotic_negative(beta: f64, t: f64) -> Option<f64> {
    let mut sum: f64 = 0.0;
    let mut prev = f64::INFINITY;
    let ln_t = t.ln();
    for k in 1..60 {
        let kb = beta * k as f64;
        // 1/Γ(1-βk) = Γ(βk) sin(πβk)/π
        let s = (PI * kb).sin();
        let mag = (ln_gamma(kb) - k as f64 * ln_t).exp() / PI;
        let term = if k % 2 == 1 { mag * s } else { -mag * s };
        if mag > prev && mag > 1e-18 * sum.abs() {
            return None;
        }
        sum += term;
        if mag < 1e-17 * sum.abs() {
            return Some(sum);
        }
        prev = mag;
    }
    None
}

fn integral_negative(beta: f64, t: f64) -> f64 {
    let c = (PI * beta).cos();
    // w² + 2tw cos βπ + t² written without cancellation near w = t
    let one_plus_cos = 2.0 * (0.5 * PI * beta).cos().powi(2);
    let integrand = |w: f64| {
        let e = (-w.powf(1.0 / beta)).exp();
        if e == 0.0 {
            return 0.0;
        }
        let denom = if c < 0.0 {
            (w - t).powi(2) + 2.0 * t * w * one_plus_cos
        } else {
            w * w + 2.0 * t * w * c + t * t
        };
        t * e / denom
    };
    let upper = 60f64.powf(beta);
    let mut pts = vec![0.0, 1.0f64.min(upper)];
    if t < upper {
        pts.push(t);
        let width = t * (PI * beta).sin();
        for off in [-width, width] {
            if t + off > 0.0 && t + off < upper {
                pts.push(t + off);
            }
        }
    }
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let tol = Tolerance::new(1e-300, 1e-13).with_max_intervals(4000);
    let est = match integrate_points(integrand, &pts, tol) {
        Ok(e) => e.value,
        Err(Error::Quadrature { value, .. }) => value,
        Err(_) => unreachable!(),
    };
    (PI * beta).sin() / (PI * beta) * est
}

/// Two-sided uniform bounds
/// `1/(1 + Γ(1-β) t) ≤ E_β(-t) ≤ 1/(1 + t/Γ(1+β))`.
pub fn ml_uniform_bounds(beta: f64, t: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!(
            "uniform bounds need beta in (0, 1), got {beta}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "uniform bounds need t >= 0, got {t}"
        )));
    }
    let lower = 1.0 / (1.0 + gamma(1.0 - beta) * t);
    let upper = 1.0 / (1.0 + t / gamma(1.0 + beta));
    Ok((lower, upper))
}

/// Fast evaluator of `t ↦ E_β(-t)` on `t ≥ 0` for repeated use.
///
/// `ln E_β(-e^s)` is tabulated with piecewise Chebyshev polynomials between
/// `t = 1e-6` and the point where the asymptotic expansion takes over.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    beta: f64,
    table: Option<ChebyshevTable>,
    t_lo: f64,
    t_hi: f64,
    // coefficients of the algebraic tail, (-1)^{k+1}/Γ(1-βk)
    tail: Vec<f64>,
    c1: f64,
    c2: f64,
}

impl MittagLeffler {
    pub fn new(beta: f64) -> Result<Self> {
        let p = MLParams::new(beta)?;
        let beta = p.beta;
        let c1 = 1.0 / gamma(1.0 + beta);
        let c2 = 1.0 / gamma(1.0 + 2.0 * beta);
        if beta == 1.0 {
            return Ok(MittagLeffler {
                beta,
                table: None,
                t_lo: 0.0,
                t_hi: 0.0,
                tail: Vec::new(),
                c1,
                c2,
            });
        }
        // smallest t (on a doubling grid) from which the expansion is exact
        let mut t_hi = 4.0;
        while asymptotic_negative(beta, t_hi).is_none() {
            t_hi *= 1.5;
        }
        let tail = (1..60)
            .map(|k| {
                let r = recip_gamma_one_minus(beta * k as f64);
                if k % 2 == 1 {
                    r
                } else {
                    -r
                }
            })
            .collect();
        let t_lo: f64 = 1e-6;
        let (s_lo, s_hi) = (t_lo.ln(), t_hi.ln());
        let panels = ((s_hi - s_lo) / 0.25).ceil() as usize;
        let table =
            ChebyshevTable::build(|s: f64| eval(beta, -s.exp()).ln(), s_lo, s_hi, panels, 14);
        Ok(MittagLeffler {
            beta,
            table: Some(table),
            t_lo,
            t_hi,
            tail,
            c1,
            c2,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `E_β(-t)` for `t ≥ 0`.
    pub fn neg(&self, t: f64) -> f64 {
        let Some(table) = &self.table else {
            return (-t).exp();
        };
        if t <= self.t_lo {
            return 1.0 - self.c1 * t + self.c2 * t * t;
        }
        if t >= self.t_hi {
            let inv = 1.0 / t;
            let mut pow = inv;
            let mut sum = 0.0;
            for c in &self.tail {
                let term = c * pow;
                sum += term;
                // coefficients vanish where βk is an integer
                if term != 0.0 && term.abs() < 1e-17 * sum.abs() {
                    break;
                }
                pow *= inv;
            }
            return sum;
        }
        table.eval(t.ln()).exp()
    }

    /// Point beyond which the algebraic expansion is used.
    pub fn asymptotic_threshold(&self) -> f64 {
        self.t_hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(mittag_leffler(0.5, 0.0).unwrap(), 1.0);
        let v = mittag_leffler(1.0, -1.0).unwrap();
        assert!((v - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn half_order_matches_erfc_identity() {
        // E_{1/2}(-z) = exp(z²) erfc(z), erfc from an independent implementation
        for &z in &[0.1f64, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 20.0] {
            let exact = (z * z).exp() * libm::erfc(z);
            let v = mittag_leffler(0.5, -z).unwrap();
            assert!(
                ((v - exact) / exact).abs() < 1e-10,
                "z={z} v={v} exact={exact}"
            );
        }
    }

    #[test]
    fn beta_one_is_exponential() {
        for i in 0..=350 {
            let x = -30.0 + i as f64 * 0.1;
            let v = mittag_leffler(1.0, x).unwrap();
            assert!((v - x.exp()).abs() <= 1e-12 * x.exp().max(1e-300));
        }
    }

    #[test]
    fn routes_agree_on_overlap() {
        for &beta in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.97] {
            // series vs integral near the series radius
            let t = SERIES_RADIUS.powf(beta) * 0.95;
            let s = series(beta, -t);
            let i = integral_negative(beta, t);
            assert!(((s - i) / i).abs() < 1e-9, "beta={beta}: {s} vs {i}");
            // expansion vs integral where the expansion first applies
            let ml = MittagLeffler::new(beta).unwrap();
            let t = ml.asymptotic_threshold() * 1.01;
            let a = asymptotic_negative(beta, t).unwrap();
            let i = integral_negative(beta, t);
            assert!(((a - i) / i).abs() < 1e-9, "beta={beta}: {a} vs {i}");
        }
    }

    #[test]
    fn positive_branch_continuity() {
        let beta = 0.5;
        let x = 40f64.powf(beta);
        let below = eval(beta, x * (1.0 - 1e-9));
        let above = eval(beta, x * (1.0 + 1e-9));
        assert!(((below - above) / above).abs() < 1e-6);
        // E_{1/2}(z) = exp(z²) erfc(-z)
        let z: f64 = 1.3;
        let exact = (z * z).exp() * libm::erfc(-z);
        assert!(((eval(0.5, z) - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn fast_evaluator_matches_direct() {
        for &beta in &[0.1, 0.25, 0.5, 0.75, 0.95] {
            let ml = MittagLeffler::new(beta).unwrap();
            for i in 0..400 {
                let t = 10f64.powf(-8.0 + 12.0 * i as f64 / 399.0);
                let direct = eval(beta, -t);
                let fast = ml.neg(t);
                assert!(
                    ((fast - direct) / direct).abs() < 1e-11,
                    "beta={beta} t={t} {fast} {direct}"
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(mittag_leffler(0.0, 1.0).is_err());
        assert!(mittag_leffler(1.5, 1.0).is_err());
        assert!(ml_uniform_bounds(1.0, 1.0).is_err());
        assert!(ml_uniform_bounds(0.5, -1.0).is_err());
    }

    #[test]
    fn uniform_bounds_values() {
        let (lo, hi) = ml_uniform_bounds(0.5, 0.0).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
        let (lo, hi) = ml_uniform_bounds(0.5, 1.0).unwrap();
        let sqrt_pi = PI.sqrt();
        assert!((lo - 1.0 / (1.0 + sqrt_pi)).abs() < 1e-14);
        assert!((hi - 1.0 / (1.0 + 1.0 / (sqrt_pi / 2.0))).abs() < 1e-14);
        let e = mittag_leffler(0.5, -1.0).unwrap();
        assert!(lo <= e && e <= hi);
        assert!((lo - 0.3607).abs() < 1e-4 && (hi - 0.4699).abs() < 1e-4);
    }
}
