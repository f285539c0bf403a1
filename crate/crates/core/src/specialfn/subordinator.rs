//! One-sided β-stable law (the value `D_1` of the subordinator at time one,
//! Laplace transform `e^{-s^β}`) and the density of its inverse `E_t`.

use std::f64::consts::PI;

use super::ln_gamma;
use crate::error::{Error, Result};
use crate::quad::{integrate_points, Tolerance};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0,1), got {beta}")));
    }
    Ok(())
}

/// Density `g_β(u)` of the one-sided stable law with `E e^{-sD} = e^{-s^β}`.
pub fn subordinator_density(beta: f64, u: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("u must be positive, got {u}")));
    }
    let x = u.powf(-beta);
    if x <= 0.5 {
        Ok(series(beta, u, x))
    } else {
        zolotarev(beta, u)
    }
}

// Humbert–Pollard expansion in x = u^{-β}; used for the heavy tail.
fn series(beta: f64, u: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let lnx = x.ln();
    for k in 1..200 {
        let kf = k as f64;
        let s = (kf * PI * beta).sin();
        let mag = (ln_gamma(kf * beta + 1.0) - ln_gamma(kf + 1.0) + kf * lnx).exp();
        let term = if k % 2 == 1 { mag * s } else { -mag * s };
        sum += term;
        if mag < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (PI * u)
}

// ln A(φ) with A(φ) = (sin βφ / sin φ)^{1/(1-β)} sin((1-β)φ) / sin βφ.
fn ln_zolotarev_a(beta: f64, phi: f64) -> f64 {
    let sb = (beta * phi).sin().ln();
    (sb - phi.sin().ln()) / (1.0 - beta) + ((1.0 - beta) * phi).sin().ln() - sb
}

// g(u) = β/((1-β)π) u^{-1/(1-β)} ∫_0^π A e^{-c A} dφ, c = u^{-β/(1-β)}.
fn zolotarev(beta: f64, u: f64) -> Result<f64> {
    let c = u.powf(-beta / (1.0 - beta));
    let ln_a0 = beta.ln() * beta / (1.0 - beta) + (1.0 - beta).ln();
    let a0 = ln_a0.exp();
    let ln_pref = (beta / ((1.0 - beta) * PI)).ln() - u.ln() / (1.0 - beta) - c * a0;
    // the integral is at most π max(A_0, 1/c); skip it when the result underflows
    if ln_pref + (PI * a0.max(1.0 / c)).ln() < -750.0 {
        return Ok(0.0);
    }
    let integrand = |phi: f64| {
        let la = if phi < 1e-6 {
            ln_a0
        } else if phi >= PI {
            return 0.0;
        } else {
            ln_zolotarev_a(beta, phi)
        };
        let a = la.exp();
        let v = (la - c * (a - a0)).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let points = [0.0, 1e-3 * PI, 1e-2 * PI, 0.1 * PI, 0.4 * PI, 0.8 * PI, PI];
    let value = match integrate_points(integrand, &points, Tolerance::new(1e-300, 1e-13)) {
        Ok(est) => est.value,
        // roundoff-limited but still far inside the 1e-8 target
        Err(Error::Quadrature { value, error, .. }) if error <= 1e-10 * value.abs() => value,
        Err(e) => return Err(e),
    };
    Ok(value * ln_pref.exp())
}

/// Density of the inverse subordinator `E_t` at `x > 0`:
/// `f(x) = t β^{-1} x^{-1-1/β} g_β(t x^{-1/β})`.
pub fn inverse_subordinator_density(beta: f64, t: f64, x: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    let u = t * x.powf(-1.0 / beta);
    if u == f64::INFINITY {
        // x -> 0+ limit
        return Ok(t.powf(-beta) * super::recip_gamma_one_minus(beta));
    }
    let g = subordinator_density(beta, u)?;
    Ok(t / beta * x.powf(-1.0 - 1.0 / beta) * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::gamma;

    fn levy_half(u: f64) -> f64 {
        u.powf(-1.5) * (-0.25 / u).exp() / (2.0 * PI.sqrt())
    }

    #[test]
    fn matches_half_closed_form() {
        for i in 0..=80 {
            let u = 10f64.powf(-2.0 + 6.0 * i as f64 / 80.0);
            let exact = levy_half(u);
            let got = subordinator_density(0.5, u).unwrap();
            assert!(
                (got - exact).abs() <= 1e-8 * exact + 1e-300,
                "u={u} got={got} exact={exact}"
            );
        }
        assert!((subordinator_density(0.5, 1.0).unwrap() - 0.2197).abs() < 1e-4);
    }

    #[test]
    fn branches_agree_at_switch() {
        for &beta in &[0.2, 0.45, 0.7, 0.9] {
            let u = 2f64.powf(1.0 / beta);
            let x = u.powf(-beta);
            let a = series(beta, u, x);
            let b = zolotarev(beta, u).unwrap();
            assert!((a - b).abs() < 1e-11 * a, "beta={beta} {a} {b}");
        }
    }

    #[test]
    fn heavy_tail_constant() {
        for &beta in &[0.3, 0.5, 0.8] {
            let u: f64 = 1e3;
            let g = subordinator_density(beta, u).unwrap();
            let tail = beta / gamma(1.0 - beta) * u.powf(-beta - 1.0);
            assert!(
                (g / tail - 1.0).abs() < 0.1,
                "beta={beta} ratio={}",
                g / tail
            );
        }
        let u: f64 = 1e8;
        let g = subordinator_density(0.5, u).unwrap();
        assert!((g * u.powf(1.5) * 2.0 * PI.sqrt() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn inverse_density_half_closed_form() {
        for &t in &[0.5, 1.0, 4.0] {
            for &x in &[0.01f64, 0.3, 1.0, 2.5, 6.0] {
                let exact = (-x * x / (4.0 * t)).exp() / (PI * t).sqrt();
                let got = inverse_subordinator_density(0.5, t, x).unwrap();
                assert!((got - exact).abs() < 1e-8 * exact.max(1e-3), "t={t} x={x}");
            }
        }
        let near0 = inverse_subordinator_density(0.5, 4.0, 1e-9).unwrap();
        assert!((near0 - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn domain_errors() {
        assert!(subordinator_density(1.0, 1.0).is_err());
        assert!(subordinator_density(0.5, 0.0).is_err());
        assert!(inverse_subordinator_density(0.5, 1.0, -1.0).is_err());
        assert!(inverse_subordinator_density(0.5, 0.0, 1.0).is_err());
    }
}
