use std::f64::consts::PI;

use super::ModelParams;
use crate::error::{Error, Result};
use crate::quad::{integrate_points, Tolerance};
use crate::specialfn::{recip_gamma_one_minus, sphere_area, MittagLeffler};

/// `C*` in `∫ G_t(x)² dx = C* t^{-βd/α}`:
/// `ν^{-d/α} S_{d-1} / (α (2π)^d) ∫_0^∞ z^{d/α-1} E_β(-z)² dz`.
pub fn cstar(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    p.check_l2()?;
    let s = p.d as f64 / p.alpha;
    let ml = MittagLeffler::new(p.beta)?;
    // z = w^{1/s} turns z^{s-1} dz into dw/s
    let z_end = if p.beta == 1.0 {
        40.0
    } else {
        2.0 * ml.asymptotic_threshold()
    };
    let w_end = z_end.powf(s);
    let f = |w: f64| {
        let e = ml.neg(w.powf(1.0 / s));
        e * e
    };
    let mut pts = vec![0.0];
    let mut w = 1e-3 * w_end;
    while w < w_end {
        pts.push(w);
        w *= 3.0;
    }
    pts.push(w_end);
    let head = integrate_points(f, &pts, Tolerance::new(1e-14, 1e-12))?.value / s;
    let tail = if p.beta == 1.0 {
        0.0
    } else {
        // E² = Σ_m b_m z^{-m}, b_m = Σ_{k+j=m} a_k a_j, a_k = (-1)^{k+1}/Γ(1-βk)
        let a: Vec<f64> = (1..40)
            .map(|k| {
                let r = recip_gamma_one_minus(p.beta * k as f64);
                if k % 2 == 1 {
                    r
                } else {
                    -r
                }
            })
            .collect();
        let mut tail = 0.0;
        for m in 2..40 {
            let b: f64 = (1..m).map(|k| a[k - 1] * a[m - k - 1]).sum();
            let term = b * z_end.powf(s - m as f64) / (m as f64 - s);
            tail += term;
            if b != 0.0 && term.abs() < 1e-17 * head {
                break;
            }
        }
        tail
    };
    let integral = head + tail;
    if !(integral > 0.0) {
        return Err(Error::Quadrature {
            value: integral,
            error: f64::NAN,
            evaluations: 0,
        });
    }
    Ok(p.nu.powf(-s) * sphere_area(p.d) / (p.alpha * (2.0 * PI).powf(p.d as f64)) * integral)
}

/// `‖G_t‖²_{L²} = C* t^{-βd/α}`.
pub fn l2_norm(p: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    Ok(cstar(p)? * t.powf(-p.theta()))
}
