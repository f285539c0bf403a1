//! Bessel functions of integer and half-integer order, as needed for radial
//! Fourier transforms in `R^d`.

use std::f64::consts::PI;

use super::gamma;

/// `J_ν(z)` for `ν = two_nu / 2 ≥ -1/2` and `z ≥ 0`.
pub fn bessel_j(two_nu: i32, z: f64) -> f64 {
    assert!(two_nu >= -1, "order below -1/2 not supported");
    let nu = two_nu as f64 / 2.0;
    if z < 2.0 + nu.max(0.0) {
        return series(nu, z);
    }
    if two_nu % 2 == 0 {
        return libm::jn(two_nu / 2, z);
    }
    // half-integer orders through spherical Bessel functions
    let scale = (2.0 / (PI * z)).sqrt();
    if two_nu == -1 {
        return scale * z.cos();
    }
    let n = ((two_nu - 1) / 2) as usize;
    scale * z * spherical_jn(n, z)
}

fn series(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * z;
    let mut term = h.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for m in 1..200 {
        let mf = m as f64;
        term *= -h * h / (mf * (mf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

// upward recurrence, stable for z > n
fn spherical_jn(n: usize, z: f64) -> f64 {
    let (s, c) = z.sin_cos();
    let mut j0 = s / z;
    if n == 0 {
        return j0;
    }
    let mut j1 = s / (z * z) - c / z;
    for k in 1..n {
        let j2 = (2 * k + 1) as f64 / z * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    j1
}

/// Average of `e^{iξ·y}` over the unit sphere, as a function of `z = |ξ||y|`:
/// `Γ(d/2) (2/z)^{d/2-1} J_{d/2-1}(z)`, equal to 1 at `z = 0`.
pub fn spherical_mean(d: usize, z: f64) -> f64 {
    let z = z.abs();
    match d {
        1 => return z.cos(),
        3 => {
            return if z < 1e-4 {
                1.0 - z * z / 6.0 + z.powi(4) / 120.0
            } else {
                z.sin() / z
            }
        }
        _ => {}
    }
    let half_d = d as f64 / 2.0;
    if z < 2.0 {
        let h2 = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..100 {
            let mf = m as f64;
            term *= -h2 / (mf * (mf + half_d - 1.0));
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        return sum;
    }
    gamma(half_d) * (2.0 / z).powf(half_d - 1.0) * bessel_j(d as i32 - 2, z)
}

/// Fourier transform of the indicator of the ball of radius `rho`,
/// `∫_{|y|<ρ} e^{iξ·y} dy = (2πρ/k)^{d/2} J_{d/2}(kρ)` with `k = |ξ|`.
pub fn ball_transform(d: usize, k: f64, rho: f64) -> f64 {
    let half_d = d as f64 / 2.0;
    let z = (k * rho).abs();
    match d {
        1 if z > 1e-3 => return 2.0 * (k * rho).sin() / k,
        3 if z > 0.1 => {
            return 4.0 * PI * ((k * rho).sin() - k * rho * (k * rho).cos()) / (k * k * k)
        }
        _ => {}
    }
    if z < 2.0 {
        let h2 = 0.25 * z * z;
        let mut term = 1.0 / gamma(half_d + 1.0);
        let mut sum = term;
        for m in 1..100 {
            let mf = m as f64;
            term *= -h2 / (mf * (mf + half_d));
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return rho.powi(d as i32) * PI.powf(half_d) * sum;
    }
    (2.0 * PI * rho / k).powf(half_d) * bessel_j(d as i32, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_orders_match_closed_forms() {
        for &z in &[0.3, 1.0, 2.5, 7.0, 30.0] {
            let j12 = (2.0 / (PI * z)).sqrt() * z.sin();
            assert!((bessel_j(1, z) - j12).abs() < 1e-13, "z={z}");
            let j32 = (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos());
            assert!((bessel_j(3, z) - j32).abs() < 1e-13, "z={z}");
        }
    }

    #[test]
    fn integer_orders_continuous_across_switch() {
        for two_nu in [0, 2, 4] {
            let z0 = 2.0 + two_nu as f64 / 2.0;
            let a = series(two_nu as f64 / 2.0, z0);
            let b = libm::jn(two_nu / 2, z0);
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn spherical_mean_low_dimensions() {
        for &z in &[0.0, 0.5, 1.9, 2.1, 6.0] {
            assert!((spherical_mean(2, z) - libm::j0(z)).abs() < 1e-13);
            assert!((spherical_mean(1, z) - z.cos()).abs() < 1e-15);
        }
        // d = 4: 2 J_1(z)/z
        let z = 3.3;
        assert!((spherical_mean(4, z) - 2.0 * libm::j1(z) / z).abs() < 1e-13);
    }

    #[test]
    fn ball_transform_at_zero_is_volume() {
        assert!((ball_transform(1, 0.0, 2.0) - 4.0).abs() < 1e-14);
        assert!((ball_transform(2, 1e-9, 1.0) - PI).abs() < 1e-12);
        assert!((ball_transform(3, 0.0, 1.0) - 4.0 * PI / 3.0).abs() < 1e-12);
        // d=2 branch switch continuity
        let a = ball_transform(2, 1.999_999, 1.0);
        let b = ball_transform(2, 2.000_001, 1.0);
        assert!((a - b).abs() < 1e-5);
    }
}
