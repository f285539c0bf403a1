//! Scalar special functions behind every kernel evaluation.

mod bessel;
mod mittag_leffler;
mod stable;
mod subordinator;

pub use bessel::{ball_transform, bessel_j, spherical_mean};
pub use mittag_leffler::{mittag_leffler, ml_uniform_bounds, MLParams, MittagLeffler};
pub use stable::{stable_density, stable_profile, StableParams};
pub use subordinator::{inverse_subordinator_density, subordinator_density};

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `1/Γ(1 - a)` for `a > 0`, via reflection so that poles give exact zeros.
pub(crate) fn recip_gamma_one_minus(a: f64) -> f64 {
    if a.fract() == 0.0 {
        return 0.0;
    }
    gamma(a) * (PI * a).sin() / PI
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}
