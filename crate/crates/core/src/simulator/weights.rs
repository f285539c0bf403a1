use std::f64::consts::PI;

use super::Grid;
use crate::error::{Error, Result};
use crate::fftgrid::{GridFft, C64};
use crate::kernel::GreenProfile;
use crate::quad::gauss_legendre;

/// Periodic images summed explicitly on each side; mass beyond them is
/// spread uniformly.
const IMAGES: i64 = 2;

/// Cell masses of `G_lag` on the periodic lattice, indexed by the wrapped
/// offset (site layout). They sum to 1.
pub fn kernel_weights(profile: &GreenProfile, grid: &Grid, lag: f64) -> Result<Vec<f64>> {
    if !(lag > 0.0) {
        return Err(Error::domain(format!(
            "kernel lag must be positive, got {lag}"
        )));
    }
    let n = grid.cells;
    let h = grid.spacing();
    let reach = n as i64 / 2 + IMAGES * n as i64;
    let mut w = vec![0.0; grid.sites()];
    match grid.dim {
        1 => {
            for j in -reach..=reach {
                let c = j as f64 * h;
                let m = profile.segment_mass(lag, c - h / 2.0, c + h / 2.0).max(0.0);
                w[j.rem_euclid(n as i64) as usize] += m;
            }
        }
        _ => {
            let near = gauss_legendre(12);
            let far = gauss_legendre(3);
            let centre = centre_cell_2d(profile, lag, h);
            // one image per side in two dimensions
            let reach = n as i64 / 2 + n as i64;
            for j1 in -reach..=reach {
                for j2 in -reach..=reach {
                    let m = if j1 == 0 && j2 == 0 {
                        centre
                    } else {
                        let rule = if j1.abs().max(j2.abs()) <= 2 {
                            &near
                        } else {
                            &far
                        };
                        cell_mass_2d(profile, lag, j1 as f64 * h, j2 as f64 * h, h, rule)
                    };
                    let k = j1.rem_euclid(n as i64) as usize * n + j2.rem_euclid(n as i64) as usize;
                    w[k] += m;
                }
            }
        }
    }
    let total: f64 = w.iter().sum();
    if total < 1.0 {
        let spread = (1.0 - total) / w.len() as f64;
        w.iter_mut().for_each(|v| *v += spread);
    } else {
        w.iter_mut().for_each(|v| *v /= total);
    }
    Ok(w)
}

/// Mass of the square `[-h/2, h/2]²`: eight triangles in polar form,
/// each contributing `∫_0^{π/4} M((h/2) sec θ) dθ / 2π`.
fn centre_cell_2d(profile: &GreenProfile, lag: f64, h: f64) -> f64 {
    let (x, wq) = gauss_legendre(24);
    let half = PI / 8.0;
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&wq) {
        let th = half * (xi + 1.0);
        s += wi * profile.ball_mass(lag, h / 2.0 / th.cos());
    }
    8.0 * half * s / (2.0 * PI)
}

fn cell_mass_2d(
    profile: &GreenProfile,
    lag: f64,
    c1: f64,
    c2: f64,
    h: f64,
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let (x, wq) = rule;
    let mut s = 0.0;
    for (a, wa) in x.iter().zip(wq) {
        for (b, wb) in x.iter().zip(wq) {
            let (y1, y2) = (c1 + a * h / 2.0, c2 + b * h / 2.0);
            s += wa * wb * profile.density(lag, (y1 * y1 + y2 * y2).sqrt());
        }
    }
    s * h * h / 4.0
}

/// Smallest box half-width whose inscribed ball holds all but `tail` of the
/// kernel mass at time `t`.
pub fn suggest_half_width(profile: &GreenProfile, t: f64, tail: f64) -> Result<f64> {
    if !(t > 0.0) || !(tail > 0.0 && tail < 1.0) {
        return Err(Error::domain("need t > 0 and tail in (0, 1)"));
    }
    let outside = |r: f64| 1.0 - profile.ball_mass(t, r);
    let mut hi = profile.params().scale(t);
    let mut doublings = 0;
    while outside(hi) > tail {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Truncation(format!(
                "kernel tail mass stays above {tail:e} at every radius"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if outside(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Circular convolution with a fixed weight field.
#[derive(Clone)]
pub(crate) enum Convolution {
    /// one-dimensional taps, `rev[k] = w(reach - k)`
    Stencil {
        rev: Vec<f64>,
        reach: usize,
    },
    Fourier {
        hat: Vec<C64>,
    },
}

impl Convolution {
    pub fn new(w: &[f64], grid: &Grid, fft: &GridFft) -> Self {
        let n = grid.cells;
        if grid.dim == 1 {
            let taps: Vec<(i64, f64)> = w
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= 1e-16)
                .map(|(k, &v)| {
                    let o = if k <= n / 2 {
                        k as i64
                    } else {
                        k as i64 - n as i64
                    };
                    (o, v)
                })
                .collect();
            let reach = taps
                .iter()
                .map(|t| t.0.unsigned_abs() as usize)
                .max()
                .unwrap_or(0);
            if 2 * reach < n / 4 {
                let mut rev = vec![0.0; 2 * reach + 1];
                for (o, v) in taps {
                    rev[(reach as i64 - o) as usize] = v;
                }
                return Convolution::Stencil { rev, reach };
            }
        }
        Convolution::Fourier {
            hat: transform(w, fft),
        }
    }

    /// `field ← w * field`.
    pub fn apply(&self, field: &mut [f64], work: &mut Workspace, fft: &GridFft) {
        match self {
            Convolution::Stencil { rev, reach } => {
                let n = field.len();
                let r = *reach;
                let ext = &mut work.real;
                ext.clear();
                ext.extend_from_slice(&field[n - r..]);
                ext.extend_from_slice(field);
                ext.extend_from_slice(&field[..r]);
                field.fill(0.0);
                // tap-major so the inner loop vectorizes
                for (k, &wk) in rev.iter().enumerate() {
                    for (o, e) in field.iter_mut().zip(&ext[k..k + n]) {
                        *o += wk * e;
                    }
                }
            }
            Convolution::Fourier { hat } => {
                let buf = &mut work.complex;
                buf.clear();
                buf.extend(field.iter().map(|&v| C64::new(v, 0.0)));
                fft.forward(buf, &mut work.scratch);
                for (a, b) in buf.iter_mut().zip(hat) {
                    *a *= *b;
                }
                fft.inverse(buf, &mut work.scratch);
                for (o, c) in field.iter_mut().zip(buf.iter()) {
                    *o = c.re;
                }
            }
        }
    }
}

pub(crate) fn transform(w: &[f64], fft: &GridFft) -> Vec<C64> {
    let mut hat: Vec<C64> = w.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft.forward(&mut hat, &mut vec![]);
    hat
}

#[derive(Default)]
pub(crate) struct Workspace {
    pub real: Vec<f64>,
    pub complex: Vec<C64>,
    pub scratch: Vec<C64>,
}
