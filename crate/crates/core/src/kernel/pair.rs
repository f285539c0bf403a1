use std::cell::Cell;

use crate::fftgrid::{GridFft, C64 as Complex};

use super::{riesz_cell_average, CorrelationKernel, GreenProfile};
use crate::error::{Error, Result};
use crate::quad::{integrate_points, Tolerance};

#[derive(Debug, Clone, Copy)]
pub struct PairOptions {
    /// relative tolerance of the nested quadrature (one dimension)
    pub tol: f64,
    /// cells per side of the square grid (two dimensions)
    pub grid: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            tol: 1e-8,
            grid: 128,
        }
    }
}

/// `∫∫_{B(0,R)²} G_{t-s}(x₁-y₁) G_{t-s}(x₂-y₂) f(y₁, y₂) dy₁ dy₂`.
///
/// One dimension uses nested adaptive quadrature; two dimensions a
/// cell-centred grid (FFT convolution for Riesz kernels).
#[allow(clippy::too_many_arguments)]
pub fn pair_correlation_integral(
    profile: &GreenProfile,
    ck: &CorrelationKernel,
    t: f64,
    s: f64,
    x1: &[f64],
    x2: &[f64],
    radius: f64,
    opts: PairOptions,
) -> Result<f64> {
    let p = profile.params();
    ck.validate(&p)?;
    if !(s >= 0.0 && s < t) {
        return Err(Error::domain(format!(
            "need 0 ≤ s < t, got s = {s}, t = {t}"
        )));
    }
    if !(radius > 0.0) || t > (radius / 2.0).powf(p.alpha) {
        return Err(Error::domain(format!(
            "need t ≤ (R/2)^α = {}, got t = {t}",
            (radius / 2.0).powf(p.alpha)
        )));
    }
    for x in [x1, x2] {
        if x.len() != p.d || x.iter().map(|v| v * v).sum::<f64>() > radius * radius {
            return Err(Error::domain("x1 and x2 must be points of B(0, R)"));
        }
    }
    let tau = t - s;
    match p.d {
        1 => nested_1d(profile, ck, tau, x1[0], x2[0], radius, opts.tol),
        2 => grid_2d(profile, ck, tau, x1, x2, radius, opts.grid.max(8)),
        d => Err(Error::domain(format!(
            "pair integrals are implemented for d ≤ 2, got d = {d}"
        ))),
    }
}

fn breakpoints(centres: &[f64], width: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &c in centres {
        for m in [-3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0] {
            let y = c + m * width;
            if y > lo && y < hi {
                pts.push(y);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn nested_1d(
    profile: &GreenProfile,
    ck: &CorrelationKernel,
    tau: f64,
    x1: f64,
    x2: f64,
    radius: f64,
    rel: f64,
) -> Result<f64> {
    let p = profile.params();
    let a = p.scale(tau);
    let g = |r: f64| profile.density(tau, r.abs());
    let failed: Cell<Option<Error>> = Cell::new(None);
    let inner_tol = Tolerance::new(1e-14, rel * 0.1);
    let inner = |y1: f64| -> f64 {
        let res = match ck {
            CorrelationKernel::Riesz { omega } => {
                // Δ = v^q removes |Δ|^{-ω}: |Δ|^{-ω} dΔ = q dv
                let q = 1.0 / (1.0 - omega);
                let side = |sign: f64, len: f64| -> Result<f64> {
                    if len <= 0.0 {
                        return Ok(0.0);
                    }
                    let dists: Vec<f64> = breakpoints(&[(x2 - y1) * sign], a, 0.0, len)
                        .into_iter()
                        .map(|d| d.powf(1.0 / q))
                        .collect();
                    let f = |v: f64| q * g(x2 - y1 - sign * v.powf(q));
                    Ok(integrate_points(f, &dists, inner_tol)?.value)
                };
                side(1.0, radius - y1).and_then(|r| Ok(r + side(-1.0, y1 + radius)?))
            }
            CorrelationKernel::Tabulated { f, .. } => {
                let pts = breakpoints(&[x2, y1], a, -radius, radius);
                let h = |y2: f64| g(x2 - y2) * f(&[y1], &[y2]);
                integrate_points(h, &pts, inner_tol).map(|e| e.value)
            }
        };
        match res {
            Ok(v) => v,
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        }
    };
    let pts = breakpoints(&[x1, x2], a, -radius, radius);
    let outer = |y1: f64| g(x1 - y1) * inner(y1);
    let value = integrate_points(outer, &pts, Tolerance::new(1e-14, rel))?.value;
    if failed.take().is_some() {
        return Err(Error::Quadrature {
            value,
            error: f64::NAN,
            evaluations: 0,
        });
    }
    Ok(value)
}

fn grid_2d(
    profile: &GreenProfile,
    ck: &CorrelationKernel,
    tau: f64,
    x1: &[f64],
    x2: &[f64],
    radius: f64,
    n: usize,
) -> Result<f64> {
    let h = 2.0 * radius / n as f64;
    let centre = |i: usize| -radius + h * (i as f64 + 0.5);
    // disc of the same area as one cell, for the cell holding the source
    let near_mass = profile.ball_mass(tau, h / std::f64::consts::PI.sqrt());
    let weights = |x: &[f64]| -> Vec<f64> {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (yi, yj) = (centre(i), centre(j));
                if yi * yi + yj * yj > radius * radius {
                    continue;
                }
                let (dx, dy) = (x[0] - yi, x[1] - yj);
                w[i * n + j] = if dx.abs() < h / 2.0 && dy.abs() < h / 2.0 {
                    near_mass
                } else {
                    profile.density(tau, (dx * dx + dy * dy).sqrt()) * h * h
                };
            }
        }
        w
    };
    let w1 = weights(x1);
    let w2 = weights(x2);
    match ck {
        CorrelationKernel::Riesz { omega } => {
            let m = 2 * n;
            let diag = riesz_cell_average(*omega, h, 2);
            let mut kern = vec![Complex::new(0.0, 0.0); m * m];
            for i in 0..m {
                for j in 0..m {
                    let di = if i < n { i } else { m - i } as f64;
                    let dj = if j < n { j } else { m - j } as f64;
                    let r = h * (di * di + dj * dj).sqrt();
                    kern[i * m + j].re = if r == 0.0 { diag } else { r.powf(-omega) };
                }
            }
            let mut v = vec![Complex::new(0.0, 0.0); m * m];
            for i in 0..n {
                for j in 0..n {
                    v[i * m + j].re = w2[i * n + j];
                }
            }
            let fft = GridFft::new(m, 2);
            let mut scratch = vec![];
            fft.forward(&mut kern, &mut scratch);
            fft.forward(&mut v, &mut scratch);
            for (a, b) in v.iter_mut().zip(&kern) {
                *a *= *b;
            }
            fft.inverse(&mut v, &mut scratch);
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    total += w1[i * n + j] * v[i * m + j].re;
                }
            }
            Ok(total)
        }
        CorrelationKernel::Tabulated { f, .. } => {
            let pts: Vec<(usize, [f64; 2])> = (0..n * n)
                .filter(|&k| w1[k] != 0.0 || w2[k] != 0.0)
                .map(|k| (k, [centre(k / n), centre(k % n)]))
                .collect();
            let mut total = 0.0;
            for &(k1, y1) in &pts {
                if w1[k1] == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for &(k2, y2) in &pts {
                    if w2[k2] != 0.0 {
                        row += f(&y1, &y2) * w2[k2];
                    }
                }
                total += w1[k1] * row;
            }
            Ok(total)
        }
    }
}
