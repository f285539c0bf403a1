use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Grid, NoiseSpec};
use crate::error::{Error, Result};
use crate::kernel::{riesz_cell_average, CorrelationKernel};

/// Gaussian space-time increments `ζ_j = W(cell_j × [t, t+dt])`, with
/// covariance `dt h^d I` (white) or `dt h^{2d} f(x_j, x_k)` (colored).
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    kind: Kind,
    sites: usize,
    diagonal: Option<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    White {
        scale: f64,
    },
    /// packed rows of the lower Cholesky factor
    Colored {
        lower: Vec<f64>,
    },
}

impl NoiseSampler {
    pub fn new(grid: &Grid, noise: &NoiseSpec, dt: f64) -> Result<Self> {
        let sites = grid.sites();
        let hd = grid.cell_volume();
        match noise {
            NoiseSpec::White => Ok(NoiseSampler {
                kind: Kind::White {
                    scale: (dt * hd).sqrt(),
                },
                sites,
                diagonal: None,
            }),
            NoiseSpec::Colored(ck) => {
                let (cov, diagonal) = colored_covariance(grid, ck, dt)?;
                let chol = cov.cholesky().ok_or_else(|| {
                    Error::Covariance(format!(
                        "the {sites}×{sites} noise covariance is not positive definite"
                    ))
                })?;
                let l = chol.l();
                let mut lower = Vec::with_capacity(sites * (sites + 1) / 2);
                for i in 0..sites {
                    for j in 0..=i {
                        lower.push(l[(i, j)]);
                    }
                }
                Ok(NoiseSampler {
                    kind: Kind::Colored { lower },
                    sites,
                    diagonal,
                })
            }
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// The regularized diagonal `f(x, x)` of a Riesz covariance.
    pub fn diagonal_regularization(&self) -> Option<f64> {
        self.diagonal
    }

    /// Draws one increment field into `out`; `z` is scratch of the same length.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        match &self.kind {
            Kind::White { scale } => {
                for o in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = scale * g;
                }
            }
            Kind::Colored { lower } => {
                for v in z.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let mut start = 0;
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &lower[start..start + i + 1];
                    *o = row.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                    start += i + 1;
                }
            }
        }
    }
}

/// The covariance the sampler targets, with its regularized diagonal.
pub(crate) fn colored_covariance(
    grid: &Grid,
    ck: &CorrelationKernel,
    dt: f64,
) -> Result<(DMatrix<f64>, Option<f64>)> {
    let n = grid.sites();
    let h = grid.spacing();
    let scale = dt * grid.cell_volume().powi(2);
    let coords: Vec<Vec<f64>> = (0..n).map(|k| grid.coord(k)).collect();
    let diagonal = match ck {
        CorrelationKernel::Riesz { omega } => Some(riesz_cell_average(*omega, h, grid.dim)),
        CorrelationKernel::Tabulated { .. } => None,
    };
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = if i == j {
                diagonal.unwrap_or_else(|| ck.eval(&coords[i], &coords[i]))
            } else {
                let a = ck.eval(&coords[i], &coords[j]);
                let b = ck.eval(&coords[j], &coords[i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                    return Err(Error::Covariance(format!(
                        "correlation is not symmetric at sites {i}, {j}"
                    )));
                }
                a
            };
            if !v.is_finite() {
                return Err(Error::Covariance(format!(
                    "correlation is not finite at sites {i}, {j}"
                )));
            }
            m[(i, j)] = scale * v;
            m[(j, i)] = scale * v;
        }
    }
    Ok((m, diagonal))
}

impl NoiseSampler {
    /// Target covariance of [`sample`](Self::sample).
    pub fn target_covariance(grid: &Grid, noise: &NoiseSpec, dt: f64) -> Result<DMatrix<f64>> {
        match noise {
            NoiseSpec::White => {
                Ok(DMatrix::identity(grid.sites(), grid.sites()) * (dt * grid.cell_volume()))
            }
            NoiseSpec::Colored(ck) => Ok(colored_covariance(grid, ck, dt)?.0),
        }
    }
}
