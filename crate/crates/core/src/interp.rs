//! Piecewise Chebyshev interpolation on uniform panels.

use std::f64::consts::PI;

/// Piecewise Chebyshev interpolant of a smooth function on `[lo, hi]`,
/// built from values at Chebyshev–Gauss nodes of each panel.
#[derive(Debug, Clone)]
pub struct ChebyshevTable {
    lo: f64,
    width: f64,
    degree: usize,
    // panel-major coefficient storage, `degree + 1` per panel
    coeffs: Vec<f64>,
}

impl ChebyshevTable {
    pub fn build<F: FnMut(f64) -> f64>(
        mut f: F,
        lo: f64,
        hi: f64,
        panels: usize,
        degree: usize,
    ) -> Self {
        let result: Result<Self, std::convert::Infallible> =
            Self::try_build(|x| Ok(f(x)), lo, hi, panels, degree);
        match result {
            Ok(t) => t,
            Err(e) => match e {},
        }
    }

    pub fn try_build<E, F: FnMut(f64) -> Result<f64, E>>(
        mut f: F,
        lo: f64,
        hi: f64,
        panels: usize,
        degree: usize,
    ) -> Result<Self, E> {
        assert!(hi > lo && panels > 0);
        let n = degree + 1;
        let width = (hi - lo) / panels as f64;
        let mut coeffs = Vec::with_capacity(panels * n);
        let mut values = vec![0.0; n];
        for p in 0..panels {
            let a = lo + p as f64 * width;
            for (j, v) in values.iter_mut().enumerate() {
                let node = (PI * (j as f64 + 0.5) / n as f64).cos();
                *v = f(a + 0.5 * width * (node + 1.0))?;
            }
            for k in 0..n {
                let mut s = 0.0;
                for (j, v) in values.iter().enumerate() {
                    s += v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
                }
                coeffs.push(2.0 * s / n as f64);
            }
        }
        Ok(ChebyshevTable {
            lo,
            width,
            degree,
            coeffs,
        })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.panels() as f64
    }

    fn panels(&self) -> usize {
        self.coeffs.len() / (self.degree + 1)
    }

    /// Evaluates the interpolant; arguments outside the range are clamped to
    /// the nearest panel (extrapolation by that panel's polynomial).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree + 1;
        let pos = (x - self.lo) / self.width;
        let p = (pos.floor().max(0.0) as usize).min(self.panels() - 1);
        let local = 2.0 * (pos - p as f64) - 1.0;
        let c = &self.coeffs[p * n..(p + 1) * n];
        // Clenshaw recurrence
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &ck in c[1..].iter().rev() {
            let b0 = 2.0 * local * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        local * b1 - b2 + 0.5 * c[0]
    }
}
