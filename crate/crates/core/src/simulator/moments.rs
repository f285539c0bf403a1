use std::io::Write;

use serde::Serialize;

use super::{FieldState, Grid};
use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Mean and standard error, summed in the given order. Any infinite or NaN
/// sample makes both infinite.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mut s = Compensated::default();
    xs.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let mut q = Compensated::default();
    xs.iter().for_each(|&v| q.add((v - mean) * (v - mean)));
    let var = q.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Monte-Carlo estimates of `E|u_t(x*)|^p` and of the mean at a probe site.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSeries {
    pub probe: Vec<f64>,
    pub order: f64,
    pub times: Vec<f64>,
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    pub mean: Vec<f64>,
    pub mean_stderr: Vec<f64>,
    pub n_paths: usize,
    pub exploded_at: Option<f64>,
}

impl MomentSeries {
    /// `values[path][record]`; exploded paths carry `+∞` from their
    /// explosion on.
    pub(crate) fn from_paths(
        probe: Vec<f64>,
        order: f64,
        times: Vec<f64>,
        values: &[Vec<f64>],
        exploded_at: Option<f64>,
    ) -> Self {
        let mut ms = MomentSeries {
            probe,
            order,
            estimates: Vec::with_capacity(times.len()),
            stderr: Vec::with_capacity(times.len()),
            mean: Vec::with_capacity(times.len()),
            mean_stderr: Vec::with_capacity(times.len()),
            times,
            n_paths: values.len(),
            exploded_at,
        };
        let mut col = Vec::with_capacity(values.len());
        for r in 0..ms.times.len() {
            col.clear();
            col.extend(values.iter().map(|v| v[r]));
            let (m, se) = mean_stderr(&col);
            ms.mean.push(m);
            ms.mean_stderr.push(se);
            col.iter_mut().for_each(|v| *v = v.abs().powf(order));
            let (m, se) = mean_stderr(&col);
            ms.estimates.push(m);
            ms.stderr.push(se);
        }
        ms
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Per-path field values at the probe and the extra record points.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    pub grid: Grid,
    pub times: Vec<f64>,
    /// grid sites, probe first
    pub sites: Vec<usize>,
    /// `values[path][record][point]`
    pub values: Vec<Vec<Vec<f64>>>,
}

impl PathSamples {
    fn point(&self, x: &[f64]) -> Result<usize> {
        let site = self.grid.site_of(x)?;
        self.sites.iter().position(|&s| s == site).ok_or_else(|| {
            Error::domain(format!(
                "point {x:?} was not recorded; add it to record_points"
            ))
        })
    }

    pub fn record_at(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

/// Across-path mean of `|u(x) u(y)|` at record `record`, with its standard
/// error.
pub fn estimate_pair_moment(
    paths: &PathSamples,
    record: usize,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, f64)> {
    if paths.values.len() < 2 {
        return Err(Error::InsufficientPaths(paths.values.len()));
    }
    if record >= paths.times.len() {
        return Err(Error::domain(format!(
            "record {record} out of range ({} records)",
            paths.times.len()
        )));
    }
    let (i, j) = (paths.point(x)?, paths.point(y)?);
    let xs: Vec<f64> = paths
        .values
        .iter()
        .map(|p| (p[record][i] * p[record][j]).abs())
        .collect();
    Ok(mean_stderr(&xs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplosionVerdict {
    pub exploded_at: Option<f64>,
    /// renewal lower-bound blow-up time; `∞` when none is predicted
    pub prediction: f64,
    pub horizon: f64,
    pub multiple: f64,
    /// `None` when the horizon ends before `multiple × prediction`
    /// without an explosion
    pub consistent: Option<bool>,
}

impl ExplosionVerdict {
    pub fn line(&self) -> String {
        match self.exploded_at {
            Some(t) => format!(
                "EXPLODED at t={t} (renewal prediction t0={}, ratio {:.3})",
                self.prediction,
                t / self.prediction
            ),
            None => format!(
                "NO EXPLOSION up to t={} (renewal prediction t0={})",
                self.horizon, self.prediction
            ),
        }
    }
}

/// Compares the first threshold crossing with a renewal prediction; an
/// infinite prediction marks a run expected to stay finite.
pub fn detect_explosion(ms: &MomentSeries, renewal_prediction: f64) -> Option<ExplosionVerdict> {
    let horizon = *ms.times.last()?;
    let multiple = 3.0;
    let bound = multiple * renewal_prediction;
    let consistent = match (ms.exploded_at, renewal_prediction.is_finite()) {
        (Some(t), true) => Some(t <= bound),
        (Some(_), false) => Some(false),
        (None, false) => Some(true),
        (None, true) if horizon >= bound => Some(false),
        (None, true) => None,
    };
    Some(ExplosionVerdict {
        exploded_at: ms.exploded_at,
        prediction: renewal_prediction,
        horizon,
        multiple,
        consistent,
    })
}

pub fn write_moments<W: Write>(out: W, ms: &MomentSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "moment", "stderr", "mean", "mean_stderr"])?;
    for r in 0..ms.times.len() {
        w.write_record([
            format!("{}", ms.times[r]),
            format!("{:e}", ms.estimates[r]),
            format!("{:e}", ms.stderr[r]),
            format!("{:e}", ms.mean[r]),
            format!("{:e}", ms.mean_stderr[r]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots<W: Write>(out: W, states: &[FieldState]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = states.first().map_or(1, |s| s.grid.dim);
    let mut header = vec!["t".to_string()];
    header.extend(["x", "y"].iter().take(dim).map(|s| s.to_string()));
    header.push("u".into());
    w.write_record(&header)?;
    for s in states {
        for (k, v) in s.values.iter().enumerate() {
            let mut row = vec![format!("{}", s.time)];
            row.extend(s.grid.coord(k).iter().map(|c| format!("{c}")));
            row.push(format!("{v:e}"));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
