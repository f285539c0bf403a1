use serde::Serialize;

use super::RenewalProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct VolterraOptions {
    /// `h` above this counts as blown up
    pub threshold: f64,
    /// number of step halvings used for extrapolation (at least 1)
    pub refinements: usize,
    /// largest relative change between the two finest levels
    pub tolerance: f64,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        VolterraOptions {
            threshold: 1e12,
            refinements: 2,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub step: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupEstimate {
    /// extrapolated blow-up time
    pub time: f64,
    /// per-level estimates, coarsest first
    pub levels: Vec<f64>,
    pub steps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VolterraSolution {
    /// trajectory at the requested step, or at the refined step when the
    /// blow-up would otherwise come within 400 steps
    pub trajectory: Trajectory,
    pub blowup: Option<BlowupEstimate>,
}

/// Product-trapezoid weights of `(t-s)^{-θ}` on a uniform grid; segment `k`
/// back from the current node contributes `left[k] f_{n-k} + right[k] f_{n-k+1}`.
struct Weights {
    theta: f64,
    scale: f64,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl Weights {
    fn new(theta: f64, tau: f64) -> Self {
        let mut w = Weights {
            theta,
            scale: tau.powf(1.0 - theta),
            left: vec![0.0],
            right: vec![0.0],
        };
        w.extend(64);
        w
    }

    fn extend(&mut self, n: usize) {
        let e = 1.0 - self.theta;
        for k in self.left.len()..=n {
            let (kf, km) = (k as f64, (k - 1) as f64);
            let i0 = self.scale * (kf.powf(e) - km.powf(e)) / e;
            let j = self.scale * (kf.powf(e + 1.0) - km.powf(e + 1.0)) / (e + 1.0);
            let i1 = kf * i0 - j;
            self.left.push(i0 - i1);
            self.right.push(i1);
        }
    }
}

/// Smallest root of `h = a + b h^{1+γ}`, or `None` past the fold.
fn implicit_step(a: f64, b: f64, gamma: f64) -> Option<f64> {
    let fold = (1.0 / (b * (1.0 + gamma))).powf(1.0 / gamma);
    if fold - a - b * fold.powf(1.0 + gamma) < 0.0 {
        return None;
    }
    // g is concave and increasing left of the fold, so Newton from `a` climbs
    // monotonically to the root
    let mut h = a;
    for _ in 0..100 {
        let g = h - a - b * h.powf(1.0 + gamma);
        let dg = 1.0 - b * (1.0 + gamma) * h.powf(gamma);
        let next = h - g / dg;
        if !(next.is_finite()) || next > fold {
            return Some(fold);
        }
        if (next - h).abs() <= 1e-15 * next {
            return Some(next);
        }
        h = next;
    }
    Some(h)
}

/// One march of `h(t) = C + D ∫_0^t h^{1+γ}(s) (t-s)^{-θ} ds` (θ < 1, any sign).
fn march(
    c: f64,
    d: f64,
    gamma: f64,
    theta: f64,
    tau: f64,
    t_max: f64,
    threshold: f64,
) -> (Trajectory, Option<f64>) {
    let n_max = (t_max / tau).ceil() as usize;
    let mut w = Weights::new(theta, tau);
    let mut h = vec![];
    let mut f = vec![];
    h.push(c);
    f.push(c.powf(1.0 + gamma));
    let remaining = |h: &[f64], f: &[f64]| -> f64 {
        // local ODE h' ≈ D_eff h^{1+γ} from the last two nodes
        let m = h.len() - 1;
        if m == 0 {
            return 0.0;
        }
        let d_eff = (h[m] - h[m - 1]) / (tau * 0.5 * (f[m] + f[m - 1]));
        if d_eff > 0.0 {
            h[m].powf(-gamma) / (gamma * d_eff)
        } else {
            0.0
        }
    };
    let mut blow = None;
    for n in 1..=n_max {
        if n >= w.left.len() {
            w.extend(2 * n);
        }
        let mut hist = 0.0;
        for k in 1..=n {
            hist += w.left[k] * f[n - k];
            if k >= 2 {
                hist += w.right[k] * f[n - k + 1];
            }
        }
        match implicit_step(c + d * hist, d * w.right[1], gamma) {
            Some(v) if v <= threshold => {
                h.push(v);
                f.push(v.powf(1.0 + gamma));
            }
            Some(v) => {
                h.push(v);
                f.push(v.powf(1.0 + gamma));
                blow = Some(n as f64 * tau + remaining(&h, &f));
                break;
            }
            None => {
                let last = (n - 1) as f64 * tau;
                blow = Some((last + remaining(&h, &f)).min(n as f64 * tau));
                break;
            }
        }
    }
    let times = (0..h.len()).map(|i| i as f64 * tau).collect();
    (
        Trajectory {
            step: tau,
            times,
            values: h,
        },
        blow,
    )
}

const MIN_STEPS: f64 = 400.0;

fn check_step(step: f64, t_max: f64) -> Result<()> {
    if !(step > 0.0) || !(t_max > step) || !t_max.is_finite() {
        return Err(Error::domain(format!(
            "need 0 < step < t_max, got step = {step}, t_max = {t_max}"
        )));
    }
    Ok(())
}

/// Solves the equality case at `step`, `step/2`, …, and extrapolates the
/// blow-up time.
pub fn volterra_solve_with(
    rp: &RenewalProblem,
    step: f64,
    t_max: f64,
    opts: VolterraOptions,
) -> Result<VolterraSolution> {
    rp.validate()?;
    check_step(step, t_max)?;
    if rp.theta >= 1.0 {
        return Err(Error::domain(format!(
            "product integration needs θ < 1, got {}",
            rp.theta
        )));
    }
    solve_levels(rp.c, rp.d, rp.gamma, rp.theta, step, t_max, opts)
}

fn solve_levels(
    c: f64,
    d: f64,
    gamma: f64,
    theta: f64,
    step: f64,
    t_max: f64,
    opts: VolterraOptions,
) -> Result<VolterraSolution> {
    let levels = opts.refinements.max(1) + 1;
    let (mut trajectory, first) = march(c, d, gamma, theta, step, t_max, opts.threshold);
    // a blow-up within a few hundred steps is not resolved: refine until at
    // least MIN_STEPS steps precede it
    let mut base = step;
    let mut coarsest = first;
    for _ in 0..40 {
        match coarsest {
            Some(tb) if tb < MIN_STEPS * base => {
                base = (tb / MIN_STEPS).min(base / 2.0).max(base / 64.0);
                let (tr, tb) = march(c, d, gamma, theta, base, t_max, opts.threshold);
                trajectory = tr;
                coarsest = tb;
            }
            _ => break,
        }
    }
    let mut times = vec![coarsest];
    let mut steps = vec![base];
    for l in 1..levels {
        let tau = base / 2f64.powi(l as i32);
        steps.push(tau);
        times.push(march(c, d, gamma, theta, tau, t_max, opts.threshold).1);
    }
    let found: Vec<f64> = times.iter().flatten().copied().collect();
    if found.len() < times.len() {
        // blow-up too close to the horizon to resolve on every level
        return Ok(VolterraSolution {
            trajectory,
            blowup: times.last().copied().flatten().map(|t| BlowupEstimate {
                time: t,
                levels: found,
                steps,
            }),
        });
    }
    let n = found.len();
    let (coarse, fine) = (found[n - 2], found[n - 1]);
    if (coarse - fine).abs() > opts.tolerance * fine {
        return Err(Error::StepNonconvergence { coarse, fine });
    }
    // observed order from three levels when available, else first order
    let mut order = 1.0;
    if n >= 3 {
        let r = (found[n - 3] - coarse) / (coarse - fine);
        if r.is_finite() && r > 1.5 {
            order = r.log2().min(3.0);
        }
    }
    let time = fine + (fine - coarse) / (2f64.powf(order) - 1.0);
    Ok(VolterraSolution {
        trajectory,
        blowup: Some(BlowupEstimate {
            time,
            levels: found,
            steps,
        }),
    })
}

/// [`volterra_solve_with`] with default options.
pub fn volterra_solve(rp: &RenewalProblem, step: f64, t_max: f64) -> Result<VolterraSolution> {
    volterra_solve_with(rp, step, t_max, VolterraOptions::default())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceVerdict {
    /// blow-up time at the finer resolution
    pub time: f64,
    pub coarse: f64,
}

/// Solves `h(t) = C + D ∫_0^t h^{1+γ}(s) (t-s)^{θ} ds` (growing kernel, θ > 0)
/// at two resolutions and reports the blow-up.
pub fn laplace_renewal_check(
    rp: &RenewalProblem,
    step: f64,
    horizon: f64,
) -> Result<LaplaceVerdict> {
    rp.validate()?;
    check_step(step, horizon)?;
    let opts = VolterraOptions {
        refinements: 1,
        ..Default::default()
    };
    let sol = solve_levels(rp.c, rp.d, rp.gamma, -rp.theta, step, horizon, opts)?;
    match sol.blowup {
        Some(b) if b.levels.len() == 2 => Ok(LaplaceVerdict {
            time: b.levels[1],
            coarse: b.levels[0],
        }),
        _ => Err(Error::HorizonExhausted { horizon }),
    }
}
